//! Beamformed SINR rates, the joint exhaustive oracle and the random baseline.

use rand::Rng;

use super::links::LinkTable;
use crate::error::{Error, Result};
use crate::par::Execution;

#[derive(Debug, Clone, PartialEq)]
pub struct BeamRates {
    /// Per-UE rate, bits/s/Hz; zero for inactive or unassociated UEs.
    pub per_ue: Vec<f64>,
    /// Per-BS sum over its associated UEs.
    pub per_bs: Vec<f64>,
}

impl BeamRates {
    pub fn sum(&self) -> f64 {
        sum_rate(&self.per_ue)
    }
}

pub fn sum_rate(rates: &[f64]) -> f64 {
    rates.iter().sum()
}

fn check_actions(links: &LinkTable, actions: &[usize], codebook_size: usize) -> Result<()> {
    if actions.len() != links.n_bs() {
        return Err(Error::DimensionMismatch {
            expected: links.n_bs(),
            actual: actions.len(),
        });
    }
    if let Some(&a) = actions.iter().find(|&&a| a >= codebook_size) {
        return Err(Error::ActionOutOfRange {
            action: a,
            size: codebook_size,
        });
    }
    Ok(())
}

/// Rate of UE `k` served by `serving` when every BS `i` transmits codeword `actions[i]`.
fn ue_rate(links: &LinkTable, k: usize, serving: usize, actions: &[usize], noise_w: f64) -> f64 {
    let mut signal = 0.0;
    let mut interference = 0.0;
    for (i, &a) in actions.iter().enumerate() {
        let p = links.get(i, k).map_or(0.0, |l| l.beam_power[a]);
        if i == serving {
            signal = p;
        } else {
            interference += p;
        }
    }
    (1.0 + signal / (noise_w + interference)).log2()
}

fn rates_unchecked(links: &LinkTable, association: &[Option<usize>], actions: &[usize], noise_w: f64) -> BeamRates {
    let mut per_ue = vec![0.0; links.n_ue()];
    let mut per_bs = vec![0.0; links.n_bs()];
    for (k, serving) in association.iter().enumerate() {
        if let Some(j) = *serving {
            let r = ue_rate(links, k, j, actions, noise_w);
            per_ue[k] = r;
            per_bs[j] += r;
        }
    }
    BeamRates { per_ue, per_bs }
}

pub fn beamformed_rates(
    links: &LinkTable,
    association: &[Option<usize>],
    actions: &[usize],
    codebook_size: usize,
    noise_w: f64,
) -> Result<BeamRates> {
    check_actions(links, actions, codebook_size)?;
    if association.len() != links.n_ue() {
        return Err(Error::DimensionMismatch {
            expected: links.n_ue(),
            actual: association.len(),
        });
    }
    Ok(rates_unchecked(links, association, actions, noise_w))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveResult {
    pub actions: Vec<usize>,
    pub sum_rate: f64,
    pub evaluations: usize,
}

/// Decodes joint index `t` into a per-BS tuple, BS 0 most significant, so
/// increasing `t` walks the tuples in lexicographic order.
fn decode_joint(mut t: usize, n_bs: usize, size: usize) -> Vec<usize> {
    let mut out = vec![0; n_bs];
    for slot in out.iter_mut().rev() {
        *slot = t % size;
        t /= size;
    }
    out
}

/// Perfect-CSI search over all `size^J` joint codeword assignments.
/// Ties go to the lexicographically smallest tuple.
pub fn exhaustive_best(
    links: &LinkTable,
    association: &[Option<usize>],
    codebook_size: usize,
    noise_w: f64,
    exec: Execution,
) -> ExhaustiveResult {
    let n_bs = links.n_bs();
    let total = codebook_size.pow(n_bs as u32);
    let scores = exec.map_range(total, |t| {
        let actions = decode_joint(t, n_bs, codebook_size);
        rates_unchecked(links, association, &actions, noise_w).sum()
    });
    let mut best = 0;
    for (t, &s) in scores.iter().enumerate() {
        if s > scores[best] {
            best = t;
        }
    }
    ExhaustiveResult {
        actions: decode_joint(best, n_bs, codebook_size),
        sum_rate: scores[best],
        evaluations: total,
    }
}

/// Independent uniform codeword per BS.
pub fn random_policy<R: Rng + ?Sized>(rng: &mut R, n_bs: usize, codebook_size: usize) -> Vec<usize> {
    (0..n_bs).map(|_| rng.random_range(0..codebook_size)).collect()
}

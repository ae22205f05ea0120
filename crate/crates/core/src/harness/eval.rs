//! Greedy evaluation of trained agents and the policy-free baselines, over
//! fresh episodes drawn from the evaluation streams of the master seed.

use std::path::Path;

use rand::seq::index;
use serde::{Deserialize, Serialize};

use super::checkpoint::{checkpoint_path, Checkpoint};
use super::config::RunConfig;
use crate::ddqn::{argmax, AgentBrain, Mlp, StateEncoder};
use crate::environment::random_policy;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::seed::SeedTree;

/// A frozen greedy policy: the online network and the encoder it was trained with.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyModel {
    pub net: Mlp,
    pub encoder: StateEncoder,
}

impl PolicyModel {
    pub fn from_brain(brain: &AgentBrain, encoder: StateEncoder) -> Self {
        Self {
            net: brain.online.clone(),
            encoder,
        }
    }

    pub fn load_all(dir: &Path, n_bs: usize) -> Result<Vec<PolicyModel>> {
        (0..n_bs)
            .map(|j| {
                let c = Checkpoint::load(&checkpoint_path(dir, j))?;
                Ok(PolicyModel {
                    net: c.online,
                    encoder: c.encoder,
                })
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub mean: f64,
    pub std: f64,
}

impl Stat {
    pub fn of(xs: &[f64]) -> Self {
        let n = xs.len() as f64;
        if xs.is_empty() {
            return Stat { mean: 0.0, std: 0.0 };
        }
        let mean = xs.iter().sum::<f64>() / n;
        let var = if xs.len() > 1 {
            xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        Stat { mean, std: var.sqrt() }
    }
}

/// Mean ± std over episodes of the per-episode mean sum-rate (bits/s/Hz).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub episodes: usize,
    pub num_bs: usize,
    pub ues_test: usize,
    /// UE slots of the evaluated networks, when there are any.
    pub ues_model: Option<usize>,
    pub ddqn: Option<Stat>,
    pub exhaustive: Stat,
    pub random: Stat,
    pub ratio_ddqn_exhaustive: Option<f64>,
    pub ratio_random_exhaustive: f64,
    pub ratio_ddqn_random: Option<f64>,
}

#[derive(Debug, Clone, Copy)]
struct EpisodeMeans {
    ddqn: f64,
    exhaustive: f64,
    random: f64,
}

/// UE ids fed to a network with `slots` inputs: all of them when they fit,
/// otherwise a uniform random subset (in id order).
fn select_slots(n_ues: usize, slots: usize, seeds: &SeedTree, key: &[u64]) -> Vec<usize> {
    if n_ues <= slots {
        return (0..n_ues).collect();
    }
    let mut ids = index::sample(&mut seeds.rng("select", key), n_ues, slots).into_vec();
    ids.sort_unstable();
    ids
}

fn run_episode(config: &RunConfig, models: Option<&[PolicyModel]>, seeds: &SeedTree, episode: usize) -> Result<EpisodeMeans> {
    let ep = episode as u64;
    let mut env = config.build_environment();
    let n_actions = env.codebook.len();
    env.reset(&mut seeds.rng("mobility", &[ep]));
    let mut totals = [0.0f64; 3];
    let mut step = 0usize;
    while !env.advance() && step < config.episode_cap {
        step += 1;
        let t = step as u64;
        let snapshot = env.observe(&seeds.child("channel", &[ep, t]), Execution::Sequential)?;
        if let Some(models) = models {
            let actions = models
                .iter()
                .enumerate()
                .map(|(j, m)| {
                    let ids = select_slots(env.n_ues, m.encoder.slots, seeds, &[ep, t, j as u64]);
                    let x = m.encoder.encode(j, env.ues(), snapshot.association(), &ids)?;
                    Ok(argmax(&m.net.forward(&x)?))
                })
                .collect::<Result<Vec<_>>>()?;
            totals[0] += env.rates(&snapshot, &actions)?.sum();
        }
        totals[1] += env.exhaustive(&snapshot, Execution::Sequential).sum_rate;
        let random_actions = random_policy(&mut seeds.rng("random", &[ep, t]), env.n_bs(), n_actions);
        totals[2] += env.rates(&snapshot, &random_actions)?.sum();
    }
    let n = step.max(1) as f64;
    Ok(EpisodeMeans {
        ddqn: totals[0] / n,
        exhaustive: totals[1] / n,
        random: totals[2] / n,
    })
}

fn summarize(config: &RunConfig, models: Option<&[PolicyModel]>, exec: Execution) -> Result<EvalSummary> {
    config.validate()?;
    if let Some(models) = models {
        if models.len() != config.num_bs {
            return Err(Error::DimensionMismatch {
                expected: config.num_bs,
                actual: models.len(),
            });
        }
        for m in models {
            if m.net.input_dim() != m.encoder.input_dim() || m.net.output_dim() != config.codebook_size {
                return Err(Error::config("checkpoint", "network shape does not match its encoder or codebook"));
            }
            if m.encoder.memory_len != config.memory_len {
                return Err(Error::config("memory_len", "differs from the checkpoint"));
            }
        }
    }
    let seeds = SeedTree::new(config.seed).child("eval", &[]);
    let per_episode = exec.map_range(config.eval_episodes, |e| run_episode(config, models, &seeds, e));
    let per_episode = per_episode.into_iter().collect::<Result<Vec<_>>>()?;
    let col = |f: fn(&EpisodeMeans) -> f64| per_episode.iter().map(f).collect::<Vec<_>>();
    let exhaustive = Stat::of(&col(|m| m.exhaustive));
    let random = Stat::of(&col(|m| m.random));
    let ddqn = models.map(|_| Stat::of(&col(|m| m.ddqn)));
    let ratio = |num: f64, den: f64| if den > 0.0 { num / den } else { 0.0 };
    Ok(EvalSummary {
        episodes: config.eval_episodes,
        num_bs: config.num_bs,
        ues_test: config.num_ues,
        ues_model: models.and_then(|m| m.first()).map(|m| m.encoder.slots),
        ratio_ddqn_exhaustive: ddqn.map(|d| ratio(d.mean, exhaustive.mean)),
        ratio_random_exhaustive: ratio(random.mean, exhaustive.mean),
        ratio_ddqn_random: ddqn.map(|d| ratio(d.mean, random.mean)),
        ddqn,
        exhaustive,
        random,
    })
}

/// Greedy (ε = 0) rollout of `models` alongside both baselines.
pub fn evaluate(config: &RunConfig, models: &[PolicyModel], exec: Execution) -> Result<EvalSummary> {
    summarize(config, Some(models), exec)
}

/// Exhaustive and random baselines only.
pub fn baseline(config: &RunConfig, exec: Execution) -> Result<EvalSummary> {
    summarize(config, None, exec)
}

pub fn write_summary(path: &Path, summary: &EvalSummary) -> Result<()> {
    let text = serde_json::to_string_pretty(summary)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

use serde::{Deserialize, Serialize};

use super::codebook::Codebook;
use super::mobility::UserEquipment;
use crate::channel::{channel_matrix, draw_link, ArrayGeometry, LinkRealization, PropagationParams};
use crate::error::Result;
use crate::linalg::ComplexMatrix;
use crate::par::Execution;
use crate::seed::SeedTree;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaseStation {
    pub id: usize,
    pub position: [f64; 2],
    pub tx_power_w: f64,
    pub array: ArrayGeometry,
}

impl BaseStation {
    /// Horizontal distance and azimuth (from the array broadside, the +x axis) to `point`.
    pub fn geometry_to(&self, point: [f64; 2]) -> (f64, f64) {
        let dx = point[0] - self.position[0];
        let dy = point[1] - self.position[1];
        (dx.hypot(dy), dy.atan2(dx))
    }
}

/// One realized BS→UE link together with the received powers it implies.
#[derive(Debug, Clone, PartialEq)]
pub struct Link {
    pub realization: LinkRealization,
    pub channel: ComplexMatrix,
    /// Omni pilot power at the UE, `P·|α|²·v/p²`, watts.
    pub pilot_power: f64,
    /// Received power `P·‖H·V_q‖²` for every codeword `q`, watts.
    pub beam_power: Vec<f64>,
}

/// Dense `J × K` table of links; inactive UEs have no entries.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkTable {
    n_bs: usize,
    n_ue: usize,
    links: Vec<Option<Link>>,
}

impl LinkTable {
    pub fn new(n_bs: usize, n_ue: usize, links: Vec<Option<Link>>) -> Self {
        assert_eq!(links.len(), n_bs * n_ue);
        Self { n_bs, n_ue, links }
    }

    pub fn n_bs(&self) -> usize {
        self.n_bs
    }

    pub fn n_ue(&self) -> usize {
        self.n_ue
    }

    pub fn get(&self, bs: usize, ue: usize) -> Option<&Link> {
        self.links[bs * self.n_ue + ue].as_ref()
    }

    pub fn has_ue(&self, ue: usize) -> bool {
        (0..self.n_bs).any(|j| self.get(j, ue).is_some())
    }
}

/// Builds a link record from a realization; `beam_power` uses `‖H·V‖²`, which is the
/// scalar `|H·V·V^H·H^H|` when the UE has one antenna.
pub fn make_link(
    realization: LinkRealization,
    bs: &BaseStation,
    rx: &ArrayGeometry,
    codebook: &Codebook,
) -> Link {
    let channel = channel_matrix(&realization, &bs.array, rx);
    let beam_power = codebook
        .entries()
        .iter()
        .map(|v| bs.tx_power_w * channel.mul_vec(v).iter().map(|z| z.norm_sqr()).sum::<f64>())
        .collect();
    Link {
        pilot_power: bs.tx_power_w * realization.power_gain(),
        realization,
        channel,
        beam_power,
    }
}

/// Draws every (BS, active UE) link. Each link uses its own substream of `seeds`
/// keyed by `(bs, ue)`, so the table is identical under either execution mode.
pub fn realize_links(
    seeds: &SeedTree,
    bss: &[BaseStation],
    ues: &[UserEquipment],
    rx: &ArrayGeometry,
    params: &PropagationParams,
    codebook: &Codebook,
    exec: Execution,
) -> Result<LinkTable> {
    let n_ue = ues.len();
    let links = exec.map_range(bss.len() * n_ue, |idx| {
        let (j, k) = (idx / n_ue, idx % n_ue);
        let ue = &ues[k];
        if !ue.active {
            return Ok(None);
        }
        let bs = &bss[j];
        let (distance, bearing) = bs.geometry_to(ue.position);
        let mut rng = seeds.rng("link", &[j as u64, k as u64]);
        let realization = draw_link(&mut rng, distance, bearing, params)?;
        Ok(Some(make_link(realization, bs, rx, codebook)))
    });
    let links = links.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(LinkTable::new(bss.len(), n_ue, links))
}

/// Outcome of the omni-directional pilot sub-slot.
#[derive(Debug, Clone, PartialEq)]
pub struct OmniPhase {
    /// `pilot_powers[j][k]`, zero for inactive UEs.
    pub pilot_powers: Vec<Vec<f64>>,
    pub association: Vec<Option<usize>>,
    /// Per-UE omni rate, bits/s/Hz; zero for inactive UEs.
    pub omni_rates: Vec<f64>,
    /// Sum of omni rates over each BS's associated UEs.
    pub omni_sum: Vec<f64>,
}

/// Strongest-pilot association (ties to the lowest BS id) and omni rates.
pub fn omni_phase(links: &LinkTable, noise_w: f64) -> OmniPhase {
    let (n_bs, n_ue) = (links.n_bs(), links.n_ue());
    let pilot_powers: Vec<Vec<f64>> = (0..n_bs)
        .map(|j| (0..n_ue).map(|k| links.get(j, k).map_or(0.0, |l| l.pilot_power)).collect())
        .collect();
    let mut association = vec![None; n_ue];
    let mut omni_rates = vec![0.0; n_ue];
    let mut omni_sum = vec![0.0; n_bs];
    for k in 0..n_ue {
        if !links.has_ue(k) {
            continue;
        }
        let mut serving = 0;
        for j in 1..n_bs {
            if pilot_powers[j][k] > pilot_powers[serving][k] {
                serving = j;
            }
        }
        let total: f64 = (0..n_bs).map(|j| pilot_powers[j][k]).sum();
        let signal = pilot_powers[serving][k];
        let rate = (1.0 + signal / (noise_w + (total - signal).max(0.0))).log2();
        association[k] = Some(serving);
        omni_rates[k] = rate;
        omni_sum[serving] += rate;
    }
    OmniPhase {
        pilot_powers,
        association,
        omni_rates,
        omni_sum,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::LinkState;
    use crate::linalg::C64;

    pub(crate) fn link_with_pilot(p: f64) -> Link {
        Link {
            realization: LinkRealization {
                link_state: LinkState::Los,
                complex_gain: C64::new(1.0, 0.0),
                amplitude_path_loss: 1.0,
                shadow_factor: 1.0,
                aod_rad: 0.0,
                aoa_rad: 0.0,
            },
            channel: ComplexMatrix::zeros(1, 1),
            pilot_power: p,
            beam_power: vec![p],
        }
    }

    #[test]
    fn associates_with_strongest_pilot() {
        let t = LinkTable::new(2, 1, vec![Some(link_with_pilot(1e-9)), Some(link_with_pilot(2e-9))]);
        let o = omni_phase(&t, 1e-12);
        assert_eq!(o.association, vec![Some(1)]);
        assert_eq!(o.omni_sum[0], 0.0);
        assert!(o.omni_sum[1] > 0.0);
    }

    #[test]
    fn equal_pilots_tie_to_lowest_id() {
        let t = LinkTable::new(3, 1, vec![
            Some(link_with_pilot(1e-9)),
            Some(link_with_pilot(2e-9)),
            Some(link_with_pilot(2e-9)),
        ]);
        assert_eq!(omni_phase(&t, 1e-12).association, vec![Some(1)]);
        let t = LinkTable::new(2, 1, vec![Some(link_with_pilot(1e-9)), Some(link_with_pilot(1e-9))]);
        assert_eq!(omni_phase(&t, 1e-12).association, vec![Some(0)]);
    }

    #[test]
    fn single_bs_pilot_at_noise_gives_one_bit() {
        let noise = 4e-12;
        let t = LinkTable::new(1, 1, vec![Some(link_with_pilot(noise))]);
        let o = omni_phase(&t, noise);
        assert!((o.omni_rates[0] - 1.0).abs() < 1e-12);
        assert!((o.omni_sum[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn inactive_ue_is_unassociated() {
        let t = LinkTable::new(1, 2, vec![Some(link_with_pilot(1e-9)), None]);
        let o = omni_phase(&t, 1e-12);
        assert_eq!(o.association, vec![Some(0), None]);
        assert_eq!(o.omni_rates[1], 0.0);
    }
}

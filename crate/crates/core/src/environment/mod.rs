//! Street-mobility world: UE movement, per-step link draws, strongest-pilot
//! association and the rate model shared by every policy.

pub mod codebook;
pub mod links;
pub mod mobility;
pub mod rates;

pub use codebook::Codebook;
pub use links::{omni_phase, realize_links, BaseStation, Link, LinkTable, OmniPhase};
pub use mobility::{advance, spawn_episode, Street, StreetParams, UserEquipment};
pub use rates::{beamformed_rates, exhaustive_best, random_policy, sum_rate, BeamRates, ExhaustiveResult};

use rand::Rng;

use crate::channel::{ArrayGeometry, PropagationParams};
use crate::error::Result;
use crate::par::Execution;
use crate::seed::SeedTree;

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Everything observable at one time step.
#[derive(Debug, Clone)]
pub struct NetworkSnapshot {
    pub time_step: usize,
    pub links: LinkTable,
    pub omni: OmniPhase,
}

impl NetworkSnapshot {
    pub fn association(&self) -> &[Option<usize>] {
        &self.omni.association
    }
}

#[derive(Debug, Clone)]
pub struct Environment {
    pub bss: Vec<BaseStation>,
    pub ue_array: ArrayGeometry,
    pub codebook: Codebook,
    pub streets: StreetParams,
    pub propagation: PropagationParams,
    pub noise_w: f64,
    pub memory_len: usize,
    pub n_ues: usize,
    ues: Vec<UserEquipment>,
    time_step: usize,
}

impl Environment {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        bss: Vec<BaseStation>,
        ue_array: ArrayGeometry,
        codebook: Codebook,
        streets: StreetParams,
        propagation: PropagationParams,
        noise_w: f64,
        memory_len: usize,
        n_ues: usize,
    ) -> Self {
        Self {
            bss,
            ue_array,
            codebook,
            streets,
            propagation,
            noise_w,
            memory_len,
            n_ues,
            ues: Vec::new(),
            time_step: 0,
        }
    }

    pub fn ues(&self) -> &[UserEquipment] {
        &self.ues
    }

    pub fn n_bs(&self) -> usize {
        self.bss.len()
    }

    pub fn time_step(&self) -> usize {
        self.time_step
    }

    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        self.ues = spawn_episode(rng, &self.streets, self.n_ues, self.memory_len);
        self.time_step = 0;
    }

    /// Replaces the UE population, e.g. to script a trajectory.
    pub fn set_ues(&mut self, ues: Vec<UserEquipment>) {
        self.ues = ues;
        self.time_step = 0;
    }

    /// Advances mobility one step; `true` means every UE has left the streets.
    pub fn advance(&mut self) -> bool {
        self.time_step += 1;
        advance(&mut self.ues, &self.streets)
    }

    /// Draws this step's links, runs the omni pilot phase and appends each
    /// active UE's omni rate to its memory.
    pub fn observe(&mut self, seeds: &SeedTree, exec: Execution) -> Result<NetworkSnapshot> {
        let links = realize_links(
            seeds,
            &self.bss,
            &self.ues,
            &self.ue_array,
            &self.propagation,
            &self.codebook,
            exec,
        )?;
        let omni = omni_phase(&links, self.noise_w);
        for ue in self.ues.iter_mut().filter(|u| u.active) {
            ue.push_memory(omni.omni_rates[ue.id]);
        }
        Ok(NetworkSnapshot {
            time_step: self.time_step,
            links,
            omni,
        })
    }

    pub fn rates(&self, snapshot: &NetworkSnapshot, actions: &[usize]) -> Result<BeamRates> {
        beamformed_rates(
            &snapshot.links,
            snapshot.association(),
            actions,
            self.codebook.len(),
            self.noise_w,
        )
    }

    pub fn exhaustive(&self, snapshot: &NetworkSnapshot, exec: Execution) -> ExhaustiveResult {
        exhaustive_best(
            &snapshot.links,
            snapshot.association(),
            self.codebook.len(),
            self.noise_w,
            exec,
        )
    }
}

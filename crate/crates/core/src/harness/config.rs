use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::channel::{ArrayGeometry, PropagationParams};
use crate::ddqn::{AgentParams, RewardMode, StateEncoder};
use crate::environment::{dbm_to_watts, BaseStation, Codebook, Environment, StreetParams};
use crate::error::{Error, Result};

/// Every tunable of a run. Omitted JSON fields take the defaults below,
/// which follow the two-street scenario: 16-antenna ULAs at (5, −5) and
/// (−25, −5), single-antenna UEs, 8-step rate memories, γ = 0.95, batch 32.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub num_bs: usize,
    pub bs_positions: Vec<[f64; 2]>,
    pub num_ues: usize,
    pub n_t: usize,
    pub n_r: usize,
    /// RF chains per BS. Transmission is single-stream, so only one codeword is active.
    pub n_rf: usize,
    pub antenna_spacing_over_wavelength: f64,
    pub tx_power_dbm: f64,
    pub noise_dbm: f64,
    pub propagation: PropagationParams,
    pub streets: StreetParams,
    pub codebook_size: usize,
    pub memory_len: usize,
    pub episode_cap: usize,
    pub episodes: usize,
    pub gamma: f64,
    /// Per-BS learning rates, cycled when there are more BSs than entries.
    pub learning_rates: Vec<f64>,
    pub epsilon_max: f64,
    pub epsilon_min: f64,
    pub epsilon_decay_fraction: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub target_sync_every: u64,
    pub include_locations: bool,
    pub reward_mode: RewardMode,
    pub rate_scale: f64,
    pub position_scale: f64,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub checkpoint_every: usize,
    pub eval_episodes: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            num_bs: 2,
            bs_positions: vec![[5.0, -5.0], [-25.0, -5.0]],
            num_ues: 2,
            n_t: 16,
            n_r: 1,
            n_rf: 2,
            antenna_spacing_over_wavelength: 0.5,
            tx_power_dbm: 30.0,
            noise_dbm: -84.0,
            propagation: PropagationParams::default(),
            streets: StreetParams::default(),
            codebook_size: 8,
            memory_len: 8,
            episode_cap: 60,
            episodes: 2000,
            gamma: 0.95,
            learning_rates: vec![0.0001, 0.005],
            epsilon_max: 0.9,
            epsilon_min: 0.1,
            epsilon_decay_fraction: 0.8,
            batch_size: 32,
            replay_capacity: 10_000,
            target_sync_every: 200,
            include_locations: false,
            reward_mode: RewardMode::Text,
            rate_scale: 20.0,
            position_scale: 50.0,
            seed: 1,
            out_dir: PathBuf::from("runs/default"),
            checkpoint_every: 100,
            eval_episodes: 100,
        }
    }
}

impl RunConfig {
    pub fn from_json_str(s: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(s).map_err(|e| {
            // serde names the offending field in unknown-field and type errors
            Error::config("config", e.to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json_str(&text)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn validate(&self) -> Result<()> {
        let at_least_one = [
            ("num_bs", self.num_bs),
            ("num_ues", self.num_ues),
            ("n_t", self.n_t),
            ("n_r", self.n_r),
            ("n_rf", self.n_rf),
            ("codebook_size", self.codebook_size),
            ("memory_len", self.memory_len),
            ("episode_cap", self.episode_cap),
            ("episodes", self.episodes),
            ("batch_size", self.batch_size),
            ("replay_capacity", self.replay_capacity),
        ];
        for (field, v) in at_least_one {
            if v < 1 {
                return Err(Error::config(field, "must be at least 1"));
            }
        }
        if self.bs_positions.len() < self.num_bs {
            return Err(Error::config(
                "bs_positions",
                format!("{} positions for {} base stations", self.bs_positions.len(), self.num_bs),
            ));
        }
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config("gamma", format!("must lie in (0, 1], got {}", self.gamma)));
        }
        if self.learning_rates.is_empty() || self.learning_rates.iter().any(|&lr| !(lr > 0.0)) {
            return Err(Error::config("learning_rates", "need at least one positive rate"));
        }
        if !(0.0 <= self.epsilon_min && self.epsilon_min <= self.epsilon_max && self.epsilon_max <= 1.0) {
            return Err(Error::config("epsilon_max", "need 0 <= epsilon_min <= epsilon_max <= 1"));
        }
        if !(0.0..=1.0).contains(&self.epsilon_decay_fraction) {
            return Err(Error::config("epsilon_decay_fraction", "must lie in [0, 1]"));
        }
        if self.replay_capacity < self.batch_size {
            return Err(Error::config("replay_capacity", "must hold at least one batch"));
        }
        if !(self.antenna_spacing_over_wavelength > 0.0) {
            return Err(Error::config("antenna_spacing_over_wavelength", "must be positive"));
        }
        let s = &self.streets;
        if !(s.half_length > 0.0) {
            return Err(Error::config("streets.half_length", "must be positive"));
        }
        if !(s.half_width > 0.0) {
            return Err(Error::config("streets.half_width", "must be positive"));
        }
        if !(s.speed_min > 0.0 && s.speed_min <= s.speed_max) {
            return Err(Error::config("streets.speed_min", "need 0 < speed_min <= speed_max"));
        }
        if !(s.dt > 0.0) {
            return Err(Error::config("streets.dt", "must be positive"));
        }
        if !(self.rate_scale > 0.0) {
            return Err(Error::config("rate_scale", "must be positive"));
        }
        if !(self.position_scale > 0.0) {
            return Err(Error::config("position_scale", "must be positive"));
        }
        self.propagation.validate()
    }

    pub fn bs_array(&self) -> ArrayGeometry {
        ArrayGeometry {
            spacing_over_wavelength: self.antenna_spacing_over_wavelength,
            ..ArrayGeometry::ula(self.n_t)
        }
    }

    pub fn ue_array(&self) -> ArrayGeometry {
        ArrayGeometry {
            spacing_over_wavelength: self.antenna_spacing_over_wavelength,
            ..ArrayGeometry::ula(self.n_r)
        }
    }

    pub fn build_environment(&self) -> Environment {
        let array = self.bs_array();
        let bss = self.bs_positions[..self.num_bs]
            .iter()
            .enumerate()
            .map(|(id, &position)| BaseStation {
                id,
                position,
                tx_power_w: dbm_to_watts(self.tx_power_dbm),
                array,
            })
            .collect();
        Environment::new(
            bss,
            self.ue_array(),
            Codebook::uniform(&array, self.codebook_size),
            self.streets,
            self.propagation,
            dbm_to_watts(self.noise_dbm),
            self.memory_len,
            self.num_ues,
        )
    }

    pub fn encoder(&self) -> StateEncoder {
        StateEncoder {
            slots: self.num_ues,
            memory_len: self.memory_len,
            include_locations: self.include_locations,
            rate_scale: self.rate_scale,
            position_scale: self.position_scale,
        }
    }

    pub fn network_widths(&self) -> Vec<usize> {
        crate::ddqn::Mlp::beam_selector_widths(self.encoder().input_dim(), self.num_ues, self.codebook_size)
    }

    pub fn agent_params(&self, bs: usize) -> AgentParams {
        AgentParams {
            gamma: self.gamma,
            learning_rate: self.learning_rates[bs % self.learning_rates.len()],
            batch_size: self.batch_size,
            replay_capacity: self.replay_capacity,
            target_sync_every: self.target_sync_every,
        }
    }

    pub fn epsilon_for(&self, episode: usize) -> f64 {
        crate::ddqn::epsilon_schedule(
            episode,
            self.episodes,
            self.epsilon_max,
            self.epsilon_min,
            self.epsilon_decay_fraction,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = RunConfig::default();
        c.validate().unwrap();
        assert_eq!(c.network_widths(), vec![16, 24, 16, 8]);
        assert_eq!(c.agent_params(0).learning_rate, 0.0001);
        assert_eq!(c.agent_params(1).learning_rate, 0.005);
        assert_eq!(c.agent_params(2).learning_rate, 0.0001);
    }

    #[test]
    fn omitted_fields_take_defaults() {
        let c = RunConfig::from_json_str(r#"{"num_ues": 4, "propagation": {"alpha_nlos": 3.0}}"#).unwrap();
        assert_eq!(c.num_ues, 4);
        assert_eq!(c.propagation.alpha_nlos, 3.0);
        assert_eq!(c.propagation.alpha_los, 2.0);
        assert_eq!(c.batch_size, 32);
        let back = RunConfig::from_json_str(&c.to_json().unwrap()).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn invalid_fields_are_named() {
        let err = RunConfig::from_json_str(r#"{"gamma": 0.0}"#).unwrap_err();
        assert!(matches!(&err, Error::InvalidConfig { field, .. } if field == "gamma"), "{err}");
        let err = RunConfig::from_json_str(r#"{"num_bs": 3}"#).unwrap_err();
        assert!(matches!(&err, Error::InvalidConfig { field, .. } if field == "bs_positions"));
        let err = RunConfig::from_json_str(r#"{"batch_size": 0}"#).unwrap_err();
        assert!(matches!(&err, Error::InvalidConfig { field, .. } if field == "batch_size"));
        let err = RunConfig::from_json_str(r#"{"gama": 0.5}"#).unwrap_err();
        assert!(err.to_string().contains("gama"), "{err}");
        let err = RunConfig::from_json_str(r#"{"propagation": {"alpha_los": -1.0}}"#).unwrap_err();
        assert!(matches!(&err, Error::InvalidConfig { field, .. } if field == "alpha_los"));
    }

    #[test]
    fn location_features_widen_input() {
        let c = RunConfig {
            include_locations: true,
            ..Default::default()
        };
        assert_eq!(c.encoder().input_dim(), 20);
    }
}

//! Per-BS double deep Q-learning agents.

pub mod adam;
pub mod agent;
pub mod mlp;
pub mod replay;
pub mod state;

pub use adam::AdamState;
pub use agent::{AgentBrain, AgentParams};
pub use mlp::{loss_and_gradients, max_relative_error, numerical_gradients, Dense, Mlp};
pub use replay::ReplayBuffer;
pub use state::StateEncoder;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experience {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub terminal: bool,
}

/// Index of the largest entry; ties go to the lowest index.
pub fn argmax(q: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in q.iter().enumerate().skip(1) {
        if v > q[best] {
            best = i;
        }
    }
    best
}

/// ε-greedy choice over `q`. One uniform draw decides exploration; a second
/// picks the random index when exploring.
pub fn select_action<R: Rng + ?Sized>(q: &[f64], epsilon: f64, rng: &mut R) -> usize {
    let c: f64 = rng.random();
    if c < epsilon {
        rng.random_range(0..q.len())
    } else {
        argmax(q)
    }
}

/// Double-DQN bootstrap targets: the online network picks the next action,
/// the target network values it.
pub fn ddqn_targets(batch: &[&Experience], online: &Mlp, target: &Mlp, gamma: f64) -> Result<Vec<f64>> {
    batch
        .iter()
        .map(|e| {
            if e.terminal {
                return Ok(e.reward);
            }
            let a = argmax(&online.forward(&e.next_state)?);
            Ok(e.reward + gamma * target.forward(&e.next_state)?[a])
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardMode {
    /// Beamformed rate over omni rate.
    #[default]
    Text,
    /// Omni rate over beamformed rate.
    Algorithm,
}

impl std::str::FromStr for RewardMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "text" => Ok(RewardMode::Text),
            "algorithm" => Ok(RewardMode::Algorithm),
            other => Err(format!("unknown reward mode `{other}` (expected `text` or `algorithm`)")),
        }
    }
}

/// Rate ratio reward; a zero denominator yields zero.
pub fn reward(r_beam: f64, r_omni: f64, mode: RewardMode) -> f64 {
    let (num, den) = match mode {
        RewardMode::Text => (r_beam, r_omni),
        RewardMode::Algorithm => (r_omni, r_beam),
    };
    if den > 0.0 {
        num / den
    } else {
        0.0
    }
}

/// Linear decay from `max` to `min` over the first `decay_fraction` of the
/// episodes, flat afterwards.
pub fn epsilon_schedule(episode: usize, total_episodes: usize, max: f64, min: f64, decay_fraction: f64) -> f64 {
    let horizon = decay_fraction * total_episodes as f64;
    if horizon <= 0.0 {
        return min;
    }
    let frac = (episode as f64 / horizon).min(1.0);
    (max - (max - min) * frac).clamp(min.min(max), max.max(min))
}

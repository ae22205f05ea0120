//! Per-agent checkpoint files (JSON). A checkpoint restores the learner
//! exactly: both networks, Adam moments, counters, exploration rate and the
//! agent's random streams. The replay memory is not stored.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::ddqn::{AdamState, AgentBrain, AgentParams, Mlp, ReplayBuffer, StateEncoder};
use crate::error::{Error, Result};
use crate::seed::RngState;

pub const FORMAT: &str = "mmwave-ddqn-agent/1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format: String,
    pub agent_id: usize,
    pub episodes_completed: usize,
    pub encoder: StateEncoder,
    /// `[inputs, outputs]` per layer.
    pub layer_shapes: Vec<[usize; 2]>,
    pub params: AgentParams,
    pub online: Mlp,
    pub target: Mlp,
    pub adam: AdamState,
    pub grad_steps: u64,
    pub epsilon: f64,
    pub explore_rng: RngState,
    pub replay_rng: RngState,
}

pub fn checkpoint_path(dir: &Path, agent: usize) -> PathBuf {
    dir.join(format!("agent_{agent}.ckpt"))
}

impl Checkpoint {
    pub fn capture(brain: &AgentBrain, encoder: StateEncoder, episodes_completed: usize) -> Self {
        Self {
            format: FORMAT.to_string(),
            agent_id: brain.id,
            episodes_completed,
            encoder,
            layer_shapes: brain.online.layers.iter().map(|l| [l.inputs, l.outputs]).collect(),
            params: brain.params,
            online: brain.online.clone(),
            target: brain.target.clone(),
            adam: brain.adam.clone(),
            grad_steps: brain.grad_steps,
            epsilon: brain.epsilon,
            explore_rng: RngState::capture(&brain.explore_rng),
            replay_rng: RngState::capture(&brain.replay_rng),
        }
    }

    fn check(&self, path: &Path) -> Result<()> {
        let bad = |reason: String| Error::BadCheckpoint {
            path: path.to_path_buf(),
            reason,
        };
        if self.format != FORMAT {
            return Err(bad(format!("unknown format `{}`", self.format)));
        }
        let nets = [&self.online, &self.target, &self.adam.first_moment, &self.adam.second_moment];
        for net in nets {
            let shapes: Vec<[usize; 2]> = net.layers.iter().map(|l| [l.inputs, l.outputs]).collect();
            if shapes != self.layer_shapes {
                return Err(bad("layer shapes disagree with stored parameters".into()));
            }
            for l in &net.layers {
                if l.weights.len() != l.inputs * l.outputs || l.bias.len() != l.outputs {
                    return Err(bad("parameter count disagrees with layer shape".into()));
                }
            }
        }
        if self.layer_shapes.first().map(|s| s[0]) != Some(self.encoder.input_dim()) {
            return Err(bad("network input width does not match the state encoder".into()));
        }
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        if !path.exists() {
            return Err(Error::MissingCheckpoint(path.to_path_buf()));
        }
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ckpt: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::BadCheckpoint {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })?;
        ckpt.check(path)?;
        Ok(ckpt)
    }

    /// Rebuilds the learner with an empty replay memory.
    pub fn into_brain(self) -> Result<AgentBrain> {
        let restore = |s: &RngState| {
            s.restore().ok_or_else(|| Error::BadCheckpoint {
                path: PathBuf::new(),
                reason: "unreadable rng state".into(),
            })
        };
        Ok(AgentBrain {
            id: self.agent_id,
            params: self.params,
            explore_rng: restore(&self.explore_rng)?,
            replay_rng: restore(&self.replay_rng)?,
            online: self.online,
            target: self.target,
            adam: self.adam,
            replay: ReplayBuffer::new(self.params.replay_capacity),
            epsilon: self.epsilon,
            grad_steps: self.grad_steps,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ddqn::Experience;
    use crate::seed::SeedTree;

    fn brain() -> AgentBrain {
        let t = SeedTree::new(5);
        AgentBrain::new(
            1,
            &[16, 24, 16, 8],
            AgentParams {
                gamma: 0.95,
                learning_rate: 0.005,
                batch_size: 4,
                replay_capacity: 50,
                target_sync_every: 7,
            },
            &mut t.rng("init", &[1]),
            t.rng("explore", &[1]),
            t.rng("replay", &[1]),
        )
    }

    fn encoder() -> StateEncoder {
        StateEncoder {
            slots: 2,
            memory_len: 8,
            include_locations: false,
            rate_scale: 20.0,
            position_scale: 50.0,
        }
    }

    fn exp(i: usize) -> Experience {
        let s: Vec<f64> = (0..16).map(|j| ((i * 7 + j) % 11) as f64 / 11.0).collect();
        Experience {
            state: s.clone(),
            action: i % 8,
            reward: 1.0 + (i % 3) as f64,
            next_state: s,
            terminal: i.is_multiple_of(9),
        }
    }

    #[test]
    fn resumed_learner_continues_bit_exactly() {
        let mut a = brain();
        a.epsilon = 0.4;
        for i in 0..20 {
            a.remember(exp(i));
            a.learn().unwrap();
            a.act(&exp(i).state).unwrap();
        }
        let dir = tempfile::tempdir().unwrap();
        let path = checkpoint_path(dir.path(), 1);
        Checkpoint::capture(&a, encoder(), 3).save(&path).unwrap();
        let loaded = Checkpoint::load(&path).unwrap();
        assert_eq!(loaded, Checkpoint::capture(&a, encoder(), 3));
        let mut b = loaded.into_brain().unwrap();
        // Replay contents are not checkpointed; refill identically.
        for e in a.replay.iter() {
            b.remember(e.clone());
        }
        for i in 20..40 {
            a.remember(exp(i));
            b.remember(exp(i));
            assert_eq!(a.learn().unwrap(), b.learn().unwrap());
            assert_eq!(a.act(&exp(i).state).unwrap(), b.act(&exp(i).state).unwrap());
        }
        assert_eq!(a.online, b.online);
        assert_eq!(a.target, b.target);
        assert_eq!(a.adam, b.adam);
    }

    #[test]
    fn missing_and_malformed_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = checkpoint_path(dir.path(), 0);
        assert!(matches!(Checkpoint::load(&path), Err(Error::MissingCheckpoint(_))));
        std::fs::write(&path, "{}").unwrap();
        assert!(matches!(Checkpoint::load(&path), Err(Error::BadCheckpoint { .. })));
        let mut c = Checkpoint::capture(&brain(), encoder(), 0);
        c.layer_shapes[0] = [3, 24];
        c.save(&path).unwrap();
        assert!(matches!(Checkpoint::load(&path), Err(Error::BadCheckpoint { .. })));
    }
}

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::adam::AdamState;
use super::mlp::{loss_and_gradients, Mlp};
use super::replay::ReplayBuffer;
use super::{argmax, ddqn_targets, select_action, Experience};
use crate::error::{Error, Result};
use crate::seed::SimRng;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AgentParams {
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Gradient steps between target-network copies.
    pub target_sync_every: u64,
}

/// One BS's learner: online and target networks, optimizer, replay memory and
/// its private random streams.
#[derive(Debug, Clone)]
pub struct AgentBrain {
    pub id: usize,
    pub params: AgentParams,
    pub online: Mlp,
    pub target: Mlp,
    pub adam: AdamState,
    pub replay: ReplayBuffer,
    pub epsilon: f64,
    pub grad_steps: u64,
    pub explore_rng: SimRng,
    pub replay_rng: SimRng,
}

impl AgentBrain {
    pub fn new(
        id: usize,
        widths: &[usize],
        params: AgentParams,
        init_rng: &mut SimRng,
        explore_rng: SimRng,
        replay_rng: SimRng,
    ) -> Self {
        let online = Mlp::glorot(widths, init_rng);
        Self {
            id,
            params,
            target: online.clone(),
            adam: AdamState::new(&online),
            online,
            replay: ReplayBuffer::new(params.replay_capacity),
            epsilon: 1.0,
            grad_steps: 0,
            explore_rng,
            replay_rng,
        }
    }

    pub fn q_values(&self, state: &[f64]) -> Result<Vec<f64>> {
        self.online.forward(state)
    }

    /// ε-greedy action under the current exploration rate.
    pub fn act(&mut self, state: &[f64]) -> Result<usize> {
        let q = self.online.forward(state)?;
        Ok(select_action(&q, self.epsilon, &mut self.explore_rng))
    }

    pub fn greedy(&self, state: &[f64]) -> Result<usize> {
        Ok(argmax(&self.online.forward(state)?))
    }

    pub fn uniform_action(&mut self) -> usize {
        self.explore_rng.random_range(0..self.online.output_dim())
    }

    pub fn remember(&mut self, exp: Experience) {
        self.replay.push(exp);
    }

    /// One minibatch gradient step. Returns the pre-update loss, or `None`
    /// while the replay memory holds fewer than a batch.
    pub fn learn(&mut self) -> Result<Option<f64>> {
        let batch = match self.replay.sample(&mut self.replay_rng, self.params.batch_size) {
            Ok(b) => b,
            Err(Error::NotReady { .. }) => return Ok(None),
            Err(e) => return Err(e),
        };
        let targets = ddqn_targets(&batch, &self.online, &self.target, self.params.gamma)?;
        let (loss, grads) = loss_and_gradients(&self.online, &batch, &targets)?;
        self.adam.step(&mut self.online, &grads, self.params.learning_rate);
        self.grad_steps += 1;
        if self.params.target_sync_every > 0 && self.grad_steps.is_multiple_of(self.params.target_sync_every) {
            self.sync_target();
        }
        Ok(Some(loss))
    }

    pub fn sync_target(&mut self) {
        self.target.clone_from(&self.online);
    }
}

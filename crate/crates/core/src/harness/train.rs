//! The distributed training loop: one independent learner per BS, all acting
//! on a shared snapshot each step, with the exhaustive and random baselines
//! replayed on the same channel realization for the metrics stream.

use std::path::Path;

use super::checkpoint::{checkpoint_path, Checkpoint};
use super::config::RunConfig;
use super::metrics::{emit_metrics, StepRecord};
use crate::ddqn::{reward, AgentBrain, Experience};
use crate::environment::random_policy;
use crate::error::{Error, Result};
use crate::par::Execution;
use crate::seed::SeedTree;

#[derive(Debug)]
pub struct TrainOutcome {
    pub agents: Vec<AgentBrain>,
    pub records: Vec<StepRecord>,
    /// Environment steps taken in each episode.
    pub episode_steps: Vec<usize>,
}

struct Pending {
    state: Vec<f64>,
    action: usize,
    reward: f64,
}

struct Learner {
    brain: AgentBrain,
    pending: Option<Pending>,
}

pub fn init_agents(config: &RunConfig, seeds: &SeedTree) -> Vec<AgentBrain> {
    let widths = config.network_widths();
    (0..config.num_bs)
        .map(|j| {
            let id = j as u64;
            AgentBrain::new(
                j,
                &widths,
                config.agent_params(j),
                &mut seeds.rng("init", &[id]),
                seeds.rng("explore", &[id]),
                seeds.rng("replay", &[id]),
            )
        })
        .collect()
}

/// Trains in memory without touching the filesystem.
pub fn train(config: &RunConfig, exec: Execution) -> Result<TrainOutcome> {
    run(config, exec, None)
}

/// Trains and writes `metrics.csv` plus `agent_<j>.ckpt` files under `out`.
pub fn train_to_dir(config: &RunConfig, exec: Execution, out: &Path) -> Result<TrainOutcome> {
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let metrics = out.join("metrics.csv");
    // Fail before training if the metrics file cannot be created.
    std::fs::File::create(&metrics).map_err(|e| Error::io(&metrics, e))?;
    let outcome = run(config, exec, Some(out))?;
    emit_metrics(&metrics, &outcome.records)?;
    Ok(outcome)
}

fn save_checkpoints(config: &RunConfig, out: &Path, agents: &[AgentBrain], episodes_done: usize) -> Result<()> {
    let encoder = config.encoder();
    for brain in agents {
        Checkpoint::capture(brain, encoder, episodes_done).save(&checkpoint_path(out, brain.id))?;
    }
    Ok(())
}

fn run(config: &RunConfig, exec: Execution, out: Option<&Path>) -> Result<TrainOutcome> {
    config.validate()?;
    let seeds = SeedTree::new(config.seed);
    let mut env = config.build_environment();
    let encoder = config.encoder();
    let n_actions = env.codebook.len();
    let zero_state = vec![0.0; encoder.input_dim()];
    let mut learners: Vec<Learner> = init_agents(config, &seeds)
        .into_iter()
        .map(|brain| Learner { brain, pending: None })
        .collect();
    let mut records = Vec::new();
    let mut episode_steps = Vec::with_capacity(config.episodes);

    for episode in 0..config.episodes {
        let ep = episode as u64;
        env.reset(&mut seeds.rng("mobility", &[ep]));
        let epsilon = config.epsilon_for(episode);
        for l in &mut learners {
            l.brain.epsilon = epsilon;
            l.pending = None;
        }
        let mut step = 0;
        loop {
            let done = env.advance();
            if done || step >= config.episode_cap {
                let finals = exec.map_slice_mut(&mut learners, |_, l| -> Result<()> {
                    if let Some(p) = l.pending.take() {
                        l.brain.remember(Experience {
                            state: p.state,
                            action: p.action,
                            reward: p.reward,
                            next_state: zero_state.clone(),
                            terminal: true,
                        });
                        l.brain.learn()?;
                    }
                    Ok(())
                });
                finals.into_iter().collect::<Result<()>>()?;
                break;
            }
            step += 1;
            let snapshot = env.observe(&seeds.child("channel", &[ep, step as u64]), exec)?;
            let states = (0..env.n_bs())
                .map(|j| encoder.encode_all(j, env.ues(), snapshot.association()))
                .collect::<Result<Vec<_>>>()?;

            let decisions = exec.map_slice_mut(&mut learners, |j, l| -> Result<(Option<f64>, usize)> {
                let state = &states[j];
                let mut loss = None;
                if let Some(p) = l.pending.take() {
                    l.brain.remember(Experience {
                        state: p.state,
                        action: p.action,
                        reward: p.reward,
                        next_state: state.clone(),
                        terminal: false,
                    });
                    loss = l.brain.learn()?;
                }
                Ok((loss, l.brain.act(state)?))
            });
            let decisions = decisions.into_iter().collect::<Result<Vec<_>>>()?;
            let actions: Vec<usize> = decisions.iter().map(|d| d.1).collect();

            let rates = env.rates(&snapshot, &actions)?;
            let sum_ddqn = rates.sum();
            let best = env.exhaustive(&snapshot, exec);
            let random_actions = random_policy(&mut seeds.rng("random", &[ep, step as u64]), env.n_bs(), n_actions);
            let sum_random = env.rates(&snapshot, &random_actions)?.sum();

            for (j, l) in learners.iter_mut().enumerate() {
                let r_omni = snapshot.omni.omni_sum[j];
                let r_beam = rates.per_bs[j];
                let r = reward(r_beam, r_omni, config.reward_mode);
                records.push(StepRecord {
                    episode,
                    step,
                    bs_id: j,
                    action: actions[j],
                    reward: r,
                    r_omni,
                    r_beam,
                    sum_ddqn,
                    sum_exhaustive: best.sum_rate,
                    sum_random,
                    epsilon,
                    loss: decisions[j].0,
                });
                l.pending = Some(Pending {
                    state: states[j].clone(),
                    action: actions[j],
                    reward: r,
                });
            }
        }
        episode_steps.push(step);

        if let Some(dir) = out {
            let done = episode + 1;
            if config.checkpoint_every > 0 && done % config.checkpoint_every == 0 && done < config.episodes {
                let brains: Vec<AgentBrain> = learners.iter().map(|l| l.brain.clone()).collect();
                save_checkpoints(config, dir, &brains, done)?;
            }
        }
    }

    let agents: Vec<AgentBrain> = learners.into_iter().map(|l| l.brain).collect();
    if let Some(dir) = out {
        save_checkpoints(config, dir, &agents, config.episodes)?;
    }
    Ok(TrainOutcome {
        agents,
        records,
        episode_steps,
    })
}

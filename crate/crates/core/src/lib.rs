//! Distributed double deep Q-learning for analog beam selection in a
//! multi-BS, multi-UE mmWave street network.
//!
//! * [`channel`] synthesizes single-path links (array responses, LOS
//!   probability, path loss, shadowing).
//! * [`environment`] moves UEs along two crossing streets, associates them by
//!   strongest pilot and scores joint codeword choices, including the
//!   perfect-CSI exhaustive oracle and a random baseline.
//! * [`ddqn`] is the per-BS learner: state encoding, an MLP value function
//!   trained with Adam, replay memory and the double-DQN target.
//! * [`harness`] runs training, greedy evaluation and baselines, and handles
//!   configuration, metrics and checkpoints.

pub mod channel;
pub mod ddqn;
pub mod environment;
pub mod error;
pub mod harness;
pub mod linalg;
pub mod par;
pub mod seed;

pub use error::{Error, Result};
pub use par::Execution;
pub use seed::SeedTree;

//! Run orchestration: configuration, training, evaluation, baselines,
//! metrics and checkpoints.

pub mod checkpoint;
pub mod config;
pub mod eval;
pub mod metrics;
pub mod train;

pub use checkpoint::{checkpoint_path, Checkpoint};
pub use config::RunConfig;
pub use eval::{baseline, evaluate, write_summary, EvalSummary, PolicyModel, Stat};
pub use metrics::{emit_metrics, read_metrics, StepRecord};
pub use train::{train, train_to_dir, TrainOutcome};

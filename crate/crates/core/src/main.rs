use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use mmwave_ddqn::ddqn::RewardMode;
use mmwave_ddqn::harness::{self, PolicyModel, RunConfig};
use mmwave_ddqn::Execution;

#[derive(Parser)]
#[command(name = "mmwave-ddqn", version, about = "Multi-agent DDQN beam selection for mmWave street networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one agent per base station; writes metrics.csv and agent_<j>.ckpt.
    Train(Common),
    /// Greedy evaluation of saved agents against the baselines; writes summary.json.
    Eval {
        #[command(flatten)]
        common: Common,
        /// Directory holding agent_<j>.ckpt (defaults to --out).
        #[arg(long)]
        checkpoints: Option<PathBuf>,
    },
    /// Exhaustive-search and random-selection baselines only; writes summary.json.
    Baseline(Common),
}

#[derive(Args)]
struct Common {
    /// JSON run configuration; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Training episodes for `train`, evaluation episodes otherwise.
    #[arg(long)]
    episodes: Option<usize>,
    #[arg(long)]
    locations: Option<bool>,
    #[arg(long, value_parser = parse_reward_mode)]
    reward_mode: Option<RewardMode>,
    /// Run everything on the calling thread.
    #[arg(long)]
    sequential: bool,
}

fn parse_reward_mode(s: &str) -> std::result::Result<RewardMode, String> {
    s.parse()
}

impl Common {
    fn resolve(&self, training: bool) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path).with_context(|| format!("loading {}", path.display()))?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.out_dir = out.clone();
        }
        if let Some(n) = self.episodes {
            if training {
                cfg.episodes = n;
            } else {
                cfg.eval_episodes = n;
            }
        }
        if let Some(loc) = self.locations {
            cfg.include_locations = loc;
        }
        if let Some(mode) = self.reward_mode {
            cfg.reward_mode = mode;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn execution(&self) -> Execution {
        if self.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        }
    }
}

fn write_summary(cfg: &RunConfig, summary: &harness::EvalSummary) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;
    let path = cfg.out_dir.join("summary.json");
    harness::write_summary(&path, summary)?;
    println!("{}", serde_json::to_string_pretty(summary)?);
    println!("wrote {}", path.display());
    Ok(())
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Train(common) => {
            let cfg = common.resolve(true)?;
            let outcome = harness::train_to_dir(&cfg, common.execution(), &cfg.out_dir)?;
            std::fs::write(cfg.out_dir.join("config.json"), cfg.to_json()? + "\n")?;
            let steps: usize = outcome.episode_steps.iter().sum();
            println!(
                "trained {} agent(s) for {} episodes ({} steps); outputs in {}",
                outcome.agents.len(),
                cfg.episodes,
                steps,
                cfg.out_dir.display()
            );
        }
        Command::Eval { common, checkpoints } => {
            let cfg = common.resolve(false)?;
            let dir = checkpoints.unwrap_or_else(|| cfg.out_dir.clone());
            let models = PolicyModel::load_all(&dir, cfg.num_bs)?;
            let summary = harness::evaluate(&cfg, &models, common.execution())?;
            write_summary(&cfg, &summary)?;
        }
        Command::Baseline(common) => {
            let cfg = common.resolve(false)?;
            let summary = harness::baseline(&cfg, common.execution())?;
            write_summary(&cfg, &summary)?;
        }
    }
    Ok(())
}

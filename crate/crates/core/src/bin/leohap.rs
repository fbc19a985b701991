use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use leohap::harness::{self, ExperimentConfig};
use leohap::tuner::TunerMode;

#[derive(Parser)]
#[command(name = "leohap", version, about = "LEO-HAP downlink simulator and masked TQC trainer")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train an agent and write logs and checkpoints.
    Train {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// none, scripted or llm
        #[arg(long)]
        tuner: Option<TunerMode>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        tune_interval: Option<usize>,
        #[arg(long)]
        tune_window: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Evaluate a checkpoint with the deterministic policy.
    Eval {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a heuristic controller: random, greedy_elevation or sticky.
    Baseline {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        name: String,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write plot-ready CSVs from a run directory.
    Plotdata {
        #[arg(long)]
        from: PathBuf,
    },
    /// Audit a step-level trajectory log.
    Validate {
        #[arg(long)]
        trace: PathBuf,
    },
}

fn run(cli: Cli) -> leohap::Result<()> {
    match cli.command {
        Command::Train {
            config,
            seed,
            tuner,
            episodes,
            tune_interval,
            tune_window,
            out,
        } => {
            let mut cfg = ExperimentConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.run.seed = s;
            }
            if let Some(t) = tuner {
                cfg.tuner.mode = t;
            }
            if let Some(e) = episodes {
                cfg.run.episodes = e;
            }
            if let Some(i) = tune_interval {
                cfg.tuner.interval = i;
            }
            if let Some(w) = tune_window {
                cfg.tuner.window = w;
            }
            if let Some(o) = out {
                cfg.run.out_dir = o;
            }
            let result = harness::run_training(&cfg)?;
            println!(
                "trained {} episodes; logs in {}; checkpoint {}",
                result.episodes.len(),
                result.out_dir.display(),
                result.checkpoint.display()
            );
        }
        Command::Eval {
            config,
            checkpoint,
            episodes,
            out,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let n = episodes.unwrap_or(cfg.run.eval_episodes);
            let dir = out.unwrap_or_else(|| cfg.run.out_dir.join("eval"));
            let s = harness::run_eval(&cfg, &checkpoint, n, &dir)?;
            println!("{}", serde_json::to_string_pretty(&summary_line(&s))?);
        }
        Command::Baseline {
            config,
            name,
            episodes,
            out,
        } => {
            let cfg = ExperimentConfig::load(&config)?;
            let n = episodes.unwrap_or(cfg.run.eval_episodes);
            let dir = out.unwrap_or_else(|| harness::baseline_dir(&cfg, &name));
            let s = harness::run_baseline(&cfg, &name, n, &dir)?;
            println!("{}", serde_json::to_string_pretty(&summary_line(&s))?);
        }
        Command::Plotdata { from } => {
            let files = harness::emit_plot_data(&from)?;
            println!("{}", files.reward_curve.display());
            println!("{}", files.handover_curve.display());
            if let Some(b) = files.bar_summary {
                println!("{}", b.display());
            }
        }
        Command::Validate { trace } => {
            let report = harness::validate_trace(&trace)?;
            for v in &report.violations {
                println!("{v}");
            }
            println!(
                "{} steps in {} episodes, {} violations",
                report.steps,
                report.episodes,
                report.violations.len()
            );
            if !report.is_clean() {
                return Err(leohap::Error::Contract("trace has constraint violations".into()));
            }
        }
    }
    Ok(())
}

fn summary_line(s: &harness::EvalSummary) -> serde_json::Value {
    serde_json::json!({
        "method": s.method,
        "episodes": s.episodes,
        "f1_mean": s.f1_mean,
        "f1_std": s.f1_std,
        "f2_mean": s.f2_mean,
        "f2_std": s.f2_std,
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

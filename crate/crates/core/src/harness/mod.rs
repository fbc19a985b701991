//! Experiment configuration and the batch entry points behind the CLI.

mod evaluate;
mod plot;
mod train;
mod validate;

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agent::Hyperparams;
use crate::env::ScenarioConfig;
use crate::error::{Error, Result};
use crate::tuner::TunerConfig;

pub use evaluate::{baseline_dir, run_baseline, run_eval, EvalSummary, BASELINES};
pub use plot::{emit_plot_data, rolling_mean, PlotFiles, ROLLING_WINDOW};
pub use train::{run_training, EpisodeRecord, TrainOutput};
pub use validate::{audit, validate_trace, TraceReport};

/// Offset added to evaluation episode indices so their random streams never
/// coincide with training episodes.
pub const EVAL_EPISODE_OFFSET: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AgentConfig {
    /// Hidden layer widths shared by the policy and the critics.
    pub hidden: Vec<usize>,
    pub hyperparams: Hyperparams,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            hidden: vec![256, 256, 128],
            hyperparams: Hyperparams::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub episodes: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub eval_episodes: usize,
    /// Episodes between intermediate checkpoints; 0 keeps only the final one.
    pub checkpoint_every: usize,
    /// Write the per-step trajectory log.
    pub log_steps: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            episodes: 1000,
            seed: 0,
            out_dir: PathBuf::from("runs/default"),
            eval_episodes: 20,
            checkpoint_every: 100,
            log_steps: true,
        }
    }
}

/// Everything needed to reproduce one experiment.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default)]
pub struct ExperimentConfig {
    pub scenario: ScenarioConfig,
    pub agent: AgentConfig,
    pub tuner: TunerConfig,
    pub run: RunConfig,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.agent.hyperparams.validate()?;
        self.tuner.validate()?;
        self.tuner.resolved_bounds(self.agent.hyperparams.num_quantiles)?;
        if self.agent.hidden.iter().any(|&h| h == 0) {
            return Err(Error::Config("hidden layer widths must be positive".into()));
        }
        Ok(())
    }

    /// Parses TOML, or JSON when `path` ends in `.json`; parse errors carry
    /// the offending line number.
    pub fn parse(text: &str, path: &Path) -> Result<Self> {
        let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
        let cfg: Self = if is_json {
            serde_json::from_str(text).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: format!("line {}: {e}", e.line()),
            })?
        } else {
            toml::from_str(text).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                message: match e.span() {
                    Some(span) => format!("line {}: {}", line_of(text, span.start), e.message()),
                    None => e.message().to_string(),
                },
            })?
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(format!("cannot serialize config: {e}")))
    }
}

pub(crate) fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

pub(crate) fn csv_error(path: &Path, e: csv::Error) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    }
}

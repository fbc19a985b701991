use std::io::Write;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::{Checkpoint, TqcAgent};
use crate::env::{argmax, episode_objectives, largest_remainder, Action, Env, Objectives, StepRecord};
use crate::error::{Error, Result};
use crate::rng::{indexed_substream, SimRng, Stream};

use super::train::decode_or_hold;
use super::{create_dir, ExperimentConfig, EVAL_EPISODE_OFFSET};

pub const BASELINES: [&str; 3] = ["random", "greedy_elevation", "sticky"];

/// Aggregate metrics over evaluation episodes; std is the population value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalSummary {
    pub method: String,
    pub episodes: usize,
    pub f1_mean: f64,
    pub f1_std: f64,
    pub f2_mean: f64,
    pub f2_std: f64,
    pub reward_mean: f64,
    pub per_episode: Vec<Objectives>,
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / n;
    (m, var.sqrt())
}

enum Controller<'a> {
    Agent(&'a TqcAgent),
    Random,
    Greedy,
    Sticky,
}

fn equal_split(env: &Env) -> Vec<usize> {
    largest_remainder(&vec![1.0; env.config().num_clusters()], env.config().rf.subcarriers)
}

fn best_users(env: &Env) -> Vec<usize> {
    env.state().channels.iter().map(|row| argmax(row)).collect()
}

impl Controller<'_> {
    fn act(&self, env: &Env, rng: &mut SimRng) -> Result<Action> {
        let s = env.state();
        let best = s.mask.best_visible().unwrap_or(s.sat);
        Ok(match self {
            Controller::Agent(agent) => decode_or_hold(env, &agent.greedy_action(&env.observe())?)?,
            Controller::Random => {
                let visible = s.mask.visible_indices();
                let next_sat = if visible.is_empty() { s.sat } else { visible[rng.random_range(0..visible.len())] };
                let users = env.config().clusters.iter().map(|c| rng.random_range(0..c.users)).collect();
                Action { next_sat, alloc: equal_split(env), users }
            }
            Controller::Greedy => Action {
                next_sat: best,
                alloc: equal_split(env),
                users: best_users(env),
            },
            Controller::Sticky => Action {
                next_sat: if s.mask.is_visible(s.sat) { s.sat } else { best },
                alloc: equal_split(env),
                users: best_users(env),
            },
        })
    }
}

fn evaluate(cfg: &ExperimentConfig, controller: Controller<'_>, method: &str, episodes: usize, out_dir: &Path) -> Result<EvalSummary> {
    create_dir(out_dir)?;
    let seed = cfg.run.seed;
    let mut env = Env::new(cfg.scenario.clone(), seed)?;
    if let Controller::Agent(agent) = &controller {
        if agent.obs_dim() != env.observation_dim() || agent.act_dim() != env.action_dim() {
            return Err(Error::Contract(format!(
                "checkpoint expects observation/action sizes {}/{}, scenario has {}/{}",
                agent.obs_dim(),
                agent.act_dim(),
                env.observation_dim(),
                env.action_dim()
            )));
        }
    }
    let steps_path = out_dir.join("steps.jsonl");
    let mut steps = std::io::BufWriter::new(std::fs::File::create(&steps_path).map_err(|e| Error::io(&steps_path, e))?);
    let mut per_episode = Vec::with_capacity(episodes);
    let mut rewards = Vec::with_capacity(episodes);
    for i in 0..episodes {
        let ep = EVAL_EPISODE_OFFSET + i;
        env.reset(ep)?;
        let mut rng = indexed_substream(seed, Stream::Policy, ep as u64);
        let mut trajectory: Vec<StepRecord> = Vec::with_capacity(cfg.scenario.steps_per_episode);
        while !env.done() {
            let action = controller.act(&env, &mut rng)?;
            let prev = env.state().clone();
            let out = env.step(&action)?;
            let rec = env.record(&prev, &action, &out);
            serde_json::to_writer(&mut steps, &rec)?;
            steps.write_all(b"\n").map_err(|e| Error::io(&steps_path, e))?;
            trajectory.push(rec);
        }
        rewards.push(trajectory.iter().map(|r| r.reward).sum::<f64>());
        per_episode.push(episode_objectives(&trajectory));
    }
    steps.flush().map_err(|e| Error::io(&steps_path, e))?;

    let f1: Vec<f64> = per_episode.iter().map(|o| o.f1_mean).collect();
    let f2: Vec<f64> = per_episode.iter().map(|o| o.f2 as f64).collect();
    let (f1_mean, f1_std) = mean_std(&f1);
    let (f2_mean, f2_std) = mean_std(&f2);
    let summary = EvalSummary {
        method: method.to_string(),
        episodes,
        f1_mean,
        f1_std,
        f2_mean,
        f2_std,
        reward_mean: mean_std(&rewards).0,
        per_episode,
    };

    let json_path = out_dir.join("summary.json");
    std::fs::write(&json_path, serde_json::to_string_pretty(&summary)?).map_err(|e| Error::io(&json_path, e))?;
    let csv_path = out_dir.join("episodes.csv");
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| super::csv_error(&csv_path, e))?;
    w.write_record(["episode", "f1_sum", "f1_mean", "f2"]).map_err(|e| super::csv_error(&csv_path, e))?;
    for (i, o) in summary.per_episode.iter().enumerate() {
        w.write_record([i.to_string(), o.f1_sum.to_string(), o.f1_mean.to_string(), o.f2.to_string()])
            .map_err(|e| super::csv_error(&csv_path, e))?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;
    Ok(summary)
}

/// Evaluates a checkpoint with the deterministic policy (`tanh(mean)`,
/// masked argmax, no exploration). Writes `summary.json`, `episodes.csv` and
/// `steps.jsonl` to `out_dir`.
pub fn run_eval(cfg: &ExperimentConfig, checkpoint: &Path, episodes: usize, out_dir: &Path) -> Result<EvalSummary> {
    let ck = Checkpoint::load(checkpoint)?;
    evaluate(cfg, Controller::Agent(&ck.agent), "tqc", episodes, out_dir)
}

/// Runs a heuristic controller under the same protocol as [`run_eval`].
pub fn run_baseline(cfg: &ExperimentConfig, name: &str, episodes: usize, out_dir: &Path) -> Result<EvalSummary> {
    let controller = match name {
        "random" => Controller::Random,
        "greedy_elevation" => Controller::Greedy,
        "sticky" => Controller::Sticky,
        _ => {
            return Err(Error::UnknownBaseline {
                name: name.to_string(),
                valid: BASELINES.join(", "),
            })
        }
    };
    evaluate(cfg, controller, name, episodes, out_dir)
}

/// Default output directory for a baseline run.
pub fn baseline_dir(cfg: &ExperimentConfig, name: &str) -> PathBuf {
    cfg.run.out_dir.join(format!("baseline_{name}"))
}

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::agent::masking::{epsilon, select_action};
use crate::agent::{Checkpoint, ReplayBuffer, TqcAgent, Transition, CHECKPOINT_VERSION};
use crate::env::{episode_objectives, Action, Env, SatelliteDecode};
use crate::error::{Error, Result};
use crate::rng::{substream, Stream};
use crate::tuner::{LlmEndpoint, Tuner, TunerMode, TuningRequest};

use super::{create_dir, csv_error, ExperimentConfig};

/// One row of `episodes.csv`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    pub episode: usize,
    pub total_reward: f64,
    pub f1_sum: f64,
    pub f1_mean: f64,
    pub f2: usize,
    pub epsilon: f64,
    pub discount: f64,
    pub learning_rate: f64,
    pub temperature: f64,
    pub soft_update: f64,
    pub drop_per_critic: usize,
    pub e_decay: f64,
    pub batch_size: usize,
    pub num_quantiles: usize,
}

pub const EPISODE_COLUMNS: [&str; 14] = [
    "episode",
    "total_reward",
    "f1_sum",
    "f1_mean",
    "f2",
    "epsilon",
    "discount",
    "learning_rate",
    "temperature",
    "soft_update",
    "drop_per_critic",
    "e_decay",
    "batch_size",
    "num_quantiles",
];

#[derive(Debug, Clone)]
pub struct TrainOutput {
    pub episodes: Vec<EpisodeRecord>,
    pub checkpoint: PathBuf,
    pub out_dir: PathBuf,
}

fn open(path: &Path) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn write_json_line<T: Serialize>(w: &mut impl Write, path: &Path, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))
}

/// Turns a raw policy vector into an executable action. When no satellite is
/// visible the current one is kept nominally; the slot is a coverage gap.
pub(crate) fn decode_or_hold(env: &Env, raw: &[f64]) -> Result<Action> {
    if env.state().mask.any() {
        return env.decode_action(raw, SatelliteDecode::Argmax);
    }
    let mut flags = env.state().clone();
    flags.mask.flags = vec![true; flags.mask.len()];
    let mut a = crate::env::decode_action(raw, &flags, env.config(), SatelliteDecode::Argmax)?;
    a.next_sat = env.state().sat;
    Ok(a)
}

/// Trains a masked TQC agent with periodic hyperparameter tuning and writes
/// `episodes.csv`, `steps.jsonl`, `tuning.jsonl`, `timing.csv`, the resolved
/// config and checkpoints under `run.out_dir`.
pub fn run_training(cfg: &ExperimentConfig) -> Result<TrainOutput> {
    cfg.validate()?;
    let run = &cfg.run;
    let out = run.out_dir.clone();
    create_dir(&out)?;
    let ck_dir = out.join("checkpoints");
    create_dir(&ck_dir)?;
    let cfg_path = out.join("config.toml");
    std::fs::write(&cfg_path, cfg.to_toml()?).map_err(|e| Error::io(&cfg_path, e))?;

    let seed = run.seed;
    let mut env = Env::new(cfg.scenario.clone(), seed)?;
    let mut agent = TqcAgent::new(
        env.observation_dim(),
        env.action_dim(),
        &cfg.agent.hidden,
        cfg.agent.hyperparams.clone(),
        &mut substream(seed, Stream::Init),
    )?;
    let endpoint = if cfg.tuner.mode == TunerMode::Llm { LlmEndpoint::from_env() } else { None };
    let tuner = Tuner::new(cfg.tuner.clone(), agent.hp.num_quantiles, endpoint)?;
    let mut policy_rng = substream(seed, Stream::Policy);
    let mut explore_rng = substream(seed, Stream::Exploration);
    let mut batch_rng = substream(seed, Stream::Buffer);
    let mut buffer = ReplayBuffer::new(agent.hp.buffer_capacity);

    let episodes_path = out.join("episodes.csv");
    let mut episodes_csv = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(&episodes_path)
        .map_err(|e| csv_error(&episodes_path, e))?;
    episodes_csv.write_record(EPISODE_COLUMNS).map_err(|e| csv_error(&episodes_path, e))?;
    let steps_path = out.join("steps.jsonl");
    let mut steps = if run.log_steps { Some(open(&steps_path)?) } else { None };
    let tuning_path = out.join("tuning.jsonl");
    let mut tuning = open(&tuning_path)?;
    let timing_path = out.join("timing.csv");
    let mut timing = open(&timing_path)?;
    writeln!(timing, "episode,wall_ms").map_err(|e| Error::io(&timing_path, e))?;

    let total = run.episodes;
    let mut rewards = Vec::with_capacity(total);
    let mut records = Vec::with_capacity(total);
    let mut checkpoint = ck_dir.join("final.json");

    for e in 1..=total {
        let started = Instant::now();
        env.reset(e - 1)?;
        let eps = epsilon(e - 1, total, &agent.hp);
        let mut obs = env.observe();
        let mut trajectory = Vec::with_capacity(cfg.scenario.steps_per_episode);
        loop {
            let mut raw = agent.sample_action(&obs, &mut policy_rng)?;
            if env.state().mask.any() {
                select_action(
                    &mut raw,
                    &env.state().mask,
                    cfg.scenario.satellite_logit_scale,
                    eps,
                    &mut explore_rng,
                )?;
            }
            let action = decode_or_hold(&env, &raw)?;
            let prev = env.state().clone();
            let outcome = env.step(&action)?;
            let record = env.record(&prev, &action, &outcome);
            if let Some(w) = steps.as_mut() {
                write_json_line(w, &steps_path, &record)?;
            }
            trajectory.push(record);
            let next_obs = env.observe();
            buffer.push(Transition {
                obs,
                action: raw,
                reward: outcome.reward,
                next_obs: next_obs.clone(),
                next_mask: env.state().mask.flags.clone(),
                done: outcome.done,
            });
            for _ in 0..agent.hp.updates_per_step {
                agent.train_step(&buffer, &mut batch_rng, &mut policy_rng)?;
            }
            obs = next_obs;
            if outcome.done {
                break;
            }
        }

        let obj = episode_objectives(&trajectory);
        let total_reward: f64 = trajectory.iter().map(|r| r.reward).sum();
        rewards.push(total_reward);
        let hp = &agent.hp;
        let rec = EpisodeRecord {
            episode: e,
            total_reward,
            f1_sum: obj.f1_sum,
            f1_mean: obj.f1_mean,
            f2: obj.f2,
            epsilon: eps,
            discount: hp.discount,
            learning_rate: hp.learning_rate,
            temperature: hp.temperature,
            soft_update: hp.soft_update,
            drop_per_critic: hp.drop_per_critic,
            e_decay: hp.e_decay,
            batch_size: hp.batch_size,
            num_quantiles: hp.num_quantiles,
        };
        episodes_csv.serialize(&rec).map_err(|err| csv_error(&episodes_path, err))?;
        records.push(rec);

        if tuner.due(e, total) {
            let req = TuningRequest::new(agent.hp.clone(), &rewards, tuner.config.window, e as f64 / total as f64);
            let entry = tuner.tune(e, &req);
            if entry.theta_after != entry.theta_before {
                log::info!("episode {e}: tuner updated hyperparameters");
            }
            agent.hp = entry.theta_after.clone();
            write_json_line(&mut tuning, &tuning_path, &entry)?;
        }

        let last = e == total;
        if last || (run.checkpoint_every > 0 && e % run.checkpoint_every == 0) {
            let ck = Checkpoint {
                version: CHECKPOINT_VERSION,
                episode: e,
                agent: agent.clone(),
                policy_rng: policy_rng.clone(),
            };
            let path = if last { ck_dir.join("final.json") } else { ck_dir.join(format!("episode_{e:06}.json")) };
            ck.save(&path)?;
            checkpoint = path;
        }
        writeln!(timing, "{e},{}", started.elapsed().as_millis()).map_err(|err| Error::io(&timing_path, err))?;
        log::debug!("episode {e}: reward {total_reward:.4}, handovers {}", obj.f2);
    }

    if total == 0 {
        Checkpoint {
            version: CHECKPOINT_VERSION,
            episode: 0,
            agent,
            policy_rng,
        }
        .save(&checkpoint)?;
    }
    episodes_csv.flush().map_err(|e| Error::io(&episodes_path, e))?;
    if let Some(mut w) = steps {
        w.flush().map_err(|e| Error::io(&steps_path, e))?;
    }
    tuning.flush().map_err(|e| Error::io(&tuning_path, e))?;
    timing.flush().map_err(|e| Error::io(&timing_path, e))?;
    Ok(TrainOutput {
        episodes: records,
        checkpoint,
        out_dir: out,
    })
}

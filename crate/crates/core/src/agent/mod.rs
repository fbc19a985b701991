//! Truncated-quantile-critics agent with dynamic satellite masking.
//!
//! The policy is a tanh-squashed Gaussian over the environment's raw action
//! vector; discrete choices are made by [`crate::env::decode_action`]. A
//! small ensemble of distributional critics each predicts `M` return
//! quantiles, and the Bellman target drops the largest `C·d` of the pooled
//! `C·M` next-state quantiles.

pub mod buffer;
pub mod masking;
pub mod mlp;
pub mod policy;
pub mod tqc;

use std::path::Path;

use ndarray::{Array1, Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::SimRng;

pub use buffer::{ReplayBuffer, Transition};
pub use mlp::{mlp_forward, soft_update, Adam, MlpParams};
pub use tqc::{critic_loss, quantile_huber, tqc_target, QuantileSet};

/// Training hyperparameters. The tunable subset is addressed by name through
/// [`Hyperparams::get`] and [`Hyperparams::set`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub discount: f64,
    pub learning_rate: f64,
    /// Entropy temperature α.
    pub temperature: f64,
    pub soft_update: f64,
    pub num_quantiles: usize,
    pub num_critics: usize,
    /// Quantiles dropped per critic; `C·d` are dropped from the pool.
    pub drop_per_critic: usize,
    pub eps0: f64,
    pub e_decay: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub warmup_steps: usize,
    pub updates_per_step: usize,
    pub huber_kappa: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self {
            discount: 0.999,
            learning_rate: 1e-4,
            temperature: 0.01,
            soft_update: 0.005,
            num_quantiles: 25,
            num_critics: 2,
            drop_per_critic: 2,
            eps0: 0.2,
            e_decay: 0.3,
            batch_size: 256,
            buffer_capacity: 100_000,
            warmup_steps: 1000,
            updates_per_step: 1,
            huber_kappa: 1.0,
        }
    }
}

/// Names accepted by [`Hyperparams::get`]/[`Hyperparams::set`].
pub const TUNABLE: [&str; 8] = [
    "discount",
    "learning_rate",
    "temperature",
    "batch_size",
    "soft_update",
    "num_quantiles",
    "drop_per_critic",
    "e_decay",
];

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if !(self.discount > 0.0 && self.discount < 1.0) {
            return bad("discount must lie in (0, 1)");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning_rate must be > 0");
        }
        if !(self.temperature >= 0.0) {
            return bad("temperature must be >= 0");
        }
        if !(self.soft_update > 0.0 && self.soft_update <= 1.0) {
            return bad("soft_update must lie in (0, 1]");
        }
        if self.num_quantiles == 0 || self.num_critics == 0 {
            return bad("need at least one critic and one quantile");
        }
        if self.drop_per_critic >= self.num_quantiles {
            return bad("drop_per_critic must be smaller than num_quantiles");
        }
        if !(0.0..=1.0).contains(&self.eps0) {
            return bad("eps0 must lie in [0, 1]");
        }
        if !(self.e_decay > 0.0 && self.e_decay <= 1.0) {
            return bad("e_decay must lie in (0, 1]");
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return bad("need 1 <= batch_size <= buffer_capacity");
        }
        if !(self.huber_kappa > 0.0) {
            return bad("huber_kappa must be > 0");
        }
        Ok(())
    }

    /// Number of pooled quantiles dropped from the target.
    pub fn total_drop(&self) -> usize {
        self.num_critics * self.drop_per_critic
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "discount" => self.discount,
            "learning_rate" => self.learning_rate,
            "temperature" => self.temperature,
            "batch_size" => self.batch_size as f64,
            "soft_update" => self.soft_update,
            "num_quantiles" => self.num_quantiles as f64,
            "drop_per_critic" => self.drop_per_critic as f64,
            "e_decay" => self.e_decay,
            _ => return None,
        })
    }

    /// Whether the parameter is integer-valued.
    pub fn is_integer(key: &str) -> bool {
        matches!(key, "batch_size" | "num_quantiles" | "drop_per_critic")
    }

    /// Sets a tunable parameter; integer parameters are rounded.
    pub fn set(&mut self, key: &str, value: f64) -> bool {
        let as_count = || value.round().max(0.0) as usize;
        match key {
            "discount" => self.discount = value,
            "learning_rate" => self.learning_rate = value,
            "temperature" => self.temperature = value,
            "batch_size" => self.batch_size = as_count(),
            "soft_update" => self.soft_update = value,
            "num_quantiles" => self.num_quantiles = as_count(),
            "drop_per_critic" => self.drop_per_critic = as_count(),
            "e_decay" => self.e_decay = value,
            _ => return false,
        }
        true
    }
}

/// Outcome of one call to [`TqcAgent::train_step`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainReport {
    /// False when the buffer was too small and nothing changed.
    pub updated: bool,
    pub critic_losses: Vec<f64>,
    pub policy_loss: f64,
    pub mean_log_prob: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TqcAgent {
    pub hp: Hyperparams,
    obs_dim: usize,
    act_dim: usize,
    hidden: Vec<usize>,
    pub policy: MlpParams,
    pub critics: Vec<MlpParams>,
    pub targets: Vec<MlpParams>,
    policy_opt: Adam,
    critic_opts: Vec<Adam>,
    updates: u64,
}

impl TqcAgent {
    pub fn new(obs_dim: usize, act_dim: usize, hidden: &[usize], hp: Hyperparams, rng: &mut SimRng) -> Result<Self> {
        hp.validate()?;
        if obs_dim == 0 || act_dim == 0 {
            return Err(Error::Config("observation and action must be non-empty".into()));
        }
        let mut policy_sizes = vec![obs_dim];
        policy_sizes.extend_from_slice(hidden);
        policy_sizes.push(2 * act_dim);
        let mut critic_sizes = vec![obs_dim + act_dim];
        critic_sizes.extend_from_slice(hidden);
        critic_sizes.push(hp.num_quantiles);

        let policy = MlpParams::new(&policy_sizes, 0.1, rng);
        let critics: Vec<MlpParams> = (0..hp.num_critics)
            .map(|_| MlpParams::new(&critic_sizes, 1.0, rng))
            .collect();
        Ok(Self {
            policy_opt: Adam::new(&policy),
            critic_opts: critics.iter().map(Adam::new).collect(),
            targets: critics.clone(),
            critics,
            policy,
            hp,
            obs_dim,
            act_dim,
            hidden: hidden.to_vec(),
            updates: 0,
        })
    }

    pub fn obs_dim(&self) -> usize {
        self.obs_dim
    }

    pub fn act_dim(&self) -> usize {
        self.act_dim
    }

    pub fn hidden(&self) -> &[usize] {
        &self.hidden
    }

    pub fn updates(&self) -> u64 {
        self.updates
    }

    fn row<'a>(&self, obs: &'a [f64]) -> Result<ArrayView2<'a, f64>> {
        if obs.len() != self.obs_dim {
            return Err(Error::Contract(format!(
                "observation has {} entries, agent expects {}",
                obs.len(),
                self.obs_dim
            )));
        }
        ArrayView2::from_shape((1, obs.len()), obs).map_err(|e| Error::Contract(e.to_string()))
    }

    /// Stochastic action in `(-1, 1)^act_dim`.
    pub fn sample_action(&self, obs: &[f64], rng: &mut SimRng) -> Result<Vec<f64>> {
        let x = self.row(obs)?;
        let noise = Array2::from_shape_simple_fn((1, self.act_dim), || rng.sample(StandardNormal));
        let s = policy::sample(&self.policy, x, noise.view())?;
        Ok(s.actions.into_raw_vec_and_offset().0)
    }

    /// Deterministic action `tanh(mean)`.
    pub fn greedy_action(&self, obs: &[f64]) -> Result<Vec<f64>> {
        Ok(policy::mean_action(&self.policy, self.row(obs)?)?.into_raw_vec_and_offset().0)
    }

    /// Pooled quantiles of all critics at one state-action pair.
    pub fn quantiles(&self, obs: &[f64], action: &[f64]) -> Result<QuantileSet> {
        let mut input = obs.to_vec();
        input.extend_from_slice(action);
        let per = self
            .critics
            .iter()
            .map(|c| mlp_forward(c, &input))
            .collect::<Result<Vec<_>>>()?;
        Ok(QuantileSet::pool(&per))
    }

    /// One gradient step for every critic and the policy, then a soft target
    /// update. A no-op while the buffer holds fewer than
    /// `max(batch_size, warmup_steps)` transitions.
    pub fn train_step(&mut self, buffer: &ReplayBuffer, batch_rng: &mut SimRng, noise_rng: &mut SimRng) -> Result<TrainReport> {
        let hp = self.hp.clone();
        hp.validate()?;
        if buffer.len() < hp.batch_size.max(hp.warmup_steps) || buffer.is_empty() {
            return Ok(TrainReport {
                updated: false,
                critic_losses: vec![],
                policy_loss: 0.0,
                mean_log_prob: 0.0,
            });
        }
        let batch = buffer.sample(hp.batch_size, batch_rng);
        let b = batch.len();
        let obs = stack(batch.iter().map(|t| t.obs.as_slice()), b, self.obs_dim)?;
        let act = stack(batch.iter().map(|t| t.action.as_slice()), b, self.act_dim)?;
        let next_obs = stack(batch.iter().map(|t| t.next_obs.as_slice()), b, self.obs_dim)?;

        // Targets from target critics at a fresh policy sample.
        let noise = Array2::from_shape_simple_fn((b, self.act_dim), || noise_rng.sample(StandardNormal));
        let next = policy::sample(&self.policy, next_obs.view(), noise.view())?;
        let next_in = tqc::critic_input(next_obs.view(), next.actions.view());
        let next_q = self
            .targets
            .iter()
            .map(|t| t.predict(next_in.view()))
            .collect::<Result<Vec<_>>>()?;
        let mut y = Array1::zeros(b);
        for r in 0..b {
            let per: Vec<Vec<f64>> = next_q.iter().map(|q| q.row(r).to_vec()).collect();
            y[r] = tqc_target(batch[r].reward, &QuantileSet::pool(&per), next.log_probs[r], batch[r].done, &hp)?;
        }

        let inputs = tqc::critic_input(obs.view(), act.view());
        let mut critic_losses = Vec::with_capacity(self.critics.len());
        for (critic, opt) in self.critics.iter_mut().zip(&mut self.critic_opts) {
            let (loss, grads) = tqc::critic_loss_and_grad(critic, inputs.view(), y.view(), hp.huber_kappa)?;
            opt.step(critic, &grads, hp.learning_rate);
            critic_losses.push(loss);
        }

        let noise = Array2::from_shape_simple_fn((b, self.act_dim), || noise_rng.sample(StandardNormal));
        let pl = tqc::policy_loss(&self.policy, &self.critics, obs.view(), noise.view(), &hp)?;
        self.policy_opt.step(&mut self.policy, &pl.grads, hp.learning_rate);

        for (t, c) in self.targets.iter_mut().zip(&self.critics) {
            soft_update(t, c, hp.soft_update)?;
        }
        self.updates += 1;
        Ok(TrainReport {
            updated: true,
            critic_losses,
            policy_loss: pl.loss,
            mean_log_prob: pl.mean_log_prob,
        })
    }
}

fn stack<'a>(rows: impl Iterator<Item = &'a [f64]>, n: usize, dim: usize) -> Result<Array2<f64>> {
    let mut data = Vec::with_capacity(n * dim);
    for r in rows {
        if r.len() != dim {
            return Err(Error::Contract(format!("transition row has {} entries, expected {dim}", r.len())));
        }
        data.extend_from_slice(r);
    }
    Array2::from_shape_vec((n, dim), data).map_err(|e| Error::Contract(e.to_string()))
}

pub const CHECKPOINT_VERSION: u32 = 1;

/// Serialized agent: networks, hyperparameters and the policy RNG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub episode: usize,
    pub agent: TqcAgent,
    pub policy_rng: SimRng,
}

impl Checkpoint {
    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string(self)?;
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let ck: Checkpoint = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if ck.version != CHECKPOINT_VERSION {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                message: format!("unsupported checkpoint version {}", ck.version),
            });
        }
        Ok(ck)
    }
}

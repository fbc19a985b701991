//! Truncated-quantile-critics losses and targets.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};

use super::mlp::MlpParams;
use super::policy::{self, PolicySample};
use super::Hyperparams;

/// Quantile estimates pooled across critics, with each critic's fractions.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantileSet {
    pub values: Vec<f64>,
    pub fractions: Vec<f64>,
}

impl QuantileSet {
    /// Concatenates per-critic quantile vectors (each of length `M`).
    pub fn pool(per_critic: &[Vec<f64>]) -> Self {
        let m = per_critic.first().map_or(0, Vec::len);
        let fr = quantile_fractions(m);
        Self {
            values: per_critic.iter().flatten().copied().collect(),
            fractions: per_critic.iter().flat_map(|_| fr.iter().copied()).collect(),
        }
    }
}

/// Midpoint quantile fractions `(2i − 1) / 2M`, i = 1..M.
pub fn quantile_fractions(m: usize) -> Vec<f64> {
    (1..=m).map(|i| (2 * i - 1) as f64 / (2 * m) as f64).collect()
}

fn huber(u: f64, kappa: f64) -> f64 {
    if u.abs() <= kappa {
        0.5 * u * u
    } else {
        kappa * (u.abs() - 0.5 * kappa)
    }
}

/// Asymmetric Huber loss `|τ − 1{u<0}| · L_κ(u)` on the residual
/// `u = target − prediction`.
pub fn quantile_huber(tau: f64, u: f64, kappa: f64) -> f64 {
    let w = if u < 0.0 { (tau - 1.0).abs() } else { tau };
    w * huber(u, kappa)
}

/// dρ/du.
pub fn quantile_huber_grad(tau: f64, u: f64, kappa: f64) -> f64 {
    let w = if u < 0.0 { (tau - 1.0).abs() } else { tau };
    w * u.clamp(-kappa, kappa)
}

/// Mean of the `N − drop` smallest values.
pub fn truncated_mean(pooled: &[f64], drop: usize) -> Result<f64> {
    let keep = kept_count(pooled.len(), drop)?;
    let mut v = pooled.to_vec();
    v.sort_by(f64::total_cmp);
    Ok(v[..keep].iter().sum::<f64>() / keep as f64)
}

fn kept_count(n: usize, drop: usize) -> Result<usize> {
    if drop >= n {
        return Err(Error::Config(format!(
            "cannot drop {drop} of {n} pooled quantiles"
        )));
    }
    Ok(n - drop)
}

/// Bellman target `r + γ(mean of kept quantiles − α·logπ)`; the bootstrap
/// term is zero for terminal transitions.
pub fn tqc_target(reward: f64, next: &QuantileSet, log_prob_next: f64, done: bool, hp: &Hyperparams) -> Result<f64> {
    let drop = hp.num_critics * hp.drop_per_critic;
    let mean = truncated_mean(&next.values, drop)?;
    if done {
        return Ok(reward);
    }
    Ok(reward + hp.discount * (mean - hp.temperature * log_prob_next))
}

/// Critic loss for one critic: batch mean of the summed quantile-Huber
/// losses against each sample's scalar target. Returns the loss and its
/// gradient with respect to the predicted quantiles.
pub fn critic_loss(pred: ArrayView2<'_, f64>, targets: ArrayView1<'_, f64>, kappa: f64) -> (f64, Array2<f64>) {
    let (b, m) = pred.dim();
    let fr = quantile_fractions(m);
    let mut grad = Array2::zeros((b, m));
    let mut loss = 0.0;
    for r in 0..b {
        for i in 0..m {
            let u = targets[r] - pred[[r, i]];
            loss += quantile_huber(fr[i], u, kappa);
            grad[[r, i]] = -quantile_huber_grad(fr[i], u, kappa) / b as f64;
        }
    }
    (loss / b as f64, grad)
}

/// Concatenates observation and action rows into critic inputs.
pub fn critic_input(obs: ArrayView2<'_, f64>, act: ArrayView2<'_, f64>) -> Array2<f64> {
    ndarray::concatenate(ndarray::Axis(1), &[obs, act]).expect("matching batch sizes")
}

/// Loss and parameter gradient of one critic on a batch.
pub fn critic_loss_and_grad(
    critic: &MlpParams,
    inputs: ArrayView2<'_, f64>,
    targets: ArrayView1<'_, f64>,
    kappa: f64,
) -> Result<(f64, MlpParams)> {
    let (out, cache) = critic.forward(inputs)?;
    let (loss, g) = critic_loss(out.view(), targets, kappa);
    let (grads, _) = critic.backward(&cache, &g);
    Ok((loss, grads))
}

/// Per-sample truncated mean over the pooled critic outputs and the
/// gradient weights (`1/(N−k)` on kept entries, zero elsewhere).
fn truncated_rows(per_critic: &[Array2<f64>], drop: usize) -> Result<(Array1<f64>, Vec<Array2<f64>>)> {
    let b = per_critic[0].nrows();
    let m = per_critic[0].ncols();
    let n = per_critic.len() * m;
    let keep = kept_count(n, drop)?;
    let mut means = Array1::zeros(b);
    let mut weights: Vec<Array2<f64>> = per_critic.iter().map(|_| Array2::zeros((b, m))).collect();
    let mut idx: Vec<(f64, usize)> = Vec::with_capacity(n);
    for r in 0..b {
        idx.clear();
        for (c, out) in per_critic.iter().enumerate() {
            for i in 0..m {
                idx.push((out[[r, i]], c * m + i));
            }
        }
        idx.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut s = 0.0;
        for &(v, j) in &idx[..keep] {
            s += v;
            weights[j / m][[r, j % m]] = 1.0 / keep as f64;
        }
        means[r] = s / keep as f64;
    }
    Ok((means, weights))
}

/// Result of evaluating the policy objective on a batch.
pub struct PolicyLoss {
    pub loss: f64,
    pub grads: MlpParams,
    pub mean_log_prob: f64,
}

/// Policy objective `mean_b[α·logπ(a_b|s_b) − truncated mean of Z(s_b, a_b)]`
/// with `a_b` reparameterised by the supplied standard-normal `noise`.
pub fn policy_loss(
    policy_net: &MlpParams,
    critics: &[MlpParams],
    obs: ArrayView2<'_, f64>,
    noise: ArrayView2<'_, f64>,
    hp: &Hyperparams,
) -> Result<PolicyLoss> {
    let b = obs.nrows();
    let sample: PolicySample = policy::sample(policy_net, obs, noise)?;
    let inputs = critic_input(obs, sample.actions.view());
    let mut outs = Vec::with_capacity(critics.len());
    let mut caches = Vec::with_capacity(critics.len());
    for c in critics {
        let (o, cache) = c.forward(inputs.view())?;
        outs.push(o);
        caches.push(cache);
    }
    let (means, weights) = truncated_rows(&outs, hp.num_critics * hp.drop_per_critic)?;
    let alpha = hp.temperature;
    let loss = (alpha * &sample.log_probs - &means).sum() / b as f64;

    let obs_dim = obs.ncols();
    let act_dim = sample.actions.ncols();
    let mut grad_a = Array2::<f64>::zeros((b, act_dim));
    for ((c, cache), w) in critics.iter().zip(&caches).zip(weights) {
        // d(−mean)/dZ = −w/B.
        let g = w * (-1.0 / b as f64);
        let (_, g_in) = c.backward(cache, &g);
        grad_a += &g_in.slice(ndarray::s![.., obs_dim..]);
    }
    let grad_logp = Array1::from_elem(b, alpha / b as f64);
    let grads = policy::backward(policy_net, &sample, &grad_a, &grad_logp);
    Ok(PolicyLoss {
        loss,
        grads,
        mean_log_prob: sample.log_probs.mean().unwrap_or(0.0),
    })
}

//! Tanh-squashed diagonal Gaussian policy head.
//!
//! The network emits `[mean, log_std]` per action dimension. Actions are
//! `tanh(mean + std·ξ)`; the log-density includes the tanh Jacobian.

use std::f64::consts::{LN_2, PI};

use ndarray::{s, Array1, Array2, ArrayView2, Zip};

use crate::error::{Error, Result};

use super::mlp::{ForwardCache, MlpParams};

pub const LOG_STD_MIN: f64 = -20.0;
pub const LOG_STD_MAX: f64 = 2.0;

fn softplus(x: f64) -> f64 {
    if x > 30.0 {
        x
    } else {
        x.exp().ln_1p()
    }
}

/// `log(1 − tanh²u)`, stable for large |u|.
fn log_one_minus_tanh_sq(u: f64) -> f64 {
    2.0 * (LN_2 - u - softplus(-2.0 * u))
}

pub struct PolicySample {
    pub actions: Array2<f64>,
    pub log_probs: Array1<f64>,
    noise: Array2<f64>,
    std: Array2<f64>,
    /// 1 where log_std was inside its clamp range.
    clamp_live: Array2<f64>,
    cache: ForwardCache,
}

/// Reparameterised sample given standard-normal `noise` (batch × act_dim).
pub fn sample(net: &MlpParams, obs: ArrayView2<'_, f64>, noise: ArrayView2<'_, f64>) -> Result<PolicySample> {
    let (out, cache) = net.forward(obs)?;
    let a_dim = out.ncols() / 2;
    if noise.dim() != (obs.nrows(), a_dim) {
        return Err(Error::Contract(format!(
            "noise shape {:?} does not match ({}, {a_dim})",
            noise.dim(),
            obs.nrows()
        )));
    }
    let mean = out.slice(s![.., ..a_dim]);
    let raw_log_std = out.slice(s![.., a_dim..]);
    let log_std = raw_log_std.mapv(|v| v.clamp(LOG_STD_MIN, LOG_STD_MAX));
    let clamp_live = raw_log_std.mapv(|v| if (LOG_STD_MIN..=LOG_STD_MAX).contains(&v) { 1.0 } else { 0.0 });
    let std = log_std.mapv(f64::exp);
    let u = &mean + &(&std * &noise);
    let actions = u.mapv(f64::tanh);
    let mut log_probs = Array1::zeros(obs.nrows());
    let half_log_2pi = 0.5 * (2.0 * PI).ln();
    for r in 0..obs.nrows() {
        let mut lp = 0.0;
        for d in 0..a_dim {
            let xi = noise[[r, d]];
            lp += -0.5 * xi * xi - log_std[[r, d]] - half_log_2pi - log_one_minus_tanh_sq(u[[r, d]]);
        }
        log_probs[r] = lp;
    }
    Ok(PolicySample {
        actions,
        log_probs,
        noise: noise.to_owned(),
        std,
        clamp_live,
        cache,
    })
}

/// Deterministic action `tanh(mean)`.
pub fn mean_action(net: &MlpParams, obs: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
    let out = net.predict(obs)?;
    let a_dim = out.ncols() / 2;
    Ok(out.slice(s![.., ..a_dim]).mapv(f64::tanh))
}

/// Parameter gradients given dL/d(action) and dL/d(logπ) per sample.
pub fn backward(net: &MlpParams, sample: &PolicySample, grad_actions: &Array2<f64>, grad_logp: &Array1<f64>) -> MlpParams {
    let (b, a_dim) = sample.actions.dim();
    let mut grad_out = Array2::zeros((b, 2 * a_dim));
    for r in 0..b {
        for d in 0..a_dim {
            let a = sample.actions[[r, d]];
            // dlogπ/du = 2·tanh(u) through the Jacobian term.
            let g_u = grad_actions[[r, d]] * (1.0 - a * a) + grad_logp[r] * 2.0 * a;
            grad_out[[r, d]] = g_u;
            let g_log_std = g_u * sample.std[[r, d]] * sample.noise[[r, d]] - grad_logp[r];
            grad_out[[r, a_dim + d]] = g_log_std * sample.clamp_live[[r, d]];
        }
    }
    let (grads, _) = net.backward(&sample.cache, &grad_out);
    grads
}

/// Log-density of the squashed Gaussian at pre-tanh `u` (for tests).
pub fn log_prob_pre_tanh(mean: &[f64], log_std: &[f64], u: &[f64]) -> f64 {
    let half_log_2pi = 0.5 * (2.0 * PI).ln();
    let mut lp = 0.0;
    Zip::from(ndarray::aview1(mean))
        .and(ndarray::aview1(log_std))
        .and(ndarray::aview1(u))
        .for_each(|&m, &ls, &x| {
            let z = (x - m) / ls.exp();
            lp += -0.5 * z * z - ls - half_log_2pi - (1.0 - x.tanh().powi(2)).ln();
        });
    lp
}

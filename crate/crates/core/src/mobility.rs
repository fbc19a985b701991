//! Gauss-Markov HAP mobility with reflective boundaries.
//!
//! Coordinates are east/north/up metres in the scenario's local frame.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned operating area.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bounds3 {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl Bounds3 {
    /// Box of the given half-extents around `center`.
    pub fn around(center: [f64; 3], half: [f64; 3]) -> Self {
        Self {
            min: std::array::from_fn(|k| center[k] - half[k]),
            max: std::array::from_fn(|k| center[k] + half[k]),
        }
    }

    pub fn contains(&self, p: [f64; 3]) -> bool {
        (0..3).all(|k| p[k] >= self.min[k] && p[k] <= self.max[k])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussMarkovParams {
    /// Memory parameter in [0, 1].
    pub alpha: f64,
    pub mean_velocity: [f64; 3],
    pub std: [f64; 3],
    /// Slot duration, seconds.
    pub dt: f64,
    pub bounds: Bounds3,
}

impl GaussMarkovParams {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!(
                "Gauss-Markov memory must lie in [0, 1], got {}",
                self.alpha
            )));
        }
        if self.std.iter().any(|s| !(*s >= 0.0)) {
            return Err(Error::Config("velocity std must be >= 0".into()));
        }
        if !(self.dt > 0.0) {
            return Err(Error::Config(format!("slot duration must be > 0, got {}", self.dt)));
        }
        if (0..3).any(|k| !(self.bounds.min[k] < self.bounds.max[k])) {
            return Err(Error::Config("mobility box needs min < max on every axis".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HapState {
    pub p: [f64; 3],
    pub v: [f64; 3],
}

/// Advances the HAP by one slot, drawing `n(t)` from `rng`.
pub fn step_hap<R: Rng + ?Sized>(state: &HapState, params: &GaussMarkovParams, rng: &mut R) -> Result<HapState> {
    let noise: [f64; 3] = std::array::from_fn(|_| rng.sample(StandardNormal));
    step_hap_with_noise(state, params, noise)
}

/// Deterministic core of [`step_hap`] with the innovation supplied.
pub fn step_hap_with_noise(state: &HapState, params: &GaussMarkovParams, noise: [f64; 3]) -> Result<HapState> {
    params.validate()?;
    let a = params.alpha;
    let innov = (1.0 - a * a).sqrt();
    let mut v = [0.0; 3];
    let mut p = [0.0; 3];
    for k in 0..3 {
        v[k] = a * state.v[k] + (1.0 - a) * params.mean_velocity[k] + innov * params.std[k] * noise[k];
        p[k] = state.p[k] + v[k] * params.dt;
    }
    let (p, v) = reflect(p, v, &params.bounds);
    Ok(HapState { p, v })
}

/// Mirrors each out-of-range coordinate about the violated bound and
/// negates that velocity component, until the point is inside.
pub fn reflect(mut p: [f64; 3], mut v: [f64; 3], bounds: &Bounds3) -> ([f64; 3], [f64; 3]) {
    for k in 0..3 {
        let (lo, hi) = (bounds.min[k], bounds.max[k]);
        if !p[k].is_finite() {
            continue;
        }
        while p[k] < lo || p[k] > hi {
            p[k] = if p[k] > hi { 2.0 * hi - p[k] } else { 2.0 * lo - p[k] };
            v[k] = -v[k];
        }
    }
    (p, v)
}

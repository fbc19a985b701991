//! Dynamic action masking and ε-exploration over the satellite choice.

use rand::Rng;

use crate::error::{Error, Result};
use crate::geometry::VisibilityMask;

use super::Hyperparams;

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Restricts `probs` to visible satellites and renormalises.
///
/// If the policy puts no mass on any visible satellite the result is uniform
/// over the visible set.
pub fn masked_distribution(probs: &[f64], flags: &[bool]) -> Result<Vec<f64>> {
    if probs.len() != flags.len() {
        return Err(Error::Contract(format!(
            "{} probabilities for {} satellites",
            probs.len(),
            flags.len()
        )));
    }
    let visible = flags.iter().filter(|&&f| f).count();
    if visible == 0 {
        return Err(Error::NoVisibleSatellite);
    }
    let z: f64 = probs.iter().zip(flags).filter(|(_, &f)| f).map(|(p, _)| *p).sum();
    Ok(probs
        .iter()
        .zip(flags)
        .map(|(p, &f)| match (f, z > 0.0) {
            (false, _) => 0.0,
            (true, true) => p / z,
            (true, false) => 1.0 / visible as f64,
        })
        .collect())
}

/// Draws an index from a categorical distribution. Zero-probability
/// entries are never returned.
pub fn sample_index<R: Rng + ?Sized>(probs: &[f64], rng: &mut R) -> usize {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        last = i;
        if u < acc {
            return i;
        }
    }
    last
}

/// Linearly decaying exploration rate, reaching zero at `e_decay · E`.
pub fn epsilon(episode: usize, total_episodes: usize, hp: &Hyperparams) -> f64 {
    let horizon = hp.e_decay * total_episodes as f64;
    if horizon <= 0.0 {
        return 0.0;
    }
    (hp.eps0 * (1.0 - episode as f64 / horizon)).max(0.0)
}

/// Index of the highest-scoring visible satellite, lowest index on ties.
pub fn masked_argmax(scores: &[f64], mask: &VisibilityMask) -> Result<usize> {
    let mut best: Option<usize> = None;
    for i in mask.visible_indices() {
        match best {
            Some(b) if scores[i] <= scores[b] => {}
            _ => best = Some(i),
        }
    }
    best.ok_or(Error::NoVisibleSatellite)
}

/// Picks the serving satellite for the next slot.
///
/// The policy's pick `a_p` is sampled from the masked softmax of
/// `scale · scores`. With probability `eps` it is replaced by a uniform draw
/// from the visible satellites other than `a_p`; when no other satellite is
/// visible `a_p` is kept.
pub fn select_satellite<R: Rng + ?Sized>(
    scores: &[f64],
    mask: &VisibilityMask,
    scale: f64,
    eps: f64,
    rng: &mut R,
) -> Result<usize> {
    let logits: Vec<f64> = scores.iter().map(|s| s * scale).collect();
    let probs = masked_distribution(&softmax(&logits), &mask.flags)?;
    let policy_pick = sample_index(&probs, rng);
    if eps > 0.0 && rng.random::<f64>() < eps {
        let others: Vec<usize> = mask
            .visible_indices()
            .into_iter()
            .filter(|&i| i != policy_pick)
            .collect();
        if !others.is_empty() {
            return Ok(others[rng.random_range(0..others.len())]);
        }
    }
    Ok(policy_pick)
}

/// Rewrites the satellite block of a raw action so that its masked argmax is
/// `chosen`, by swapping the scores of `chosen` and the current argmax.
pub fn encode_choice(scores: &mut [f64], mask: &VisibilityMask, chosen: usize) -> Result<()> {
    if !mask.is_visible(chosen) {
        return Err(Error::Contract(format!("satellite {chosen} is not visible")));
    }
    let top = masked_argmax(scores, mask)?;
    scores.swap(top, chosen);
    let best = scores[chosen];
    for i in mask.visible_indices() {
        if i != chosen && scores[i] >= best {
            scores[i] = best.next_down();
        }
    }
    Ok(())
}

/// Full action-selection step on a raw policy output whose first
/// `mask.len()` entries score the satellites.
///
/// Returns the satellite actually used; `raw` is rewritten so that the
/// argmax decode of the stored action reproduces it.
pub fn select_action<R: Rng + ?Sized>(
    raw: &mut [f64],
    mask: &VisibilityMask,
    scale: f64,
    eps: f64,
    rng: &mut R,
) -> Result<usize> {
    let n = mask.len();
    if raw.len() < n {
        return Err(Error::Contract("raw action shorter than the satellite block".into()));
    }
    let chosen = select_satellite(&raw[..n], mask, scale, eps, rng)?;
    encode_choice(&mut raw[..n], mask, chosen)?;
    Ok(chosen)
}

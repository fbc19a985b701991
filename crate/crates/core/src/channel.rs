//! FSO and RF link budgets, fading samplers, and the decode-and-forward
//! rate split at the HAP.
//!
//! Link gains from [`fso_link_gain_db`] and [`rf_gain_db`] are amplitude
//! quantities expressed in dB: the ½ factor halves the power budget, so the
//! linear amplitude is `10^(dB/10)` and squaring it in the SNR recovers the
//! full power budget.

use rand::Rng;
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Satellite-to-HAP optical link parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FsoLinkParams {
    pub tx_gain_db: f64,
    pub rx_gain_db: f64,
    pub free_space_loss_db: f64,
    pub atmospheric_loss_db: f64,
    pub lens_loss_db: f64,
    pub system_margin_db: f64,
    pub power_w: f64,
    /// Optical-to-electrical conversion efficiency in (0, 1].
    pub eta_oe: f64,
    pub apertures: usize,
    pub noise_w: f64,
    pub bandwidth_hz: f64,
    pub gg_alpha: f64,
    pub gg_beta: f64,
}

impl Default for FsoLinkParams {
    fn default() -> Self {
        Self {
            tx_gain_db: 113.0,
            rx_gain_db: 113.0,
            free_space_loss_db: 258.0,
            atmospheric_loss_db: 2.0,
            lens_loss_db: 3.0,
            system_margin_db: 3.0,
            power_w: 1.0,
            eta_oe: 0.5,
            apertures: 4,
            noise_w: 1e-9,
            bandwidth_hz: 1e9,
            gg_alpha: 4.2,
            gg_beta: 1.4,
        }
    }
}

impl FsoLinkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.power_w > 0.0 && self.noise_w > 0.0 && self.bandwidth_hz > 0.0) {
            return Err(Error::Config("fso power, noise and bandwidth must be > 0".into()));
        }
        if !(self.eta_oe > 0.0 && self.eta_oe <= 1.0) {
            return Err(Error::Config("fso.eta_oe must lie in (0, 1]".into()));
        }
        if self.apertures == 0 {
            return Err(Error::Config("fso.apertures must be >= 1".into()));
        }
        if !(self.gg_alpha > 0.0 && self.gg_beta > 0.0) {
            return Err(Error::Config("Gamma-Gamma shapes must be > 0".into()));
        }
        Ok(())
    }

    /// Average SNR `P·η²/(N_A·N_q)`.
    pub fn mean_snr(&self) -> f64 {
        self.power_w * self.eta_oe * self.eta_oe / (self.apertures as f64 * self.noise_w)
    }
}

/// HAP-to-ground OFDM link parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RfLinkParams {
    pub hap_gain_db: f64,
    pub rx_gain_db: f64,
    pub path_loss_exp: f64,
    /// Carrier wavelength, metres.
    pub lambda_m: f64,
    pub bandwidth_hz: f64,
    pub power_w: f64,
    pub subcarriers: usize,
    /// Noise power spectral density, W/Hz.
    pub noise_psd: f64,
    pub nakagami_m: f64,
    pub nakagami_omega: f64,
}

impl Default for RfLinkParams {
    fn default() -> Self {
        Self {
            hap_gain_db: 10.0,
            rx_gain_db: 5.0,
            path_loss_exp: 2.0,
            lambda_m: 0.1,
            bandwidth_hz: 2e7,
            power_w: 1.0,
            subcarriers: 64,
            noise_psd: 3.98e-21,
            nakagami_m: 3.0,
            nakagami_omega: 1.0,
        }
    }
}

impl RfLinkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.bandwidth_hz > 0.0 && self.power_w > 0.0 && self.noise_psd > 0.0) {
            return Err(Error::Config("rf bandwidth, power and noise_psd must be > 0".into()));
        }
        if self.subcarriers == 0 {
            return Err(Error::Config("rf.subcarriers must be >= 1".into()));
        }
        if !(self.lambda_m > 0.0) {
            return Err(Error::Config("rf.lambda_m must be > 0".into()));
        }
        if !(self.nakagami_m >= 0.5 && self.nakagami_omega > 0.0) {
            return Err(Error::Config("Nakagami needs m >= 0.5 and omega > 0".into()));
        }
        Ok(())
    }

    pub fn subcarrier_bandwidth(&self) -> f64 {
        self.bandwidth_hz / self.subcarriers as f64
    }
}

/// Per-slot outcome of the decode-and-forward flow constraint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSplit {
    pub r_total: f64,
    pub per_cluster: Vec<f64>,
    pub fso_bottleneck: bool,
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Unit-mean Gamma-Gamma scintillation sample.
pub fn sample_gamma_gamma<R: Rng + ?Sized>(alpha: f64, beta: f64, rng: &mut R) -> Result<f64> {
    if !(alpha > 0.0 && beta > 0.0) {
        return Err(Error::Domain(format!(
            "Gamma-Gamma shapes must be > 0, got ({alpha}, {beta})"
        )));
    }
    let x = Gamma::new(alpha, 1.0 / alpha).map_err(|e| Error::Domain(e.to_string()))?;
    let y = Gamma::new(beta, 1.0 / beta).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(x.sample(rng) * y.sample(rng))
}

/// Nakagami-m amplitude with `E[g²] = omega`.
pub fn sample_nakagami<R: Rng + ?Sized>(m: f64, omega: f64, rng: &mut R) -> Result<f64> {
    if !(m >= 0.5) {
        return Err(Error::Domain(format!("Nakagami m must be >= 0.5, got {m}")));
    }
    if !(omega > 0.0) {
        return Err(Error::Domain(format!("Nakagami omega must be > 0, got {omega}")));
    }
    let g = Gamma::new(m, omega / m).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(g.sample(rng).sqrt())
}

/// Deterministic optical link gain, dB (amplitude domain).
pub fn fso_link_gain_db(p: &FsoLinkParams) -> f64 {
    0.5 * (p.tx_gain_db + p.rx_gain_db
        - p.free_space_loss_db
        - p.atmospheric_loss_db
        - p.lens_loss_db
        - p.system_margin_db)
}

/// Received SNR at the HAP after equal-gain combining over the apertures.
pub fn fso_snr(p: &FsoLinkParams, fades: &[f64]) -> f64 {
    let hl = db_to_linear(fso_link_gain_db(p));
    let egc: f64 = fades.iter().map(|f| hl * f).sum();
    p.mean_snr() * egc * egc
}

pub fn fso_rate(bandwidth_hz: f64, snr: f64) -> f64 {
    bandwidth_hz * (1.0 + snr).log2()
}

/// Deterministic RF loss component at distance `d` metres, dB (amplitude domain).
pub fn rf_gain_db(p: &RfLinkParams, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::Domain(format!("link distance must be > 0, got {d}")));
    }
    let four_pi = 4.0 * std::f64::consts::PI;
    Ok(p.hap_gain_db
        + p.rx_gain_db
        + 0.5 * (20.0 * p.lambda_m.log10() - 10.0 * p.path_loss_exp * d.log10() - 20.0 * four_pi.log10()))
}

/// Per-subcarrier SNR for linear channel amplitude `h`.
pub fn rf_subcarrier_snr(p: &RfLinkParams, h: f64) -> f64 {
    p.power_w * h * h / (p.subcarrier_bandwidth() * p.noise_psd)
}

/// Cluster rate with `n` subcarriers and linear channel amplitude `h`.
pub fn rf_rate(n: usize, p: &RfLinkParams, h: f64) -> Result<f64> {
    if n > p.subcarriers {
        return Err(Error::Domain(format!(
            "{n} subcarriers requested, only {} exist",
            p.subcarriers
        )));
    }
    Ok(n as f64 * p.subcarrier_bandwidth() * (1.0 + rf_subcarrier_snr(p, h)).log2())
}

/// Applies the relay flow constraint: the clusters share at most `r_fso`,
/// scaled proportionally when the optical hop is the bottleneck.
pub fn effective_rates(r_fso: f64, raw: &[f64]) -> RateSplit {
    let sum: f64 = raw.iter().sum();
    if sum <= 0.0 {
        return RateSplit {
            r_total: 0.0,
            per_cluster: vec![0.0; raw.len()],
            fso_bottleneck: false,
        };
    }
    if sum <= r_fso {
        RateSplit {
            r_total: sum,
            per_cluster: raw.to_vec(),
            fso_bottleneck: false,
        }
    } else {
        RateSplit {
            r_total: r_fso,
            per_cluster: raw.iter().map(|r| r / sum * r_fso).collect(),
            fso_bottleneck: true,
        }
    }
}

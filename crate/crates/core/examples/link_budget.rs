//! FSO feeder link and RF access link budgets with fading, and the
//! decode-and-forward rate split at the HAP.

use leohap::channel::{
    db_to_linear, effective_rates, fso_link_gain_db, fso_rate, fso_snr, rf_gain_db, rf_rate, sample_gamma_gamma,
    sample_nakagami, FsoLinkParams, RfLinkParams,
};
use leohap::rng::{substream, Stream};

fn main() -> leohap::Result<()> {
    let fso = FsoLinkParams::default();
    let rf = RfLinkParams::default();
    let mut rng = substream(3, Stream::Fading);

    println!("FSO per-aperture gain: {:.2} dB", fso_link_gain_db(&fso));
    println!("FSO mean SNR: {:.3e}", fso.mean_snr());
    let fades = (0..fso.apertures)
        .map(|_| sample_gamma_gamma(fso.gg_alpha, fso.gg_beta, &mut rng))
        .collect::<leohap::Result<Vec<_>>>()?;
    let r_fso = fso_rate(fso.bandwidth_hz, fso_snr(&fso, &fades));
    println!("FSO rate with fades {fades:.3?}: {:.3e} bit/s", r_fso);

    let mut raw = Vec::new();
    for (d, n) in [(20_500.0, 32), (28_000.0, 32)] {
        let gain = db_to_linear(rf_gain_db(&rf, d)?);
        let h = gain * sample_nakagami(rf.nakagami_m, rf.nakagami_omega, &mut rng)?;
        let r = rf_rate(n, &rf, h)?;
        println!("RF cluster at {d} m with {n} subcarriers: {r:.3e} bit/s");
        raw.push(r);
    }
    let split = effective_rates(r_fso, &raw);
    println!(
        "delivered {:.3e} bit/s (FSO bottleneck: {})",
        split.r_total, split.fso_bottleneck
    );
    // A starved feeder link scales every cluster down proportionally.
    let starved = effective_rates(raw.iter().sum::<f64>() / 2.0, &raw);
    println!("with half the needed feeder rate: {:.3?}", starved.per_cluster);
    Ok(())
}

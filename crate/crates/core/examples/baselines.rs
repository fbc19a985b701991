//! Runs the three heuristic controllers on the desk scenario.

use std::path::PathBuf;

use leohap::harness::{run_baseline, ExperimentConfig, BASELINES};

fn main() -> leohap::Result<()> {
    let config_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/desk.toml");
    let cfg = ExperimentConfig::load(&config_path)?;
    let dir = std::env::temp_dir().join("leohap_baselines");
    println!("{:>16} {:>12} {:>10} {:>8} {:>8}", "method", "f1_mean", "f1_std", "f2", "f2_std");
    for name in BASELINES {
        let s = run_baseline(&cfg, name, 50, &dir.join(name))?;
        println!(
            "{:>16} {:>12.4e} {:>10.2e} {:>8.2} {:>8.2}",
            name, s.f1_mean, s.f1_std, s.f2_mean, s.f2_std
        );
    }
    Ok(())
}

//! Trains the masked TQC agent on the desk scenario, evaluates it and
//! compares against the random baseline. Writes everything under a temp dir
//! unless a directory is given as the first argument.

use std::path::PathBuf;

use leohap::harness::{emit_plot_data, run_baseline, run_eval, run_training, validate_trace, ExperimentConfig};

fn main() -> leohap::Result<()> {
    let dir: PathBuf = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("leohap_desk"));
    let config_path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/desk.toml");
    let mut cfg = ExperimentConfig::load(&config_path)?;
    cfg.run.out_dir = dir.clone();

    let trained = run_training(&cfg)?;
    let n = trained.episodes.len();
    let head: f64 = trained.episodes[..n / 5].iter().map(|e| e.total_reward).sum::<f64>() / (n / 5) as f64;
    let tail: f64 = trained.episodes[n - n / 5..].iter().map(|e| e.total_reward).sum::<f64>() / (n / 5) as f64;
    println!("mean episode reward: first 20% {head:.3}, last 20% {tail:.3}");

    let eval = run_eval(&cfg, &trained.checkpoint, cfg.run.eval_episodes, &dir.join("eval"))?;
    let random = run_baseline(&cfg, "random", cfg.run.eval_episodes, &dir.join("random"))?;
    for s in [&eval, &random] {
        println!(
            "{:>8}: f1 {:.4e} ± {:.2e} bit/s, f2 {:.2} ± {:.2}",
            s.method, s.f1_mean, s.f1_std, s.f2_mean, s.f2_std
        );
    }
    let audit = validate_trace(&dir.join("steps.jsonl"))?;
    println!("training trace: {} steps, {} violations", audit.steps, audit.violations.len());
    let plots = emit_plot_data(&dir)?;
    println!("plot data: {}", plots.reward_curve.display());
    Ok(())
}

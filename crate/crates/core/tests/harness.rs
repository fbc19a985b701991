//! End-to-end harness checks on small runs.

use std::path::Path;

use leohap::env::StepRecord;
use leohap::geometry::ConstellationEntry;
use leohap::harness::{emit_plot_data, run_baseline, run_eval, run_training, validate_trace, ExperimentConfig};
use leohap::tuner::TunerMode;

fn small(dir: &Path, episodes: usize) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.scenario.steps_per_episode = 10;
    cfg.agent.hidden = vec![16, 16];
    cfg.agent.hyperparams.batch_size = 32;
    cfg.agent.hyperparams.warmup_steps = 32;
    cfg.tuner.mode = TunerMode::Scripted;
    cfg.tuner.interval = 2;
    cfg.run.episodes = episodes;
    cfg.run.checkpoint_every = 2;
    cfg.run.out_dir = dir.to_path_buf();
    cfg
}

fn read_steps(path: &Path) -> Vec<StepRecord> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

#[test]
fn zero_episodes_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_training(&small(dir.path(), 0)).unwrap();
    assert!(out.episodes.is_empty());
    let text = std::fs::read_to_string(dir.path().join("episodes.csv")).unwrap();
    assert_eq!(text.lines().count(), 1);
    assert!(text.starts_with("episode,total_reward"));
}

#[test]
fn episode_records_fold_from_steps() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_training(&small(dir.path(), 5)).unwrap();
    let steps = read_steps(&dir.path().join("steps.jsonl"));
    assert_eq!(steps.len(), 50);
    for rec in &out.episodes {
        let ep: Vec<&StepRecord> = steps.iter().filter(|s| s.episode == rec.episode - 1).collect();
        let reward: f64 = ep.iter().map(|s| s.reward).sum();
        let f1: f64 = ep.iter().map(|s| s.r_total).sum();
        let handovers = ep.iter().filter(|s| s.handover).count();
        assert_eq!(reward, rec.total_reward);
        assert_eq!(f1, rec.f1_sum);
        assert_eq!(handovers, rec.f2);
        assert!(rec.f2 < 10);
    }
    assert!(validate_trace(&dir.path().join("steps.jsonl")).unwrap().is_clean());
    let tuning = std::fs::read_to_string(dir.path().join("tuning.jsonl")).unwrap();
    // Tuning after episodes 2 and 4 of 5.
    assert_eq!(tuning.lines().count(), 2);
    assert!(dir.path().join("checkpoints/episode_000002.json").is_file());
    assert!(dir.path().join("checkpoints/final.json").is_file());
}

#[test]
fn evaluation_is_reproducible_and_consistent() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path(), 3);
    let out = run_training(&cfg).unwrap();
    let a = run_eval(&cfg, &out.checkpoint, 4, &dir.path().join("ea")).unwrap();
    let b = run_eval(&cfg, &out.checkpoint, 4, &dir.path().join("eb")).unwrap();
    assert_eq!(a, b);
    let steps = read_steps(&dir.path().join("ea/steps.jsonl"));
    let recount: usize = steps.iter().filter(|s| s.handover).count();
    let total: usize = a.per_episode.iter().map(|o| o.f2).sum();
    assert_eq!(recount, total);
    let one = run_eval(&cfg, &out.checkpoint, 1, &dir.path().join("e1")).unwrap();
    assert_eq!(one.f2_std, 0.0);
    assert_eq!(one.f1_std, 0.0);
}

#[test]
fn eval_rejects_mismatched_checkpoint() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path(), 1);
    let out = run_training(&cfg).unwrap();
    let mut other = cfg.clone();
    other.scenario.clusters[0].users = 4;
    let err = run_eval(&other, &out.checkpoint, 1, &dir.path().join("bad")).unwrap_err();
    assert!(matches!(err, leohap::Error::Contract(_)), "{err}");
}

#[test]
fn random_baseline_switch_rate() {
    // Three near-geostationary satellites, all in view for the whole episode.
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path(), 1);
    cfg.scenario.steps_per_episode = 50;
    cfg.scenario.constellation = [-0.05, 0.0, 0.05]
        .into_iter()
        .map(|phase| ConstellationEntry::Single {
            altitude_m: 3.5786e7,
            inclination_rad: 0.0,
            raan_rad: 0.0,
            phase_rad: phase,
        })
        .collect();
    let s = run_baseline(&cfg, "random", 200, dir.path()).unwrap();
    // Every slot is an independent uniform draw over 3 satellites.
    let rate = s.f2_mean / 50.0;
    assert!((rate - 2.0 / 3.0).abs() < 0.02, "switch rate {rate}");
    let sticky = run_baseline(&cfg, "sticky", 5, &dir.path().join("sticky")).unwrap();
    assert_eq!(sticky.f2_mean, 0.0);
}

#[test]
fn plot_data_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small(dir.path(), 6);
    let out = run_training(&cfg).unwrap();
    run_eval(&cfg, &out.checkpoint, 2, &dir.path().join("eval")).unwrap();
    run_baseline(&cfg, "sticky", 2, &dir.path().join("sticky")).unwrap();
    let files = emit_plot_data(dir.path()).unwrap();
    let rows = std::fs::read_to_string(&files.reward_curve).unwrap().lines().count();
    assert_eq!(rows, 7);
    let handovers = std::fs::read_to_string(&files.handover_curve).unwrap();
    assert!(handovers.starts_with("episode,f2,rolling_mean"));
    let bars = std::fs::read_to_string(files.bar_summary.unwrap()).unwrap();
    assert_eq!(bars.lines().count(), 3);
    assert!(bars.contains("tqc") && bars.contains("sticky"));
}

#[test]
fn shipped_configs_load() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs");
    for name in ["desk.toml", "reference.toml"] {
        let cfg = ExperimentConfig::load(&root.join(name)).unwrap();
        let text = cfg.to_toml().unwrap();
        assert_eq!(ExperimentConfig::parse(&text, Path::new("x.toml")).unwrap(), cfg);
    }
    let reference = ExperimentConfig::load(&root.join("reference.toml")).unwrap();
    let elements = leohap::geometry::expand_constellation(&reference.scenario.constellation).unwrap();
    assert_eq!(elements.len(), 110);
    assert_eq!(elements.iter().filter(|e| e.altitude == 5e5).count(), 80);
    assert_eq!(reference.scenario.clusters.len(), 3);
    assert_eq!(reference.scenario.steps_per_episode, 60);
    assert_eq!(reference.run.episodes, 1000);
    assert_eq!(reference.agent.hidden, vec![256, 256, 128]);
}

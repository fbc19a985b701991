//! Plot-ready CSVs from a run directory.
//!
//! Column orders:
//! - `reward_curve.csv`: `episode,total_reward,rolling_mean`
//! - `handover_curve.csv`: `episode,f2,rolling_mean`
//! - `bar_summary.csv`: `method,f1_mean,f1_std,f2_mean,f2_std`

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};

use super::csv_error;
use super::evaluate::EvalSummary;

pub const ROLLING_WINDOW: usize = 20;

/// Trailing mean over up to `window` values; early entries use what exists.
pub fn rolling_mean(xs: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let mut out = Vec::with_capacity(xs.len());
    let mut sum = 0.0;
    for i in 0..xs.len() {
        sum += xs[i];
        if i >= w {
            sum -= xs[i - w];
        }
        out.push(sum / (i + 1).min(w) as f64);
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotFiles {
    pub reward_curve: PathBuf,
    pub handover_curve: PathBuf,
    /// Present when at least one `summary.json` was found.
    pub bar_summary: Option<PathBuf>,
}

#[derive(Deserialize)]
struct EpisodeRow {
    episode: usize,
    total_reward: f64,
    f2: usize,
}

fn summaries(dir: &Path) -> Result<Vec<EvalSummary>> {
    let mut paths = Vec::new();
    let top = dir.join("summary.json");
    if top.is_file() {
        paths.push(top);
    }
    let mut subdirs: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subdirs.sort();
    paths.extend(subdirs.into_iter().map(|d| d.join("summary.json")).filter(|p| p.is_file()));
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p).map_err(|e| Error::io(p, e))?;
            serde_json::from_str(&text).map_err(|e| Error::Parse {
                path: p.clone(),
                message: e.to_string(),
            })
        })
        .collect()
}

/// Reads `episodes.csv` (and any `summary.json` in `dir` or its immediate
/// subdirectories) and writes the plot CSVs next to them.
pub fn emit_plot_data(dir: &Path) -> Result<PlotFiles> {
    let episodes = dir.join("episodes.csv");
    if !episodes.is_file() {
        return Err(Error::io(
            &episodes,
            std::io::Error::new(std::io::ErrorKind::NotFound, "episode log not found"),
        ));
    }
    let mut reader = csv::Reader::from_path(&episodes).map_err(|e| csv_error(&episodes, e))?;
    let rows: Vec<EpisodeRow> = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| csv_error(&episodes, e))?;

    let rewards: Vec<f64> = rows.iter().map(|r| r.total_reward).collect();
    let handovers: Vec<f64> = rows.iter().map(|r| r.f2 as f64).collect();
    let write_curve = |name: &str, col: &str, values: &[f64]| -> Result<PathBuf> {
        let path = dir.join(name);
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
        w.write_record(["episode", col, "rolling_mean"]).map_err(|e| csv_error(&path, e))?;
        for (r, (v, m)) in rows.iter().zip(values.iter().zip(rolling_mean(values, ROLLING_WINDOW))) {
            w.write_record([r.episode.to_string(), v.to_string(), m.to_string()])
                .map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        Ok(path)
    };
    let reward_curve = write_curve("reward_curve.csv", "total_reward", &rewards)?;
    let handover_curve = write_curve("handover_curve.csv", "f2", &handovers)?;

    let found = summaries(dir)?;
    let bar_summary = if found.is_empty() {
        None
    } else {
        let path = dir.join("bar_summary.csv");
        let mut w = csv::Writer::from_path(&path).map_err(|e| csv_error(&path, e))?;
        w.write_record(["method", "f1_mean", "f1_std", "f2_mean", "f2_std"])
            .map_err(|e| csv_error(&path, e))?;
        for s in &found {
            w.write_record([
                s.method.clone(),
                s.f1_mean.to_string(),
                s.f1_std.to_string(),
                s.f2_mean.to_string(),
                s.f2_std.to_string(),
            ])
            .map_err(|e| csv_error(&path, e))?;
        }
        w.flush().map_err(|e| Error::io(&path, e))?;
        Some(path)
    };
    Ok(PlotFiles {
        reward_curve,
        handover_curve,
        bar_summary,
    })
}

use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::env::StepRecord;
use crate::error::{Error, Result};

/// Findings of a post-run audit over a trajectory log.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceReport {
    pub steps: usize,
    pub episodes: usize,
    pub violations: Vec<String>,
}

impl TraceReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks every step record for: allocation summing to the subcarrier
/// count, serving satellite among the visible set, user indices in range,
/// and handover flags and counters consistent with the satellite sequence.
pub fn audit(records: &[StepRecord]) -> TraceReport {
    let mut report = TraceReport {
        steps: records.len(),
        ..Default::default()
    };
    let v = &mut report.violations;
    let mut prev: Option<&StepRecord> = None;
    for r in records {
        let at = format!("episode {} t {}", r.episode, r.t);
        let total: usize = r.n.iter().sum();
        if total != r.subcarriers {
            v.push(format!("{at}: allocation sums to {total}, expected {}", r.subcarriers));
        }
        if !r.coverage_gap && !r.visible.contains(&r.s_t) {
            v.push(format!("{at}: satellite {} not in visible set {:?}", r.s_t, r.visible));
        }
        if r.u.len() != r.user_counts.len() {
            v.push(format!("{at}: {} user choices for {} clusters", r.u.len(), r.user_counts.len()));
        }
        for (i, (&u, &count)) in r.u.iter().zip(&r.user_counts).enumerate() {
            if u >= count {
                v.push(format!("{at}: user {u} out of range in cluster {i} ({count} users)"));
            }
        }
        let same_episode = prev.filter(|p| p.episode == r.episode);
        let expected_count = same_episode.map_or(0, |p| p.n_t) + usize::from(r.handover);
        if r.n_t != expected_count {
            v.push(format!("{at}: handover counter {} but recount gives {expected_count}", r.n_t));
        }
        if let Some(p) = same_episode {
            if r.handover != (r.s_t != p.s_t) {
                v.push(format!("{at}: handover flag disagrees with satellite change {} -> {}", p.s_t, r.s_t));
            }
        }
        if same_episode.is_none() {
            report.episodes += 1;
        }
        prev = Some(r);
    }
    report
}

/// Reads a JSONL trajectory and audits it.
pub fn validate_trace(path: &Path) -> Result<TraceReport> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut records = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        records.push(serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            message: format!("line {}: {e}", i + 1),
        })?);
    }
    Ok(audit(&records))
}

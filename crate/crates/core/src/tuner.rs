//! Periodic hyperparameter meta-controller.
//!
//! Every `interval` episodes the trainer hands the current hyperparameters,
//! a window of recent episode rewards and the training progress to a
//! [`Tuner`]. The scripted mode applies two fixed rules; the LLM mode sends a
//! prompt to an OpenAI-style chat endpoint and clamps whatever comes back.
//! Every failure degrades to "no change".

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::agent::{Hyperparams, TUNABLE};
use crate::error::{Error, Result};

pub const PROMPT_VERSION: &str = "leohap-tuner-v1";

/// Returned by [`fetch_llm`] when the endpoint could not be used.
pub const LLM_SENTINEL: &str = "<llm-unavailable>";

/// Coefficient-of-variation threshold for the oscillation rule.
pub const OSCILLATION_CV: f64 = 0.5;
/// Relative-change threshold for the plateau rule.
pub const PLATEAU_REL: f64 = 0.02;
const DIV_EPS: f64 = 1e-8;

/// Inclusive `[min, max]` range per tunable parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Bounds {
    pub ranges: BTreeMap<String, [f64; 2]>,
}

impl Bounds {
    /// Conservative defaults; the quantile count is pinned to `num_quantiles`.
    pub fn defaults(num_quantiles: usize) -> Self {
        let m = num_quantiles as f64;
        let ranges = [
            ("discount", [0.9, 0.9999]),
            ("learning_rate", [1e-5, 1e-2]),
            ("temperature", [0.0, 1.0]),
            ("soft_update", [1e-3, 0.1]),
            ("drop_per_critic", [0.0, (m - 1.0).max(0.0)]),
            ("e_decay", [0.05, 1.0]),
            ("batch_size", [32.0, 1024.0]),
            ("num_quantiles", [m, m]),
        ];
        Self {
            ranges: ranges.into_iter().map(|(k, r)| (k.to_string(), r)).collect(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (k, [lo, hi]) in &self.ranges {
            if !TUNABLE.contains(&k.as_str()) {
                return Err(Error::Config(format!("bounds name unknown parameter `{k}`")));
            }
            if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
                return Err(Error::Config(format!("bounds for `{k}` must satisfy min <= max")));
            }
        }
        for k in TUNABLE {
            if !self.ranges.contains_key(k) {
                return Err(Error::Config(format!("bounds missing parameter `{k}`")));
            }
        }
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<[f64; 2]> {
        self.ranges.get(key).copied()
    }

    /// Fills in defaults for any parameter the user left out.
    pub fn with_defaults(mut self, num_quantiles: usize) -> Self {
        for (k, r) in Self::defaults(num_quantiles).ranges {
            self.ranges.entry(k).or_insert(r);
        }
        self
    }
}

/// Input to one tuning decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningRequest {
    pub theta: Hyperparams,
    /// Most recent episode rewards, oldest first.
    pub history: Vec<f64>,
    /// Fraction of training completed, in `[0, 1]`.
    pub progress: f64,
}

impl TuningRequest {
    /// Keeps the last `window` rewards and clamps progress into `[0, 1]`.
    pub fn new(theta: Hyperparams, rewards: &[f64], window: usize, progress: f64) -> Self {
        let start = rewards.len().saturating_sub(window);
        Self {
            theta,
            history: rewards[start..].to_vec(),
            progress: if progress.is_finite() { progress.clamp(0.0, 1.0) } else { 0.0 },
        }
    }
}

/// Deterministic prompt text for a request.
pub fn build_prompt(req: &TuningRequest, bounds: &Bounds) -> String {
    let mut p = String::new();
    let _ = writeln!(p, "[{PROMPT_VERSION}]");
    p.push_str(
        "You tune hyperparameters of a truncated-quantile-critics agent that manages \
         satellite handover and subcarrier allocation for a high-altitude platform.\n\n",
    );
    p.push_str("Current hyperparameters (name | value | min | max):\n");
    for key in TUNABLE {
        let v = req.theta.get(key).unwrap_or(f64::NAN);
        let [lo, hi] = bounds.get(key).unwrap_or([f64::NAN, f64::NAN]);
        let frozen = if lo == hi { " (frozen)" } else { "" };
        let _ = writeln!(p, "{key} | {v} | {lo} | {hi}{frozen}");
    }
    p.push_str("\nRecent episode rewards (oldest first):\n");
    if req.history.is_empty() {
        p.push_str("no history yet\n");
    } else {
        let items: Vec<String> = req.history.iter().map(|r| r.to_string()).collect();
        let _ = writeln!(p, "{}", items.join(", "));
    }
    let _ = writeln!(p, "\nTraining progress: {}", req.progress);
    p.push_str(
        "\nReply with a single flat JSON object mapping parameter names to numbers, \
         for example {\"learning_rate\": 0.0001}. Include only parameters you want to \
         change and keep each value within its bounds.\n",
    );
    p
}

/// Hex SHA-256 of a prompt, used in the tuning log.
pub fn prompt_hash(prompt: &str) -> String {
    Sha256::digest(prompt.as_bytes())
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Result of interpreting a reply.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedUpdate {
    pub theta: Hyperparams,
    /// Keys whose requested value was moved to a bound (or pinned).
    pub clamped_keys: Vec<String>,
    /// Keys that were present but not numeric.
    pub rejected_keys: Vec<String>,
    /// No JSON object could be extracted, or the result was unusable.
    pub fallback: bool,
}

/// First `{...}` span in `text` that parses as a JSON object.
pub fn extract_json_object(text: &str) -> Option<serde_json::Map<String, Value>> {
    let bytes = text.as_bytes();
    for (start, _) in text.match_indices('{') {
        let mut depth = 0usize;
        let mut in_str = false;
        let mut escaped = false;
        for (off, &c) in bytes[start..].iter().enumerate() {
            if in_str {
                match c {
                    _ if escaped => escaped = false,
                    b'\\' => escaped = true,
                    b'"' => in_str = false,
                    _ => {}
                }
                continue;
            }
            match c {
                b'"' => in_str = true,
                b'{' => depth += 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        if let Ok(Value::Object(m)) = serde_json::from_str(&text[start..=start + off]) {
                            return Some(m);
                        }
                        break;
                    }
                }
                _ => {}
            }
        }
    }
    None
}

fn canonical_key(key: &str) -> Option<&'static str> {
    let k = key.trim().to_ascii_lowercase();
    let name = match k.as_str() {
        "discount" | "gamma" | "discount_factor" => "discount",
        "learning_rate" | "lr" => "learning_rate",
        "temperature" | "alpha" | "entropy_temperature" => "temperature",
        "soft_update" | "tau" | "soft_update_rate" => "soft_update",
        "drop_per_critic" | "d" | "dropped_quantiles" => "drop_per_critic",
        "e_decay" | "epsilon_decay" | "exploration_decay" => "e_decay",
        "batch_size" | "batch" => "batch_size",
        "num_quantiles" | "quantiles" | "m" => "num_quantiles",
        _ => return None,
    };
    Some(name)
}

fn clamp_into(theta: &mut Hyperparams, key: &str, value: f64, bounds: &Bounds, current: &Hyperparams) -> bool {
    let [lo, mut hi] = bounds.get(key).unwrap_or([value, value]);
    let (lo, hi) = match key {
        // The quantile count is fixed for the lifetime of the networks.
        "num_quantiles" => {
            let m = current.num_quantiles as f64;
            (m, m)
        }
        "drop_per_critic" => {
            hi = hi.min(current.num_quantiles.saturating_sub(1) as f64);
            (lo.min(hi), hi)
        }
        "batch_size" => {
            hi = hi.min(current.buffer_capacity as f64);
            (lo.min(hi), hi)
        }
        _ => (lo, hi),
    };
    let mut v = value.clamp(lo, hi);
    if Hyperparams::is_integer(key) {
        v = v.round().clamp(lo.ceil(), hi.floor().max(lo.ceil()));
    }
    theta.set(key, v);
    v != value
}

/// Applies the first JSON object in `reply` to `current`, clamping every
/// recognised key to `bounds`.
pub fn parse_and_clamp(reply: &str, current: &Hyperparams, bounds: &Bounds) -> ParsedUpdate {
    let unchanged = || ParsedUpdate {
        theta: current.clone(),
        clamped_keys: vec![],
        rejected_keys: vec![],
        fallback: true,
    };
    let Some(obj) = extract_json_object(reply) else {
        log::warn!("tuner reply contained no JSON object; keeping hyperparameters");
        return unchanged();
    };
    let mut theta = current.clone();
    let mut clamped = Vec::new();
    let mut rejected = Vec::new();
    for (raw_key, value) in &obj {
        let Some(key) = canonical_key(raw_key) else { continue };
        match value.as_f64().filter(|v| v.is_finite()) {
            Some(v) => {
                if clamp_into(&mut theta, key, v, bounds, current) {
                    clamped.push(key.to_string());
                }
            }
            None => rejected.push(key.to_string()),
        }
    }
    if theta.validate().is_err() {
        log::warn!("tuner update produced invalid hyperparameters; keeping current values");
        return unchanged();
    }
    clamped.sort();
    clamped.dedup();
    rejected.sort();
    rejected.dedup();
    ParsedUpdate {
        theta,
        clamped_keys: clamped,
        rejected_keys: rejected,
        fallback: false,
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Rule-based stand-in for the LLM: halve the learning rate when rewards
/// oscillate, stretch the exploration schedule when they plateau.
pub fn scripted_tune(req: &TuningRequest, bounds: &Bounds) -> Hyperparams {
    let mut theta = req.theta.clone();
    let h = &req.history;
    if h.len() < 2 {
        return theta;
    }
    let mu = mean(h);
    let sd = (h.iter().map(|r| (r - mu).powi(2)).sum::<f64>() / h.len() as f64).sqrt();
    let cv = if sd == 0.0 { 0.0 } else { sd / mu.abs() };
    let half = h.len() / 2;
    let first = mean(&h[..half]);
    let last = mean(&h[h.len() - half..]);
    if cv > OSCILLATION_CV {
        clamp_into(&mut theta, "learning_rate", req.theta.learning_rate / 2.0, bounds, &req.theta);
    } else if (last - first).abs() / (first.abs() + DIV_EPS) < PLATEAU_REL {
        clamp_into(&mut theta, "e_decay", req.theta.e_decay * 1.1, bounds, &req.theta);
    }
    theta
}

/// Connection settings for the chat endpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct LlmEndpoint {
    pub url: String,
    pub api_key: String,
    pub model: String,
    pub timeout: Duration,
}

impl LlmEndpoint {
    /// Reads `LLM_API_URL`, `LLM_API_KEY` and `LLM_MODEL`.
    pub fn from_env() -> Option<Self> {
        let url = std::env::var("LLM_API_URL").ok().filter(|u| !u.is_empty())?;
        Some(Self {
            url,
            api_key: std::env::var("LLM_API_KEY").unwrap_or_default(),
            model: std::env::var("LLM_MODEL").unwrap_or_else(|_| "default".into()),
            timeout: Duration::from_secs(30),
        })
    }
}

fn request_once(agent: &ureq::Agent, ep: &LlmEndpoint, body: &str) -> std::result::Result<String, String> {
    let mut resp = agent
        .post(&ep.url)
        .header("Authorization", &format!("Bearer {}", ep.api_key))
        .header("Content-Type", "application/json")
        .send(body)
        .map_err(|e| e.to_string())?;
    let text = resp.body_mut().read_to_string().map_err(|e| e.to_string())?;
    let v: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    v.pointer("/choices/0/message/content")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| "response has no choices[0].message.content".into())
}

/// Sends `prompt` to the endpoint; returns the assistant text, or
/// [`LLM_SENTINEL`] after one failed retry.
pub fn fetch_llm(prompt: &str, ep: &LlmEndpoint) -> String {
    if ep.timeout.is_zero() {
        log::warn!("tuner endpoint timeout is zero; skipping request");
        return LLM_SENTINEL.to_string();
    }
    let body = serde_json::json!({
        "model": ep.model,
        "messages": [{"role": "user", "content": prompt}],
        "temperature": 0,
    })
    .to_string();
    let agent: ureq::Agent = ureq::Agent::config_builder()
        .timeout_global(Some(ep.timeout))
        .build()
        .into();
    for attempt in 0..2 {
        match request_once(&agent, ep, &body) {
            Ok(text) => return text,
            Err(e) => log::warn!("tuner request attempt {} failed: {e}", attempt + 1),
        }
    }
    LLM_SENTINEL.to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TunerMode {
    #[default]
    None,
    Scripted,
    Llm,
}

impl std::str::FromStr for TunerMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "scripted" => Ok(Self::Scripted),
            "llm" => Ok(Self::Llm),
            _ => Err(Error::Config(format!("unknown tuner mode `{s}` (valid: none, scripted, llm)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TunerConfig {
    pub mode: TunerMode,
    /// Episodes between tuning calls.
    pub interval: usize,
    /// Number of recent rewards shown to the tuner.
    pub window: usize,
    /// Missing entries fall back to [`Bounds::defaults`].
    pub bounds: Option<Bounds>,
}

impl Default for TunerConfig {
    fn default() -> Self {
        Self {
            mode: TunerMode::None,
            interval: 50,
            window: 20,
            bounds: None,
        }
    }
}

impl TunerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.interval == 0 {
            return Err(Error::Config("tuner interval must be >= 1".into()));
        }
        if self.window == 0 {
            return Err(Error::Config("tuner window must be >= 1".into()));
        }
        Ok(())
    }

    pub fn resolved_bounds(&self, num_quantiles: usize) -> Result<Bounds> {
        let b = self
            .bounds
            .clone()
            .map(|b| b.with_defaults(num_quantiles))
            .unwrap_or_else(|| Bounds::defaults(num_quantiles));
        b.validate()?;
        Ok(b)
    }
}

/// One line of the tuning log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TuningLogEntry {
    pub episode: usize,
    pub prompt_hash: String,
    pub reply_excerpt: String,
    pub theta_before: Hyperparams,
    pub theta_after: Hyperparams,
    pub clamped_keys: Vec<String>,
    pub fallback: bool,
}

const EXCERPT_CHARS: usize = 200;

/// Stateful tuner used by the trainer.
#[derive(Debug, Clone)]
pub struct Tuner {
    pub config: TunerConfig,
    bounds: Bounds,
    endpoint: Option<LlmEndpoint>,
}

impl Tuner {
    pub fn new(config: TunerConfig, num_quantiles: usize, endpoint: Option<LlmEndpoint>) -> Result<Self> {
        config.validate()?;
        let bounds = config.resolved_bounds(num_quantiles)?;
        Ok(Self { config, bounds, endpoint })
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    /// Whether tuning runs after completed episode `episode` (1-based) of `total`.
    pub fn due(&self, episode: usize, total: usize) -> bool {
        self.config.mode != TunerMode::None && episode % self.config.interval == 0 && episode < total
    }

    /// Produces the next hyperparameters and a log entry.
    pub fn tune(&self, episode: usize, req: &TuningRequest) -> TuningLogEntry {
        let prompt = build_prompt(req, &self.bounds);
        let (reply, update) = match self.config.mode {
            TunerMode::None => (String::new(), None),
            TunerMode::Scripted => ("scripted".to_string(), Some(scripted_tune(req, &self.bounds))),
            TunerMode::Llm => {
                let reply = match &self.endpoint {
                    Some(ep) => fetch_llm(&prompt, ep),
                    None => {
                        log::warn!("tuner mode is llm but LLM_API_URL is not set");
                        LLM_SENTINEL.to_string()
                    }
                };
                let parsed = parse_and_clamp(&reply, &req.theta, &self.bounds);
                let entry = TuningLogEntry {
                    episode,
                    prompt_hash: prompt_hash(&prompt),
                    reply_excerpt: reply.chars().take(EXCERPT_CHARS).collect(),
                    theta_before: req.theta.clone(),
                    theta_after: parsed.theta,
                    clamped_keys: parsed.clamped_keys,
                    fallback: parsed.fallback,
                };
                return entry;
            }
        };
        TuningLogEntry {
            episode,
            prompt_hash: prompt_hash(&prompt),
            reply_excerpt: reply,
            theta_before: req.theta.clone(),
            theta_after: update.unwrap_or_else(|| req.theta.clone()),
            clamped_keys: vec![],
            fallback: false,
        }
    }
}

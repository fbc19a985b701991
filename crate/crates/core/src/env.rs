//! The downlink MDP: constellation, HAP and ground clusters stepped one slot
//! at a time.
//!
//! Each slot the agent chooses the serving satellite, the OFDM subcarrier
//! split across clusters, and one user per cluster. The environment then
//! samples fading, applies the relay flow constraint, accumulates delivered
//! bits, and advances orbits and HAP position.
//!
//! Random draws per slot are independent of the action taken, so two
//! policies evaluated on the same `(seed, episode)` see identical channels.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::agent::masking::{masked_argmax, masked_distribution, sample_index, softmax};
use crate::channel::{
    self, db_to_linear, effective_rates, fso_rate, fso_snr, rf_gain_db, rf_rate, FsoLinkParams, RateSplit,
    RfLinkParams,
};
use crate::error::{Error, Result};
use crate::geometry::{self, expand_constellation, ConstellationEntry, LocalFrame, OrbitalElements, Vec3, VisibilityMask};
use crate::mobility::{step_hap, Bounds3, GaussMarkovParams, HapState};
use crate::rng::{indexed_substream, substream, SimRng, Stream};

/// How the per-cluster user is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum UserSelection {
    /// Argmax of the policy's per-cluster user scores.
    #[default]
    Policy,
    /// Strongest current channel in each cluster.
    BestChannel,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HapConfig {
    pub altitude_m: f64,
    /// Half-extents of the operating box (east, north, up), metres.
    pub half_extent_m: [f64; 3],
    pub memory: f64,
    pub mean_velocity: [f64; 3],
    pub velocity_std: [f64; 3],
}

impl Default for HapConfig {
    fn default() -> Self {
        Self {
            altitude_m: 20_000.0,
            half_extent_m: [50_000.0, 50_000.0, 1_000.0],
            memory: 0.85,
            mean_velocity: [0.0; 3],
            velocity_std: [5.0, 5.0, 0.5],
        }
    }
}

/// A ground cluster. Coordinates are east/north metres from the anchor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterConfig {
    pub center_m: [f64; 2],
    pub radius_m: f64,
    pub users: usize,
    /// Explicit user positions; drawn uniformly in the disc when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub user_positions: Option<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub constellation: Vec<ConstellationEntry>,
    pub anchor_lat_deg: f64,
    pub anchor_lon_deg: f64,
    pub hap: HapConfig,
    pub clusters: Vec<ClusterConfig>,
    /// Slot duration, seconds.
    pub slot_s: f64,
    /// Slots per episode.
    pub steps_per_episode: usize,
    pub min_elevation_deg: f64,
    /// Reward weight on the delivered rate, per bit/s.
    pub rate_weight: f64,
    /// Reward penalty per handover.
    pub handover_weight: f64,
    /// Each episode starts at a uniform random time in `[0, epoch_jitter_s)`.
    pub epoch_jitter_s: f64,
    pub user_selection: UserSelection,
    /// Logit scale applied to satellite scores before the masked softmax.
    pub satellite_logit_scale: f64,
    /// Channel gains enter observations as `(dB - ref) / span`, clipped.
    pub obs_gain_ref_db: f64,
    pub obs_gain_span_db: f64,
    pub fso: FsoLinkParams,
    pub rf: RfLinkParams,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            constellation: vec![ConstellationEntry::Shell {
                count: 12,
                altitude_m: 1e6,
                inclination_rad: 0.0,
                raan_rad: 0.0,
                phase_offset_rad: 0.0,
            }],
            anchor_lat_deg: 0.0,
            anchor_lon_deg: 0.0,
            hap: HapConfig::default(),
            clusters: vec![
                ClusterConfig {
                    center_m: [-15_000.0, 5_000.0],
                    radius_m: 5_000.0,
                    users: 3,
                    user_positions: None,
                },
                ClusterConfig {
                    center_m: [20_000.0, -10_000.0],
                    radius_m: 5_000.0,
                    users: 3,
                    user_positions: None,
                },
            ],
            slot_s: 10.0,
            steps_per_episode: 60,
            min_elevation_deg: 10.0,
            rate_weight: 1e-9,
            handover_weight: 1.0,
            epoch_jitter_s: 0.0,
            user_selection: UserSelection::Policy,
            satellite_logit_scale: 10.0,
            obs_gain_ref_db: -100.0,
            obs_gain_span_db: 20.0,
            fso: FsoLinkParams::default(),
            rf: RfLinkParams::default(),
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.clusters.is_empty() {
            return Err(Error::Config("at least one cluster is required".into()));
        }
        for (i, c) in self.clusters.iter().enumerate() {
            if c.users == 0 {
                return Err(Error::Config(format!("cluster {i} has no users")));
            }
            if let Some(pos) = &c.user_positions {
                if pos.len() != c.users {
                    return Err(Error::Config(format!(
                        "cluster {i}: {} positions for {} users",
                        pos.len(),
                        c.users
                    )));
                }
            }
            if !(c.radius_m >= 0.0) {
                return Err(Error::Config(format!("cluster {i}: radius must be >= 0")));
            }
        }
        if self.rf.subcarriers < self.clusters.len() {
            return Err(Error::Config(format!(
                "{} subcarriers cannot serve {} clusters",
                self.rf.subcarriers,
                self.clusters.len()
            )));
        }
        if self.steps_per_episode == 0 {
            return Err(Error::Config("steps_per_episode must be >= 1".into()));
        }
        if !(self.slot_s > 0.0) {
            return Err(Error::Config("slot_s must be > 0".into()));
        }
        if !(self.epoch_jitter_s >= 0.0) {
            return Err(Error::Config("epoch_jitter_s must be >= 0".into()));
        }
        if !(self.obs_gain_span_db > 0.0) {
            return Err(Error::Config("obs_gain_span_db must be > 0".into()));
        }
        if !(self.hap.altitude_m > self.hap.half_extent_m[2]) {
            return Err(Error::Config("HAP box reaches the ground".into()));
        }
        self.fso.validate()?;
        self.rf.validate()?;
        self.mobility().validate()?;
        expand_constellation(&self.constellation)?;
        Ok(())
    }

    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    pub fn user_counts(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.users).collect()
    }

    pub fn min_elevation_rad(&self) -> f64 {
        self.min_elevation_deg.to_radians()
    }

    pub fn mobility(&self) -> GaussMarkovParams {
        GaussMarkovParams {
            alpha: self.hap.memory,
            mean_velocity: self.hap.mean_velocity,
            std: self.hap.velocity_std,
            dt: self.slot_s,
            bounds: Bounds3::around([0.0, 0.0, self.hap.altitude_m], self.hap.half_extent_m),
        }
    }
}

/// Decoded per-slot decision. User indices are zero-based.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub next_sat: usize,
    pub alloc: Vec<usize>,
    pub users: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvState {
    pub t: usize,
    /// Serving satellite.
    pub sat: usize,
    pub handovers: usize,
    /// Bits delivered to each cluster so far.
    pub delivered: Vec<f64>,
    /// Linear channel amplitude per cluster and user for the coming slot.
    pub channels: Vec<Vec<f64>>,
    pub hap: HapState,
    pub sat_positions: Vec<Vec3>,
    pub mask: VisibilityMask,
    /// Simulation time of the current slot, seconds since the orbit epoch.
    pub time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepInfo {
    pub handover: bool,
    /// No satellite was visible; the connection was held with zero FSO rate.
    pub coverage_gap: bool,
    pub r_fso: f64,
    pub raw_rates: Vec<f64>,
    pub split: RateSplit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepOutcome {
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// One line of the step-level trajectory log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub episode: usize,
    pub t: usize,
    pub s_t: usize,
    pub handover: bool,
    pub n_t: usize,
    pub r_fso: f64,
    pub r_total: f64,
    pub per_cluster_rates: Vec<f64>,
    pub n: Vec<usize>,
    pub u: Vec<usize>,
    pub reward: f64,
    /// Satellites visible when the decision was taken.
    pub visible: Vec<usize>,
    pub coverage_gap: bool,
    pub subcarriers: usize,
    pub user_counts: Vec<usize>,
}

/// Episode-level objectives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Objectives {
    /// Sum of per-slot effective rates, bit/s summed over slots.
    pub f1_sum: f64,
    /// Per-slot average effective rate, bit/s.
    pub f1_mean: f64,
    /// Handovers over the episode.
    pub f2: usize,
}

/// Objectives of a complete episode from its step records.
pub fn episode_objectives(trajectory: &[StepRecord]) -> Objectives {
    let f1_sum: f64 = trajectory.iter().map(|r| r.r_total).sum();
    let f1_mean = if trajectory.is_empty() {
        0.0
    } else {
        f1_sum / trajectory.len() as f64
    };
    Objectives {
        f1_sum,
        f1_mean,
        f2: trajectory.last().map_or(0, |r| r.n_t),
    }
}

/// Splits `total` integer units in proportion to `shares` by the
/// largest-remainder rule, ties going to the lowest index.
pub fn largest_remainder(shares: &[f64], total: usize) -> Vec<usize> {
    if shares.is_empty() {
        return Vec::new();
    }
    let sum: f64 = shares.iter().sum();
    let quotas: Vec<f64> = if sum > 0.0 {
        shares.iter().map(|s| s / sum * total as f64).collect()
    } else {
        vec![total as f64 / shares.len() as f64; shares.len()]
    };
    let mut alloc: Vec<usize> = quotas.iter().map(|q| q.floor() as usize).collect();
    let assigned: usize = alloc.iter().sum();
    let mut order: Vec<usize> = (0..shares.len()).collect();
    // Stable sort keeps lower indices first among equal remainders.
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.partial_cmp(&ra).unwrap_or(std::cmp::Ordering::Equal)
    });
    for &i in order.iter().take(total.saturating_sub(assigned)) {
        alloc[i] += 1;
    }
    alloc
}

/// How the satellite block of a raw action is decoded.
pub enum SatelliteDecode<'a> {
    Argmax,
    Sample(&'a mut SimRng),
}

/// The environment instance: static scenario data plus the live state and
/// per-episode random streams.
#[derive(Debug, Clone)]
pub struct Env {
    cfg: ScenarioConfig,
    seed: u64,
    elements: Vec<OrbitalElements>,
    frame: LocalFrame,
    mobility: GaussMarkovParams,
    /// Ground users per cluster in local east/north/up metres.
    users: Vec<Vec<[f64; 3]>>,
    state: EnvState,
    fading_rng: SimRng,
    mobility_rng: SimRng,
    episode: usize,
}

impl Env {
    /// Builds the scenario and resets to episode 0.
    pub fn new(cfg: ScenarioConfig, seed: u64) -> Result<Self> {
        cfg.validate()?;
        let elements = expand_constellation(&cfg.constellation)?;
        let frame = LocalFrame::at(cfg.anchor_lat_deg.to_radians(), cfg.anchor_lon_deg.to_radians());
        let mobility = cfg.mobility();
        let mut user_rng = substream(seed, Stream::Users);
        let users = cfg
            .clusters
            .iter()
            .map(|c| match &c.user_positions {
                Some(pos) => pos.iter().map(|p| [p[0], p[1], 0.0]).collect(),
                None => (0..c.users)
                    .map(|_| {
                        let r = c.radius_m * user_rng.random::<f64>().sqrt();
                        let phi = std::f64::consts::TAU * user_rng.random::<f64>();
                        [c.center_m[0] + r * phi.cos(), c.center_m[1] + r * phi.sin(), 0.0]
                    })
                    .collect(),
            })
            .collect();
        let mut env = Self {
            state: EnvState {
                t: 0,
                sat: 0,
                handovers: 0,
                delivered: vec![],
                channels: vec![],
                hap: HapState { p: [0.0; 3], v: [0.0; 3] },
                sat_positions: vec![],
                mask: VisibilityMask::default(),
                time_s: 0.0,
            },
            fading_rng: substream(seed, Stream::Fading),
            mobility_rng: substream(seed, Stream::Mobility),
            cfg,
            seed,
            elements,
            frame,
            mobility,
            users,
            episode: 0,
        };
        env.reset(0)?;
        Ok(env)
    }

    pub fn config(&self) -> &ScenarioConfig {
        &self.cfg
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn episode(&self) -> usize {
        self.episode
    }

    pub fn num_satellites(&self) -> usize {
        self.elements.len()
    }

    pub fn users(&self) -> &[Vec<[f64; 3]>] {
        &self.users
    }

    pub fn done(&self) -> bool {
        self.state.t >= self.cfg.steps_per_episode
    }

    /// Raw action length: satellite scores, allocation logits, user scores.
    pub fn action_dim(&self) -> usize {
        self.num_satellites() + self.cfg.num_clusters() + self.cfg.user_counts().iter().sum::<usize>()
    }

    /// Observation length: `2 + 3·N_L + N_C + ΣN_U`.
    pub fn observation_dim(&self) -> usize {
        2 + 3 * self.num_satellites() + self.cfg.num_clusters() + self.cfg.user_counts().iter().sum::<usize>()
    }

    /// Starts episode `episode`; its random streams depend only on
    /// `(seed, episode)`.
    pub fn reset(&mut self, episode: usize) -> Result<&EnvState> {
        self.episode = episode;
        let ep = episode as u64;
        self.fading_rng = indexed_substream(self.seed, Stream::Fading, ep);
        self.mobility_rng = indexed_substream(self.seed, Stream::Mobility, ep);
        let mut jitter_rng = indexed_substream(self.seed, Stream::OrbitJitter, ep);
        let time_s = if self.cfg.epoch_jitter_s > 0.0 {
            jitter_rng.random::<f64>() * self.cfg.epoch_jitter_s
        } else {
            0.0
        };
        let hap = HapState {
            p: [0.0, 0.0, self.cfg.hap.altitude_m],
            v: self.cfg.hap.mean_velocity,
        };
        let (sat_positions, mask) = self.geometry_at(time_s, &hap)?;
        let sat = mask.best_visible().ok_or_else(|| {
            Error::Scenario(format!(
                "no satellite above {}° at the start of episode {episode}",
                self.cfg.min_elevation_deg
            ))
        })?;
        let channels = self.sample_channels(&hap)?;
        self.state = EnvState {
            t: 0,
            sat,
            handovers: 0,
            delivered: vec![0.0; self.cfg.num_clusters()],
            channels,
            hap,
            sat_positions,
            mask,
            time_s,
        };
        Ok(&self.state)
    }

    fn hap_inertial(&self, hap: &HapState) -> Vec3 {
        self.frame.to_inertial(hap.p)
    }

    fn geometry_at(&self, time_s: f64, hap: &HapState) -> Result<(Vec<Vec3>, VisibilityMask)> {
        let positions = self
            .elements
            .iter()
            .map(|e| geometry::propagate_satellite(e, time_s))
            .collect::<Result<Vec<_>>>()?;
        let mask = geometry::visible_set(&positions, self.hap_inertial(hap), self.cfg.min_elevation_rad())?;
        Ok((positions, mask))
    }

    /// Draws one Nakagami amplitude per user and applies the path loss from
    /// the HAP position.
    fn sample_channels(&mut self, hap: &HapState) -> Result<Vec<Vec<f64>>> {
        let rf = &self.cfg.rf;
        let mut out = Vec::with_capacity(self.users.len());
        for cluster in &self.users {
            let mut row = Vec::with_capacity(cluster.len());
            for u in cluster {
                let d = Vec3::from_array(hap.p).distance(Vec3::from_array(*u));
                let loss = db_to_linear(rf_gain_db(rf, d)?);
                let g = channel::sample_nakagami(rf.nakagami_m, rf.nakagami_omega, &mut self.fading_rng)?;
                row.push(loss * g);
            }
            out.push(row);
        }
        Ok(out)
    }

    /// Decodes a raw policy vector in `[-1, 1]^d` into a valid action.
    pub fn decode_action(&self, raw: &[f64], decode: SatelliteDecode<'_>) -> Result<Action> {
        decode_action(raw, &self.state, &self.cfg, decode)
    }

    /// Checks an action against the slot constraints.
    pub fn check_action(&self, action: &Action) -> Result<()> {
        let n_c = self.cfg.num_clusters();
        if action.alloc.len() != n_c || action.users.len() != n_c {
            return Err(Error::Contract(format!("action must cover {n_c} clusters")));
        }
        let total: usize = action.alloc.iter().sum();
        if total != self.cfg.rf.subcarriers {
            return Err(Error::Contract(format!(
                "allocation sums to {total}, expected {}",
                self.cfg.rf.subcarriers
            )));
        }
        for (i, (&u, c)) in action.users.iter().zip(&self.cfg.clusters).enumerate() {
            if u >= c.users {
                return Err(Error::Contract(format!("user {u} out of range in cluster {i}")));
            }
        }
        if self.state.mask.any() && !self.state.mask.is_visible(action.next_sat) {
            return Err(Error::Contract(format!(
                "satellite {} is not visible",
                action.next_sat
            )));
        }
        Ok(())
    }

    /// Advances one slot under `action`.
    pub fn step(&mut self, action: &Action) -> Result<StepOutcome> {
        if self.done() {
            return Err(Error::Contract("episode already finished".into()));
        }
        self.check_action(action)?;
        let cfg = &self.cfg;

        let coverage_gap = !self.state.mask.any();
        let handover = !coverage_gap && action.next_sat != self.state.sat;
        if handover {
            self.state.handovers += 1;
            self.state.sat = action.next_sat;
        }

        // Fades are drawn every slot, used or not, to keep the stream aligned.
        let fades = (0..cfg.fso.apertures)
            .map(|_| channel::sample_gamma_gamma(cfg.fso.gg_alpha, cfg.fso.gg_beta, &mut self.fading_rng))
            .collect::<Result<Vec<_>>>()?;
        let r_fso = if coverage_gap {
            0.0
        } else {
            fso_rate(cfg.fso.bandwidth_hz, fso_snr(&cfg.fso, &fades))
        };

        let raw_rates = action
            .alloc
            .iter()
            .zip(&action.users)
            .zip(&self.state.channels)
            .map(|((&n, &u), row)| rf_rate(n, &cfg.rf, row[u]))
            .collect::<Result<Vec<_>>>()?;
        let split = effective_rates(r_fso, &raw_rates);
        for (d, r) in self.state.delivered.iter_mut().zip(&split.per_cluster) {
            *d += r * cfg.slot_s;
        }
        let reward = cfg.rate_weight * split.r_total - if handover { cfg.handover_weight } else { 0.0 };

        let hap = step_hap(&self.state.hap, &self.mobility, &mut self.mobility_rng)?;
        let time_s = self.state.time_s + cfg.slot_s;
        let (sat_positions, mask) = self.geometry_at(time_s, &hap)?;
        let channels = self.sample_channels(&hap)?;
        self.state.hap = hap;
        self.state.time_s = time_s;
        self.state.sat_positions = sat_positions;
        self.state.mask = mask;
        self.state.channels = channels;
        self.state.t += 1;

        Ok(StepOutcome {
            reward,
            done: self.done(),
            info: StepInfo {
                handover,
                coverage_gap,
                r_fso,
                raw_rates,
                split,
            },
        })
    }

    /// Builds the log record for a step just taken. `prev` is the state the
    /// action was decided in.
    pub fn record(&self, prev: &EnvState, action: &Action, out: &StepOutcome) -> StepRecord {
        StepRecord {
            episode: self.episode,
            t: prev.t,
            s_t: self.state.sat,
            handover: out.info.handover,
            n_t: self.state.handovers,
            r_fso: out.info.r_fso,
            r_total: out.info.split.r_total,
            per_cluster_rates: out.info.split.per_cluster.clone(),
            n: action.alloc.clone(),
            u: action.users.clone(),
            reward: out.reward,
            visible: prev.mask.visible_indices(),
            coverage_gap: out.info.coverage_gap,
            subcarriers: self.cfg.rf.subcarriers,
            user_counts: self.cfg.user_counts(),
        }
    }

    /// Numeric encoding of the current state; see [`observe`].
    pub fn observe(&self) -> Vec<f64> {
        observe(&self.state, &self.cfg)
    }
}

/// Fixed-length feature vector:
///
/// `[t/T, N_t/T, (flag_i, sin el_i) for each satellite, normalised D_i,
///  scaled channel gain per user, serving-satellite indicator per satellite]`.
pub fn observe(state: &EnvState, cfg: &ScenarioConfig) -> Vec<f64> {
    let horizon = cfg.steps_per_episode as f64;
    let n_sats = state.mask.len();
    let mut x = Vec::with_capacity(2 + 3 * n_sats + state.delivered.len() + state.channels.iter().map(Vec::len).sum::<usize>());
    x.push(state.t as f64 / horizon);
    x.push(state.handovers as f64 / horizon);
    for (&f, &el) in state.mask.flags.iter().zip(&state.mask.elevations) {
        x.push(if f { 1.0 } else { 0.0 });
        x.push(el.sin().clamp(-1.0, 1.0));
    }
    let scale = cfg.rate_weight / (horizon * cfg.slot_s);
    x.extend(state.delivered.iter().map(|d| d * scale));
    for row in &state.channels {
        for &h in row {
            let db = 20.0 * h.max(1e-300).log10();
            x.push(((db - cfg.obs_gain_ref_db) / cfg.obs_gain_span_db).clamp(-1.0, 1.0));
        }
    }
    for i in 0..n_sats {
        x.push(if state.mask.flags[i] && i == state.sat { 1.0 } else { 0.0 });
    }
    x
}

/// Decodes a raw action against `state`.
///
/// Satellite block: masked argmax, or a draw from the masked softmax of
/// `satellite_logit_scale · score`. Allocation block: softmax shares rounded
/// to exactly `N_S` subcarriers by largest remainder. User block: per-cluster
/// argmax, or the strongest channel under [`UserSelection::BestChannel`].
pub fn decode_action(raw: &[f64], state: &EnvState, cfg: &ScenarioConfig, decode: SatelliteDecode<'_>) -> Result<Action> {
    let n_l = state.mask.len();
    let n_c = cfg.num_clusters();
    let counts = cfg.user_counts();
    let expected = n_l + n_c + counts.iter().sum::<usize>();
    if raw.len() != expected {
        return Err(Error::Contract(format!(
            "raw action has {} entries, expected {expected}",
            raw.len()
        )));
    }
    let (sat_scores, rest) = raw.split_at(n_l);
    let (alloc_logits, user_scores) = rest.split_at(n_c);

    let next_sat = match decode {
        SatelliteDecode::Argmax => masked_argmax(sat_scores, &state.mask)?,
        SatelliteDecode::Sample(rng) => {
            let logits: Vec<f64> = sat_scores.iter().map(|s| s * cfg.satellite_logit_scale).collect();
            let probs = masked_distribution(&softmax(&logits), &state.mask.flags)?;
            sample_index(&probs, rng)
        }
    };

    let alloc = largest_remainder(&softmax(alloc_logits), cfg.rf.subcarriers);

    let mut users = Vec::with_capacity(n_c);
    let mut offset = 0;
    for (i, &count) in counts.iter().enumerate() {
        let scores: &[f64] = match cfg.user_selection {
            UserSelection::Policy => &user_scores[offset..offset + count],
            UserSelection::BestChannel => &state.channels[i],
        };
        users.push(argmax(scores));
        offset += count;
    }
    Ok(Action { next_sat, alloc, users })
}

/// First index of the maximum.
pub fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

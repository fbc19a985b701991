//! Circular-orbit propagation and HAP-relative visibility.
//!
//! Earth is a sphere of radius [`EARTH_RADIUS_M`] and positions live in a
//! single Earth-centred inertial frame (no Earth rotation).

use std::f64::consts::TAU;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const EARTH_RADIUS_M: f64 = 6.371e6;
/// Standard gravitational parameter of Earth, m^3/s^2.
pub const GM_EARTH: f64 = 3.986004418e14;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Earth-centred Cartesian satellite position, metres.
pub type SatellitePosition = Vec3;

/// Circular-orbit elements. Eccentricity is fixed at zero so the semi-major
/// axis equals the orbital radius `altitude + EARTH_RADIUS_M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrbitalElements {
    pub inclination: f64,
    pub raan: f64,
    pub arg_perigee_init: f64,
    pub true_anomaly: f64,
    pub altitude: f64,
}

impl OrbitalElements {
    pub fn validate(&self) -> Result<()> {
        let angles = [
            self.inclination,
            self.raan,
            self.arg_perigee_init,
            self.true_anomaly,
        ];
        if angles.iter().any(|a| !a.is_finite()) {
            return Err(Error::Domain("orbital angle is not finite".into()));
        }
        if !(self.altitude.is_finite() && self.altitude > 0.0) {
            return Err(Error::Domain(format!(
                "altitude must be positive, got {}",
                self.altitude
            )));
        }
        Ok(())
    }

    pub fn radius(&self) -> f64 {
        self.altitude + EARTH_RADIUS_M
    }

    /// Mean motion, rad/s.
    pub fn angular_velocity(&self) -> f64 {
        (GM_EARTH / self.radius().powi(3)).sqrt()
    }

    /// Orbital period, seconds.
    pub fn period(&self) -> f64 {
        TAU / self.angular_velocity()
    }
}

/// Position of a satellite `t` seconds after the reference epoch.
///
/// The argument of latitude advances as `ω_init + ϖ·(t mod τ)`; reducing
/// time modulo the period keeps the phase small, so positions at `t` and
/// `t + τ` agree to well below a micrometre.
pub fn propagate_satellite(elements: &OrbitalElements, t: f64) -> Result<SatellitePosition> {
    elements.validate()?;
    if !(t.is_finite() && t >= 0.0) {
        return Err(Error::Domain(format!("time must be finite and >= 0, got {t}")));
    }
    let radius = elements.radius();
    let rate = elements.angular_velocity();
    let period = TAU / rate;
    let omega_t = elements.arg_perigee_init + rate * t.rem_euclid(period);
    let u = omega_t + elements.true_anomaly;
    let (su, cu) = u.sin_cos();
    let (sr, cr) = elements.raan.sin_cos();
    let (si, ci) = elements.inclination.sin_cos();
    Ok(Vec3::new(
        radius * (cu * cr - su * ci * sr),
        radius * (cu * sr + su * ci * cr),
        radius * (su * si),
    ))
}

/// Elevation of `target` seen from `observer`, radians in [-π/2, π/2].
///
/// The local vertical is the observer's radial direction.
pub fn elevation_angle(observer: Vec3, target: Vec3) -> Result<f64> {
    let r = observer.norm();
    if !(r > 0.0) {
        return Err(Error::Domain("observer at the origin has no local vertical".into()));
    }
    let d = target - observer;
    let dn = d.norm();
    if !(dn > 0.0) {
        return Err(Error::Domain("observer and target coincide".into()));
    }
    let s = observer.dot(d) / (r * dn);
    Ok(s.clamp(-1.0, 1.0).asin())
}

/// East-north-up tangent frame anchored at a point on the Earth's surface.
///
/// HAP and ground-user coordinates are kept in this frame; satellites live in
/// the inertial frame, and [`LocalFrame::to_inertial`] bridges the two.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalFrame {
    pub origin: Vec3,
    pub east: Vec3,
    pub north: Vec3,
    pub up: Vec3,
}

impl LocalFrame {
    /// Frame at geocentric latitude/longitude (radians) on the spherical Earth.
    pub fn at(lat: f64, lon: f64) -> Self {
        let (sl, cl) = lat.sin_cos();
        let (so, co) = lon.sin_cos();
        let up = Vec3::new(cl * co, cl * so, sl);
        Self {
            origin: up * EARTH_RADIUS_M,
            east: Vec3::new(-so, co, 0.0),
            north: Vec3::new(-sl * co, -sl * so, cl),
            up,
        }
    }

    pub fn to_inertial(&self, local: [f64; 3]) -> Vec3 {
        self.origin + self.east * local[0] + self.north * local[1] + self.up * local[2]
    }
}

/// Per-slot satellite visibility as seen from the HAP.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct VisibilityMask {
    pub flags: Vec<bool>,
    pub elevations: Vec<f64>,
}

impl VisibilityMask {
    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn any(&self) -> bool {
        self.flags.iter().any(|&f| f)
    }

    pub fn is_visible(&self, i: usize) -> bool {
        self.flags.get(i).copied().unwrap_or(false)
    }

    pub fn visible_indices(&self) -> Vec<usize> {
        self.flags
            .iter()
            .enumerate()
            .filter_map(|(i, &f)| f.then_some(i))
            .collect()
    }

    /// Visible satellite with the highest elevation, lowest index on ties.
    pub fn best_visible(&self) -> Option<usize> {
        let mut best: Option<usize> = None;
        for i in self.visible_indices() {
            match best {
                Some(b) if self.elevations[i] <= self.elevations[b] => {}
                _ => best = Some(i),
            }
        }
        best
    }
}

/// Computes elevations of every satellite from `hap` and flags those at or
/// above `min_elevation` (inclusive).
pub fn visible_set(sats: &[SatellitePosition], hap: Vec3, min_elevation: f64) -> Result<VisibilityMask> {
    let mut mask = VisibilityMask {
        flags: Vec::with_capacity(sats.len()),
        elevations: Vec::with_capacity(sats.len()),
    };
    for sat in sats {
        if !sat.is_finite() {
            return Err(Error::Domain("satellite position is not finite".into()));
        }
        let el = elevation_angle(hap, *sat)?;
        mask.flags.push(el >= min_elevation);
        mask.elevations.push(el);
    }
    Ok(mask)
}

/// One entry of a constellation description.
///
/// Either a single satellite, or a shell of `count` satellites sharing one
/// orbital plane and spread evenly in phase.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ConstellationEntry {
    Shell {
        count: usize,
        altitude_m: f64,
        inclination_rad: f64,
        #[serde(default)]
        raan_rad: f64,
        #[serde(default)]
        phase_offset_rad: f64,
    },
    Single {
        altitude_m: f64,
        inclination_rad: f64,
        raan_rad: f64,
        phase_rad: f64,
    },
}

/// Expands constellation entries into per-satellite elements, in order.
pub fn expand_constellation(entries: &[ConstellationEntry]) -> Result<Vec<OrbitalElements>> {
    let mut out = Vec::new();
    for entry in entries {
        match *entry {
            ConstellationEntry::Shell {
                count,
                altitude_m,
                inclination_rad,
                raan_rad,
                phase_offset_rad,
            } => {
                for k in 0..count {
                    out.push(OrbitalElements {
                        inclination: inclination_rad,
                        raan: raan_rad,
                        arg_perigee_init: 0.0,
                        true_anomaly: phase_offset_rad + TAU * k as f64 / count as f64,
                        altitude: altitude_m,
                    });
                }
            }
            ConstellationEntry::Single {
                altitude_m,
                inclination_rad,
                raan_rad,
                phase_rad,
            } => out.push(OrbitalElements {
                inclination: inclination_rad,
                raan: raan_rad,
                arg_perigee_init: 0.0,
                true_anomaly: phase_rad,
                altitude: altitude_m,
            }),
        }
    }
    for e in &out {
        e.validate()?;
    }
    Ok(out)
}

//! Threshold-crossing response detection and response times.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::AnalysisWindow;
use crate::error::Result;
use crate::frame::ControlInput;
use crate::log::TrajectoryLog;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResponseKind {
    AccelRelease,
    BrakeOnset,
    SteerShoulder,
    SteerCenter,
}

impl ResponseKind {
    pub const ALL: [ResponseKind; 4] = [
        ResponseKind::AccelRelease,
        ResponseKind::BrakeOnset,
        ResponseKind::SteerShoulder,
        ResponseKind::SteerCenter,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ResponseKind::AccelRelease => "accel-release",
            ResponseKind::BrakeOnset => "brake-onset",
            ResponseKind::SteerShoulder => "steer-shoulder",
            ResponseKind::SteerCenter => "steer-center",
        }
    }

    /// Braking or swerving.
    pub fn is_evasive(self) -> bool {
        self != ResponseKind::AccelRelease
    }
}

impl fmt::Display for ResponseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Response thresholds and longitudinal state cut points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", default)]
pub struct Thresholds<T: Scalar> {
    /// Accelerator released once the pedal drops below this (%).
    pub accel_release_pct: T,
    /// Brake onset once the pedal exceeds this (%).
    pub brake_onset_pct: T,
    /// Steering onset at this magnitude or more (degrees). Negative steer is
    /// toward the shoulder.
    pub steer_deg: T,
    /// Cruising above this acceleration (m/s^2, inclusive).
    pub soft_brake_accel: T,
    /// Hard braking below this acceleration (m/s^2, exclusive).
    pub hard_brake_accel: T,
}

impl<T: Scalar> Default for Thresholds<T> {
    fn default() -> Self {
        Self {
            accel_release_pct: T::lit(3.0),
            brake_onset_pct: T::lit(15.0),
            steer_deg: T::lit(5.0),
            soft_brake_accel: T::lit(-1.0),
            hard_brake_accel: T::lit(-4.0),
        }
    }
}

impl<T: Scalar> Thresholds<T> {
    /// Whether `prev -> cur` is a crossing into the response side for `kind`.
    pub fn crossed(&self, kind: ResponseKind, prev: &ControlInput<T>, cur: &ControlInput<T>) -> bool {
        match kind {
            ResponseKind::AccelRelease => {
                prev.accel_pct >= self.accel_release_pct && cur.accel_pct < self.accel_release_pct
            }
            ResponseKind::BrakeOnset => {
                prev.brake_pct <= self.brake_onset_pct && cur.brake_pct > self.brake_onset_pct
            }
            ResponseKind::SteerShoulder => prev.steer_deg > -self.steer_deg && cur.steer_deg <= -self.steer_deg,
            ResponseKind::SteerCenter => prev.steer_deg < self.steer_deg && cur.steer_deg >= self.steer_deg,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ResponseEvent<T: Scalar> {
    pub kind: ResponseKind,
    pub t: T,
}

/// Every threshold crossing whose current sample falls in the window.
pub fn detect_responses<T: Scalar>(log: &TrajectoryLog<T>, window: &AnalysisWindow<T>) -> Result<Vec<ResponseEvent<T>>> {
    detect_with(log, window, &Thresholds::default())
}

pub fn detect_with<T: Scalar>(
    log: &TrajectoryLog<T>,
    window: &AnalysisWindow<T>,
    th: &Thresholds<T>,
) -> Result<Vec<ResponseEvent<T>>> {
    window.ensure_covered(log)?;
    let mut out = Vec::new();
    for w in log.samples.windows(2) {
        let (prev, cur) = (&w[0], &w[1]);
        if !window.contains(cur.t) {
            continue;
        }
        for kind in ResponseKind::ALL {
            if th.crossed(kind, &prev.controls, &cur.controls) {
                out.push(ResponseEvent { kind, t: cur.t });
            }
        }
    }
    Ok(out)
}

/// Response times relative to the trigger point. `None` where the run showed
/// no response of that kind.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ResponseTimes<T: Scalar> {
    pub per_kind: BTreeMap<ResponseKind, T>,
    pub initial_reaction: Option<T>,
    pub evasive_response: Option<T>,
}

impl<T: Scalar> ResponseTimes<T> {
    pub fn get(&self, kind: ResponseKind) -> Option<T> {
        self.per_kind.get(&kind).copied()
    }
}

pub fn response_times<T: Scalar>(events: &[ResponseEvent<T>], t_trigger: T) -> ResponseTimes<T> {
    let mut per_kind: BTreeMap<ResponseKind, T> = BTreeMap::new();
    for e in events {
        let dt = e.t - t_trigger;
        per_kind
            .entry(e.kind)
            .and_modify(|v| *v = v.min(dt))
            .or_insert(dt);
    }
    let min_of = |pred: fn(ResponseKind) -> bool| {
        per_kind
            .iter()
            .filter(|(k, _)| pred(**k))
            .map(|(_, v)| *v)
            .reduce(T::min)
    };
    ResponseTimes {
        initial_reaction: min_of(|_| true),
        evasive_response: min_of(ResponseKind::is_evasive),
        per_kind,
    }
}

/// Fraction of runs showing each response kind at least once.
pub fn response_prevalence<T: Scalar>(runs: &[Vec<ResponseEvent<T>>]) -> BTreeMap<ResponseKind, f64> {
    let mut counts: BTreeMap<ResponseKind, usize> = ResponseKind::ALL.iter().map(|k| (*k, 0)).collect();
    for events in runs {
        for kind in ResponseKind::ALL {
            if events.iter().any(|e| e.kind == kind) {
                *counts.get_mut(&kind).unwrap() += 1;
            }
        }
    }
    let n = runs.len().max(1) as f64;
    counts.into_iter().map(|(k, c)| (k, c as f64 / n)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LateralState {
    SteerShoulder,
    NoSteering,
    SteerCenter,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LongitudinalState {
    Cruising,
    SoftBraking,
    HardBraking,
}

impl LateralState {
    pub fn name(self) -> &'static str {
        match self {
            LateralState::SteerShoulder => "steer-shoulder",
            LateralState::NoSteering => "no-steering",
            LateralState::SteerCenter => "steer-center",
        }
    }
}

impl LongitudinalState {
    pub fn name(self) -> &'static str {
        match self {
            LongitudinalState::Cruising => "cruising",
            LongitudinalState::SoftBraking => "soft-braking",
            LongitudinalState::HardBraking => "hard-braking",
        }
    }
}

pub fn lateral_state<T: Scalar>(steer_deg: T) -> LateralState {
    let th = Thresholds::<T>::default().steer_deg;
    if steer_deg <= -th {
        LateralState::SteerShoulder
    } else if steer_deg >= th {
        LateralState::SteerCenter
    } else {
        LateralState::NoSteering
    }
}

/// Boundary values go to the milder state.
pub fn longitudinal_state<T: Scalar>(ax: T) -> LongitudinalState {
    let th = Thresholds::<T>::default();
    if ax >= th.soft_brake_accel {
        LongitudinalState::Cruising
    } else if ax >= th.hard_brake_accel {
        LongitudinalState::SoftBraking
    } else {
        LongitudinalState::HardBraking
    }
}

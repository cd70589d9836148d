use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::frame::{ControlInput, VehicleState};
use crate::scalar::Scalar;
use crate::scenario::ScenarioSpec;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct LogSample<T: Scalar> {
    pub t: T,
    pub sv: VehicleState<T>,
    pub pov: VehicleState<T>,
    pub controls: ControlInput<T>,
}

/// Why a rollout stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Termination {
    Collision,
    Horizon,
    /// Log was loaded from an external source.
    External,
}

/// Uniformly sampled time series of both vehicles and the SV controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct TrajectoryLog<T: Scalar> {
    pub dt: T,
    pub t_trigger: T,
    pub scenario: ScenarioSpec<T>,
    pub samples: Vec<LogSample<T>>,
    /// False when the SV acceleration channel was not recorded and has to be
    /// derived from velocity.
    pub sv_accel_logged: bool,
    pub termination: Termination,
    /// False when the log stops before the vehicles reach zero longitudinal
    /// gap (horizon too short).
    pub complete: bool,
}

impl<T: Scalar> TrajectoryLog<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > T::zero()) {
            return Err(invalid("log dt must be > 0"));
        }
        let tol = self.dt * T::lit(1e-6);
        for (i, w) in self.samples.windows(2).enumerate() {
            let step = w[1].t - w[0].t;
            if !(step > T::zero()) {
                return Err(Error::Parse {
                    row: i + 2,
                    msg: "timestamps not strictly increasing".into(),
                });
            }
            if (step - self.dt).abs() > tol {
                return Err(Error::Parse {
                    row: i + 2,
                    msg: format!("sample spacing {step} differs from dt {}", self.dt),
                });
            }
        }
        Ok(())
    }

    pub fn t_start(&self) -> Option<T> {
        self.samples.first().map(|s| s.t)
    }

    pub fn t_end(&self) -> Option<T> {
        self.samples.last().map(|s| s.t)
    }

    /// Index of the sample closest to `t`, if `t` lies within the log.
    pub fn index_at(&self, t: T) -> Option<usize> {
        let t0 = self.t_start()?;
        let k = ((t - t0) / self.dt).round();
        if k < T::zero() {
            return None;
        }
        let k = k.to_usize()?;
        (k < self.samples.len()).then_some(k)
    }

    /// Whether `[t_b, t_e]` lies within the logged span (to half a step).
    pub fn covers(&self, t_b: T, t_e: T) -> bool {
        match (self.t_start(), self.t_end()) {
            (Some(a), Some(b)) => {
                let half = self.dt / T::lit(2.0);
                t_b >= a - half && t_e <= b + half
            }
            _ => false,
        }
    }
}

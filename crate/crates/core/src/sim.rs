//! Closed-loop rollout of one scenario under one SV policy, closest-approach
//! timing and outcome classification.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::frame::{footprint, longitudinal_gap, rectangles_overlap, step_vehicle, KinematicLimits};
use crate::log::{LogSample, Termination, TrajectoryLog};
use crate::policy::{policy_control, PolicySpec};
use crate::scalar::Scalar;
use crate::scenario::Scenario;

/// Default simulation step (100 Hz).
pub const DEFAULT_DT: f64 = 0.01;

/// Runs the scenario on a fixed clock until the first footprint overlap or
/// the horizon.
pub fn rollout<T: Scalar>(
    scenario: &Scenario<T>,
    policy: &PolicySpec<T>,
    sv_limits: &KinematicLimits<T>,
    dt: T,
    horizon: T,
) -> Result<TrajectoryLog<T>> {
    if !(dt.is_finite() && dt > T::zero()) {
        return Err(invalid(format!("dt must be > 0, got {dt}")));
    }
    if !(horizon.is_finite() && horizon > T::zero()) {
        return Err(invalid("horizon must be > 0"));
    }
    policy.validate()?;
    sv_limits.validate()?;
    let spec = &scenario.spec;
    let steps = (horizon / dt + T::lit(1e-9))
        .floor()
        .to_usize()
        .ok_or_else(|| invalid("horizon/dt out of range"))?;

    let mut samples = Vec::with_capacity(steps + 1);
    let mut sv = spec.sv_initial();
    let mut termination = Termination::Horizon;
    for k in 0..=steps {
        let t = T::lit(k as f64) * dt;
        sv.t = t;
        let pov = scenario.pov_state_at(t);
        let controls = policy_control(t, &sv, &pov, &scenario.timing, policy);
        samples.push(LogSample { t, sv, pov, controls });
        if rectangles_overlap(&footprint(&sv, &spec.sv_spec), &footprint(&pov, &spec.pov_spec)) {
            termination = Termination::Collision;
            break;
        }
        if k < steps {
            sv = step_vehicle(&sv, (controls.jx, controls.jy), sv_limits, dt)?;
        }
    }
    let mut log = TrajectoryLog {
        dt,
        t_trigger: scenario.timing.t_trigger,
        scenario: *spec,
        samples,
        sv_accel_logged: true,
        termination,
        complete: false,
    };
    log.complete = time_of_closest_proximity(&log).is_ok();
    Ok(log)
}

fn proximity_index<T: Scalar>(log: &TrajectoryLog<T>) -> Result<usize> {
    let spec = &log.scenario;
    if let Some(i) = log
        .samples
        .iter()
        .position(|s| longitudinal_gap(&s.sv, &s.pov, &spec.sv_spec, &spec.pov_spec) <= T::zero())
    {
        return Ok(i);
    }
    if log.termination == Termination::Collision && !log.samples.is_empty() {
        return Ok(log.samples.len() - 1);
    }
    Err(Error::IncompleteLog(
        "longitudinal gap never reaches zero within the log".into(),
    ))
}

/// First sample time at which the longitudinal gap is no longer positive.
pub fn time_of_closest_proximity<T: Scalar>(log: &TrajectoryLog<T>) -> Result<T> {
    proximity_index(log).map(|i| log.samples[i].t)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Outcome {
    Collision,
    PassViaCenter,
    PassViaShoulder,
}

impl Outcome {
    pub const ALL: [Outcome; 3] = [Outcome::Collision, Outcome::PassViaCenter, Outcome::PassViaShoulder];

    pub fn name(self) -> &'static str {
        match self {
            Outcome::Collision => "collision",
            Outcome::PassViaCenter => "pass-via-center",
            Outcome::PassViaShoulder => "pass-via-shoulder",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct OutcomeReport<T: Scalar> {
    pub outcome: Outcome,
    pub t_p: T,
    /// Lateral offset `y_sv - y_pov` at `t_p`.
    pub lateral_offset: T,
    /// Footprints overlapped at some sample after `t_p` (a sideswipe while
    /// passing). Does not change `outcome`.
    pub sideswipe: bool,
}

/// Classifies the outcome from lateral separation at closest approach.
pub fn classify_outcome<T: Scalar>(log: &TrajectoryLog<T>) -> Result<OutcomeReport<T>> {
    let ip = proximity_index(log)?;
    let spec = &log.scenario;
    let overlaps = |s: &LogSample<T>| {
        rectangles_overlap(&footprint(&s.sv, &spec.sv_spec), &footprint(&s.pov, &spec.pov_spec))
    };
    let at = &log.samples[ip];
    let dy = at.sv.y - at.pov.y;
    let half_widths = (spec.sv_spec.width + spec.pov_spec.width) / T::lit(2.0);
    let earlier = log.samples[..=ip].iter().any(overlaps);
    let outcome = if dy.abs() < half_widths || earlier {
        Outcome::Collision
    } else if dy > T::zero() {
        Outcome::PassViaCenter
    } else {
        Outcome::PassViaShoulder
    };
    let sideswipe = log.samples[ip + 1..].iter().any(overlaps);
    Ok(OutcomeReport {
        outcome,
        t_p: at.t,
        lateral_offset: dy,
        sideswipe,
    })
}

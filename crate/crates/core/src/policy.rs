//! Scripted SV controllers that reproduce the qualitative evasive patterns
//! (brake, steer towards the centre, steer towards the shoulder, reversal).
//!
//! A policy is a deterministic schedule over time since the trigger point.
//! Pedal and steering values are arranged so that each intended response
//! crosses its detection threshold exactly at the scheduled instant.

use serde::{Deserialize, Serialize};

use crate::analysis::response::{ResponseKind, Thresholds};
use crate::error::{invalid, Result};
use crate::frame::{ControlInput, VehicleState};
use crate::scalar::{time_eps, Scalar};
use crate::scenario::ScenarioTiming;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PolicyKind {
    NoResponse,
    BrakeOnly,
    BrakeThenSteerCenter,
    SteerCenterOnly,
    SteerShoulderOnly,
    ShoulderThenReversal,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::NoResponse,
        PolicyKind::BrakeOnly,
        PolicyKind::BrakeThenSteerCenter,
        PolicyKind::SteerCenterOnly,
        PolicyKind::SteerShoulderOnly,
        PolicyKind::ShoulderThenReversal,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::NoResponse => "no-response",
            PolicyKind::BrakeOnly => "brake-only",
            PolicyKind::BrakeThenSteerCenter => "brake-then-steer-center",
            PolicyKind::SteerCenterOnly => "steer-center-only",
            PolicyKind::SteerShoulderOnly => "steer-shoulder-only",
            PolicyKind::ShoulderThenReversal => "shoulder-then-reversal",
        }
    }

    fn brakes(self) -> bool {
        matches!(self, PolicyKind::BrakeOnly | PolicyKind::BrakeThenSteerCenter)
    }
}

impl std::str::FromStr for PolicyKind {
    type Err = crate::error::Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| invalid(format!("unknown policy kind `{s}`")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BrakeLevel {
    /// Target deceleration 3 m/s² (the 1–4 m/s² band).
    Soft,
    /// Target deceleration 7 m/s² (above 4 m/s²).
    Hard,
}

impl BrakeLevel {
    pub fn decel<T: Scalar>(self) -> T {
        match self {
            BrakeLevel::Soft => T::lit(3.0),
            BrakeLevel::Hard => T::lit(7.0),
        }
    }
}

/// How pedal and steering inputs become acceleration targets.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ControlMapping<T: Scalar> {
    /// Accelerator position that holds speed. Pedal travel above it maps
    /// linearly onto `[0, a_fwd_full]`; below it the car coasts at 0 m/s².
    pub cruise_accel_pct: T,
    pub a_fwd_full: T,
    /// Deceleration at full brake; 15 % brake gives 1 m/s².
    pub a_brk_full: T,
    /// Lateral acceleration per degree of steering at `nominal_speed`.
    pub steer_gain: T,
    pub nominal_speed: T,
    /// First-order lag between acceleration target and actual acceleration.
    pub actuator_tau: T,
}

impl<T: Scalar> Default for ControlMapping<T> {
    fn default() -> Self {
        Self {
            cruise_accel_pct: T::lit(20.0),
            a_fwd_full: T::lit(5.0),
            a_brk_full: T::lit(8.0),
            steer_gain: T::lit(0.2),
            nominal_speed: T::lit(crate::scenario::MPH40),
            actuator_tau: T::lit(0.05),
        }
    }
}

impl<T: Scalar> ControlMapping<T> {
    pub fn accel_from_pedal(&self, pct: T) -> T {
        let travel = (pct - self.cruise_accel_pct).max(T::zero());
        self.a_fwd_full * travel / (T::lit(100.0) - self.cruise_accel_pct)
    }

    /// Piecewise linear through (0 %, 0), (15 %, 1 m/s²), (100 %, full).
    pub fn decel_from_brake(&self, pct: T) -> T {
        let knee = T::lit(15.0);
        if pct <= knee {
            pct / knee
        } else {
            T::one() + (pct - knee) * (self.a_brk_full - T::one()) / (T::lit(100.0) - knee)
        }
    }

    pub fn brake_pct_for(&self, decel: T) -> T {
        let knee = T::lit(15.0);
        if decel <= T::one() {
            decel * knee
        } else {
            knee + (decel - T::one()) * (T::lit(100.0) - knee) / (self.a_brk_full - T::one())
        }
    }

    pub fn lateral_accel(&self, steer_deg: T, speed: T) -> T {
        let r = speed / self.nominal_speed;
        self.steer_gain * steer_deg * r * r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct PolicySpec<T: Scalar> {
    pub kind: PolicyKind,
    /// Seconds after the trigger point of the first action.
    pub reaction_delay: T,
    pub brake_level: BrakeLevel,
    /// Steering ramp rate, deg/s.
    pub steer_rate: T,
    /// Magnitude of the first steering target, deg.
    pub steer_target: T,
    /// For `BrakeThenSteerCenter`: seconds after the trigger point at which
    /// steering towards the centre crosses the detection threshold.
    pub steer_delay: T,
    /// For `ShoulderThenReversal`: seconds after the trigger point at which
    /// the reversed steering crosses the centre-side threshold.
    pub reversal_delay: T,
    pub reversal_target: T,
    #[serde(default)]
    pub mapping: ControlMapping<T>,
}

impl<T: Scalar> PolicySpec<T> {
    pub fn new(kind: PolicyKind) -> Self {
        Self {
            kind,
            reaction_delay: T::lit(1.2),
            brake_level: BrakeLevel::Hard,
            steer_rate: T::lit(40.0),
            steer_target: T::lit(10.0),
            steer_delay: T::lit(2.8),
            reversal_delay: T::lit(2.5),
            reversal_target: T::lit(15.0),
            mapping: ControlMapping::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let th = Thresholds::<T>::default().steer_deg;
        if !(self.reaction_delay >= T::zero()) {
            return Err(invalid("reaction_delay must be >= 0"));
        }
        if !(self.steer_rate > T::zero()) {
            return Err(invalid("steer_rate must be > 0"));
        }
        let decel = self.brake_level.decel::<T>();
        if decel > self.mapping.a_brk_full {
            return Err(invalid("brake level exceeds full-brake deceleration"));
        }
        match self.kind {
            PolicyKind::SteerCenterOnly | PolicyKind::SteerShoulderOnly | PolicyKind::BrakeThenSteerCenter => {
                if !(self.steer_target > th) {
                    return Err(invalid("steer_target must exceed the steering threshold"));
                }
            }
            _ => {}
        }
        if self.kind == PolicyKind::BrakeThenSteerCenter && !(self.steer_delay >= self.reaction_delay) {
            return Err(invalid("steer_delay must not precede reaction_delay"));
        }
        if self.kind == PolicyKind::ShoulderThenReversal {
            if !(self.steer_target > th && self.reversal_target > th) {
                return Err(invalid("steering targets must exceed the steering threshold"));
            }
            let needed = T::lit(2.0) * self.steer_target / self.steer_rate;
            if !(self.reversal_delay - self.reaction_delay >= needed) {
                return Err(invalid(format!(
                    "reversal_delay must trail reaction_delay by at least {needed} s"
                )));
            }
        }
        Ok(())
    }

    fn ramp(&self, elapsed: T, t_cross: T, target: T) -> T {
        let th = Thresholds::<T>::default().steer_deg;
        (th + self.steer_rate * (elapsed - t_cross)).clamp_to(T::zero(), target)
    }

    /// Steering wheel angle as a function of time since the trigger point.
    pub fn steer_at(&self, elapsed: T) -> T {
        let e = elapsed + time_eps::<T>();
        let th = Thresholds::<T>::default().steer_deg;
        match self.kind {
            PolicyKind::NoResponse | PolicyKind::BrakeOnly => T::zero(),
            PolicyKind::SteerCenterOnly => self.ramp(e, self.reaction_delay, self.steer_target),
            PolicyKind::SteerShoulderOnly => -self.ramp(e, self.reaction_delay, self.steer_target),
            PolicyKind::BrakeThenSteerCenter => self.ramp(e, self.steer_delay, self.steer_target),
            PolicyKind::ShoulderThenReversal => {
                let switch = self.reversal_delay - (th + self.steer_target) / self.steer_rate;
                if e < switch {
                    -self.ramp(e, self.reaction_delay, self.steer_target)
                } else {
                    (th + self.steer_rate * (e - self.reversal_delay))
                        .clamp_to(-self.steer_target, self.reversal_target)
                }
            }
        }
    }

    pub fn pedals_at(&self, elapsed: T) -> (T, T) {
        let e = elapsed + time_eps::<T>();
        let cruise = self.mapping.cruise_accel_pct;
        if self.kind == PolicyKind::NoResponse || e < self.reaction_delay {
            return (cruise, T::zero());
        }
        let brake = if self.kind.brakes() {
            self.mapping.brake_pct_for(self.brake_level.decel())
        } else {
            T::zero()
        };
        (T::zero(), brake)
    }

    /// Threshold crossings the schedule is designed to produce, as absolute
    /// times, in chronological order.
    pub fn intended_crossings(&self, timing: &ScenarioTiming<T>) -> Vec<(ResponseKind, T)> {
        let t0 = timing.t_trigger;
        let r = t0 + self.reaction_delay;
        let mut out = Vec::new();
        if self.kind == PolicyKind::NoResponse {
            return out;
        }
        out.push((ResponseKind::AccelRelease, r));
        if self.kind.brakes() {
            out.push((ResponseKind::BrakeOnset, r));
        }
        match self.kind {
            PolicyKind::SteerCenterOnly => out.push((ResponseKind::SteerCenter, r)),
            PolicyKind::SteerShoulderOnly => out.push((ResponseKind::SteerShoulder, r)),
            PolicyKind::BrakeThenSteerCenter => out.push((ResponseKind::SteerCenter, t0 + self.steer_delay)),
            PolicyKind::ShoulderThenReversal => {
                out.push((ResponseKind::SteerShoulder, r));
                out.push((ResponseKind::SteerCenter, t0 + self.reversal_delay));
            }
            _ => {}
        }
        out.sort_by(|a, b| a.1.partial_cmp(&b.1).expect("finite times"));
        out
    }
}

/// Control input emitted by a policy at time `t`.
///
/// The jerk command drives the SV acceleration towards the pedal/steering
/// target with a first-order lag; the integrator clamps it to the limits.
pub fn policy_control<T: Scalar>(
    t: T,
    sv: &VehicleState<T>,
    _pov: &VehicleState<T>,
    timing: &ScenarioTiming<T>,
    policy: &PolicySpec<T>,
) -> ControlInput<T> {
    let elapsed = t - timing.t_trigger;
    let (accel_pct, brake_pct) = policy.pedals_at(elapsed);
    let steer_deg = policy.steer_at(elapsed);
    let m = &policy.mapping;
    let ax_target = m.accel_from_pedal(accel_pct) - m.decel_from_brake(brake_pct);
    let ay_target = m.lateral_accel(steer_deg, sv.speed());
    ControlInput {
        accel_pct,
        brake_pct,
        steer_deg,
        jx: (ax_target - sv.ax) / m.actuator_tau,
        jy: (ay_target - sv.ay) / m.actuator_tau,
    }
}

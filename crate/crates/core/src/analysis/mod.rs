//! Dependent measures computed from trajectory logs: the analysis window,
//! threshold-based response detection, response times and control-state
//! sequence graphs.

pub mod response;
pub mod sequence;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::log::TrajectoryLog;
use crate::scalar::Scalar;
use crate::sim::time_of_closest_proximity;

/// Delay between incursion onset and the start of the analysis window.
pub const WINDOW_START_DELAY: f64 = 0.4;

/// `[t_B, t_E]`: from 400 ms after the trigger point to closest approach.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AnalysisWindow<T: Scalar> {
    pub t_b: T,
    pub t_e: T,
}

impl<T: Scalar> AnalysisWindow<T> {
    pub fn new(t_trigger: T, t_p: T) -> Result<Self> {
        Self::with_delay(t_trigger, T::lit(WINDOW_START_DELAY), t_p)
    }

    pub fn with_delay(t_trigger: T, delay: T, t_p: T) -> Result<Self> {
        if !(delay.is_finite() && delay >= T::zero()) {
            return Err(invalid("window start delay must be >= 0"));
        }
        let t_b = t_trigger + delay;
        if !(t_b < t_p) {
            return Err(invalid(format!("empty analysis window: t_B = {t_b}, t_E = {t_p}")));
        }
        Ok(Self { t_b, t_e: t_p })
    }

    pub fn from_log(log: &TrajectoryLog<T>) -> Result<Self> {
        Self::new(log.t_trigger, time_of_closest_proximity(log)?)
    }

    pub fn contains(&self, t: T) -> bool {
        let eps = crate::scalar::time_eps::<T>();
        t >= self.t_b - eps && t <= self.t_e + eps
    }

    /// Narrower window, for monotonicity checks.
    pub fn shrink(&self, front: T, back: T) -> Option<Self> {
        let w = Self {
            t_b: self.t_b + front,
            t_e: self.t_e - back,
        };
        (w.t_b < w.t_e).then_some(w)
    }

    pub(crate) fn ensure_covered(&self, log: &TrajectoryLog<T>) -> Result<()> {
        if log.covers(self.t_b, self.t_e) {
            Ok(())
        } else {
            Err(Error::Window {
                t_b: self.t_b.as_f64(),
                t_e: self.t_e.as_f64(),
                reason: format!(
                    "log spans [{}, {}]",
                    log.t_start().map_or(f64::NAN, |t| t.as_f64()),
                    log.t_end().map_or(f64::NAN, |t| t.as_f64())
                ),
            })
        }
    }
}

/// Moving-average span applied to differentiated velocity.
pub const ACCEL_SMOOTHING_S: f64 = 0.1;

/// SV longitudinal acceleration per sample. Passes the logged channel
/// through when present; otherwise differentiates `vx` (central differences,
/// one-sided at the ends) and smooths with a centred 0.1 s moving average.
pub fn sv_longitudinal_accel<T: Scalar>(log: &TrajectoryLog<T>) -> Result<Vec<T>> {
    let n = log.samples.len();
    if log.sv_accel_logged {
        if n == 0 {
            return Err(invalid("empty log"));
        }
        return Ok(log.samples.iter().map(|s| s.sv.ax).collect());
    }
    if n < 3 {
        return Err(invalid("need at least 3 samples to differentiate velocity"));
    }
    let v: Vec<T> = log.samples.iter().map(|s| s.sv.vx).collect();
    let dt = log.dt;
    let two = T::lit(2.0);
    let mut d = Vec::with_capacity(n);
    d.push((v[1] - v[0]) / dt);
    for i in 1..n - 1 {
        d.push((v[i + 1] - v[i - 1]) / (two * dt));
    }
    d.push((v[n - 1] - v[n - 2]) / dt);

    let half = (T::lit(ACCEL_SMOOTHING_S) / dt / two).round().to_usize().unwrap_or(0);
    if half == 0 {
        return Ok(d);
    }
    let mut prefix = vec![T::zero(); n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + d[i];
    }
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half + 1).min(n);
            (prefix[hi] - prefix[lo]) / T::lit((hi - lo) as f64)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::{ControlInput, Heading, VehicleState};
    use crate::log::{LogSample, Termination};
    use crate::scenario::ScenarioSpec;

    fn log_with_v(v: impl Fn(f64) -> f64, logged: bool) -> TrajectoryLog<f64> {
        let dt = 0.01;
        let samples = (0..400)
            .map(|k| {
                let t = k as f64 * dt;
                let mut sv = VehicleState::cruising(t, 0.0, -1.825, v(t), Heading::Forward);
                sv.ax = 0.25;
                let pov = VehicleState::cruising(t, 100.0, 1.825, 17.88, Heading::Reverse);
                LogSample { t, sv, pov, controls: ControlInput::default() }
            })
            .collect();
        TrajectoryLog {
            dt,
            t_trigger: 0.0,
            scenario: ScenarioSpec::medium(),
            samples,
            sv_accel_logged: logged,
            termination: Termination::External,
            complete: false,
        }
    }

    #[test]
    fn constant_speed_has_zero_accel() {
        let a = sv_longitudinal_accel(&log_with_v(|_| 17.0, false)).unwrap();
        assert!(a.iter().all(|x| x.abs() < 1e-9));
    }

    #[test]
    fn linear_ramp_recovered() {
        let a = sv_longitudinal_accel(&log_with_v(|t| 30.0 - 8.0 * t, false)).unwrap();
        for x in &a[10..a.len() - 10] {
            assert!((x + 8.0).abs() < 0.08, "{x}");
        }
    }

    #[test]
    fn logged_channel_passes_through() {
        let log = log_with_v(|t| 30.0 - 8.0 * t, true);
        let a = sv_longitudinal_accel(&log).unwrap();
        assert!(a.iter().all(|x| *x == 0.25));
    }

    #[test]
    fn too_short_log_rejected() {
        let mut log = log_with_v(|_| 1.0, false);
        log.samples.truncate(2);
        assert!(sv_longitudinal_accel(&log).is_err());
    }

    #[test]
    fn window_starts_400ms_after_trigger() {
        let w = AnalysisWindow::<f64>::new(2.0, 7.15).unwrap();
        assert!((w.t_b - 2.4).abs() < 1e-12);
        assert_eq!(w.t_e, 7.15);
        assert!(AnalysisWindow::new(2.0, 2.3).is_err());
    }
}

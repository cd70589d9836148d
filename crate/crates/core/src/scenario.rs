//! Opposite-direction lateral incursion scenarios: trigger timing,
//! incursion-level geometry and the POV's scripted Bézier path.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::frame::{Heading, KinematicLimits, RoadSpec, VehicleSpec, VehicleState};
use crate::scalar::Scalar;

/// Lateral velocity of the POV when it reaches the critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EndHeading {
    /// Still drifting towards the SV's shoulder.
    ContinuingLeft,
    /// Lateral velocity zero.
    Straight,
}

/// POV behaviour after the critical point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PostCritical {
    /// Keep the terminal lateral velocity until the road edge.
    ExtendPath,
    /// Freeze the lateral position.
    HoldHeading,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", default)]
pub struct ScenarioSpec<T: Scalar> {
    /// Incursion level in `[-1, 1]`: -1 road edge, 0 SV lane centre, +1 centreline.
    pub incursion_level: T,
    pub v_sv_nominal: T,
    pub v_pov: T,
    pub time_gap_trigger: T,
    /// Simulation time before the trigger point.
    pub lead_time: T,
    pub road: RoadSpec<T>,
    pub sv_spec: VehicleSpec<T>,
    pub pov_spec: VehicleSpec<T>,
    pub end_heading_mode: EndHeading,
    pub post_tc_behavior: PostCritical,
    /// Time fractions of the two inner Bézier control points.
    pub bezier_inner: [T; 2],
    /// For `ContinuingLeft`: seconds after the critical point at which the
    /// extended path reaches the road edge.
    pub edge_reach_time: T,
}

/// 40 mph in m/s.
pub const MPH40: f64 = 17.88;
pub const TRIGGER_GAP_S: f64 = 5.15;
pub const STEEP_IL: f64 = -0.8;
pub const MEDIUM_IL: f64 = 0.0;
pub const SHALLOW_IL: f64 = 0.9;

impl<T: Scalar> Default for ScenarioSpec<T> {
    fn default() -> Self {
        Self::from_incursion_level(T::lit(MEDIUM_IL))
    }
}

impl<T: Scalar> ScenarioSpec<T> {
    /// Scenario with paper-default speeds and timing. Incursion levels at or
    /// below -0.5 get the steep behaviour (POV keeps crossing to the SV's
    /// shoulder); others end straight.
    pub fn from_incursion_level(il: T) -> Self {
        let steep = il <= T::lit(-0.5);
        Self {
            incursion_level: il,
            v_sv_nominal: T::lit(MPH40),
            v_pov: T::lit(MPH40),
            time_gap_trigger: T::lit(TRIGGER_GAP_S),
            lead_time: T::lit(2.0),
            road: RoadSpec::default(),
            sv_spec: VehicleSpec::sv_default(),
            pov_spec: VehicleSpec::pov_default(),
            end_heading_mode: if steep { EndHeading::ContinuingLeft } else { EndHeading::Straight },
            post_tc_behavior: if steep { PostCritical::ExtendPath } else { PostCritical::HoldHeading },
            bezier_inner: [T::lit(0.35), T::lit(0.65)],
            edge_reach_time: T::lit(1.5),
        }
    }

    pub fn steep() -> Self {
        Self::from_incursion_level(T::lit(STEEP_IL))
    }

    pub fn medium() -> Self {
        Self::from_incursion_level(T::lit(MEDIUM_IL))
    }

    pub fn shallow() -> Self {
        Self::from_incursion_level(T::lit(SHALLOW_IL))
    }

    pub fn validate(&self) -> Result<()> {
        let il = self.incursion_level;
        if !(il.is_finite() && il >= -T::one() && il <= T::one()) {
            return Err(invalid(format!("incursion level must be in [-1, 1], got {il}")));
        }
        if !(self.v_sv_nominal > T::zero() && self.v_pov > T::zero()) {
            return Err(invalid("speeds must be > 0"));
        }
        if !(self.time_gap_trigger > T::zero()) {
            return Err(invalid("time_gap_trigger must be > 0"));
        }
        if !(self.lead_time >= T::zero()) {
            return Err(invalid("lead_time must be >= 0"));
        }
        let [f1, f2] = self.bezier_inner;
        if !(T::zero() < f1 && f1 < f2 && f2 < T::one()) {
            return Err(invalid("bezier_inner fractions must satisfy 0 < f1 < f2 < 1"));
        }
        if !(self.edge_reach_time > T::zero()) {
            return Err(invalid("edge_reach_time must be > 0"));
        }
        self.road.validate()?;
        self.sv_spec.validate()?;
        self.pov_spec.validate()
    }

    pub fn timing(&self) -> ScenarioTiming<T> {
        ScenarioTiming {
            t_trigger: self.lead_time,
            t_critical: self.lead_time + self.time_gap_trigger,
        }
    }

    /// SV initial state at `t = 0`: lane centre, nominal speed, `x = 0`.
    pub fn sv_initial(&self) -> VehicleState<T> {
        VehicleState::cruising(
            T::zero(),
            T::zero(),
            self.road.sv_lane_center(),
            self.v_sv_nominal,
            Heading::Forward,
        )
    }

    /// POV reference-point `x` at the trigger point, chosen so that the
    /// bumper gap equals [`trigger_distance`] when the SV cruises at nominal
    /// speed.
    pub fn x_pov_at_trigger(&self) -> Result<T> {
        let two = T::lit(2.0);
        let d = trigger_distance(self.v_sv_nominal, self.v_pov, self.time_gap_trigger)?;
        let sv0 = self.sv_initial();
        let sv_center = sv0.center_x(&self.sv_spec) + self.v_sv_nominal * self.lead_time;
        let pov_center = sv_center + self.sv_spec.length / two + d + self.pov_spec.length / two;
        // Reverse heading: centre = x + ref_offset.
        Ok(pov_center - self.pov_spec.ref_offset)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ScenarioTiming<T: Scalar> {
    /// Trigger point: incursion onset.
    pub t_trigger: T,
    /// Critical point: projected collision without a response.
    pub t_critical: T,
}

/// Bumper gap at which the incursion starts: `gap × closing speed`.
pub fn trigger_distance<T: Scalar>(v_sv: T, v_pov: T, gap: T) -> Result<T> {
    if !(v_sv > T::zero() && v_pov > T::zero()) {
        return Err(invalid("speeds must be > 0"));
    }
    if !(gap >= T::zero()) {
        return Err(invalid("time gap must be >= 0"));
    }
    Ok(gap * (v_sv + v_pov))
}

/// Lateral reference-point position implied by an incursion level:
/// `(IL - 1) · W / 2`.
pub fn reference_lateral_at_tc<T: Scalar>(il: T, lane_width: T) -> Result<T> {
    if !(il.is_finite() && il >= -T::one() && il <= T::one()) {
        return Err(invalid(format!("incursion level must be in [-1, 1], got {il}")));
    }
    Ok((il - T::one()) * lane_width / T::lit(2.0))
}

/// Lateral path of the POV reference point as a function of time.
///
/// Between the trigger and critical points this is a cubic Bézier in the
/// `(t, y)` plane whose first inner control point shares the start's `y`
/// (zero initial lateral velocity) and whose second inner control point fixes
/// the terminal lateral velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncursionPath<T: Scalar> {
    ts: [T; 4],
    ys: [T; 4],
    v_end: T,
    post: PostCritical,
    y_floor: T,
}

/// Lateral position, velocity and acceleration at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LateralSample<T> {
    pub y: T,
    pub vy: T,
    pub ay: T,
}

impl<T: Scalar> IncursionPath<T> {
    pub fn t_start(&self) -> T {
        self.ts[0]
    }

    pub fn t_end(&self) -> T {
        self.ts[3]
    }

    /// Terminal lateral velocity at the critical point.
    pub fn end_velocity(&self) -> T {
        self.v_end
    }

    pub fn eval(&self, t: T) -> LateralSample<T> {
        let zero = T::zero();
        if t <= self.ts[0] {
            return LateralSample { y: self.ys[0], vy: zero, ay: zero };
        }
        if t >= self.ts[3] {
            let y3 = self.ys[3];
            return match self.post {
                PostCritical::HoldHeading => LateralSample { y: y3, vy: zero, ay: zero },
                PostCritical::ExtendPath => {
                    let y = y3 + self.v_end * (t - self.ts[3]);
                    if self.v_end < zero && y <= self.y_floor {
                        LateralSample { y: self.y_floor.min(y3), vy: zero, ay: zero }
                    } else {
                        LateralSample { y, vy: self.v_end, ay: zero }
                    }
                }
            };
        }
        let s = self.param_at(t);
        let (_, dt_ds, d2t) = bezier(&self.ts, s);
        let (y, dy_ds, d2y) = bezier(&self.ys, s);
        let vy = dy_ds / dt_ds;
        let ay = (d2y * dt_ds - dy_ds * d2t) / (dt_ds * dt_ds * dt_ds);
        LateralSample { y, vy, ay }
    }

    /// Inverts the monotone time polynomial by safeguarded Newton iteration.
    fn param_at(&self, t: T) -> T {
        let (mut lo, mut hi) = (T::zero(), T::one());
        let span = self.ts[3] - self.ts[0];
        let mut s = (t - self.ts[0]) / span;
        for _ in 0..64 {
            let (tv, d1, _) = bezier(&self.ts, s);
            let f = tv - t;
            if f.abs() <= T::epsilon() * span * T::lit(4.0) {
                break;
            }
            if f > T::zero() {
                hi = s;
            } else {
                lo = s;
            }
            let newton = s - f / d1;
            s = if newton > lo && newton < hi {
                newton
            } else {
                (lo + hi) / T::lit(2.0)
            };
        }
        s
    }
}

/// Cubic Bézier value with first and second parameter derivatives.
fn bezier<T: Scalar>(p: &[T; 4], s: T) -> (T, T, T) {
    let one = T::one();
    let three = T::lit(3.0);
    let six = T::lit(6.0);
    let u = one - s;
    let v = u * u * u * p[0] + three * u * u * s * p[1] + three * u * s * s * p[2] + s * s * s * p[3];
    let d1 = three * (u * u * (p[1] - p[0]) + T::lit(2.0) * u * s * (p[2] - p[1]) + s * s * (p[3] - p[2]));
    let d2 = six * (u * (p[2] - T::lit(2.0) * p[1] + p[0]) + s * (p[3] - T::lit(2.0) * p[2] + p[1]));
    (v, d1, d2)
}

pub fn build_incursion_path<T: Scalar>(
    spec: &ScenarioSpec<T>,
    timing: &ScenarioTiming<T>,
) -> Result<IncursionPath<T>> {
    spec.validate()?;
    let w = spec.road.lane_width;
    let y0 = spec.road.pov_lane_center();
    let y3 = reference_lateral_at_tc(spec.incursion_level, w)?;
    let y_floor = -w;
    let v_end = match spec.end_heading_mode {
        EndHeading::Straight => T::zero(),
        EndHeading::ContinuingLeft => ((y_floor - y3) / spec.edge_reach_time).min(T::zero()),
    };
    let (t0, t3) = (timing.t_trigger, timing.t_critical);
    let gap = t3 - t0;
    let [f1, f2] = spec.bezier_inner;
    let t1 = t0 + f1 * gap;
    let t2 = t0 + f2 * gap;
    let y2 = y3 - v_end * (t3 - t2);
    Ok(IncursionPath {
        ts: [t0, t1, t2, t3],
        ys: [y0, y0, y2, y3],
        v_end,
        post: spec.post_tc_behavior,
        y_floor,
    })
}

/// Scripted POV state at time `t`: constant speed towards `-x` with the
/// lateral path from [`build_incursion_path`].
pub fn pov_state_at<T: Scalar>(
    t: T,
    path: &IncursionPath<T>,
    spec: &ScenarioSpec<T>,
    timing: &ScenarioTiming<T>,
    x_pov_at_trigger: T,
) -> VehicleState<T> {
    let lat = path.eval(t);
    VehicleState {
        t,
        x: x_pov_at_trigger - spec.v_pov * (t - timing.t_trigger),
        y: lat.y,
        vx: -spec.v_pov,
        vy: lat.vy,
        ax: T::zero(),
        ay: lat.ay,
        heading: Heading::Reverse,
    }
}

/// A validated scenario with its derived timing, path and POV placement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario<T: Scalar> {
    pub spec: ScenarioSpec<T>,
    pub timing: ScenarioTiming<T>,
    pub path: IncursionPath<T>,
    pub x_pov_at_trigger: T,
}

impl<T: Scalar> Scenario<T> {
    pub fn new(spec: ScenarioSpec<T>) -> Result<Self> {
        spec.validate()?;
        let timing = spec.timing();
        let path = build_incursion_path(&spec, &timing)?;
        let x_pov_at_trigger = spec.x_pov_at_trigger()?;
        Ok(Self {
            spec,
            timing,
            path,
            x_pov_at_trigger,
        })
    }

    pub fn pov_state_at(&self, t: T) -> VehicleState<T> {
        pov_state_at(t, &self.path, &self.spec, &self.timing, self.x_pov_at_trigger)
    }

    /// Samples the scripted path and reports where its implied road-frame
    /// lateral acceleration leaves the POV's admissible range. Diagnostic
    /// only; the scripted path is never altered.
    pub fn check_lateral_admissibility(&self, limits: &KinematicLimits<T>, step: T) -> AdmissibilityReport<T> {
        let lat = limits.road_frame(Heading::Reverse).lat;
        let mut report = AdmissibilityReport {
            samples: 0,
            violations: 0,
            worst_excess: T::zero(),
            worst_t: None,
        };
        let n = ((self.timing.t_critical - self.timing.t_trigger) / step)
            .ceil()
            .to_usize()
            .unwrap_or(0);
        for k in 0..=n {
            let t = (self.timing.t_trigger + T::lit(k as f64) * step).min(self.timing.t_critical);
            let ay = self.path.eval(t).ay;
            let excess = (lat.a_min - ay).max(ay - lat.a_max).max(T::zero());
            report.samples += 1;
            if excess > T::zero() {
                report.violations += 1;
                if excess > report.worst_excess {
                    report.worst_excess = excess;
                    report.worst_t = Some(t);
                }
            }
        }
        report
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdmissibilityReport<T> {
    pub samples: usize,
    pub violations: usize,
    pub worst_excess: T,
    pub worst_t: Option<T>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trigger_distance_examples() {
        assert!((trigger_distance::<f64>(17.88, 17.88, 5.15).unwrap() - 184.164).abs() < 1e-9);
        assert_eq!(trigger_distance::<f64>(10.0, 10.0, 0.0).unwrap(), 0.0);
        assert!((trigger_distance::<f64>(20.0, 20.0, 5.15).unwrap() - 206.0).abs() < 1e-9);
        assert!(trigger_distance::<f64>(0.0, 17.88, 5.15).is_err());
        assert!(trigger_distance::<f64>(17.88, -1.0, 5.15).is_err());
    }

    #[test]
    fn incursion_level_geometry() {
        assert!((reference_lateral_at_tc::<f64>(0.0, 3.65).unwrap() + 1.825).abs() < 1e-12);
        assert_eq!(reference_lateral_at_tc::<f64>(1.0, 3.2).unwrap(), 0.0);
        assert!((reference_lateral_at_tc::<f64>(-0.8, 3.65).unwrap() + 3.285).abs() < 1e-12);
        assert!(reference_lateral_at_tc::<f64>(1.2, 3.65).is_err());
        assert!(reference_lateral_at_tc::<f64>(-1.01, 3.65).is_err());
    }

    fn scen(spec: ScenarioSpec<f64>) -> Scenario<f64> {
        Scenario::new(spec).unwrap()
    }

    #[test]
    fn path_boundary_conditions() {
        for spec in [ScenarioSpec::steep(), ScenarioSpec::medium(), ScenarioSpec::shallow()] {
            let s = scen(spec);
            let start = s.path.eval(s.timing.t_trigger);
            assert_eq!(start.y, 1.825);
            assert_eq!(start.vy, 0.0);
            let just_after = s.path.eval(s.timing.t_trigger + 1e-6);
            assert!(just_after.vy.abs() < 1e-4);
        }
    }

    #[test]
    fn steep_keeps_crossing_at_critical_point() {
        let s = scen(ScenarioSpec::steep());
        let end = s.path.eval(s.timing.t_critical - 1e-9);
        assert!((end.y + 3.285).abs() < 1e-6);
        assert!(end.vy < 0.0);
        // extended path reaches the road edge 1.5 s later
        let later = s.path.eval(s.timing.t_critical + 1.5 - 1e-9);
        assert!((later.y + 3.65).abs() < 1e-6);
    }

    #[test]
    fn shallow_ends_straight() {
        let s = scen(ScenarioSpec::shallow());
        let end = s.path.eval(s.timing.t_critical);
        assert!((end.y + 0.1825).abs() < 1e-12);
        assert_eq!(end.vy, 0.0);
        let before = s.path.eval(s.timing.t_critical - 1e-7);
        assert!(before.vy.abs() < 1e-5);
    }

    #[test]
    fn pov_state_examples() {
        let s = scen(ScenarioSpec::medium());
        let pre = s.pov_state_at(0.5);
        assert_eq!((pre.y, pre.vy), (1.825, 0.0));
        let tc = s.pov_state_at(s.timing.t_critical);
        assert!((tc.y + 1.825).abs() < 1e-9);
        let moved = s.pov_state_at(s.timing.t_trigger).x - tc.x;
        assert!((moved - 92.082).abs() < 1e-9);
        assert_eq!(tc.heading, Heading::Reverse);
        assert!(tc.vx < 0.0);
    }

    #[test]
    fn path_is_monotone_and_smooth() {
        for spec in [ScenarioSpec::steep(), ScenarioSpec::medium(), ScenarioSpec::shallow()] {
            let s = scen(spec);
            let (t0, t3) = (s.timing.t_trigger, s.timing.t_critical);
            let mut prev = s.path.eval(t0).y;
            for k in 1..=2000 {
                let t = t0 + (t3 - t0) * k as f64 / 2000.0;
                let y = s.path.eval(t).y;
                assert!(y <= prev + 1e-12, "non-monotone at {t}");
                prev = y;
            }
            // numeric derivative agrees with analytic velocity
            for k in 1..50 {
                let t = t0 + (t3 - t0) * k as f64 / 50.0;
                let h = 1e-6;
                let num = (s.path.eval(t + h).y - s.path.eval(t - h).y) / (2.0 * h);
                let ana = s.path.eval(t).vy;
                assert!((num - ana).abs() < 1e-5, "vy mismatch at {t}: {num} vs {ana}");
                let num_a = (s.path.eval(t + h).vy - s.path.eval(t - h).vy) / (2.0 * h);
                assert!((num_a - s.path.eval(t).ay).abs() < 1e-4);
            }
            // continuity across t_C
            let a = s.path.eval(t3 - 1e-9);
            let b = s.path.eval(t3 + 1e-9);
            assert!((a.y - b.y).abs() < 1e-6);
            assert!((a.vy - b.vy).abs() < 1e-6);
        }
    }

    #[test]
    fn x_pov_gives_trigger_gap() {
        let spec = ScenarioSpec::<f64>::medium();
        let s = scen(spec);
        let sv = VehicleState::cruising(
            s.timing.t_trigger,
            spec.v_sv_nominal * s.timing.t_trigger,
            -1.825,
            spec.v_sv_nominal,
            Heading::Forward,
        );
        let pov = s.pov_state_at(s.timing.t_trigger);
        let gap = crate::frame::longitudinal_gap(&sv, &pov, &spec.sv_spec, &spec.pov_spec);
        assert!((gap - 184.164).abs() < 1e-9);
    }

    #[test]
    fn admissibility_check_flags_rightward_acceleration() {
        let s = scen(ScenarioSpec::medium());
        let rep = s.check_lateral_admissibility(&KinematicLimits::pov_default(), 0.01);
        // The incursion accelerates towards -y, which the POV envelope forbids.
        assert!(rep.violations > 0);
        assert!(rep.worst_excess > 0.0);
        let loose = KinematicLimits { a_lat_right_max: 10.0, a_lat_left_max: 10.0, ..KinematicLimits::pov_default() };
        assert_eq!(s.check_lateral_admissibility(&loose, 0.01).violations, 0);
    }

    #[test]
    fn invalid_spec_rejected() {
        let mut spec = ScenarioSpec::<f64>::medium();
        spec.incursion_level = 1.5;
        assert!(Scenario::new(spec).is_err());
        let mut spec = ScenarioSpec::<f64>::medium();
        spec.v_pov = 0.0;
        assert!(Scenario::new(spec).is_err());
    }
}

//! Road frame, vehicle geometry, kinematic limits and the jerk-limited
//! point-kinematics integrator.
//!
//! Frame convention: `x` runs along the subject vehicle's (SV) direction of
//! travel and `y` is lateral with `y = 0` on the road centerline. The SV lane
//! spans `y ∈ [-W, 0]` (road edge / shoulder at `-W`), the oncoming lane spans
//! `y ∈ [0, W]` and the principal other vehicle (POV) travels towards `-x`.
//!
//! Traffic keeps left, so for the SV "left" (towards the shoulder) is `-y`
//! and "right" (towards the road centre) is `+y`. A vehicle facing `-x` has
//! those sides mirrored: its left is `+y`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::scalar::Scalar;

/// Direction of travel along the road axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Heading {
    /// Travelling towards `+x` (the SV direction).
    Forward,
    /// Travelling towards `-x` (the POV direction).
    Reverse,
}

impl Heading {
    #[inline]
    pub fn sign<T: Scalar>(self) -> T {
        match self {
            Heading::Forward => T::one(),
            Heading::Reverse => -T::one(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct RoadSpec<T: Scalar> {
    pub lane_width: T,
    #[serde(default = "two_lanes")]
    pub num_lanes: u8,
    /// Allowed excursion beyond either road edge.
    pub shoulder_margin: T,
}

fn two_lanes() -> u8 {
    2
}

impl<T: Scalar> Default for RoadSpec<T> {
    fn default() -> Self {
        Self {
            lane_width: T::lit(3.65),
            num_lanes: 2,
            shoulder_margin: T::lit(0.5),
        }
    }
}

impl<T: Scalar> RoadSpec<T> {
    pub fn with_lane_width(lane_width: T) -> Self {
        Self {
            lane_width,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lane_width.is_finite() && self.lane_width > T::zero()) {
            return Err(invalid(format!("lane_width must be > 0, got {}", self.lane_width)));
        }
        if !(self.shoulder_margin.is_finite() && self.shoulder_margin >= T::zero()) {
            return Err(invalid("shoulder_margin must be >= 0"));
        }
        if self.num_lanes != 2 {
            return Err(invalid("only two-lane roads are supported"));
        }
        Ok(())
    }

    /// Lateral centre of the SV lane.
    pub fn sv_lane_center(&self) -> T {
        -self.lane_width / T::lit(2.0)
    }

    /// Lateral centre of the oncoming lane.
    pub fn pov_lane_center(&self) -> T {
        self.lane_width / T::lit(2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct VehicleSpec<T: Scalar> {
    pub length: T,
    pub width: T,
    /// Offset of the positioning reference point forward of the geometric
    /// centre, measured along the vehicle's own direction of travel.
    pub ref_offset: T,
}

impl<T: Scalar> VehicleSpec<T> {
    pub fn new(length: T, width: T, ref_offset: T) -> Result<Self> {
        let spec = Self {
            length,
            width,
            ref_offset,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Default SV: 4.4 m × 1.8 m, reference point at the geometric centre.
    pub fn sv_default() -> Self {
        Self {
            length: T::lit(4.4),
            width: T::lit(1.8),
            ref_offset: T::zero(),
        }
    }

    /// Default POV: 4.4 m × 1.8 m, reference point 20 cm ahead of centre.
    pub fn pov_default() -> Self {
        Self {
            ref_offset: T::lit(0.2),
            ..Self::sv_default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length.is_finite() && self.length > T::zero()) {
            return Err(invalid("vehicle length must be > 0"));
        }
        if !(self.width.is_finite() && self.width > T::zero()) {
            return Err(invalid("vehicle width must be > 0"));
        }
        if !(self.ref_offset.is_finite() && self.ref_offset.abs() < self.length / T::lit(2.0)) {
            return Err(invalid("|ref_offset| must be < length/2"));
        }
        Ok(())
    }
}

/// Kinematic state of one vehicle's reference point, in the road frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct VehicleState<T: Scalar> {
    pub t: T,
    pub x: T,
    pub y: T,
    pub vx: T,
    pub vy: T,
    pub ax: T,
    pub ay: T,
    pub heading: Heading,
}

impl<T: Scalar> VehicleState<T> {
    /// A vehicle cruising straight at `speed` (magnitude) in its heading.
    pub fn cruising(t: T, x: T, y: T, speed: T, heading: Heading) -> Self {
        Self {
            t,
            x,
            y,
            vx: heading.sign::<T>() * speed,
            vy: T::zero(),
            ax: T::zero(),
            ay: T::zero(),
            heading,
        }
    }

    pub fn is_finite(&self) -> bool {
        [self.t, self.x, self.y, self.vx, self.vy, self.ax, self.ay]
            .iter()
            .all(|v| v.is_finite())
    }

    /// Speed along the vehicle's own direction of travel.
    pub fn speed(&self) -> T {
        self.heading.sign::<T>() * self.vx
    }

    /// Longitudinal position of the geometric centre.
    pub fn center_x(&self, spec: &VehicleSpec<T>) -> T {
        self.x - self.heading.sign::<T>() * spec.ref_offset
    }
}

/// Raw driver inputs plus the per-axis jerk command derived from them.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ControlInput<T: Scalar> {
    pub accel_pct: T,
    pub brake_pct: T,
    /// Positive towards the road centre for the SV.
    pub steer_deg: T,
    /// Road-frame jerk commands.
    pub jx: T,
    pub jy: T,
}

impl<T: Scalar> ControlInput<T> {
    pub fn validate(&self) -> Result<()> {
        let pct = |v: T| v.is_finite() && v >= T::zero() && v <= T::lit(100.0);
        if !pct(self.accel_pct) || !pct(self.brake_pct) {
            return Err(invalid("pedal percentages must lie in [0, 100]"));
        }
        if !(self.steer_deg.is_finite() && self.jx.is_finite() && self.jy.is_finite()) {
            return Err(Error::NonFinite("control input"));
        }
        Ok(())
    }
}

/// Per-vehicle limits, expressed in the vehicle's own frame.
///
/// Lateral acceleration limits are split by side so that a vehicle can be
/// biased toward steering one way. `v_lat_max` bounds lateral speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct KinematicLimits<T: Scalar> {
    pub v_max: T,
    pub a_fwd_max: T,
    pub a_brk_max: T,
    pub a_lat_left_max: T,
    pub a_lat_right_max: T,
    pub j_fwd_max: T,
    pub j_bwd_max: T,
    pub j_lat_max: T,
    #[serde(default = "default_v_lat_max")]
    pub v_lat_max: T,
}

fn default_v_lat_max<T: Scalar>() -> T {
    T::lit(6.0)
}

impl<T: Scalar> KinematicLimits<T> {
    pub fn sv_default() -> Self {
        Self {
            v_max: T::lit(20.0),
            a_fwd_max: T::lit(5.0),
            a_brk_max: T::lit(8.0),
            a_lat_left_max: T::lit(6.0),
            a_lat_right_max: T::lit(6.0),
            j_fwd_max: T::lit(10.0),
            j_bwd_max: T::lit(30.0),
            j_lat_max: T::lit(30.0),
            v_lat_max: default_v_lat_max(),
        }
    }

    /// Same as the SV except for the lateral acceleration split: 4 m/s² to
    /// the left (back towards its own lane), none to the right.
    pub fn pov_default() -> Self {
        Self {
            a_lat_left_max: T::lit(4.0),
            a_lat_right_max: T::zero(),
            ..Self::sv_default()
        }
    }

    /// All caps zero: the vehicle can only keep its current velocity.
    pub fn zero() -> Self {
        Self {
            v_max: T::zero(),
            a_fwd_max: T::zero(),
            a_brk_max: T::zero(),
            a_lat_left_max: T::zero(),
            a_lat_right_max: T::zero(),
            j_fwd_max: T::zero(),
            j_bwd_max: T::zero(),
            j_lat_max: T::zero(),
            v_lat_max: T::zero(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let all = [
            self.v_max,
            self.a_fwd_max,
            self.a_brk_max,
            self.a_lat_left_max,
            self.a_lat_right_max,
            self.j_fwd_max,
            self.j_bwd_max,
            self.j_lat_max,
            self.v_lat_max,
        ];
        if all.iter().all(|v| v.is_finite() && *v >= T::zero()) {
            Ok(())
        } else {
            Err(invalid("kinematic limits must be finite and >= 0"))
        }
    }

    /// Maps the limits into road-frame per-axis bounds for a heading.
    pub fn road_frame(&self, heading: Heading) -> RoadFrameLimits<T> {
        let zero = T::zero();
        // Vehicle-frame rightward lateral direction is `+y` for Forward.
        let lon = match heading {
            Heading::Forward => AxisLimits {
                v_min: zero,
                v_max: self.v_max,
                a_min: -self.a_brk_max,
                a_max: self.a_fwd_max,
                j_min: -self.j_bwd_max,
                j_max: self.j_fwd_max,
            },
            Heading::Reverse => AxisLimits {
                v_min: -self.v_max,
                v_max: zero,
                a_min: -self.a_fwd_max,
                a_max: self.a_brk_max,
                j_min: -self.j_fwd_max,
                j_max: self.j_bwd_max,
            },
        };
        let (a_min, a_max) = match heading {
            Heading::Forward => (-self.a_lat_left_max, self.a_lat_right_max),
            Heading::Reverse => (-self.a_lat_right_max, self.a_lat_left_max),
        };
        let lat = AxisLimits {
            v_min: -self.v_lat_max,
            v_max: self.v_lat_max,
            a_min,
            a_max,
            j_min: -self.j_lat_max,
            j_max: self.j_lat_max,
        };
        RoadFrameLimits { lon, lat }
    }
}

/// Bounds of one road-frame axis of the triple integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AxisLimits<T: Scalar> {
    pub v_min: T,
    pub v_max: T,
    pub a_min: T,
    pub a_max: T,
    pub j_min: T,
    pub j_max: T,
}

impl<T: Scalar> AxisLimits<T> {
    /// One forward-Euler step; clamps jerk, then acceleration, then velocity.
    /// Position advances with the pre-step velocity.
    #[inline]
    pub fn euler(&self, p: T, v: T, a: T, j: T, dt: T) -> (T, T, T) {
        let j = j.clamp_to(self.j_min, self.j_max);
        let a_next = (a + dt * j).clamp_to(self.a_min, self.a_max);
        let v_next = (v + dt * a).clamp_to(self.v_min, self.v_max);
        let p_next = p + dt * v;
        (p_next, v_next, a_next)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoadFrameLimits<T: Scalar> {
    pub lon: AxisLimits<T>,
    pub lat: AxisLimits<T>,
}

/// Advances a vehicle by one step of the jerk-limited point kinematics.
///
/// `jerk` is the road-frame command `(jx, jy)`; it is clamped to the limits
/// mapped through the state's heading.
pub fn step_vehicle<T: Scalar>(
    state: &VehicleState<T>,
    jerk: (T, T),
    limits: &KinematicLimits<T>,
    dt: T,
) -> Result<VehicleState<T>> {
    if !(dt.is_finite() && dt > T::zero()) {
        return Err(invalid(format!("dt must be > 0, got {dt}")));
    }
    if !state.is_finite() {
        return Err(Error::NonFinite("vehicle state"));
    }
    if !(jerk.0.is_finite() && jerk.1.is_finite()) {
        return Err(Error::NonFinite("jerk command"));
    }
    let rf = limits.road_frame(state.heading);
    let (x, vx, ax) = rf.lon.euler(state.x, state.vx, state.ax, jerk.0, dt);
    let (y, vy, ay) = rf.lat.euler(state.y, state.vy, state.ay, jerk.1, dt);
    Ok(VehicleState {
        t: state.t + dt,
        x,
        y,
        vx,
        vy,
        ax,
        ay,
        heading: state.heading,
    })
}

/// Axis-aligned rectangle in road coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Rect<T: Scalar> {
    pub x_min: T,
    pub x_max: T,
    pub y_min: T,
    pub y_max: T,
}

impl<T: Scalar> Rect<T> {
    pub fn from_center(cx: T, cy: T, length: T, width: T) -> Self {
        let hl = length / T::lit(2.0);
        let hw = width / T::lit(2.0);
        Self {
            x_min: cx - hl,
            x_max: cx + hl,
            y_min: cy - hw,
            y_max: cy + hw,
        }
    }

    pub fn area(&self) -> T {
        (self.x_max - self.x_min) * (self.y_max - self.y_min)
    }

    pub fn center(&self) -> (T, T) {
        let two = T::lit(2.0);
        ((self.x_min + self.x_max) / two, (self.y_min + self.y_max) / two)
    }
}

/// Body rectangle of a vehicle. Headings are treated as road-aligned.
pub fn footprint<T: Scalar>(state: &VehicleState<T>, spec: &VehicleSpec<T>) -> Rect<T> {
    Rect::from_center(state.center_x(spec), state.y, spec.length, spec.width)
}

/// True iff the open interiors intersect; touching edges do not count.
pub fn rectangles_overlap<T: Scalar>(a: &Rect<T>, b: &Rect<T>) -> bool {
    a.x_min < b.x_max && b.x_min < a.x_max && a.y_min < b.y_max && b.y_min < a.y_max
}

/// Front-bumper to front-bumper distance along `x` for the head-on pair.
/// Negative once the bodies overlap longitudinally or have passed.
pub fn longitudinal_gap<T: Scalar>(
    sv: &VehicleState<T>,
    pov: &VehicleState<T>,
    sv_spec: &VehicleSpec<T>,
    pov_spec: &VehicleSpec<T>,
) -> T {
    let two = T::lit(2.0);
    (pov.center_x(pov_spec) - pov_spec.length / two) - (sv.center_x(sv_spec) + sv_spec.length / two)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sv_at(x: f64, vx: f64, ax: f64) -> VehicleState<f64> {
        VehicleState {
            t: 0.0,
            x,
            y: -1.825,
            vx,
            vy: 0.0,
            ax,
            ay: 0.0,
            heading: Heading::Forward,
        }
    }

    #[test]
    fn euler_step_uses_pre_step_velocity() {
        let lim = KinematicLimits::sv_default();
        let s = step_vehicle(&sv_at(0.0, 20.0, 0.0), (10.0, 0.0), &lim, 0.1).unwrap();
        assert!((s.x - 2.0).abs() < 1e-12);
        assert!((s.vx - 20.0).abs() < 1e-12);
        assert!((s.ax - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coasting_advances_position_only() {
        let lim = KinematicLimits::sv_default();
        let mut st = sv_at(3.0, 12.5, 0.0);
        st.vy = 0.4;
        let s = step_vehicle(&st, (0.0, 0.0), &lim, 0.1).unwrap();
        assert_eq!(s.x, 3.0 + 0.1 * 12.5);
        assert_eq!(s.y, -1.825 + 0.1 * 0.4);
        assert_eq!((s.vx, s.vy, s.ax, s.ay), (12.5, 0.4, 0.0, 0.0));
    }

    #[test]
    fn speed_saturates_at_cap() {
        let lim = KinematicLimits::sv_default();
        let s = step_vehicle(&sv_at(0.0, 20.0, 1.0), (0.0, 0.0), &lim, 0.1).unwrap();
        assert_eq!(s.vx, 20.0);
    }

    #[test]
    fn hard_braking_floors_speed_at_zero() {
        let lim = KinematicLimits::sv_default();
        let s = step_vehicle(&sv_at(0.0, 0.3, -8.0), (0.0, 0.0), &lim, 0.1).unwrap();
        assert_eq!(s.vx, 0.0);
    }

    #[test]
    fn rejects_bad_dt_and_non_finite() {
        let lim = KinematicLimits::sv_default();
        assert!(step_vehicle(&sv_at(0.0, 1.0, 0.0), (0.0, 0.0), &lim, 0.0).is_err());
        assert!(step_vehicle(&sv_at(0.0, 1.0, 0.0), (0.0, 0.0), &lim, -0.1).is_err());
        assert!(step_vehicle(&sv_at(f64::NAN, 1.0, 0.0), (0.0, 0.0), &lim, 0.1).is_err());
        assert!(step_vehicle(&sv_at(0.0, 1.0, 0.0), (f64::INFINITY, 0.0), &lim, 0.1).is_err());
    }

    #[test]
    fn pov_lateral_clamp_is_one_sided() {
        let lim = KinematicLimits::pov_default();
        let mut pov = VehicleState::cruising(0.0, 100.0, 1.825, 17.88, Heading::Reverse);
        for _ in 0..20 {
            pov = step_vehicle(&pov, (0.0, -30.0), &lim, 0.1).unwrap();
            assert!(pov.ay >= 0.0);
        }
        for _ in 0..20 {
            pov = step_vehicle(&pov, (0.0, 30.0), &lim, 0.1).unwrap();
        }
        assert_eq!(pov.ay, 4.0);
        assert!(pov.vx <= 0.0);
    }

    #[test]
    fn reverse_heading_mirrors_longitudinal_bounds() {
        let rf = KinematicLimits::<f64>::pov_default().road_frame(Heading::Reverse);
        assert_eq!((rf.lon.v_min, rf.lon.v_max), (-20.0, 0.0));
        assert_eq!((rf.lon.a_min, rf.lon.a_max), (-5.0, 8.0));
        assert_eq!((rf.lon.j_min, rf.lon.j_max), (-10.0, 30.0));
        assert_eq!((rf.lat.a_min, rf.lat.a_max), (0.0, 4.0));
    }

    #[test]
    fn footprint_from_defaults() {
        let spec = VehicleSpec::<f64>::sv_default();
        let r = footprint(&VehicleState::cruising(0.0, 10.0, -1.825, 0.0, Heading::Forward), &spec);
        assert!((r.x_min - 7.8).abs() < 1e-12 && (r.x_max - 12.2).abs() < 1e-12);
        assert!((r.y_min + 2.725).abs() < 1e-12 && (r.y_max + 0.925).abs() < 1e-12);
    }

    #[test]
    fn pov_reference_point_sits_ahead_of_centre() {
        let spec = VehicleSpec::<f64>::pov_default();
        let r = footprint(&VehicleState::cruising(0.0, 100.0, 1.825, 17.88, Heading::Reverse), &spec);
        assert!((r.center().0 - 100.2).abs() < 1e-12);
    }

    #[test]
    fn zero_size_spec_rejected() {
        assert!(VehicleSpec::new(0.0, 1.8, 0.0).is_err());
        assert!(VehicleSpec::new(4.4, 0.0, 0.0).is_err());
        assert!(VehicleSpec::new(4.4, 1.8, 2.2).is_err());
    }

    #[test]
    fn overlap_convention() {
        let a = Rect { x_min: 0.0, x_max: 4.0, y_min: 0.0, y_max: 2.0 };
        let b = Rect { x_min: 3.0, x_max: 7.0, y_min: 1.0, y_max: 3.0 };
        let edge = Rect { x_min: 4.0, x_max: 8.0, y_min: 0.0, y_max: 2.0 };
        let corner = Rect { x_min: 4.0, x_max: 8.0, y_min: 2.0, y_max: 4.0 };
        assert!(rectangles_overlap(&a, &a));
        assert!(rectangles_overlap(&a, &b));
        assert!(!rectangles_overlap(&a, &edge));
        assert!(!rectangles_overlap(&a, &corner));
    }

    #[test]
    fn gap_examples() {
        let (svs, povs) = (VehicleSpec::<f64>::sv_default(), VehicleSpec::<f64>::pov_default());
        let sv = VehicleState::cruising(0.0, 0.0, -1.825, 17.88, Heading::Forward);
        let pov = VehicleState::cruising(0.0, 100.0, 1.825, 17.88, Heading::Reverse);
        assert!((longitudinal_gap(&sv, &pov, &svs, &povs) - 95.8).abs() < 1e-9);

        // bumpers touching: POV centre 4.4 m ahead of SV centre
        let touching = VehicleState::cruising(0.0, 4.4 - 0.2, 1.825, 17.88, Heading::Reverse);
        assert!(longitudinal_gap(&sv, &touching, &svs, &povs).abs() < 1e-12);

        let passed = VehicleState::cruising(0.0, -10.0, 1.825, 17.88, Heading::Reverse);
        assert!(longitudinal_gap(&sv, &passed, &svs, &povs) < 0.0);
    }

    #[test]
    fn f32_step_matches_hand_euler() {
        let lim = KinematicLimits::<f32>::sv_default();
        let st = VehicleState::<f32>::cruising(0.0, 0.0, 0.0, 20.0, Heading::Forward);
        let s = step_vehicle(&st, (10.0, 0.0), &lim, 0.1).unwrap();
        assert!((s.x - 2.0).abs() < 1e-6 && (s.ax - 1.0).abs() < 1e-6);
    }

    fn heading() -> impl Strategy<Value = Heading> {
        prop_oneof![Just(Heading::Forward), Just(Heading::Reverse)]
    }

    proptest! {
        #[test]
        fn step_respects_limits(
            h in heading(), pov in any::<bool>(),
            speed in 0.0f64..25.0, vy in -8.0f64..8.0,
            ax in -12.0f64..12.0, ay in -10.0f64..10.0,
            jx in -100.0f64..100.0, jy in -100.0f64..100.0,
            dt in 0.001f64..0.2,
        ) {
            let lim = if pov { KinematicLimits::pov_default() } else { KinematicLimits::sv_default() };
            let st = VehicleState { t: 0.0, x: 0.0, y: 0.0, vx: h.sign::<f64>() * speed, vy, ax, ay, heading: h };
            let s = step_vehicle(&st, (jx, jy), &lim, dt).unwrap();
            let rf = lim.road_frame(h);
            prop_assert!(s.vx >= rf.lon.v_min && s.vx <= rf.lon.v_max);
            prop_assert!(s.ax >= rf.lon.a_min && s.ax <= rf.lon.a_max);
            prop_assert!(s.vy.abs() <= lim.v_lat_max);
            prop_assert!(s.ay >= rf.lat.a_min && s.ay <= rf.lat.a_max);
            if pov && h == Heading::Reverse { prop_assert!(s.ay >= 0.0); }
        }

        #[test]
        fn coasting_is_linear(x0 in -100.0f64..100.0, v in 0.0f64..20.0, n in 1usize..200) {
            let lim = KinematicLimits::sv_default();
            let dt = 0.01;
            let mut st = VehicleState::cruising(0.0, x0, 0.0, v, Heading::Forward);
            for _ in 0..n {
                st = step_vehicle(&st, (0.0, 0.0), &lim, dt).unwrap();
            }
            let exact = x0 + n as f64 * dt * v;
            prop_assert!((st.x - exact).abs() <= 1e-12 * (1.0 + exact.abs()) * n as f64);
        }

        #[test]
        fn overlap_symmetric_reflexive(
            x0 in -10.0f64..10.0, y0 in -10.0f64..10.0, w0 in 0.1f64..5.0, h0 in 0.1f64..5.0,
            x1 in -10.0f64..10.0, y1 in -10.0f64..10.0, w1 in 0.1f64..5.0, h1 in 0.1f64..5.0,
        ) {
            let a = Rect::from_center(x0, y0, w0, h0);
            let b = Rect::from_center(x1, y1, w1, h1);
            prop_assert!(rectangles_overlap(&a, &a));
            prop_assert_eq!(rectangles_overlap(&a, &b), rectangles_overlap(&b, &a));
        }

        #[test]
        fn footprint_area(x in -50.0f64..50.0, y in -5.0f64..5.0, l in 0.5f64..10.0, w in 0.5f64..3.0, r in -0.2f64..0.2, h in heading()) {
            let spec = VehicleSpec::new(l, w, r).unwrap();
            let st = VehicleState::cruising(0.0, x, y, 1.0, h);
            prop_assert!((footprint(&st, &spec).area() - l * w).abs() < 1e-9);
        }
    }
}

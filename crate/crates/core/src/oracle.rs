//! Brute-force checks of the grid reachability: Monte Carlo rollouts of
//! bounded-jerk controls and closed-form single-axis extremal bounds.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::frame::{step_vehicle, AxisLimits, KinematicLimits, VehicleState};
use crate::reach::{Grid, ReachableSet};
use crate::scalar::Scalar;

/// Number of constant bang-bang corner trajectories prepended to every cloud.
pub const CORNERS: usize = 4;

/// Sampled trajectories, trajectory-major: `trajectories[i][k]` is the state
/// of trajectory `i` after `k` steps.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct SampleCloud<T: Scalar> {
    pub t0: T,
    pub dt: T,
    pub trajectories: Vec<Vec<VehicleState<T>>>,
}

impl<T: Scalar> SampleCloud<T> {
    pub fn steps(&self) -> usize {
        self.trajectories.first().map_or(0, |t| t.len().saturating_sub(1))
    }

    /// All sampled states after `k` steps.
    pub fn cloud(&self, k: usize) -> impl Iterator<Item = &VehicleState<T>> {
        self.trajectories.iter().filter_map(move |t| t.get(k))
    }
}

fn uniform<T: Scalar>(rng: &mut ChaCha8Rng, lo: T, hi: T) -> T {
    let u: f64 = rng.gen();
    lo + T::lit(u) * (hi - lo)
}

/// `n` random trajectories (jerk drawn uniformly from the admissible box
/// every step) plus the four constant corner-jerk trajectories, which come
/// first. Trajectory `i` draws from stream `i` of a generator seeded with
/// `seed`, so the result does not depend on scheduling.
pub fn sample_trajectories<T: Scalar>(
    initial: &VehicleState<T>,
    limits: &KinematicLimits<T>,
    horizon: T,
    dt: T,
    n: usize,
    seed: u64,
) -> Result<SampleCloud<T>> {
    if !(dt.is_finite() && dt > T::zero()) {
        return Err(invalid("dt must be > 0"));
    }
    if !(horizon.is_finite() && horizon >= T::zero()) {
        return Err(invalid("horizon must be >= 0"));
    }
    limits.validate()?;
    let steps = (horizon / dt).round().to_usize().unwrap_or(0);
    let rf = limits.road_frame(initial.heading);
    let corners = [
        (rf.lon.j_min, rf.lat.j_min),
        (rf.lon.j_min, rf.lat.j_max),
        (rf.lon.j_max, rf.lat.j_min),
        (rf.lon.j_max, rf.lat.j_max),
    ];
    let trajectories = (0..n + CORNERS)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let mut out = Vec::with_capacity(steps + 1);
            let mut s = *initial;
            out.push(s);
            for _ in 0..steps {
                let j = match corners.get(i) {
                    Some(c) => *c,
                    None => (
                        uniform(&mut rng, rf.lon.j_min, rf.lon.j_max),
                        uniform(&mut rng, rf.lat.j_min, rf.lat.j_max),
                    ),
                };
                s = step_vehicle(&s, j, limits, dt)?;
                out.push(s);
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleCloud { t0: initial.t, dt, trajectories })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Violation<T: Scalar> {
    pub trajectory: usize,
    pub step: usize,
    pub state: VehicleState<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ContainmentReport<T: Scalar> {
    pub checked: usize,
    pub contained: usize,
    pub fraction: f64,
    pub first_violation: Option<Violation<T>>,
}

fn is_contained<T: Scalar>(s: &VehicleState<T>, layer: &crate::reach::Layer<T>, grid: &Grid<T>) -> bool {
    let (ix, iy) = (grid.ix(s.x), grid.iy(s.y));
    for dx in -1..=1 {
        for dy in -1..=1 {
            if let Some(c) = layer.find(ix + dx, iy + dy) {
                if c.contains((s.x, s.vx, s.ax), (s.y, s.vy, s.ay)) {
                    return true;
                }
            }
        }
    }
    false
}

/// Fraction of sampled states that fall in an occupied cell whose velocity
/// and acceleration intervals contain them. Clouds and layers must share
/// the start time and step.
pub fn containment_check<T: Scalar>(samples: &SampleCloud<T>, reach: &ReachableSet<T>) -> Result<ContainmentReport<T>> {
    let tol = T::lit(1e-9) * (T::one() + reach.tau_step.abs());
    if (samples.dt - reach.tau_step).abs() > tol || (samples.t0 - reach.t).abs() > T::lit(1e-9) * (T::one() + reach.t.abs()) {
        return Err(invalid(format!(
            "misaligned clocks: samples start {} step {}, layers start {} step {}",
            samples.t0, samples.dt, reach.t, reach.tau_step
        )));
    }
    if samples.steps() + 1 > reach.layers.len() {
        return Err(invalid("samples extend beyond the reach horizon"));
    }
    let per: Vec<(usize, usize, Option<Violation<T>>)> = samples
        .trajectories
        .par_iter()
        .enumerate()
        .map(|(i, traj)| {
            let mut ok = 0;
            let mut first = None;
            for (k, s) in traj.iter().enumerate() {
                if is_contained(s, &reach.layers[k], &reach.grid) {
                    ok += 1;
                } else if first.is_none() {
                    first = Some(Violation { trajectory: i, step: k, state: *s });
                }
            }
            (traj.len(), ok, first)
        })
        .collect();
    let checked: usize = per.iter().map(|p| p.0).sum();
    let contained: usize = per.iter().map(|p| p.1).sum();
    let first_violation = per.into_iter().find_map(|p| p.2);
    Ok(ContainmentReport {
        checked,
        contained,
        fraction: if checked == 0 { 1.0 } else { contained as f64 / checked as f64 },
        first_violation,
    })
}

/// Per-step ratio of sampled position extent to layer position extent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tightness {
    pub tau: f64,
    pub ratio_x: f64,
    pub ratio_y: f64,
}

pub fn tightness<T: Scalar>(samples: &SampleCloud<T>, reach: &ReachableSet<T>) -> Vec<Tightness> {
    (0..=samples.steps().min(reach.layers.len().saturating_sub(1)))
        .filter_map(|k| {
            let (lx0, lx1, ly0, ly1) = reach.layers[k].position_hull()?;
            let mut it = samples.cloud(k);
            let f = it.next()?;
            let mut h = (f.x, f.x, f.y, f.y);
            for s in it {
                h = (h.0.min(s.x), h.1.max(s.x), h.2.min(s.y), h.3.max(s.y));
            }
            let ratio = |s: T, l: T| if l > T::zero() { (s / l).as_f64() } else { 1.0 };
            Some(Tightness {
                tau: reach.layers[k].tau.as_f64(),
                ratio_x: ratio(h.1 - h.0, lx1 - lx0),
                ratio_y: ratio(h.3 - h.2, ly1 - ly0),
            })
        })
        .collect()
}

/// Extremal continuous-time position and velocity of one axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Bounds1d<T: Scalar> {
    pub p_lo: T,
    pub p_hi: T,
    pub v_lo: T,
    pub v_hi: T,
}

/// Bang-bang extremes: jerk held at its bound until acceleration saturates,
/// velocity held at its bound once reached while acceleration pushes
/// outward.
pub fn analytic_1d_bounds<T: Scalar>(p0: T, v0: T, a0: T, lim: &AxisLimits<T>, tau: T) -> Bounds1d<T> {
    let (p_hi, v_hi) = push_up(p0, v0, a0, lim.a_max, lim.j_max.max(T::zero()), lim.v_min, lim.v_max, tau);
    let (p_lo, v_lo) = push_up(-p0, -v0, -a0, -lim.a_min, (-lim.j_min).max(T::zero()), -lim.v_max, -lim.v_min, tau);
    Bounds1d { p_lo: -p_lo, p_hi, v_lo: -v_lo, v_hi }
}

/// Upper extreme with nondecreasing acceleration.
#[allow(clippy::too_many_arguments)]
fn push_up<T: Scalar>(p0: T, v0: T, a0: T, a_max: T, j: T, v_min: T, v_max: T, tau: T) -> (T, T) {
    let zero = T::zero();
    let two = T::lit(2.0);
    let six = T::lit(6.0);
    let eps = T::lit(1e-12);
    let (mut p, mut v, mut a, mut r) = (p0, v0.clamp_to(v_min, v_max), a0.min(a_max), tau);
    for _ in 0..32 {
        if r <= zero {
            break;
        }
        let je = if a < a_max { j } else { zero };
        let t_sat = if je > zero { (a_max - a) / je } else { T::infinity() };
        let seg = r.min(t_sat);
        if v >= v_max && a >= zero {
            // acceleration never turns negative again
            p = p + v_max * r;
            v = v_max;
            break;
        }
        if v <= v_min && a < zero {
            let t0 = if je > zero { -a / je } else { T::infinity() };
            let d = seg.min(t0);
            p = p + v_min * d;
            a = if d == t0 { zero } else { a + je * d };
            r = r - d;
            continue;
        }
        let hit = first_root(v - v_max, a, je / two, seg, eps).min(first_root(v - v_min, a, je / two, seg, eps));
        let d = seg.min(hit);
        p = p + v * d + a * d * d / two + je * d * d * d / six;
        v = (v + a * d + je * d * d / two).clamp_to(v_min, v_max);
        a = if d == t_sat { a_max } else { a + je * d };
        r = r - d;
    }
    (p, v)
}

/// Smallest root of `c0 + c1 t + c2 t^2` in `(eps, limit]`, or infinity.
fn first_root<T: Scalar>(c0: T, c1: T, c2: T, limit: T, eps: T) -> T {
    let zero = T::zero();
    let mut best = T::infinity();
    let mut consider = |t: T| {
        if t > eps && t <= limit && t < best {
            best = t;
        }
    };
    if c2 == zero {
        if c1 != zero {
            consider(-c0 / c1);
        }
    } else {
        let disc = c1 * c1 - T::lit(4.0) * c2 * c0;
        if disc >= zero {
            let s = disc.sqrt();
            consider((-c1 - s) / (T::lit(2.0) * c2));
            consider((-c1 + s) / (T::lit(2.0) * c2));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Heading;
    use crate::reach::{reachable_set, PredictionConfig};
    use proptest::prelude::{any, prop_assert, proptest, ProptestConfig};

    fn sv_lon() -> AxisLimits<f64> {
        KinematicLimits::<f64>::sv_default().road_frame(Heading::Forward).lon
    }

    #[test]
    fn analytic_example() {
        let b = analytic_1d_bounds(0.0, 20.0, 0.0, &sv_lon(), 0.5);
        // jerk -30 until a = -8 at 4/15 s, then constant
        let t1: f64 = 8.0 / 30.0;
        let (p1, v1) = (20.0 * t1 - 30.0 * t1.powi(3) / 6.0, 20.0 - 15.0 * t1 * t1);
        let r = 0.5 - t1;
        let p_lo = p1 + v1 * r - 4.0 * r * r;
        assert!((b.p_lo - p_lo).abs() < 1e-12);
        assert!((b.p_lo - 9.4385).abs() < 1e-4);
        assert!((b.v_lo - (v1 - 8.0 * r)).abs() < 1e-12);
        // already at the speed cap
        assert_eq!((b.p_hi, b.v_hi), (10.0, 20.0));
    }

    #[test]
    fn uncapped_upper_bound() {
        let lim = AxisLimits { v_max: 100.0, ..sv_lon() };
        let b = analytic_1d_bounds(0.0, 20.0, 0.0, &lim, 0.5);
        assert!((b.p_hi - (10.0 + 10.0 * 0.125 / 6.0)).abs() < 1e-12);
    }

    #[test]
    fn zero_tau_is_point() {
        let b = analytic_1d_bounds(3.0, 7.0, 1.0, &sv_lon(), 0.0);
        assert_eq!((b.p_lo, b.p_hi, b.v_lo, b.v_hi), (3.0, 3.0, 7.0, 7.0));
    }

    #[test]
    fn stops_at_velocity_floor() {
        let b = analytic_1d_bounds(0.0, 2.0, -8.0, &sv_lon(), 3.0);
        assert_eq!(b.v_lo, 0.0);
        assert!((b.p_lo - 0.25).abs() < 1e-12);
    }

    #[test]
    fn corner_trajectory_matches_hand_recursion() {
        let lim = KinematicLimits::<f64>::sv_default();
        let s0 = VehicleState::cruising(0.0, 0.0, -1.825, 15.0, Heading::Forward);
        let c = sample_trajectories(&s0, &lim, 1.0, 0.1, 1, 9).unwrap();
        assert_eq!(c.trajectories.len(), 5);
        // trajectory 3: (j_fwd_max, j_lat_max)
        let (mut x, mut v, mut a) = (0.0f64, 15.0f64, 0.0f64);
        for k in 1..=10 {
            x += 0.1 * v;
            v = (v + 0.1 * a).clamp(0.0, 20.0);
            a = (a + 0.1 * 10.0).clamp(-8.0, 5.0);
            let s = c.trajectories[3][k];
            assert_eq!((s.x, s.vx, s.ax), (x, v, a));
        }
    }

    #[test]
    fn zero_limits_coast() {
        let s0 = VehicleState::cruising(0.0, 5.0, 1.0, 0.0, Heading::Forward);
        let c = sample_trajectories(&s0, &KinematicLimits::zero(), 1.0, 0.1, 20, 1).unwrap();
        for k in 0..=c.steps() {
            assert!(c.cloud(k).all(|s| s.x == 5.0 && s.y == 1.0 && s.vx == 0.0));
        }
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let s0 = VehicleState::cruising(0.0, 0.0, -1.825, 17.88, Heading::Forward);
        let lim = KinematicLimits::sv_default();
        let a = sample_trajectories(&s0, &lim, 1.0, 0.1, 50, 42).unwrap();
        let b = sample_trajectories(&s0, &lim, 1.0, 0.1, 50, 42).unwrap();
        let c = sample_trajectories(&s0, &lim, 1.0, 0.1, 50, 43).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn containment_and_negative_control() {
        let cfg = PredictionConfig::<f64> { horizon: 2.0, ..Default::default() };
        let s0 = VehicleState::cruising(1.0, 10.0, -1.825, 17.88, Heading::Forward);
        let rs = reachable_set(&s0, &cfg.sv_limits, &cfg).unwrap();
        let mut c = sample_trajectories(&s0, &cfg.sv_limits, 2.0, 0.1, 500, 3).unwrap();
        let r = containment_check(&c, &rs).unwrap();
        assert_eq!(r.fraction, 1.0);
        assert!(r.first_violation.is_none());
        for t in &mut c.trajectories {
            for s in t.iter_mut().skip(1) {
                s.x += 10.0;
            }
        }
        let r = containment_check(&c, &rs).unwrap();
        assert!(r.fraction < 1.0);
        let v = r.first_violation.unwrap();
        assert_eq!((v.trajectory, v.step), (0, 1));
    }

    #[test]
    fn misaligned_clock_rejected() {
        let cfg = PredictionConfig::<f64> { horizon: 1.0, ..Default::default() };
        let s0 = VehicleState::cruising(0.0, 0.0, -1.825, 17.88, Heading::Forward);
        let rs = reachable_set(&s0, &cfg.sv_limits, &cfg).unwrap();
        let c = sample_trajectories(&s0, &cfg.sv_limits, 1.0, 0.05, 5, 3).unwrap();
        assert!(containment_check(&c, &rs).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn analytic_brackets_fine_euler_samples(v0 in 0.0f64..20.0, a0 in -8.0f64..5.0, seed in any::<u64>()) {
            let lim = sv_lon();
            let (tau, dt) = (1.0, 0.001);
            let b = analytic_1d_bounds(0.0, v0, a0, &lim, tau);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // first-order Euler error bound for the left-point rules
            let tol = dt * ((lim.v_max - lim.v_min) + tau * (lim.a_max - lim.a_min)) + 1e-9;
            for _ in 0..8 {
                let (mut p, mut v, mut a) = (0.0, v0, a0);
                for _ in 0..1000 {
                    let j = rng.gen_range(lim.j_min..=lim.j_max);
                    (p, v, a) = lim.euler(p, v, a, j, dt);
                }
                prop_assert!(p >= b.p_lo - tol && p <= b.p_hi + tol, "{} not in [{}, {}]", p, b.p_lo, b.p_hi);
                prop_assert!(v >= b.v_lo - tol && v <= b.v_hi + tol);
            }
        }
    }
}

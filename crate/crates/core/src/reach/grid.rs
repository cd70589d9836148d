//! Interval propagation of the per-axis triple integrator on a positional
//! grid.

use serde::{Deserialize, Serialize};

use crate::frame::{AxisLimits, RoadFrameLimits};
use crate::scalar::Scalar;

/// Position, velocity and acceleration bounds of one road-frame axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AxisInterval<T: Scalar> {
    pub p_lo: T,
    pub p_hi: T,
    pub v_lo: T,
    pub v_hi: T,
    pub a_lo: T,
    pub a_hi: T,
}

impl<T: Scalar> AxisInterval<T> {
    pub fn point(p: T, v: T, a: T) -> Self {
        Self { p_lo: p, p_hi: p, v_lo: v, v_hi: v, a_lo: a, a_hi: a }
    }

    pub fn is_valid(&self) -> bool {
        self.p_lo <= self.p_hi && self.v_lo <= self.v_hi && self.a_lo <= self.a_hi
    }

    pub fn contains(&self, p: T, v: T, a: T) -> bool {
        p >= self.p_lo && p <= self.p_hi && v >= self.v_lo && v <= self.v_hi && a >= self.a_lo && a <= self.a_hi
    }

    pub fn hull(&mut self, o: &Self) {
        self.p_lo = self.p_lo.min(o.p_lo);
        self.p_hi = self.p_hi.max(o.p_hi);
        self.v_lo = self.v_lo.min(o.v_lo);
        self.v_hi = self.v_hi.max(o.v_hi);
        self.a_lo = self.a_lo.min(o.a_lo);
        self.a_hi = self.a_hi.max(o.a_hi);
    }

    /// Whether `o` lies inside `self` on every component.
    pub fn encloses(&self, o: &Self) -> bool {
        o.p_lo >= self.p_lo
            && o.p_hi <= self.p_hi
            && o.v_lo >= self.v_lo
            && o.v_hi <= self.v_hi
            && o.a_lo >= self.a_lo
            && o.a_hi <= self.a_hi
    }

    /// Interval image of one [`AxisLimits::euler`] step over all admissible
    /// jerks. Every operation is monotone in its inputs, so any Euler sample
    /// that starts inside `self` ends inside the result.
    ///
    /// With `remainder`, the bounds are widened by the part of the
    /// continuous-time motion (jerk held at its extreme, acceleration
    /// saturating at its limit) that the Euler step drops.
    pub fn advance(&self, lim: &AxisLimits<T>, dt: T, remainder: bool) -> Self {
        let a_lo = (self.a_lo + dt * lim.j_min).clamp_to(lim.a_min, lim.a_max);
        let a_hi = (self.a_hi + dt * lim.j_max).clamp_to(lim.a_min, lim.a_max);
        let mut v_lo = (self.v_lo + dt * self.a_lo).clamp_to(lim.v_min, lim.v_max);
        let mut v_hi = (self.v_hi + dt * self.a_hi).clamp_to(lim.v_min, lim.v_max);
        let mut p_lo = self.p_lo + dt * self.v_lo;
        let mut p_hi = self.p_hi + dt * self.v_hi;
        if remainder {
            let zero = T::zero();
            let (iv, ip) = jerk_integrals(self.a_lo, lim.j_min, lim.a_min, dt);
            v_lo = (v_lo + (iv - dt * self.a_lo).min(zero)).max(lim.v_min);
            p_lo = p_lo + ip.min(zero);
            let (iv, ip) = jerk_integrals(self.a_hi, lim.j_max, lim.a_max, dt);
            v_hi = (v_hi + (iv - dt * self.a_hi).max(zero)).min(lim.v_max);
            p_hi = p_hi + ip.max(zero);
        }
        Self { p_lo, p_hi, v_lo, v_hi, a_lo, a_hi }
    }

    /// Restricts the position bounds to `[lo, hi]`; `None` if disjoint.
    pub fn clip_position(&self, lo: T, hi: T) -> Option<Self> {
        let p_lo = self.p_lo.max(lo);
        let p_hi = self.p_hi.min(hi);
        (p_lo <= p_hi).then_some(Self { p_lo, p_hi, ..*self })
    }
}

/// `(∫g, ∫(dt-u)g)` over `[0, dt]` for `g(u) = a0 + j·u`, saturating at
/// `a_sat` when the jerk drives toward it.
fn jerk_integrals<T: Scalar>(a0: T, j: T, a_sat: T, dt: T) -> (T, T) {
    let zero = T::zero();
    let toward = (j < zero && a0 >= a_sat) || (j > zero && a0 <= a_sat);
    let s = if toward { ((a_sat - a0) / j).clamp_to(zero, dt) } else { dt };
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let r = dt - s;
    let iv = a0 * s + j * s * s / two + a_sat * r;
    let ip = a0 * (dt * s - s * s / two) + j * (dt * s * s / two - s * s * s / three) + a_sat * r * r / two;
    (iv, ip)
}

/// Uniform positional grid anchored at the road-frame origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Grid<T: Scalar> {
    pub dx: T,
    pub dy: T,
}

pub(crate) fn cell_index<T: Scalar>(p: T, d: T) -> i64 {
    (p / d).floor().to_i64().expect("grid index in range")
}

/// Bounds of cell `i` of spacing `d`, widened by a few ulps so that a point
/// whose computed index is `i` always lies inside.
pub(crate) fn cell_bounds<T: Scalar>(i: i64, d: T) -> (T, T) {
    let lo = T::lit(i as f64) * d;
    let hi = T::lit((i + 1) as f64) * d;
    let slack = T::epsilon() * T::lit(8.0) * (lo.abs().max(hi.abs()).max(d));
    (lo - slack, hi + slack)
}

impl<T: Scalar> Grid<T> {
    pub fn new(dx: T, dy: T) -> Self {
        Self { dx, dy }
    }

    pub fn ix(&self, x: T) -> i64 {
        cell_index(x, self.dx)
    }

    pub fn iy(&self, y: T) -> i64 {
        cell_index(y, self.dy)
    }

    /// Lower-left corner of cell `(ix, iy)`.
    pub fn origin(&self, ix: i64, iy: i64) -> (T, T) {
        (T::lit(ix as f64) * self.dx, T::lit(iy as f64) * self.dy)
    }
}

/// One occupied positional cell with the hull of the kinematic states that
/// reach it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ReachCell<T: Scalar> {
    pub ix: i64,
    pub iy: i64,
    pub x: AxisInterval<T>,
    pub y: AxisInterval<T>,
}

impl<T: Scalar> ReachCell<T> {
    pub fn contains(&self, x: (T, T, T), y: (T, T, T)) -> bool {
        self.x.contains(x.0, x.1, x.2) && self.y.contains(y.0, y.1, y.2)
    }
}

/// Cells reachable at one `tau`, sorted by `(ix, iy)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct Layer<T: Scalar> {
    pub tau: T,
    pub cells: Vec<ReachCell<T>>,
}

impl<T: Scalar> Layer<T> {
    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn find(&self, ix: i64, iy: i64) -> Option<&ReachCell<T>> {
        self.cells
            .binary_search_by(|c| (c.ix, c.iy).cmp(&(ix, iy)))
            .ok()
            .map(|k| &self.cells[k])
    }

    /// Position hull `(x_lo, x_hi, y_lo, y_hi)` of the stored sub-intervals.
    pub fn position_hull(&self) -> Option<(T, T, T, T)> {
        let first = self.cells.first()?;
        let mut h = (first.x.p_lo, first.x.p_hi, first.y.p_lo, first.y.p_hi);
        for c in &self.cells[1..] {
            h.0 = h.0.min(c.x.p_lo);
            h.1 = h.1.max(c.x.p_hi);
            h.2 = h.2.min(c.y.p_lo);
            h.3 = h.3.max(c.y.p_hi);
        }
        Some(h)
    }

    /// Whether every cell of `self` has a matching cell in `other` that
    /// encloses it.
    pub fn subset_of(&self, other: &Layer<T>) -> bool {
        self.cells.iter().all(|c| {
            other
                .find(c.ix, c.iy)
                .is_some_and(|o| o.x.encloses(&c.x) && o.y.encloses(&c.y))
        })
    }
}

/// Cells of a single axis, sorted by index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct AxisLayer<T: Scalar> {
    pub tau: T,
    pub cells: Vec<(i64, AxisInterval<T>)>,
}

impl<T: Scalar> AxisLayer<T> {
    pub fn point(p: T, v: T, a: T, d: T) -> Self {
        Self { tau: T::zero(), cells: vec![(cell_index(p, d), AxisInterval::point(p, v, a))] }
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn index_range(&self) -> Option<(i64, i64)> {
        Some((self.cells.first()?.0, self.cells.last()?.0))
    }
}

/// Scatters a propagated interval over the cells its position spans.
fn scatter<T: Scalar>(iv: &AxisInterval<T>, d: T) -> impl Iterator<Item = (i64, AxisInterval<T>)> + '_ {
    let (i0, i1) = (cell_index(iv.p_lo, d), cell_index(iv.p_hi, d));
    (i0..=i1).filter_map(move |i| {
        let (lo, hi) = cell_bounds(i, d);
        iv.clip_position(lo, hi).map(|c| (i, c))
    })
}

/// One `tau_step` of a single axis. `band` optionally restricts positions.
pub fn propagate_axis<T: Scalar>(
    layer: &AxisLayer<T>,
    lim: &AxisLimits<T>,
    d: T,
    dt: T,
    remainder: bool,
    band: Option<(T, T)>,
) -> AxisLayer<T> {
    let tau = layer.tau + dt;
    let boxes: Vec<AxisInterval<T>> = layer
        .cells
        .iter()
        .filter_map(|(_, c)| {
            let b = c.advance(lim, dt, remainder);
            match band {
                Some((lo, hi)) => b.clip_position(lo, hi),
                None => Some(b),
            }
        })
        .collect();
    let Some(lo) = boxes.iter().map(|b| cell_index(b.p_lo, d)).min() else {
        return AxisLayer { tau, cells: Vec::new() };
    };
    let hi = boxes.iter().map(|b| cell_index(b.p_hi, d)).max().unwrap();
    let mut dense: Vec<Option<AxisInterval<T>>> = vec![None; (hi - lo + 1) as usize];
    for b in &boxes {
        for (i, c) in scatter(b, d) {
            match &mut dense[(i - lo) as usize] {
                Some(e) => e.hull(&c),
                slot => *slot = Some(c),
            }
        }
    }
    let cells = dense
        .into_iter()
        .enumerate()
        .filter_map(|(k, c)| c.map(|c| (lo + k as i64, c)))
        .collect();
    AxisLayer { tau, cells }
}

/// One `tau_step` of the coupled positional grid: both axes advance
/// independently, then each cell's box is scattered over the cells it spans
/// and merged by hull. `y_band` optionally restricts lateral positions.
pub fn propagate_step<T: Scalar>(
    layer: &Layer<T>,
    lim: &RoadFrameLimits<T>,
    grid: &Grid<T>,
    dt: T,
    remainder: bool,
    y_band: Option<(T, T)>,
) -> Layer<T> {
    let tau = layer.tau + dt;
    let boxes: Vec<(AxisInterval<T>, AxisInterval<T>)> = layer
        .cells
        .iter()
        .filter_map(|c| {
            let bx = c.x.advance(&lim.lon, dt, remainder);
            let by = c.y.advance(&lim.lat, dt, remainder);
            let by = match y_band {
                Some((lo, hi)) => by.clip_position(lo, hi)?,
                None => by,
            };
            Some((bx, by))
        })
        .collect();
    if boxes.is_empty() {
        return Layer { tau, cells: Vec::new() };
    }
    let (mut x0, mut x1, mut y0, mut y1) = (i64::MAX, i64::MIN, i64::MAX, i64::MIN);
    for (bx, by) in &boxes {
        x0 = x0.min(grid.ix(bx.p_lo));
        x1 = x1.max(grid.ix(bx.p_hi));
        y0 = y0.min(grid.iy(by.p_lo));
        y1 = y1.max(grid.iy(by.p_hi));
    }
    let ny = (y1 - y0 + 1) as usize;
    let nx = (x1 - x0 + 1) as usize;
    let mut dense: Vec<Option<(AxisInterval<T>, AxisInterval<T>)>> = vec![None; nx * ny];
    let mut ys = Vec::new();
    for (bx, by) in &boxes {
        ys.clear();
        ys.extend(scatter(by, grid.dy));
        for (ix, cx) in scatter(bx, grid.dx) {
            let row = (ix - x0) as usize * ny;
            for (iy, cy) in &ys {
                match &mut dense[row + (iy - y0) as usize] {
                    Some((ex, ey)) => {
                        ex.hull(&cx);
                        ey.hull(cy);
                    }
                    slot => *slot = Some((cx, *cy)),
                }
            }
        }
    }
    let cells = dense
        .into_iter()
        .enumerate()
        .filter_map(|(k, c)| {
            c.map(|(x, y)| ReachCell {
                ix: x0 + (k / ny) as i64,
                iy: y0 + (k % ny) as i64,
                x,
                y,
            })
        })
        .collect();
    Layer { tau, cells }
}

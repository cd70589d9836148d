//! Grid reachable sets for both vehicles, POV-first pruning of the SV set
//! (the drivable area), its existence over a run, and cohort prevalence.

pub mod grid;
pub mod occupancy;
pub mod prevalence;

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::AnalysisWindow;
use crate::error::{invalid, Error, Result};
use crate::frame::{KinematicLimits, RoadSpec, VehicleSpec, VehicleState};
use crate::log::TrajectoryLog;
use crate::scalar::{time_eps, Scalar};

pub use grid::{propagate_axis, propagate_step, AxisInterval, AxisLayer, Grid, Layer, ReachCell};
pub use occupancy::{pov_occupancy, product_occupancy, Dilation, Occupancy};
pub use prevalence::{aggregate_prevalence, BoolSeries, PrevalenceSeries};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoadPruning {
    /// Drop SV cells whose body would leave the road plus shoulder margin.
    #[default]
    Corridor,
    Off,
}

impl FromStr for RoadPruning {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "corridor" => Ok(RoadPruning::Corridor),
            "off" => Ok(RoadPruning::Off),
            _ => Err(invalid(format!("road pruning must be `corridor` or `off`, got `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "", default)]
pub struct PredictionConfig<T: Scalar> {
    pub sv_limits: KinematicLimits<T>,
    pub pov_limits: KinematicLimits<T>,
    /// Lateral deviation of the POV from its lane centre that switches its
    /// prediction to the kinematic envelope (m).
    pub incursion_detect_threshold: T,
    pub road_pruning: RoadPruning,
    pub grid_dx: T,
    pub grid_dy: T,
    pub tau_step: T,
    pub horizon: T,
    /// Widen each step by the continuous-time motion the Euler step misses.
    pub continuous_remainder: bool,
}

impl<T: Scalar> Default for PredictionConfig<T> {
    fn default() -> Self {
        Self {
            sv_limits: KinematicLimits::sv_default(),
            pov_limits: KinematicLimits::pov_default(),
            incursion_detect_threshold: T::lit(0.15),
            road_pruning: RoadPruning::Corridor,
            grid_dx: T::lit(0.5),
            grid_dy: T::lit(0.25),
            tau_step: T::lit(0.1),
            horizon: T::lit(4.0),
            continuous_remainder: true,
        }
    }
}

impl<T: Scalar> PredictionConfig<T> {
    pub fn validate(&self) -> Result<()> {
        self.sv_limits.validate()?;
        self.pov_limits.validate()?;
        for (name, v) in [("grid_dx", self.grid_dx), ("grid_dy", self.grid_dy), ("tau_step", self.tau_step)] {
            if !(v.is_finite() && v > T::zero()) {
                return Err(invalid(format!("{name} must be > 0, got {v}")));
            }
        }
        if !(self.horizon.is_finite() && self.horizon >= T::zero()) {
            return Err(invalid("horizon must be >= 0"));
        }
        if !(self.incursion_detect_threshold.is_finite() && self.incursion_detect_threshold >= T::zero()) {
            return Err(invalid("incursion_detect_threshold must be >= 0"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid<T> {
        Grid::new(self.grid_dx, self.grid_dy)
    }

    /// Number of propagation steps to the horizon.
    pub fn steps(&self) -> usize {
        (self.horizon / self.tau_step).round().to_usize().unwrap_or(0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PovMode {
    /// POV assumed to keep its lane.
    Normative,
    /// Full kinematic envelope under the POV limits.
    KinematicEnvelope,
}

fn deviates<T: Scalar>(pov: &VehicleState<T>, road: &RoadSpec<T>, threshold: T) -> bool {
    (pov.y - road.pov_lane_center()).abs() > threshold
}

/// Normative until the POV first deviates from its lane centre by more than
/// the threshold, then latched to the envelope.
pub fn pov_prediction_mode<'a, T: Scalar>(
    history: impl IntoIterator<Item = &'a VehicleState<T>>,
    road: &RoadSpec<T>,
    threshold: T,
) -> PovMode {
    if history.into_iter().any(|p| deviates(p, road, threshold)) {
        PovMode::KinematicEnvelope
    } else {
        PovMode::Normative
    }
}

/// Everything the drivable-area computation needs at one anchor time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct WorldState<T: Scalar> {
    pub t: T,
    pub sv: VehicleState<T>,
    pub pov: VehicleState<T>,
    pub sv_spec: VehicleSpec<T>,
    pub pov_spec: VehicleSpec<T>,
    pub road: RoadSpec<T>,
    pub pov_mode: PovMode,
}

impl<T: Scalar> WorldState<T> {
    /// State at the sample nearest `t`, with the POV mode from the history
    /// up to that sample.
    pub fn from_log(log: &TrajectoryLog<T>, t: T, config: &PredictionConfig<T>) -> Result<Self> {
        let i = log.index_at(t).ok_or_else(|| Error::Window {
            t_b: t.as_f64(),
            t_e: t.as_f64(),
            reason: "time outside log".into(),
        })?;
        let spec = &log.scenario;
        let mode = pov_prediction_mode(
            log.samples[..=i].iter().map(|s| &s.pov),
            &spec.road,
            config.incursion_detect_threshold,
        );
        let s = &log.samples[i];
        Ok(Self {
            t: s.t,
            sv: s.sv,
            pov: s.pov,
            sv_spec: spec.sv_spec,
            pov_spec: spec.pov_spec,
            road: spec.road,
            pov_mode: mode,
        })
    }

    /// Lateral band of SV reference positions whose body stays within the
    /// road edges plus the shoulder margin.
    pub fn sv_corridor(&self) -> (T, T) {
        let half = self.sv_spec.width / T::lit(2.0);
        let edge = self.road.lane_width + self.road.shoulder_margin;
        (-edge + half, edge - half)
    }

    /// Lateral band of POV reference positions that keep its body in its lane.
    pub fn pov_lane_band(&self) -> (T, T) {
        let half = self.pov_spec.width / T::lit(2.0);
        (half, self.road.lane_width - half)
    }

    pub fn dilation(&self, grid: &Grid<T>) -> Dilation {
        Dilation::new(grid, &self.sv_spec, self.sv.heading, &self.pov_spec, self.pov.heading)
    }
}

/// Unpruned per-`tau` layers for one vehicle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct ReachableSet<T: Scalar> {
    pub t: T,
    pub tau_step: T,
    pub horizon: T,
    pub grid: Grid<T>,
    pub layers: Vec<Layer<T>>,
}

fn point_cell<T: Scalar>(s: &VehicleState<T>, grid: &Grid<T>) -> ReachCell<T> {
    ReachCell {
        ix: grid.ix(s.x),
        iy: grid.iy(s.y),
        x: AxisInterval::point(s.x, s.vx, s.ax),
        y: AxisInterval::point(s.y, s.vy, s.ay),
    }
}

fn check_state<T: Scalar>(s: &VehicleState<T>) -> Result<()> {
    if s.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("vehicle state"))
    }
}

/// Reachable set of one vehicle from its current state, without pruning.
pub fn reachable_set<T: Scalar>(
    state: &VehicleState<T>,
    limits: &KinematicLimits<T>,
    config: &PredictionConfig<T>,
) -> Result<ReachableSet<T>> {
    config.validate()?;
    limits.validate()?;
    check_state(state)?;
    let grid = config.grid();
    let lim = limits.road_frame(state.heading);
    let mut layers = Vec::with_capacity(config.steps() + 1);
    layers.push(Layer { tau: T::zero(), cells: vec![point_cell(state, &grid)] });
    for _ in 0..config.steps() {
        let next = propagate_step(layers.last().unwrap(), &lim, &grid, config.tau_step, config.continuous_remainder, None);
        layers.push(next);
    }
    Ok(ReachableSet { t: state.t, tau_step: config.tau_step, horizon: config.horizon, grid, layers })
}

/// Pruned SV layers plus the per-axis POV layers they were pruned against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DrivableArea<T: Scalar> {
    pub t: T,
    pub sv_layers: Vec<Layer<T>>,
    /// POV layers per axis; the POV set at each `tau` is their product.
    pub pov_x: Vec<AxisLayer<T>>,
    pub pov_y: Vec<AxisLayer<T>>,
    pub pov_mode: PovMode,
    pub exists: bool,
}

impl<T: Scalar> DrivableArea<T> {
    /// 2D POV cells at layer `k`.
    pub fn pov_layer(&self, k: usize) -> Layer<T> {
        let (xs, ys) = (&self.pov_x[k], &self.pov_y[k]);
        let mut cells = Vec::with_capacity(xs.cells.len() * ys.cells.len());
        for (ix, x) in &xs.cells {
            for (iy, y) in &ys.cells {
                cells.push(ReachCell { ix: *ix, iy: *iy, x: *x, y: *y });
            }
        }
        Layer { tau: xs.tau, cells }
    }

    /// First `tau` at which the pruned SV layer is empty.
    pub fn lost_at(&self) -> Option<T> {
        self.sv_layers.iter().find(|l| l.is_empty()).map(|l| l.tau)
    }
}

/// Expands the POV first, then the SV from its previous pruned layer, and
/// removes SV cells that may overlap the POV (and, with corridor pruning,
/// cells off the road).
pub fn compute_drivable_area<T: Scalar>(world: &WorldState<T>, config: &PredictionConfig<T>) -> Result<DrivableArea<T>> {
    config.validate()?;
    check_state(&world.sv)?;
    check_state(&world.pov)?;
    world.road.validate()?;
    let grid = config.grid();
    let dt = config.tau_step;
    let rem = config.continuous_remainder;
    let sv_lim = config.sv_limits.road_frame(world.sv.heading);
    let pov_lim = config.pov_limits.road_frame(world.pov.heading);
    let win = world.dilation(&grid);
    let sv_band = (config.road_pruning == RoadPruning::Corridor).then(|| world.sv_corridor());
    let pov_band = (world.pov_mode == PovMode::Normative).then(|| world.pov_lane_band());

    let steps = config.steps();
    let mut pov_x = Vec::with_capacity(steps + 1);
    let mut pov_y = Vec::with_capacity(steps + 1);
    let mut sv_layers: Vec<Layer<T>> = Vec::with_capacity(steps + 1);
    pov_x.push(AxisLayer::point(world.pov.x, world.pov.vx, world.pov.ax, grid.dx));
    pov_y.push(AxisLayer::point(world.pov.y, world.pov.vy, world.pov.ay, grid.dy));

    let mut sv0 = point_cell(&world.sv, &grid);
    let sv0_ok = match sv_band {
        Some((lo, hi)) => sv0.y.clip_position(lo, hi).map(|y| sv0.y = y).is_some(),
        None => true,
    };
    let mut first = Layer { tau: T::zero(), cells: if sv0_ok { vec![sv0] } else { vec![] } };
    let occ = product_occupancy(&pov_x[0], &pov_y[0], &win);
    first.cells.retain(|c| !occ.contains(c.ix, c.iy));
    sv_layers.push(first);

    for k in 1..=steps {
        let px = propagate_axis(&pov_x[k - 1], &pov_lim.lon, grid.dx, dt, rem, None);
        let py = propagate_axis(&pov_y[k - 1], &pov_lim.lat, grid.dy, dt, rem, pov_band);
        let prev = &sv_layers[k - 1];
        let mut sv = if prev.is_empty() {
            Layer { tau: prev.tau + dt, cells: Vec::new() }
        } else {
            propagate_step(prev, &sv_lim, &grid, dt, rem, sv_band)
        };
        if !sv.is_empty() {
            let occ = product_occupancy(&px, &py, &win);
            sv.cells.retain(|c| !occ.contains(c.ix, c.iy));
        }
        pov_x.push(px);
        pov_y.push(py);
        sv_layers.push(sv);
    }
    let exists = sv_layers.last().is_some_and(|l| !l.is_empty());
    Ok(DrivableArea { t: world.t, sv_layers, pov_x, pov_y, pov_mode: world.pov_mode, exists })
}

/// Drivable-area existence sampled over an analysis window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "")]
pub struct DrivableTimeline<T: Scalar> {
    pub t_trigger: T,
    pub window: AnalysisWindow<T>,
    pub eval_step: T,
    pub times: Vec<T>,
    pub exists: Vec<bool>,
    pub pov_mode: Vec<PovMode>,
}

impl<T: Scalar> DrivableTimeline<T> {
    /// Series relative to the trigger point, for cohort alignment.
    pub fn series(&self) -> BoolSeries {
        BoolSeries {
            t_rel_start: (self.window.t_b - self.t_trigger).as_f64(),
            step: self.eval_step.as_f64(),
            values: self.exists.clone(),
        }
    }
}

/// Evaluates the drivable area at `t_B, t_B + step, ..., t_E`, with the
/// window taken from the log.
pub fn drivable_timeline<T: Scalar>(
    log: &TrajectoryLog<T>,
    config: &PredictionConfig<T>,
    eval_step: T,
) -> Result<DrivableTimeline<T>> {
    let window = AnalysisWindow::from_log(log)?;
    drivable_timeline_in(log, &window, config, eval_step)
}

pub fn drivable_timeline_in<T: Scalar>(
    log: &TrajectoryLog<T>,
    window: &AnalysisWindow<T>,
    config: &PredictionConfig<T>,
    eval_step: T,
) -> Result<DrivableTimeline<T>> {
    if !(eval_step.is_finite() && eval_step > T::zero()) {
        return Err(invalid("eval_step must be > 0"));
    }
    config.validate()?;
    window.ensure_covered(log)?;
    let n = ((window.t_e - window.t_b) / eval_step + time_eps()).floor().to_usize().unwrap_or(0);
    let times: Vec<T> = (0..=n).map(|k| window.t_b + T::lit(k as f64) * eval_step).collect();
    let results: Vec<Result<(bool, PovMode)>> = times
        .par_iter()
        .map(|&t| {
            let w = WorldState::from_log(log, t, config)?;
            Ok((compute_drivable_area(&w, config)?.exists, w.pov_mode))
        })
        .collect();
    let mut exists = Vec::with_capacity(times.len());
    let mut pov_mode = Vec::with_capacity(times.len());
    for r in results {
        let (e, m) = r?;
        exists.push(e);
        pov_mode.push(m);
    }
    Ok(DrivableTimeline { t_trigger: log.t_trigger, window: *window, eval_step, times, exists, pov_mode })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frame::Heading;

    fn world(sv_x: f64, pov_x: f64, pov_y: f64, mode: PovMode) -> WorldState<f64> {
        WorldState {
            t: 0.0,
            sv: VehicleState::cruising(0.0, sv_x, -1.825, 17.88, Heading::Forward),
            pov: VehicleState::cruising(0.0, pov_x, pov_y, 17.88, Heading::Reverse),
            sv_spec: VehicleSpec::sv_default(),
            pov_spec: VehicleSpec::pov_default(),
            road: RoadSpec::default(),
            pov_mode: mode,
        }
    }

    #[test]
    fn mode_examples() {
        let road = RoadSpec::<f64>::default();
        let at = |y: f64| VehicleState::cruising(0.0, 0.0, y, 17.88, Heading::Reverse);
        assert_eq!(pov_prediction_mode([&at(1.825)], &road, 0.15), PovMode::Normative);
        assert_eq!(pov_prediction_mode([&at(1.825 - 0.3)], &road, 0.15), PovMode::KinematicEnvelope);
        // latched once exceeded
        let hist = [at(1.825), at(1.5), at(1.825)];
        assert_eq!(pov_prediction_mode(&hist, &road, 0.15), PovMode::KinematicEnvelope);
    }

    #[test]
    fn far_pov_prunes_nothing() {
        let cfg = PredictionConfig::<f64> { road_pruning: RoadPruning::Off, ..Default::default() };
        let w = world(0.0, 1000.0, 1.825, PovMode::KinematicEnvelope);
        let da = compute_drivable_area(&w, &cfg).unwrap();
        let rs = reachable_set(&w.sv, &cfg.sv_limits, &cfg).unwrap();
        assert!(da.exists);
        assert_eq!(da.sv_layers, rs.layers);
    }

    #[test]
    fn reachable_set_starts_with_current_cell() {
        let cfg = PredictionConfig::<f64>::default();
        let w = world(10.2, 1000.0, 1.825, PovMode::Normative);
        let rs = reachable_set(&w.sv, &cfg.sv_limits, &cfg).unwrap();
        assert_eq!(rs.layers.len(), 41);
        assert_eq!(rs.layers[0].cells.len(), 1);
        assert_eq!((rs.layers[0].cells[0].ix, rs.layers[0].cells[0].iy), (20, -8));
    }

    #[test]
    fn head_on_close_range_has_no_drivable_area() {
        let cfg = PredictionConfig::<f64>::default();
        let w = world(0.0, 20.0, -1.825, PovMode::KinematicEnvelope);
        let da = compute_drivable_area(&w, &cfg).unwrap();
        assert!(!da.exists);
        let k = da.sv_layers.iter().position(|l| l.is_empty()).unwrap();
        assert!(da.sv_layers[k..].iter().all(|l| l.is_empty()));
    }

    #[test]
    fn nested_horizons() {
        let w = world(0.0, 90.0, 1.0, PovMode::KinematicEnvelope);
        let long = compute_drivable_area(&w, &PredictionConfig::default()).unwrap();
        let short = compute_drivable_area(&w, &PredictionConfig { horizon: 2.0, ..Default::default() }).unwrap();
        assert_eq!(short.sv_layers.len(), 21);
        assert_eq!(&long.sv_layers[..21], &short.sv_layers[..]);
    }

    #[test]
    fn drivable_layers_are_subsets_of_reachable_set() {
        let cfg = PredictionConfig::<f64> { road_pruning: RoadPruning::Off, horizon: 2.0, ..Default::default() };
        let w = world(0.0, 60.0, 0.5, PovMode::KinematicEnvelope);
        let da = compute_drivable_area(&w, &cfg).unwrap();
        let rs = reachable_set(&w.sv, &cfg.sv_limits, &cfg).unwrap();
        for (d, r) in da.sv_layers.iter().zip(&rs.layers) {
            assert!(d.subset_of(r));
        }
    }

    #[test]
    fn normative_pov_stays_in_lane() {
        let cfg = PredictionConfig::<f64>::default();
        let w = world(0.0, 150.0, 1.825, PovMode::Normative);
        let da = compute_drivable_area(&w, &cfg).unwrap();
        let (lo, hi) = w.pov_lane_band();
        for l in &da.pov_y {
            for (_, c) in &l.cells {
                assert!(c.p_lo >= lo && c.p_hi <= hi);
            }
        }
        assert!(da.exists);
    }

    #[test]
    fn config_validation() {
        assert!(PredictionConfig::<f64> { grid_dx: 0.0, ..Default::default() }.validate().is_err());
        assert!(PredictionConfig::<f64> { incursion_detect_threshold: -1.0, ..Default::default() }.validate().is_err());
        assert_eq!(PredictionConfig::<f64>::default().steps(), 40);
        assert_eq!("off".parse::<RoadPruning>().unwrap(), RoadPruning::Off);
    }
}

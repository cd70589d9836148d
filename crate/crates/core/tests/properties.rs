use std::collections::BTreeSet;

use proptest::prelude::*;

use odli_core::analysis::response::{detect_responses, response_times, ResponseEvent, ResponseKind};
use odli_core::analysis::AnalysisWindow;
use odli_core::frame::{ControlInput, Heading, KinematicLimits, VehicleState};
use odli_core::log::{LogSample, Termination, TrajectoryLog};
use odli_core::policy::{PolicyKind, PolicySpec};
use odli_core::reach::{compute_drivable_area, PovMode, PredictionConfig, WorldState};
use odli_core::scenario::{Scenario, ScenarioSpec};
use odli_core::sim::rollout;

const DT: f64 = 0.01;

fn control_log(controls: &[(f64, f64, f64)]) -> TrajectoryLog<f64> {
    let samples = controls
        .iter()
        .enumerate()
        .map(|(k, &(a, b, s))| {
            let t = k as f64 * 0.1;
            LogSample {
                t,
                sv: VehicleState::cruising(t, 0.0, -1.825, 17.88, Heading::Forward),
                pov: VehicleState::cruising(t, 200.0, 1.825, 17.88, Heading::Reverse),
                controls: ControlInput { accel_pct: a, brake_pct: b, steer_deg: s, ..Default::default() },
            }
        })
        .collect();
    TrajectoryLog {
        dt: 0.1,
        t_trigger: 0.0,
        scenario: ScenarioSpec::medium(),
        samples,
        sv_accel_logged: true,
        termination: Termination::External,
        complete: false,
    }
}

fn controls() -> impl Strategy<Value = Vec<(f64, f64, f64)>> {
    prop::collection::vec((0.0..60.0f64, 0.0..60.0f64, -30.0..30.0f64), 50)
}

fn kind() -> impl Strategy<Value = ResponseKind> {
    prop::sample::select(ResponseKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn response_times_ignore_order_and_duplicates(
        events in prop::collection::vec((kind(), 0.0..10.0f64), 0..12),
        perm in any::<prop::sample::Index>(),
        dup in any::<prop::sample::Index>(),
    ) {
        let evs: Vec<_> = events.iter().map(|&(kind, t)| ResponseEvent { kind, t }).collect();
        let base = response_times(&evs, 1.0);
        let mut shuffled = evs.clone();
        if !shuffled.is_empty() {
            let n = shuffled.len();
            shuffled.rotate_left(perm.index(n));
            shuffled.push(shuffled[dup.index(n)]);
        }
        shuffled.reverse();
        prop_assert_eq!(response_times(&shuffled, 1.0), base);
    }

    #[test]
    fn narrower_window_finds_subset(c in controls(), front in 0.0..1.5f64, back in 0.0..1.5f64) {
        let log = control_log(&c);
        let wide = AnalysisWindow::new(0.0, 4.9).unwrap();
        let narrow = wide.shrink(front, back).unwrap();
        let all = detect_responses(&log, &wide).unwrap();
        let some = detect_responses(&log, &narrow).unwrap();
        prop_assert!(some.iter().all(|e| all.contains(e)));
        let (tw, tn) = (response_times(&all, 0.0), response_times(&some, 0.0));
        for k in ResponseKind::ALL {
            if let Some(n) = tn.get(k) {
                prop_assert!(tw.get(k).unwrap() <= n + 1e-12);
            }
        }
    }
}

#[test]
fn policies_cross_thresholds_on_schedule() {
    let scenario = Scenario::new(ScenarioSpec::medium()).unwrap();
    let timing = scenario.timing;
    for k in PolicyKind::ALL {
        let p = PolicySpec::new(k);
        let log = rollout(&scenario, &p, &KinematicLimits::sv_default(), DT, timing.t_critical + 1.0).unwrap();
        let t_end = log.t_end().unwrap();
        let w = AnalysisWindow::with_delay(timing.t_trigger, 0.0, t_end).unwrap();
        let times = response_times(&detect_responses(&log, &w).unwrap(), timing.t_trigger);
        let intended = p.intended_crossings(&timing);
        let kinds: BTreeSet<_> = intended.iter().map(|(k, _)| *k).collect();
        assert_eq!(times.per_kind.keys().copied().collect::<BTreeSet<_>>(), kinds, "{k:?}");
        for (rk, t) in intended {
            let got = times.get(rk).unwrap() + timing.t_trigger;
            assert!((got - t).abs() <= DT + 1e-9, "{k:?} {rk:?}: {got} vs {t}");
        }
    }
}

fn envelope_world() -> WorldState<f64> {
    let scenario = Scenario::new(ScenarioSpec::medium()).unwrap();
    let log = rollout(
        &scenario,
        &PolicySpec::new(PolicyKind::NoResponse),
        &KinematicLimits::sv_default(),
        DT,
        scenario.timing.t_critical + 1.0,
    )
    .unwrap();
    let t = scenario.timing.t_critical - 1.2;
    let w = WorldState::from_log(&log, t, &PredictionConfig::default()).unwrap();
    assert_eq!(w.pov_mode, PovMode::KinematicEnvelope);
    w
}

fn sv_cells(world: &WorldState<f64>, cfg: &PredictionConfig<f64>) -> Vec<BTreeSet<(i64, i64)>> {
    compute_drivable_area(world, cfg)
        .unwrap()
        .sv_layers
        .iter()
        .map(|l| l.cells.iter().map(|c| (c.ix, c.iy)).collect())
        .collect()
}

#[test]
fn larger_pov_limits_never_grow_the_area() {
    let world = envelope_world();
    let cfg = PredictionConfig { horizon: 1.5, ..PredictionConfig::default() };
    let small = sv_cells(&world, &cfg);
    let mut shrank = false;
    for scale in [1.25, 2.0] {
        let mut big = cfg;
        let l = &mut big.pov_limits;
        l.a_fwd_max *= scale;
        l.a_brk_max *= scale;
        l.a_lat_left_max *= scale;
        l.a_lat_right_max *= scale;
        l.j_fwd_max *= scale;
        l.j_bwd_max *= scale;
        l.j_lat_max *= scale;
        l.v_lat_max *= scale;
        let large = sv_cells(&world, &big);
        for (a, b) in large.iter().zip(&small) {
            assert!(a.is_subset(b), "scale {scale}");
            shrank |= a.len() < b.len();
        }
    }
    assert!(shrank, "POV limits never pruned anything");
}

#[test]
fn refined_grid_stays_within_one_coarse_cell() {
    let world = envelope_world();
    let coarse_cfg = PredictionConfig { horizon: 1.0, ..PredictionConfig::default() };
    let fine_cfg = PredictionConfig { grid_dx: coarse_cfg.grid_dx / 2.0, grid_dy: coarse_cfg.grid_dy / 2.0, ..coarse_cfg };
    let coarse = sv_cells(&world, &coarse_cfg);
    let fine = sv_cells(&world, &fine_cfg);
    for (k, (c, f)) in coarse.iter().zip(&fine).enumerate() {
        for &(ix, iy) in f {
            let (cx, cy) = (ix.div_euclid(2), iy.div_euclid(2));
            let near = (-1..=1).any(|dx| (-1..=1).any(|dy| c.contains(&(cx + dx, cy + dy))));
            assert!(near, "layer {k}: fine cell ({ix}, {iy}) far from the coarse area");
        }
    }
}

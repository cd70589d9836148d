//! End-to-end runs driven by a [`RunConfig`]: cohort simulation, response and
//! sequence analysis, drivable-area timelines, prevalence and the sampling
//! oracle, each producing a deterministic table.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::response::{detect_with, response_times, ResponseKind};
use crate::analysis::sequence::{build_sequence_graph, SequenceGraph, SequenceRun, SkippedRun};
use crate::analysis::AnalysisWindow;
use crate::error::{Error, Result};
use crate::io::emit::{emit_prevalence, emit_sequence_graph, write_table_file};
use crate::io::log_csv::save_trajectory_log;
use crate::io::RunConfig;
use crate::log::TrajectoryLog;
use crate::oracle::{containment_check, sample_trajectories, tightness};
use crate::policy::{PolicyKind, PolicySpec};
use crate::reach::{aggregate_prevalence, drivable_timeline_in, reachable_set, DrivableTimeline, PrevalenceSeries};
use crate::scenario::Scenario;
use crate::sim::{classify_outcome, rollout, time_of_closest_proximity, OutcomeReport};

/// One simulated cohort member.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub index: usize,
    /// Index into `RunConfig::cohort`.
    pub entry: usize,
    /// Policy after the per-run delay offset.
    pub policy: PolicySpec<f64>,
    pub delay_offset: f64,
    pub log: TrajectoryLog<f64>,
    pub outcome: std::result::Result<OutcomeReport<f64>, String>,
}

impl RunRecord {
    pub fn window(&self, cfg: &RunConfig) -> Result<AnalysisWindow<f64>> {
        AnalysisWindow::with_delay(
            self.log.t_trigger,
            cfg.analysis.window_start_delay,
            time_of_closest_proximity(&self.log)?,
        )
    }
}

fn shifted(p: &PolicySpec<f64>, off: f64) -> PolicySpec<f64> {
    PolicySpec {
        reaction_delay: p.reaction_delay + off,
        steer_delay: p.steer_delay + off,
        reversal_delay: p.reversal_delay + off,
        ..*p
    }
}

/// Simulates every cohort member. Run `i` draws its delay offset from its own
/// stream of the config seed, so results do not depend on scheduling.
pub fn simulate_cohort(cfg: &RunConfig) -> Result<Vec<RunRecord>> {
    cfg.validate()?;
    let scenario = Scenario::new(cfg.scenario)?;
    let horizon = scenario.timing.t_critical + cfg.simulation.horizon_after_critical;
    let jobs: Vec<(usize, usize)> = cfg
        .cohort
        .iter()
        .enumerate()
        .flat_map(|(e, c)| std::iter::repeat(e).take(c.count))
        .enumerate()
        .collect();
    jobs.par_iter()
        .map(|&(index, entry)| {
            let e = &cfg.cohort[entry];
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(index as u64);
            let off = if e.delay_jitter > 0.0 { rng.gen_range(-e.delay_jitter..=e.delay_jitter) } else { 0.0 };
            let policy = shifted(&e.policy, off);
            let log = rollout(&scenario, &policy, &cfg.prediction.sv_limits, cfg.simulation.dt, horizon)?;
            let outcome = classify_outcome(&log).map_err(|err| err.to_string());
            Ok(RunRecord { index, entry, policy, delay_offset: off, log, outcome })
        })
        .collect()
}

/// The scenario under the no-response policy, run to the horizon.
pub fn no_response_log(cfg: &RunConfig) -> Result<TrajectoryLog<f64>> {
    let scenario = Scenario::new(cfg.scenario)?;
    let horizon = scenario.timing.t_critical + cfg.simulation.horizon_after_critical;
    rollout(&scenario, &PolicySpec::new(PolicyKind::NoResponse), &cfg.prediction.sv_limits, cfg.simulation.dt, horizon)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:.2}"))
}

pub const RUNS_HEADER: [&str; 14] = [
    "run",
    "policy",
    "delay_offset",
    "outcome",
    "t_p",
    "lateral_offset",
    "sideswipe",
    "accel_release",
    "brake_onset",
    "steer_shoulder",
    "steer_center",
    "initial_reaction",
    "evasive_response",
    "note",
];
const RUNS_UNITS: [&str; 14] = ["", "", "s", "", "s", "m", "", "s", "s", "s", "s", "s", "s", ""];

/// Outcome and response times (relative to the trigger point) per run.
pub fn response_rows(cfg: &RunConfig, runs: &[RunRecord]) -> Vec<Vec<String>> {
    runs.iter()
        .map(|r| {
            let mut row = vec![r.index.to_string(), r.policy.kind.name().to_owned(), format!("{:.4}", r.delay_offset)];
            match &r.outcome {
                Ok(o) => row.extend([
                    o.outcome.name().to_owned(),
                    format!("{:.2}", o.t_p),
                    format!("{:.3}", o.lateral_offset),
                    o.sideswipe.to_string(),
                ]),
                Err(_) => row.extend([String::new(), String::new(), String::new(), String::new()]),
            }
            let times = r
                .window(cfg)
                .and_then(|w| detect_with(&r.log, &w, &cfg.analysis.thresholds))
                .map(|ev| response_times(&ev, r.log.t_trigger));
            match times {
                Ok(t) => {
                    row.extend(ResponseKind::ALL.iter().map(|k| opt(t.get(*k))));
                    row.extend([opt(t.initial_reaction), opt(t.evasive_response)]);
                    row.push(r.outcome.clone().err().unwrap_or_default());
                }
                Err(e) => {
                    row.extend(std::iter::repeat(String::new()).take(6));
                    row.push(r.outcome.clone().err().unwrap_or_else(|| e.to_string()));
                }
            }
            row
        })
        .collect()
}

/// Sequence graph over the cohort. Runs without an outcome or window are
/// listed as skipped under their cohort index.
pub fn sequence_graph(cfg: &RunConfig, runs: &[RunRecord]) -> SequenceGraph {
    let mut skipped = Vec::new();
    let mut idx = Vec::new();
    let mut seq = Vec::new();
    for r in runs {
        match r.window(cfg) {
            Ok(window) => {
                idx.push(r.index);
                seq.push(SequenceRun { log: &r.log, window, outcome: r.outcome.as_ref().ok().map(|o| o.outcome) });
            }
            Err(e) => skipped.push(SkippedRun { index: r.index, reason: e.to_string() }),
        }
    }
    let mut g = build_sequence_graph(&seq);
    for s in &mut g.skipped {
        s.index = idx[s.index];
    }
    g.skipped.extend(skipped);
    g.skipped.sort_by_key(|s| s.index);
    g
}

/// Drivable-area timeline of each run over its analysis window.
pub fn timelines(cfg: &RunConfig, runs: &[RunRecord]) -> Vec<(usize, Result<DrivableTimeline<f64>>)> {
    runs.iter()
        .map(|r| {
            let tl = r
                .window(cfg)
                .and_then(|w| drivable_timeline_in(&r.log, &w, &cfg.prediction, cfg.analysis.eval_step));
            (r.index, tl)
        })
        .collect()
}

pub const TIMELINE_HEADER: [&str; 5] = ["run", "t", "t_rel", "exists", "pov_mode"];
const TIMELINE_UNITS: [&str; 5] = ["", "s", "s", "", ""];

pub fn timeline_rows(run: usize, tl: &DrivableTimeline<f64>) -> Vec<Vec<String>> {
    tl.times
        .iter()
        .zip(&tl.exists)
        .zip(&tl.pov_mode)
        .map(|((t, e), m)| {
            let mode = serde_json::to_value(m).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default();
            vec![run.to_string(), format!("{t:.3}"), format!("{:.3}", t - tl.t_trigger), e.to_string(), mode]
        })
        .collect()
}

pub fn prevalence(cfg: &RunConfig, timelines: &[(usize, Result<DrivableTimeline<f64>>)]) -> Result<PrevalenceSeries> {
    let series: Vec<_> = timelines.iter().filter_map(|(_, t)| t.as_ref().ok().map(|t| t.series())).collect();
    if series.is_empty() {
        return Err(Error::EmptyCohort);
    }
    aggregate_prevalence(&series, cfg.analysis.bootstrap_resamples, cfg.seed)
}

/// One containment check of the sampling oracle.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OracleRow {
    pub anchor_t: f64,
    pub vehicle: &'static str,
    pub checked: usize,
    pub contained: usize,
    pub fraction: f64,
    pub tightness_x: f64,
    pub tightness_y: f64,
}

pub const ORACLE_HEADER: [&str; 7] = ["anchor_t", "vehicle", "checked", "contained", "fraction", "tightness_x", "tightness_y"];
const ORACLE_UNITS: [&str; 7] = ["s", "", "states", "states", "1", "1", "1"];

/// Checks the unpruned reachable sets of both vehicles against `samples`
/// random trajectories at `anchors` evenly spaced times over the no-response
/// analysis window.
pub fn oracle_verify(cfg: &RunConfig, samples: usize, anchors: usize) -> Result<Vec<OracleRow>> {
    cfg.validate()?;
    if anchors == 0 {
        return Err(crate::error::invalid("need at least one anchor time"));
    }
    let log = no_response_log(cfg)?;
    let w = AnalysisWindow::with_delay(log.t_trigger, cfg.analysis.window_start_delay, time_of_closest_proximity(&log)?)?;
    let p = &cfg.prediction;
    let mut rows = Vec::new();
    for k in 0..anchors {
        let frac = if anchors == 1 { 0.0 } else { k as f64 / (anchors - 1) as f64 };
        let t = w.t_b + (w.t_e - w.t_b) * frac;
        let i = log.index_at(t).ok_or_else(|| crate::error::invalid("anchor outside log"))?;
        let s = &log.samples[i];
        for (v, (state, lim)) in [(s.sv, p.sv_limits), (s.pov, p.pov_limits)].into_iter().enumerate() {
            let reach = reachable_set(&state, &lim, p)?;
            let seed = cfg.seed.wrapping_add((2 * k + v) as u64);
            let cloud = sample_trajectories(&state, &lim, p.horizon, p.tau_step, samples, seed)?;
            let rep = containment_check(&cloud, &reach)?;
            let last = tightness(&cloud, &reach).last().copied();
            rows.push(OracleRow {
                anchor_t: s.t,
                vehicle: ["sv", "pov"][v],
                checked: rep.checked,
                contained: rep.contained,
                fraction: rep.fraction,
                tightness_x: last.map_or(f64::NAN, |t| t.ratio_x),
                tightness_y: last.map_or(f64::NAN, |t| t.ratio_y),
            });
        }
    }
    Ok(rows)
}

pub fn oracle_rows(rows: &[OracleRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                format!("{:.2}", r.anchor_t),
                r.vehicle.to_owned(),
                r.checked.to_string(),
                r.contained.to_string(),
                r.fraction.to_string(),
                format!("{:.4}", r.tightness_x),
                format!("{:.4}", r.tightness_y),
            ]
        })
        .collect()
}

pub fn write_oracle_table(rows: &[OracleRow], path: &Path) -> Result<()> {
    write_table_file(path, &ORACLE_HEADER, &ORACLE_UNITS, &oracle_rows(rows))
}

pub fn write_runs_table(cfg: &RunConfig, runs: &[RunRecord], path: &Path) -> Result<()> {
    write_table_file(path, &RUNS_HEADER, &RUNS_UNITS, &response_rows(cfg, runs))
}

pub fn write_timeline_table(tls: &[(usize, Result<DrivableTimeline<f64>>)], path: &Path) -> Result<()> {
    let rows: Vec<Vec<String>> = tls
        .iter()
        .filter_map(|(i, t)| t.as_ref().ok().map(|t| timeline_rows(*i, t)))
        .flatten()
        .collect();
    write_table_file(path, &TIMELINE_HEADER, &TIMELINE_UNITS, &rows)
}

/// Writes each run's log as `run_NNN.csv` plus sidecar.
pub fn write_logs(runs: &[RunRecord], dir: &Path) -> Result<Vec<PathBuf>> {
    runs.iter()
        .map(|r| {
            let p = dir.join(format!("run_{:03}.csv", r.index));
            save_trajectory_log(&r.log, &p)?;
            Ok(p)
        })
        .collect()
}

/// Tables written by [`run_all`], relative to the output directory.
pub const PIPELINE_OUTPUTS: [&str; 5] = ["config.toml", "runs.csv", "sequence_graph.csv", "timelines.csv", "prevalence.csv"];

/// Simulates the cohort and writes every table to `out`.
pub fn run_all(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out)?;
    let runs = simulate_cohort(cfg)?;
    cfg.save(&out.join(PIPELINE_OUTPUTS[0]))?;
    write_runs_table(cfg, &runs, &out.join(PIPELINE_OUTPUTS[1]))?;
    emit_sequence_graph(&sequence_graph(cfg, &runs), &out.join(PIPELINE_OUTPUTS[2]))?;
    let tls = timelines(cfg, &runs);
    write_timeline_table(&tls, &out.join(PIPELINE_OUTPUTS[3]))?;
    emit_prevalence(&prevalence(cfg, &tls)?, &out.join(PIPELINE_OUTPUTS[4]))?;
    Ok(PIPELINE_OUTPUTS.iter().map(|f| out.join(f)).collect())
}

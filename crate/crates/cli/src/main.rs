use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use odli_core::io::emit::{emit_prevalence, emit_reach_snapshot, emit_sequence_graph, emit_snapshot_svg, ReachSnapshot};
use odli_core::io::{load_trajectory_log, Overrides, RunConfig};
use odli_core::pipeline::{self, RunRecord};
use odli_core::reach::{compute_drivable_area, drivable_timeline_in, WorldState};
use odli_core::scenario::Scenario;
use odli_core::sim::{rollout, time_of_closest_proximity};
use odli_core::{AnalysisWindow, Error, PolicyKind, RoadPruning, TrajectoryLog};

#[derive(Parser)]
#[command(name = "odli", version, about = "Lateral-incursion conflict simulation and drivable-area analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Scenario configuration.
    #[command(subcommand)]
    Scenario(ScenarioCmd),
    /// Simulate the cohort and write one log per run plus an outcome table.
    Simulate(Common),
    /// Response detection and sequence analysis over a simulated cohort.
    #[command(subcommand)]
    Analyze(AnalyzeCmd),
    /// Reachable sets and drivable areas.
    #[command(subcommand)]
    Reach(ReachCmd),
    /// Soundness check of the reachable-set propagation.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Full pipeline: every table into the output directory.
    Run(Common),
}

#[derive(Subcommand)]
enum ScenarioCmd {
    /// Write a reference config with every default spelled out.
    Gen {
        #[command(flatten)]
        common: Common,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum AnalyzeCmd {
    /// Outcome and response times per run.
    Responses(Common),
    /// Control-state sequence graph over the cohort.
    Sequence(Common),
}

#[derive(Subcommand)]
enum ReachCmd {
    /// Drivable area at one time, as a JSON snapshot and an SVG.
    Compute {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: LogSource,
        /// Anchor time relative to the trigger point (s); defaults to the
        /// start of the analysis window.
        #[arg(long, allow_hyphen_values = true)]
        at: Option<f64>,
        /// Render every n-th layer in the SVG.
        #[arg(long, default_value_t = 5)]
        stride: usize,
    },
    /// Drivable-area existence over the analysis window of one run.
    Timeline {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        source: LogSource,
    },
    /// Cohort prevalence of drivable-area existence with bootstrap CIs.
    Aggregate(Common),
}

#[derive(Subcommand)]
enum OracleCmd {
    /// Sample random admissible trajectories and check reachable-set containment.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Sampled trajectories per anchor state.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// Anchor states per vehicle, spread over the analysis window.
        #[arg(long, default_value_t = 5)]
        anchors: usize,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// Run configuration (TOML). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Incursion level in [-1, 1].
    #[arg(long, allow_hyphen_values = true)]
    il: Option<f64>,
    /// Restrict the cohort to one policy kind.
    #[arg(long)]
    policy: Option<String>,
    /// Simulation step (s).
    #[arg(long)]
    dt: Option<f64>,
    /// Seed for delay jitter, sampling and bootstrap.
    #[arg(long)]
    seed: Option<u64>,
    /// Longitudinal grid spacing (m).
    #[arg(long)]
    grid_dx: Option<f64>,
    /// Prediction horizon (s).
    #[arg(long)]
    horizon: Option<f64>,
    /// `corridor` or `off`.
    #[arg(long)]
    road_pruning: Option<String>,
    /// Output directory (overrides the config).
    #[arg(long, short = 'o')]
    output_dir: Option<PathBuf>,
}

#[derive(Args, Clone, Default)]
struct LogSource {
    /// Use this log instead of simulating the first cohort entry.
    #[arg(long)]
    log: Option<PathBuf>,
}

type Res<T> = Result<T, Error>;

impl Common {
    fn load(&self, il_default: Option<f64>) -> Res<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => il_default.map_or_else(RunConfig::default, RunConfig::reference),
        };
        let o = Overrides {
            il: self.il,
            policy: self.policy.as_deref().map(str::parse::<PolicyKind>).transpose()?,
            dt: self.dt,
            seed: self.seed,
            grid_dx: self.grid_dx,
            horizon: self.horizon,
            road_pruning: self.road_pruning.as_deref().map(str::parse::<RoadPruning>).transpose()?,
            output_dir: self.output_dir.clone(),
        };
        cfg.apply(&o)?;
        Ok(cfg)
    }
}

fn out_dir(cfg: &RunConfig) -> Res<PathBuf> {
    std::fs::create_dir_all(&cfg.output_dir)?;
    Ok(cfg.output_dir.clone())
}

fn paths(ps: &[PathBuf]) -> Value {
    json!(ps.iter().map(|p| p.display().to_string()).collect::<Vec<_>>())
}

/// The log given on the command line, or the first cohort entry simulated
/// without delay jitter.
fn source_log(cfg: &RunConfig, src: &LogSource) -> Res<TrajectoryLog> {
    if let Some(p) = &src.log {
        return load_trajectory_log(p);
    }
    let scenario = Scenario::new(cfg.scenario)?;
    let horizon = scenario.timing.t_critical + cfg.simulation.horizon_after_critical;
    let policy = cfg.cohort.first().map_or_else(|| odli_core::PolicySpec::new(PolicyKind::NoResponse), |e| e.policy);
    rollout(&scenario, &policy, &cfg.prediction.sv_limits, cfg.simulation.dt, horizon)
}

fn window(cfg: &RunConfig, log: &TrajectoryLog) -> Res<AnalysisWindow> {
    AnalysisWindow::with_delay(log.t_trigger, cfg.analysis.window_start_delay, time_of_closest_proximity(log)?)
}

fn outcome_counts(runs: &[RunRecord]) -> Value {
    let mut m = serde_json::Map::new();
    for r in runs {
        let key = r.outcome.as_ref().map_or("unclassified", |o| o.outcome.name());
        let e = m.entry(key).or_insert(json!(0));
        *e = json!(e.as_u64().unwrap_or(0) + 1);
    }
    Value::Object(m)
}

fn run(cli: Cli) -> Res<Value> {
    match cli.command {
        Command::Scenario(ScenarioCmd::Gen { common, out }) => {
            let cfg = common.load(common.il)?;
            let text = cfg.to_toml()?;
            match out {
                Some(p) => {
                    std::fs::write(&p, &text)?;
                    Ok(json!({ "command": "scenario gen", "outputs": paths(&[p]), "incursion_level": cfg.scenario.incursion_level }))
                }
                None => {
                    print!("{text}");
                    Ok(Value::Null)
                }
            }
        }
        Command::Simulate(common) => {
            let cfg = common.load(None)?;
            let dir = out_dir(&cfg)?;
            let runs = pipeline::simulate_cohort(&cfg)?;
            let mut outs = pipeline::write_logs(&runs, &dir)?;
            let table = dir.join("runs.csv");
            pipeline::write_runs_table(&cfg, &runs, &table)?;
            outs.push(table);
            Ok(json!({ "command": "simulate", "runs": runs.len(), "outcomes": outcome_counts(&runs), "outputs": paths(&outs) }))
        }
        Command::Analyze(AnalyzeCmd::Responses(common)) => {
            let cfg = common.load(None)?;
            let dir = out_dir(&cfg)?;
            let runs = pipeline::simulate_cohort(&cfg)?;
            let table = dir.join("runs.csv");
            pipeline::write_runs_table(&cfg, &runs, &table)?;
            Ok(json!({ "command": "analyze responses", "runs": runs.len(), "outcomes": outcome_counts(&runs), "outputs": paths(&[table]) }))
        }
        Command::Analyze(AnalyzeCmd::Sequence(common)) => {
            let cfg = common.load(None)?;
            let dir = out_dir(&cfg)?;
            let runs = pipeline::simulate_cohort(&cfg)?;
            let g = pipeline::sequence_graph(&cfg, &runs);
            let table = dir.join("sequence_graph.csv");
            emit_sequence_graph(&g, &table)?;
            Ok(json!({
                "command": "analyze sequence",
                "runs": g.runs,
                "skipped": g.skipped,
                "conservation_violations": g.conservation_violations().len(),
                "self_loops": g.self_loops(),
                "outputs": paths(&[table]),
            }))
        }
        Command::Reach(ReachCmd::Compute { common, source, at, stride }) => {
            let cfg = common.load(None)?;
            let dir = out_dir(&cfg)?;
            let log = source_log(&cfg, &source)?;
            let t = log.t_trigger + at.unwrap_or(cfg.analysis.window_start_delay);
            let world = WorldState::from_log(&log, t, &cfg.prediction)?;
            let area = compute_drivable_area(&world, &cfg.prediction)?;
            let snap = ReachSnapshot::new(&world, &area, &cfg.prediction);
            let (js, svg) = (dir.join("reach_snapshot.json"), dir.join("reach_snapshot.svg"));
            emit_reach_snapshot(&snap, &js)?;
            emit_snapshot_svg(&snap, &svg, stride)?;
            Ok(json!({
                "command": "reach compute",
                "t": world.t,
                "t_rel": world.t - log.t_trigger,
                "exists": area.exists,
                "pov_mode": area.pov_mode,
                "lost_at_tau": area.lost_at(),
                "outputs": paths(&[js, svg]),
            }))
        }
        Command::Reach(ReachCmd::Timeline { common, source }) => {
            let cfg = common.load(None)?;
            let dir = out_dir(&cfg)?;
            let log = source_log(&cfg, &source)?;
            let w = window(&cfg, &log)?;
            let tl = drivable_timeline_in(&log, &w, &cfg.prediction, cfg.analysis.eval_step)?;
            let table = dir.join("timeline.csv");
            pipeline::write_timeline_table(&[(0, Ok(tl.clone()))], &table)?;
            Ok(json!({
                "command": "reach timeline",
                "steps": tl.times.len(),
                "exists_final": tl.exists.last(),
                "outputs": paths(&[table]),
            }))
        }
        Command::Reach(ReachCmd::Aggregate(common)) => {
            let cfg = common.load(None)?;
            let dir = out_dir(&cfg)?;
            let runs = pipeline::simulate_cohort(&cfg)?;
            let tls = pipeline::timelines(&cfg, &runs);
            let p = pipeline::prevalence(&cfg, &tls)?;
            let (tt, pt) = (dir.join("timelines.csv"), dir.join("prevalence.csv"));
            pipeline::write_timeline_table(&tls, &tt)?;
            emit_prevalence(&p, &pt)?;
            Ok(json!({
                "command": "reach aggregate",
                "runs": p.n_runs,
                "steps": p.t_rel.len(),
                "resamples": p.resamples,
                "outputs": paths(&[tt, pt]),
            }))
        }
        Command::Oracle(OracleCmd::Verify { common, samples, anchors }) => {
            let cfg = common.load(None)?;
            let dir = out_dir(&cfg)?;
            let rows = pipeline::oracle_verify(&cfg, samples, anchors)?;
            let table = dir.join("oracle.csv");
            pipeline::write_oracle_table(&rows, &table)?;
            let min = rows.iter().map(|r| r.fraction).fold(1.0, f64::min);
            if min < 1.0 {
                return Err(Error::InvalidArgument(format!("reachable set missed sampled states: containment {min}")));
            }
            Ok(json!({ "command": "oracle verify", "containment": min, "checks": rows.len(), "outputs": paths(&[table]) }))
        }
        Command::Run(common) => {
            let cfg = common.load(None)?;
            let outs = pipeline::run_all(&cfg, &cfg.output_dir)?;
            Ok(json!({ "command": "run", "runs": cfg.runs(), "outputs": paths(&outs) }))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Value::Null) => ExitCode::SUCCESS,
        Ok(v) => {
            println!("{v}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": e.kind(), "message": e.to_string() }));
            ExitCode::FAILURE
        }
    }
}

//! Run configuration: one TOML document per run.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::response::Thresholds;
use crate::analysis::WINDOW_START_DELAY;
use crate::error::{Error, Result};
use crate::policy::{PolicyKind, PolicySpec};
use crate::reach::{PredictionConfig, RoadPruning};
use crate::scenario::ScenarioSpec;
use crate::sim::DEFAULT_DT;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimulationOptions {
    pub dt: f64,
    /// Rollouts stop this long after the critical point unless they collide.
    pub horizon_after_critical: f64,
}

impl Default for SimulationOptions {
    fn default() -> Self {
        Self { dt: DEFAULT_DT, horizon_after_critical: 4.0 }
    }
}

/// `count` runs of one policy. Each run shifts all of the policy's action
/// times by the same offset drawn uniformly from `[-delay_jitter, delay_jitter]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CohortEntry {
    pub policy: PolicySpec<f64>,
    pub count: usize,
    #[serde(default)]
    pub delay_jitter: f64,
}

impl CohortEntry {
    pub fn new(kind: PolicyKind, count: usize, delay_jitter: f64) -> Self {
        Self { policy: PolicySpec::new(kind), count, delay_jitter }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnalysisOptions {
    pub window_start_delay: f64,
    /// Spacing of drivable-area evaluations over the analysis window.
    pub eval_step: f64,
    pub bootstrap_resamples: usize,
    pub thresholds: Thresholds<f64>,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            window_start_delay: WINDOW_START_DELAY,
            eval_step: 0.1,
            bootstrap_resamples: 2000,
            thresholds: Thresholds::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub scenario: ScenarioSpec<f64>,
    pub simulation: SimulationOptions,
    pub analysis: AnalysisOptions,
    pub prediction: PredictionConfig<f64>,
    pub cohort: Vec<CohortEntry>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            output_dir: PathBuf::from("out"),
            scenario: ScenarioSpec::default(),
            simulation: SimulationOptions::default(),
            analysis: AnalysisOptions::default(),
            prediction: PredictionConfig::default(),
            cohort: PolicyKind::ALL.iter().map(|k| CohortEntry::new(*k, 5, 0.2)).collect(),
        }
    }
}

/// Command-line overrides applied on top of a loaded config.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub il: Option<f64>,
    /// Restricts the cohort to this policy kind.
    pub policy: Option<PolicyKind>,
    pub dt: Option<f64>,
    pub seed: Option<u64>,
    pub grid_dx: Option<f64>,
    pub horizon: Option<f64>,
    pub road_pruning: Option<RoadPruning>,
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: RunConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_toml()?)?;
        Ok(())
    }

    /// Reference config with every default spelled out, for the given
    /// incursion level.
    pub fn reference(il: f64) -> Self {
        Self { scenario: ScenarioSpec::from_incursion_level(il), ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let cfg_err = |m: String| Error::Config(m);
        self.scenario.validate()?;
        self.prediction.validate()?;
        let s = &self.simulation;
        if !(s.dt.is_finite() && s.dt > 0.0) {
            return Err(cfg_err(format!("simulation.dt must be > 0, got {}", s.dt)));
        }
        if !(s.horizon_after_critical.is_finite() && s.horizon_after_critical >= 0.0) {
            return Err(cfg_err("simulation.horizon_after_critical must be >= 0".into()));
        }
        let a = &self.analysis;
        if !(a.eval_step.is_finite() && a.eval_step > 0.0) {
            return Err(cfg_err("analysis.eval_step must be > 0".into()));
        }
        if a.bootstrap_resamples == 0 {
            return Err(cfg_err("analysis.bootstrap_resamples must be >= 1".into()));
        }
        if !(a.window_start_delay.is_finite() && a.window_start_delay >= 0.0) {
            return Err(cfg_err("analysis.window_start_delay must be >= 0".into()));
        }
        for (i, e) in self.cohort.iter().enumerate() {
            e.policy.validate().map_err(|err| cfg_err(format!("cohort[{i}]: {err}")))?;
            if !(e.delay_jitter.is_finite() && e.delay_jitter >= 0.0) {
                return Err(cfg_err(format!("cohort[{i}]: delay_jitter must be >= 0")));
            }
            if e.delay_jitter > e.policy.reaction_delay {
                return Err(cfg_err(format!("cohort[{i}]: delay_jitter exceeds reaction_delay")));
            }
        }
        Ok(())
    }

    pub fn runs(&self) -> usize {
        self.cohort.iter().map(|e| e.count).sum()
    }

    pub fn apply(&mut self, o: &Overrides) -> Result<()> {
        if let Some(il) = o.il {
            let fresh = ScenarioSpec::from_incursion_level(il);
            self.scenario = ScenarioSpec {
                incursion_level: fresh.incursion_level,
                end_heading_mode: fresh.end_heading_mode,
                post_tc_behavior: fresh.post_tc_behavior,
                ..self.scenario
            };
        }
        if let Some(kind) = o.policy {
            self.cohort.retain(|e| e.policy.kind == kind);
            if self.cohort.is_empty() {
                self.cohort.push(CohortEntry::new(kind, 1, 0.0));
            }
        }
        if let Some(dt) = o.dt {
            self.simulation.dt = dt;
        }
        if let Some(seed) = o.seed {
            self.seed = seed;
        }
        if let Some(dx) = o.grid_dx {
            self.prediction.grid_dx = dx;
        }
        if let Some(h) = o.horizon {
            self.prediction.horizon = h;
        }
        if let Some(r) = o.road_pruning {
            self.prediction.road_pruning = r;
        }
        if let Some(dir) = &o.output_dir {
            self.output_dir = dir.clone();
        }
        self.validate()
    }
}

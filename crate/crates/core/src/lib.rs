//! Opposite-direction lateral incursion scenarios: scripted conflicts,
//! driver policies, closed-loop simulation, response analysis and grid
//! reachability of the drivable area.
//!
//! The numerical core is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root fix it to `f64`; the [`f32`] module has the
//! single-precision ones. Configuration, file formats and the
//! [`pipeline`] work in `f64`.

pub mod analysis;
pub mod error;
pub mod frame;
pub mod io;
pub mod log;
pub mod oracle;
pub mod pipeline;
pub mod policy;
pub mod reach;
pub mod scalar;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type VehicleState = frame::VehicleState<f64>;
pub type VehicleSpec = frame::VehicleSpec<f64>;
pub type RoadSpec = frame::RoadSpec<f64>;
pub type KinematicLimits = frame::KinematicLimits<f64>;
pub type ControlInput = frame::ControlInput<f64>;
pub type ScenarioSpec = scenario::ScenarioSpec<f64>;
pub type Scenario = scenario::Scenario<f64>;
pub type PolicySpec = policy::PolicySpec<f64>;
pub type TrajectoryLog = log::TrajectoryLog<f64>;
pub type AnalysisWindow = analysis::AnalysisWindow<f64>;
pub type Thresholds = analysis::response::Thresholds<f64>;
pub type PredictionConfig = reach::PredictionConfig<f64>;
pub type WorldState = reach::WorldState<f64>;
pub type ReachableSet = reach::ReachableSet<f64>;
pub type DrivableArea = reach::DrivableArea<f64>;
pub type DrivableTimeline = reach::DrivableTimeline<f64>;
pub type SampleCloud = oracle::SampleCloud<f64>;

pub use analysis::sequence::SequenceGraph;
pub use io::RunConfig;
pub use policy::PolicyKind;
pub use reach::{PrevalenceSeries, RoadPruning};
pub use sim::Outcome;

/// Single-precision aliases.
pub mod f32 {
    pub type VehicleState = crate::frame::VehicleState<f32>;
    pub type VehicleSpec = crate::frame::VehicleSpec<f32>;
    pub type KinematicLimits = crate::frame::KinematicLimits<f32>;
    pub type ScenarioSpec = crate::scenario::ScenarioSpec<f32>;
    pub type Scenario = crate::scenario::Scenario<f32>;
    pub type PolicySpec = crate::policy::PolicySpec<f32>;
    pub type TrajectoryLog = crate::log::TrajectoryLog<f32>;
    pub type PredictionConfig = crate::reach::PredictionConfig<f32>;
    pub type ReachableSet = crate::reach::ReachableSet<f32>;
    pub type DrivableArea = crate::reach::DrivableArea<f32>;
}

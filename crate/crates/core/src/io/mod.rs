//! File formats and configuration.

pub mod config;
pub mod emit;
pub mod log_csv;

pub use config::{AnalysisOptions, CohortEntry, Overrides, RunConfig, SimulationOptions};
pub use emit::{
    emit_prevalence, emit_reach_snapshot, emit_sequence_graph, emit_snapshot_svg, load_reach_snapshot, read_sequence_graph,
    read_table, write_table, write_table_file, ReachSnapshot,
};
pub use log_csv::{load_trajectory_log, meta_path, save_trajectory_log, LogMeta};

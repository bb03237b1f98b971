//! Experiment execution: configuration, seeded multi-run experiments,
//! persistence of trajectories and aggregates, plots, and comparison tables.

pub mod bundle;
pub mod config;
pub mod plot;
pub mod runner;

pub use bundle::{
    compare_table, load_bundle, write_bundle, write_oracle_cache, AggregateRow, ResultsBundle,
};
pub use config::ExperimentConfig;
pub use plot::{emit_plots, PlotKind};
pub use runner::run_experiment;

//! Experiment configuration, parameter sweeps and result persistence.

mod config;
mod emit;
mod sweep;

pub use config::{load_config, parse_config, ExperimentConfig, HarvestKind, HarvestSpec, Mode};
pub use emit::{
    emit_csv, emit_json, emit_plot_data, read_csv, read_json, write_csv, write_json, write_plot_data,
};
pub use sweep::{moments_report, run_sweep, run_sweep_with, MomentsReport, ResultRow};

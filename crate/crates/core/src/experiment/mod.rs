//! Training runs, sweeps, metrics files and run manifests.

mod config;
mod manifest;
mod metrics;
mod runner;

pub use config::{parse_mode, ConfigFile, EnvOverrides, ExperimentConfig, Scenario, SweepSpec};
pub use manifest::{run_dir_name, Manifest, RunEntry, MANIFEST_FILE, METRICS_FILE, QTABLE_FILE};
pub use metrics::{
    adjacent_inversions, moving_average, read_metrics_csv, spearman, terminal_reward, terminal_window,
    write_metrics_csv, EpochMetrics, METRICS_HEADER,
};
pub use runner::{
    epoch_seed, run_behavior_change, run_many, run_training, sweep, sweep_point, RunResult, SweepRow,
};

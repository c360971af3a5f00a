use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, SweepSpec};
use super::metrics::write_metrics_csv;
use super::runner::RunResult;
use crate::agent::AgentKind;
use crate::error::{Error, Result};

pub const MANIFEST_FILE: &str = "manifest.json";
pub const METRICS_FILE: &str = "metrics.csv";
pub const QTABLE_FILE: &str = "qtable.json";

/// Subdirectory name for one (agent, seed) run.
pub fn run_dir_name(agent: AgentKind, seed: u64) -> String {
    format!("{agent}-seed{seed}")
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunEntry {
    pub agent: AgentKind,
    pub seed: u64,
    /// Relative to the manifest's directory.
    pub dir: String,
    pub terminal_reward: f64,
    /// Set for sweep runs.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_value: Option<f64>,
}

/// Resolved settings and the list of runs written under one output root.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub command: String,
    pub scenario: String,
    pub config: ExperimentConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
    pub runs: Vec<RunEntry>,
}

impl Manifest {
    pub fn new(command: &str, config: &ExperimentConfig) -> Self {
        Self {
            version: env!("CARGO_PKG_VERSION").to_string(),
            command: command.to_string(),
            scenario: config.scenario.label(),
            config: config.clone(),
            sweep: None,
            runs: Vec::new(),
        }
    }

    /// Write a run's metrics (and Q-table when `with_qtable`) under `root`,
    /// and record it.
    pub fn save_run(&mut self, root: &Path, dir: &str, result: &RunResult, with_qtable: bool, sweep_value: Option<f64>) -> Result<()> {
        let path = root.join(dir);
        fs::create_dir_all(&path).map_err(|e| Error::io(&path, e))?;
        write_metrics_csv(&result.metrics, &path.join(METRICS_FILE))?;
        if with_qtable {
            result.agent.table.save(&result.agent.hyper, &path.join(QTABLE_FILE))?;
        }
        self.runs.push(RunEntry {
            agent: result.config.agent,
            seed: result.seed,
            dir: dir.to_string(),
            terminal_reward: result.terminal_reward(),
            sweep_value,
        });
        Ok(())
    }

    pub fn write(&self, root: &Path) -> Result<()> {
        let path = root.join(MANIFEST_FILE);
        let text = serde_json::to_string_pretty(self).expect("manifest serializes");
        fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))
    }

    pub fn read(root: &Path) -> Result<Self> {
        let path = root.join(MANIFEST_FILE);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::format(&path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::{read_metrics_csv, run_training, Scenario};
    use crate::QTable;

    #[test]
    fn saved_run_round_trips() {
        let mut cfg = ExperimentConfig::new(Scenario::Loose, AgentKind::FeeOnly, 2, vec![3]);
        cfg.env.swaps_per_epoch = Some(30);
        let result = run_training(&cfg, 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let mut m = Manifest::new("train", &cfg);
        let name = run_dir_name(cfg.agent, 3);
        assert_eq!(name, "fee-only-seed3");
        m.save_run(dir.path(), &name, &result, true, None).unwrap();
        m.write(dir.path()).unwrap();

        let back = Manifest::read(dir.path()).unwrap();
        assert_eq!(back, m);
        assert_eq!(back.scenario, "loose");
        let run = dir.path().join(&name);
        assert_eq!(read_metrics_csv(&run.join(METRICS_FILE)).unwrap(), result.metrics);
        let (table, hyper) = QTable::load(&run.join(QTABLE_FILE)).unwrap();
        assert_eq!(table, result.agent.table);
        assert_eq!(hyper, cfg.hyperparams);
    }

    #[test]
    fn missing_manifest_is_an_io_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(Manifest::read(dir.path()), Err(Error::Io { .. })));
    }
}

use std::fmt;

use ammsim::experiment::{ConfigFile, ExperimentConfig, Scenario};
use ammsim::{AgentKind, Hyperparams};

use crate::CommonArgs;

pub const DEFAULT_EPOCHS: usize = 500;
pub const DEFAULT_SEEDS: [u64; 3] = [1, 2, 3];

/// Bad invocation detected by the CLI itself (exit code 1).
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

pub fn load_file(common: &CommonArgs) -> anyhow::Result<ConfigFile> {
    match &common.config {
        Some(path) => Ok(ConfigFile::load(path)?),
        None => Ok(ConfigFile::default()),
    }
}

pub fn parse_agent(name: &str) -> anyhow::Result<AgentKind> {
    Ok(name.parse::<AgentKind>()?)
}

/// Merge flags over the config file over built-in defaults. `agent` is the
/// already-resolved agent kind.
pub fn experiment(common: &CommonArgs, file: &ConfigFile, agent: AgentKind, scenario: Option<Scenario>) -> anyhow::Result<ExperimentConfig> {
    let scenario = match scenario {
        Some(s) => s,
        None => Scenario::parse(common.scenario.as_deref().or(file.scenario.as_deref()).unwrap_or("normal"))?,
    };
    let mut hyper: Hyperparams = file.hyperparams.unwrap_or_default();
    let overrides = [
        (&mut hyper.alpha, common.alpha),
        (&mut hyper.gamma, common.gamma),
        (&mut hyper.eps_max, common.eps_max),
        (&mut hyper.eps_min, common.eps_min),
        (&mut hyper.eta, common.eta),
    ];
    for (slot, flag) in overrides {
        if let Some(v) = flag {
            *slot = v;
        }
    }
    let cfg = ExperimentConfig {
        scenario,
        agent,
        epochs: common.epochs.or(file.epochs).unwrap_or(DEFAULT_EPOCHS),
        seeds: common.seeds.clone().or_else(|| file.seeds.clone()).unwrap_or_else(|| DEFAULT_SEEDS.to_vec()),
        update_interval: common.update_interval.or(file.update_interval).unwrap_or(1),
        hyperparams: hyper,
        env: file.env.clone().unwrap_or_default(),
    };
    cfg.validate()?;
    Ok(cfg)
}

pub fn jobs(common: &CommonArgs, file: &ConfigFile) -> anyhow::Result<usize> {
    match common.jobs.or(file.jobs).unwrap_or(1) {
        0 => Err(ammsim::Error::config("jobs", "must be at least 1").into()),
        n => Ok(n),
    }
}

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::agent::{AgentKind, Hyperparams};
use crate::error::{Error, Result};
use crate::market::{AmountSpec, EnvConfig, ToleranceMode, TruncatedNormal};

/// Market conditions for a single training run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Normal,
    Loose,
    HighLiquidity,
    /// Tolerance mode switches from `from` to `to` at the halfway epoch.
    BehaviorChange { from: ToleranceMode, to: ToleranceMode },
}

impl Scenario {
    pub fn env_config(&self) -> EnvConfig {
        match self {
            Scenario::Normal => EnvConfig::normal(),
            Scenario::Loose => EnvConfig::loose(),
            Scenario::HighLiquidity => EnvConfig::high_liquidity(),
            Scenario::BehaviorChange { from, .. } => {
                EnvConfig { tolerance: from.distribution(), ..EnvConfig::normal() }
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Scenario::Normal => "normal".into(),
            Scenario::Loose => "loose".into(),
            Scenario::HighLiquidity => "high-liquidity".into(),
            Scenario::BehaviorChange { from, to } => {
                format!("behavior-change:{}-to-{}", mode_name(*from), mode_name(*to))
            }
        }
    }

    /// Parse `normal`, `loose`, `high-liquidity`, or `behavior-change:<from>-to-<to>`.
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(Scenario::Normal),
            "loose" => Ok(Scenario::Loose),
            "high-liquidity" => Ok(Scenario::HighLiquidity),
            other => other
                .strip_prefix("behavior-change:")
                .and_then(|rest| rest.split_once("-to-"))
                .and_then(|(a, b)| Some(Scenario::BehaviorChange { from: parse_mode(a)?, to: parse_mode(b)? }))
                .ok_or_else(|| Error::config("scenario", format!("unknown scenario `{other}`"))),
        }
    }
}

fn mode_name(mode: ToleranceMode) -> &'static str {
    match mode {
        ToleranceMode::Normal => "normal",
        ToleranceMode::Loose => "loose",
    }
}

pub fn parse_mode(s: &str) -> Option<ToleranceMode> {
    match s {
        "normal" => Some(ToleranceMode::Normal),
        "loose" => Some(ToleranceMode::Loose),
        _ => None,
    }
}

/// Optional per-field overrides on top of a scenario's environment.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvOverrides {
    pub num_users: Option<usize>,
    pub swaps_per_epoch: Option<usize>,
    pub pool_reserve: Option<f64>,
    pub user_balance: Option<f64>,
    pub tolerance: Option<TruncatedNormal>,
    pub amount: Option<AmountSpec>,
    pub hold_offset: Option<usize>,
    pub max_tries: Option<u32>,
}

impl EnvOverrides {
    pub fn apply(&self, mut env: EnvConfig) -> EnvConfig {
        if let Some(v) = self.num_users {
            env.num_users = v;
        }
        if let Some(v) = self.swaps_per_epoch {
            env.swaps_per_epoch = v;
        }
        if let Some(v) = self.pool_reserve {
            env.pool_reserve = v;
        }
        if let Some(v) = self.user_balance {
            env.user_balance = v;
        }
        if let Some(v) = self.tolerance {
            env.tolerance = v;
        }
        if let Some(v) = self.amount {
            env.amount = v;
        }
        if let Some(v) = self.hold_offset {
            env.hold_offset = v;
        }
        if let Some(v) = self.max_tries {
            env.max_tries = v;
        }
        env
    }
}

/// The value axis of a parameter sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "param", content = "values", rename_all = "kebab-case")]
pub enum SweepSpec {
    /// Fixed order size, with high-liquidity balances so it is affordable.
    SwapSize(Vec<f64>),
    /// Tolerance mean and standard deviation both set to the value.
    Tolerance(Vec<f64>),
    UpdateInterval(Vec<usize>),
}

impl SweepSpec {
    pub fn len(&self) -> usize {
        match self {
            SweepSpec::SwapSize(v) | SweepSpec::Tolerance(v) => v.len(),
            SweepSpec::UpdateInterval(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn name(&self) -> &'static str {
        match self {
            SweepSpec::SwapSize(_) => "swap-size",
            SweepSpec::Tolerance(_) => "tolerance",
            SweepSpec::UpdateInterval(_) => "update-interval",
        }
    }

    /// Sweep values as floats, in the order given.
    pub fn values(&self) -> Vec<f64> {
        match self {
            SweepSpec::SwapSize(v) | SweepSpec::Tolerance(v) => v.clone(),
            SweepSpec::UpdateInterval(v) => v.iter().map(|&k| k as f64).collect(),
        }
    }

    /// Parse `--param` / `--values` pairs as given on the command line.
    pub fn parse(param: &str, values: &[f64]) -> Result<Self> {
        let spec = match param {
            "swap-size" => SweepSpec::SwapSize(values.to_vec()),
            "tolerance" => SweepSpec::Tolerance(values.to_vec()),
            "update-interval" => {
                let ks = values
                    .iter()
                    .map(|&v| {
                        if v >= 1.0 && v.fract() == 0.0 {
                            Ok(v as usize)
                        } else {
                            Err(Error::config("values", format!("update interval {v} is not a positive integer")))
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                SweepSpec::UpdateInterval(ks)
            }
            other => return Err(Error::config("param", format!("unknown sweep parameter `{other}`"))),
        };
        if spec.is_empty() {
            return Err(Error::config("values", "sweep needs at least one value"));
        }
        Ok(spec)
    }
}

/// Fully resolved settings for a training run (or a family of them).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub agent: AgentKind,
    pub epochs: usize,
    pub seeds: Vec<u64>,
    /// Environment steps between controller decisions.
    #[serde(default = "default_interval")]
    pub update_interval: usize,
    #[serde(default)]
    pub hyperparams: Hyperparams,
    #[serde(default)]
    pub env: EnvOverrides,
}

fn default_interval() -> usize {
    1
}

impl ExperimentConfig {
    pub fn new(scenario: Scenario, agent: AgentKind, epochs: usize, seeds: Vec<u64>) -> Self {
        Self {
            scenario,
            agent,
            epochs,
            seeds,
            update_interval: 1,
            hyperparams: Hyperparams::default(),
            env: EnvOverrides::default(),
        }
    }

    pub fn env_config(&self) -> EnvConfig {
        self.env.apply(self.scenario.env_config())
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 {
            return Err(Error::config("epochs", "must be at least 1"));
        }
        if self.update_interval == 0 {
            return Err(Error::config("update_interval", "must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed is required"));
        }
        self.hyperparams.validate()?;
        self.env_config().validate()
    }
}

/// Config-file shape: every field optional so command-line flags can fill gaps.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfigFile {
    pub scenario: Option<String>,
    pub agent: Option<String>,
    pub agents: Option<Vec<String>>,
    pub epochs: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub update_interval: Option<usize>,
    pub jobs: Option<usize>,
    pub hyperparams: Option<Hyperparams>,
    pub env: Option<EnvOverrides>,
    pub sweep: Option<SweepSpec>,
}

impl ConfigFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::parse(text).map_err(|e| Error::config("<file>", e.message().to_string()))?;
        serde_path_to_error::deserialize(de).map_err(|e| {
            let key = e.path().to_string();
            let key = if key == "." { "<file>".to_string() } else { key };
            Error::config(key, e.inner().message().to_string())
        })
    }
}

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::action::AgentKind;
use super::learner::Hyperparams;
use crate::error::{Error, Result};
use crate::market::Observation;

/// Sparse state-action value table. Unvisited states read as all zeros.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    kind: AgentKind,
    values: HashMap<Observation, Vec<f64>>,
}

impl QTable {
    pub fn new(kind: AgentKind) -> Self {
        Self { kind, values: HashMap::new() }
    }

    pub fn kind(&self) -> AgentKind {
        self.kind
    }

    pub fn num_actions(&self) -> usize {
        self.kind.num_actions()
    }

    /// Number of states with a stored row.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Action values for `obs`, or `None` when the state was never written.
    pub fn row(&self, obs: &Observation) -> Option<&[f64]> {
        self.values.get(obs).map(Vec::as_slice)
    }

    pub fn value(&self, obs: &Observation, action: usize) -> f64 {
        self.row(obs).map_or(0.0, |r| r[action])
    }

    pub fn max_value(&self, obs: &Observation) -> f64 {
        self.row(obs)
            .map_or(0.0, |r| r.iter().copied().fold(f64::NEG_INFINITY, f64::max))
    }

    pub fn set(&mut self, obs: Observation, action: usize, value: f64) {
        let n = self.num_actions();
        assert!(action < n, "action {action} out of range for {}", self.kind);
        self.values.entry(obs).or_insert_with(|| vec![0.0; n])[action] = value;
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Observation, &[f64])> {
        self.values.iter().map(|(k, v)| (k, v.as_slice()))
    }
}

/// On-disk form: agent kind and hyperparameters, then rows keyed
/// `"bucket,feeLevel,leverage"` in sorted order.
#[derive(Debug, Serialize, Deserialize)]
struct Snapshot {
    format: String,
    kind: AgentKind,
    hyperparams: Hyperparams,
    num_actions: usize,
    values: BTreeMap<String, Vec<f64>>,
}

const SNAPSHOT_FORMAT: &str = "ammsim-qtable/1";

fn encode_key(obs: &Observation) -> String {
    format!("{},{},{}", obs.slippage_bucket, obs.fee_level, obs.leverage)
}

fn decode_key(key: &str) -> Option<Observation> {
    let mut parts = key.split(',');
    let obs = Observation {
        slippage_bucket: parts.next()?.trim().parse().ok()?,
        fee_level: parts.next()?.trim().parse().ok()?,
        leverage: parts.next()?.trim().parse().ok()?,
    };
    parts.next().is_none().then_some(obs)
}

impl QTable {
    pub fn to_json(&self, hyperparams: &Hyperparams) -> String {
        let mut rows: Vec<_> = self.values.iter().collect();
        rows.sort_by_key(|(k, _)| **k);
        let values = rows.into_iter().map(|(k, v)| (encode_key(k), v.clone())).collect();
        let snap = Snapshot {
            format: SNAPSHOT_FORMAT.to_string(),
            kind: self.kind,
            hyperparams: *hyperparams,
            num_actions: self.num_actions(),
            values,
        };
        serde_json::to_string_pretty(&snap).expect("snapshot serializes")
    }

    pub fn from_json(text: &str) -> std::result::Result<(Self, Hyperparams), String> {
        let snap: Snapshot = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if snap.format != SNAPSHOT_FORMAT {
            return Err(format!("unsupported snapshot format `{}`", snap.format));
        }
        if snap.num_actions != snap.kind.num_actions() {
            return Err(format!("{} expects {} actions, file has {}", snap.kind, snap.kind.num_actions(), snap.num_actions));
        }
        let mut values = HashMap::with_capacity(snap.values.len());
        for (key, row) in snap.values {
            let obs = decode_key(&key).ok_or_else(|| format!("malformed state key `{key}`"))?;
            if row.len() != snap.num_actions {
                return Err(format!("row `{key}` has {} values, expected {}", row.len(), snap.num_actions));
            }
            values.insert(obs, row);
        }
        Ok((Self { kind: snap.kind, values }, snap.hyperparams))
    }

    pub fn save(&self, hyperparams: &Hyperparams, path: &Path) -> Result<()> {
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = BufWriter::new(file);
        w.write_all(self.to_json(hyperparams).as_bytes())
            .and_then(|_| w.write_all(b"\n"))
            .and_then(|_| w.flush())
            .map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<(Self, Hyperparams)> {
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut text = String::new();
        std::io::Read::read_to_string(&mut BufReader::new(file), &mut text)
            .map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|m| Error::format(path, m))
    }
}

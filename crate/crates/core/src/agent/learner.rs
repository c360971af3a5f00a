use rand::Rng;
use serde::{Deserialize, Serialize};

use super::action::AgentKind;
use super::qtable::QTable;
use crate::error::{Error, Result};
use crate::market::Observation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    /// Learning rate.
    pub alpha: f64,
    /// Discount factor.
    pub gamma: f64,
    pub eps_max: f64,
    pub eps_min: f64,
    /// Per-epoch exploration decay rate.
    pub eta: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Self { alpha: 0.1, gamma: 0.99, eps_max: 1.0, eps_min: 0.01, eta: 0.0015 }
    }
}

impl Hyperparams {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return Err(Error::config("alpha", "must lie in (0, 1]"));
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(Error::config("gamma", "must lie in [0, 1]"));
        }
        if !(0.0 <= self.eps_min && self.eps_min <= self.eps_max && self.eps_max <= 1.0) {
            return Err(Error::config("eps_min", "need 0 <= eps_min <= eps_max <= 1"));
        }
        if !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::config("eta", "must be positive"));
        }
        Ok(())
    }
}

/// Exploration rate at `epoch`: `ε_min + (ε_max − ε_min)·e^(−η·epoch)`.
pub fn epsilon_at(epoch: usize, hyper: &Hyperparams) -> f64 {
    hyper.eps_min + (hyper.eps_max - hyper.eps_min) * (-hyper.eta * epoch as f64).exp()
}

/// ε-greedy choice; greedy ties are broken uniformly at random.
pub fn select_action<R: Rng + ?Sized>(
    table: &QTable,
    obs: &Observation,
    epsilon: f64,
    rng: &mut R,
) -> usize {
    let n = table.num_actions();
    if n == 1 {
        return 0;
    }
    if epsilon > 0.0 && rng.random::<f64>() < epsilon {
        return rng.random_range(0..n);
    }
    let Some(row) = table.row(obs) else {
        return rng.random_range(0..n);
    };
    let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ties = row.iter().filter(|&&v| v == best).count();
    if ties == 1 {
        return row.iter().position(|&v| v == best).unwrap_or(0);
    }
    let pick = rng.random_range(0..ties);
    row.iter()
        .enumerate()
        .filter(|(_, &v)| v == best)
        .nth(pick)
        .map_or(0, |(i, _)| i)
}

/// One temporal-difference step on `Q(obs, action)`. `next` is `None` when
/// the transition ended the episode, which drops the bootstrap term.
pub fn td_update(
    table: &mut QTable,
    obs: Observation,
    action: usize,
    reward: f64,
    next: Option<&Observation>,
    hyper: &Hyperparams,
) {
    let current = table.value(&obs, action);
    let future = next.map_or(0.0, |n| table.max_value(n));
    let target = reward + hyper.gamma * future;
    table.set(obs, action, current + hyper.alpha * (target - current));
}

/// Population standard deviation of the action indices taken in each epoch,
/// plus the mean over epochs. Empty epochs count as zero.
pub fn action_stddev(history: &[Vec<usize>]) -> (Vec<f64>, f64) {
    let per_epoch: Vec<f64> = history.iter().map(|actions| index_stddev(actions)).collect();
    let mean = if per_epoch.is_empty() {
        0.0
    } else {
        per_epoch.iter().sum::<f64>() / per_epoch.len() as f64
    };
    (per_epoch, mean)
}

pub(crate) fn index_stddev(actions: &[usize]) -> f64 {
    if actions.is_empty() {
        return 0.0;
    }
    let n = actions.len() as f64;
    let mean = actions.iter().map(|&a| a as f64).sum::<f64>() / n;
    let var = actions.iter().map(|&a| (a as f64 - mean).powi(2)).sum::<f64>() / n;
    var.sqrt()
}

/// A controller: its Q-table, hyperparameters, and action space.
#[derive(Debug, Clone)]
pub struct Agent {
    pub table: QTable,
    pub hyper: Hyperparams,
}

impl Agent {
    pub fn new(kind: AgentKind, hyper: Hyperparams) -> Self {
        Self { table: QTable::new(kind), hyper }
    }

    pub fn kind(&self) -> AgentKind {
        self.table.kind()
    }

    pub fn act<R: Rng + ?Sized>(&self, obs: &Observation, epsilon: f64, rng: &mut R) -> usize {
        select_action(&self.table, obs, epsilon, rng)
    }

    pub fn learn(&mut self, obs: Observation, action: usize, reward: f64, next: Option<&Observation>) {
        if self.kind().is_learning() {
            td_update(&mut self.table, obs, action, reward, next, &self.hyper);
        }
    }
}

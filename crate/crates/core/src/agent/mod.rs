//! Tabular Q-learning controllers over the fee and leverage knobs.

mod action;
mod learner;
mod qtable;

pub use action::{apply_action, ActionEffect, AgentKind};
pub use learner::{action_stddev, epsilon_at, select_action, td_update, Agent, Hyperparams};
pub(crate) use learner::index_stddev;
pub use qtable::QTable;

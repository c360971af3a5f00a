//! Simulator for a hybrid constant-sum / constant-product market maker whose
//! fee rate and leverage coefficient are tuned online by tabular Q-learning.
//!
//! * [`amm`]: invariant solver, swap quotes and fee mechanics.
//! * [`market`]: users, order flow and the step/reset environment.
//! * [`agent`]: ε-greedy Q-learning over the three action spaces.
//! * [`experiment`]: training runs, sweeps, metrics and persistence.

pub mod agent;
pub mod amm;
mod error;
pub mod experiment;
pub mod market;

pub use agent::{AgentKind, Hyperparams, QTable};
pub use amm::{CurveParams, PoolState, SwapQuote};
pub use error::{Error, Result};
pub use market::{EnvConfig, Environment, Observation, ToleranceMode};

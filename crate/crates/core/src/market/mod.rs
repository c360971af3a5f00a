//! User population, order flow, and the queue-driven environment the
//! controllers act on.

mod env;
mod sampling;
mod swap;
mod user;

pub use env::{
    attempt_swap, discretize_slippage, urgency_distribution, AmountSpec, EnvConfig, EpochStats,
    Environment, Observation, Step, StepOutcome, SwapOutcome, ToleranceMode, SLIPPAGE_BUCKETS,
    ZERO_BUCKET,
};
pub use sampling::{sample_truncated_normal, TruncatedNormal, DEFAULT_REJECTION_BUDGET};
pub use swap::{generate_swaps, SwapOrder, SwapQueue};
pub use user::{choose_trade_side, generate_users, guarded_side, User};

//! Hybrid bonding-curve math: invariant solving, quoting, and fee application.

mod invariant;
mod pool;
mod reference;

pub use invariant::{
    compute_d, geometric_d, invariant_residual, relative_residual, solve_output_reserve,
    InvariantSolution, D_TOLERANCE, MAX_NEWTON_ITERATIONS,
};
pub use pool::{
    apply_fee, execute_swap, fee_rate_for_level, quote_swap, CurveParams, PoolState, SwapQuote,
    FEE_LEVELS, MAX_FEE_RATE, MAX_LEVERAGE, MIN_FEE_RATE,
};
pub use reference::{reference_cpmm_quote, reference_csmm_quote};

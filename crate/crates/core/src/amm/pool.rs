use serde::{Deserialize, Serialize};

use super::invariant::{compute_d, solve_output_reserve};
use crate::error::{Error, Result};

/// Lowest fee rate a controller may set, in percent.
pub const MIN_FEE_RATE: f64 = 0.04;
/// Highest fee rate a controller may set, in percent.
pub const MAX_FEE_RATE: f64 = 0.30;
/// Number of 0.01-percentage-point fee levels between the bounds, inclusive.
pub const FEE_LEVELS: u8 = 27;
pub const MAX_LEVERAGE: u32 = 85;

/// The two knobs a controller turns: the leverage coefficient and the fee
/// rate (in percent, so `0.30` means 0.30%).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveParams {
    pub leverage: u32,
    pub fee_rate: f64,
}

impl CurveParams {
    /// Unvalidated constructor, for math that runs outside controller bounds.
    pub fn new(leverage: u32, fee_rate: f64) -> Self {
        Self { leverage, fee_rate }
    }

    /// Build from a fee level in `0..27` (0 = 0.04%) and a leverage in `0..=85`.
    pub fn from_levels(fee_level: u8, leverage: u32) -> Result<Self> {
        if fee_level >= FEE_LEVELS {
            return Err(Error::invalid(format!("fee level {fee_level} outside 0..{FEE_LEVELS}")));
        }
        if leverage > MAX_LEVERAGE {
            return Err(Error::invalid(format!("leverage {leverage} above {MAX_LEVERAGE}")));
        }
        Ok(Self { leverage, fee_rate: fee_rate_for_level(fee_level) })
    }

    /// Static protocol used as the comparison baseline: 0.17% and 𝒜 = 42.
    pub fn baseline() -> Self {
        Self { leverage: 42, fee_rate: fee_rate_for_level(13) }
    }

    /// Index of the fee rate on the 0.01-point grid, if it lies on it.
    pub fn fee_level(&self) -> Option<u8> {
        let level = ((self.fee_rate - MIN_FEE_RATE) * 100.0).round();
        if (0.0..f64::from(FEE_LEVELS)).contains(&level)
            && (fee_rate_for_level(level as u8) - self.fee_rate).abs() < 1e-9
        {
            Some(level as u8)
        } else {
            None
        }
    }

    pub fn is_within_bounds(&self) -> bool {
        self.leverage <= MAX_LEVERAGE && self.fee_level().is_some()
    }

    pub fn amp(&self) -> f64 {
        f64::from(self.leverage)
    }
}

pub fn fee_rate_for_level(level: u8) -> f64 {
    f64::from(4 + u32::from(level)) / 100.0
}

/// Split a gross input into `(fee, net)` at `fee_rate` percent.
pub fn apply_fee(gross_in: f64, fee_rate: f64) -> (f64, f64) {
    let fee = gross_in * fee_rate / 100.0;
    (fee, gross_in - fee)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SwapQuote {
    pub gross_in: f64,
    pub fee: f64,
    pub net_in: f64,
    pub amount_out: f64,
    /// Fee-exclusive shortfall of `amount_out` against `net_in`, percent.
    pub slippage_pct: f64,
    /// Total loss including the fee, `(gross_in - amount_out) / gross_in`, percent.
    pub price_impact_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoolState {
    pub reserves: Vec<f64>,
    /// Fees skimmed per token. They sit outside the curve.
    pub accrued_fees: Vec<f64>,
}

impl PoolState {
    pub fn new(reserves: Vec<f64>) -> Result<Self> {
        if reserves.len() < 2 {
            return Err(Error::invalid("a pool needs at least two tokens"));
        }
        if reserves.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
            return Err(Error::invalid("pool reserves must be strictly positive"));
        }
        let n = reserves.len();
        Ok(Self { reserves, accrued_fees: vec![0.0; n] })
    }

    pub fn balanced(num_tokens: usize, reserve: f64) -> Result<Self> {
        Self::new(vec![reserve; num_tokens])
    }

    pub fn num_tokens(&self) -> usize {
        self.reserves.len()
    }

    /// Price a swap of `gross_in` units of token `in_index` into `out_index`
    /// without touching the pool.
    pub fn quote(
        &self,
        params: &CurveParams,
        in_index: usize,
        out_index: usize,
        gross_in: f64,
    ) -> Result<SwapQuote> {
        quote_swap(self, params, in_index, out_index, gross_in)
    }

    /// Commit a quote produced against this exact state.
    pub fn commit(&mut self, quote: &SwapQuote, in_index: usize, out_index: usize) {
        self.reserves[in_index] += quote.net_in;
        self.reserves[out_index] -= quote.amount_out;
        self.accrued_fees[in_index] += quote.fee;
    }

    /// Curve invariant of the current reserves.
    pub fn d_value(&self, params: &CurveParams) -> Result<f64> {
        Ok(compute_d(&self.reserves, params.amp())?.d_value)
    }
}

fn check_indices(state: &PoolState, in_index: usize, out_index: usize) -> Result<()> {
    let n = state.num_tokens();
    if in_index >= n || out_index >= n || in_index == out_index {
        return Err(Error::invalid(format!(
            "token indices ({in_index}, {out_index}) must be distinct and below {n}"
        )));
    }
    Ok(())
}

pub fn quote_swap(
    state: &PoolState,
    params: &CurveParams,
    in_index: usize,
    out_index: usize,
    gross_in: f64,
) -> Result<SwapQuote> {
    check_indices(state, in_index, out_index)?;
    if !(gross_in.is_finite() && gross_in >= 0.0) {
        return Err(Error::invalid(format!("swap amount {gross_in} must be non-negative")));
    }
    if !(params.fee_rate.is_finite() && (0.0..100.0).contains(&params.fee_rate)) {
        return Err(Error::invalid(format!("fee rate {} outside [0, 100)", params.fee_rate)));
    }
    if gross_in == 0.0 {
        return Ok(SwapQuote::default());
    }

    let (fee, net_in) = apply_fee(gross_in, params.fee_rate);
    let amp = params.amp();
    let d = compute_d(&state.reserves, amp)?.d_value;
    let old_out = state.reserves[out_index];
    let new_out = solve_output_reserve(
        &state.reserves,
        amp,
        d,
        in_index,
        out_index,
        state.reserves[in_index] + net_in,
    )?;
    let amount_out = old_out - new_out;
    if !(amount_out > 0.0) {
        return Err(Error::QuoteInfeasible);
    }

    Ok(SwapQuote {
        gross_in,
        fee,
        net_in,
        amount_out,
        slippage_pct: (net_in - amount_out) / net_in * 100.0,
        price_impact_pct: (gross_in - amount_out) / gross_in * 100.0,
    })
}

/// Quote and commit in one go; the input state is left untouched on error.
pub fn execute_swap(
    state: &PoolState,
    params: &CurveParams,
    in_index: usize,
    out_index: usize,
    gross_in: f64,
) -> Result<(PoolState, SwapQuote)> {
    let quote = quote_swap(state, params, in_index, out_index, gross_in)?;
    let mut next = state.clone();
    next.commit(&quote, in_index, out_index);
    Ok((next, quote))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pool(x: f64, y: f64) -> PoolState {
        PoolState::new(vec![x, y]).unwrap()
    }

    #[test]
    fn fee_arithmetic() {
        let (fee, net) = apply_fee(1000.0, 0.30);
        assert!((fee - 3.0).abs() < 1e-12 && (net - 997.0).abs() < 1e-12);
        let (fee, net) = apply_fee(1000.0, 0.04);
        assert!((fee - 0.4).abs() < 1e-12 && (net - 999.6).abs() < 1e-12);
        assert_eq!(apply_fee(0.0, 0.17), (0.0, 0.0));
    }

    #[test]
    fn fee_levels_cover_the_grid() {
        assert_eq!(fee_rate_for_level(0), 0.04);
        assert_eq!(fee_rate_for_level(13), 0.17);
        assert_eq!(fee_rate_for_level(26), 0.30);
        for level in 0..FEE_LEVELS {
            let p = CurveParams::from_levels(level, 0).unwrap();
            assert_eq!(p.fee_level(), Some(level));
        }
        assert!(CurveParams::from_levels(27, 0).is_err());
        assert!(CurveParams::from_levels(0, 86).is_err());
        assert_eq!(CurveParams::new(0, 0.175).fee_level(), None);
    }

    #[test]
    fn tiny_trade_on_flat_curve_costs_only_the_fee() {
        let q = quote_swap(&pool(20_000.0, 20_000.0), &CurveParams::new(85, 0.04), 0, 1, 1.0).unwrap();
        assert!(q.price_impact_pct > 0.04);
        assert!(q.price_impact_pct - 0.04 < 1e-4);
    }

    #[test]
    fn quote_matches_frozen_bisection_oracle() {
        // Δy from a 50-digit bisection on the invariant at x' = 20998.3, A = 42.
        let dy = 997.712_679_698_879_414_64;
        let q = quote_swap(&pool(20_000.0, 20_000.0), &CurveParams::new(42, 0.17), 0, 1, 1000.0).unwrap();
        assert!((q.fee - 1.7).abs() < 1e-12);
        assert!((q.net_in - 998.3).abs() < 1e-12);
        assert!(((q.amount_out - dy) / dy).abs() < 1e-10);
        assert!((q.slippage_pct - 0.058_832_044_587_857_894).abs() < 1e-8);
        assert!((q.price_impact_pct - 0.228_732_030_112_058_54).abs() < 1e-8);
    }

    #[test]
    fn constant_product_quote_closed_form() {
        // 20000 - 4e8 / 20998.3
        let q = quote_swap(&pool(20_000.0, 20_000.0), &CurveParams::new(0, 0.17), 0, 1, 1000.0).unwrap();
        assert!((q.amount_out - 950.838_877_432_935_05).abs() < 1e-8);
        assert!((q.slippage_pct - 4.754_194_387_164_675).abs() < 1e-9);
        assert!((q.price_impact_pct - 4.916_112_256_706_495).abs() < 1e-9);
    }

    #[test]
    fn execute_commits_the_quote() {
        let start = pool(20_000.0, 20_000.0);
        let params = CurveParams::new(42, 0.17);
        let (next, q) = execute_swap(&start, &params, 0, 1, 1000.0).unwrap();
        assert_eq!(q, quote_swap(&start, &params, 0, 1, 1000.0).unwrap());
        assert!((next.reserves[0] - 20_998.3).abs() < 1e-9);
        assert!((next.reserves[1] - (20_000.0 - q.amount_out)).abs() < 1e-9);
        assert!((next.accrued_fees[0] - 1.7).abs() < 1e-12);
        let d0 = start.d_value(&params).unwrap();
        let d1 = next.d_value(&params).unwrap();
        assert!(((d1 - d0) / d0).abs() < 1e-8);
    }

    #[test]
    fn zero_size_swap_changes_nothing() {
        let start = pool(20_000.0, 20_000.0);
        let (next, q) = execute_swap(&start, &CurveParams::baseline(), 1, 0, 0.0).unwrap();
        assert_eq!(next, start);
        assert_eq!(q, SwapQuote::default());
    }

    #[test]
    fn round_trip_is_path_dependent() {
        let params = CurveParams::new(42, 0.0);
        let start = pool(20_000.0, 20_000.0);
        let (mid, _) = execute_swap(&start, &params, 0, 1, 5_000.0).unwrap();
        let (end, _) = execute_swap(&mid, &params, 1, 0, 5_000.0).unwrap();
        assert!(end.reserves[0] != start.reserves[0]);
        assert!(end.reserves[1] != start.reserves[1]);
    }

    #[test]
    fn error_leaves_state_unchanged() {
        let start = pool(20_000.0, 20_000.0);
        assert!(execute_swap(&start, &CurveParams::baseline(), 0, 0, 10.0).is_err());
        assert!(execute_swap(&start, &CurveParams::baseline(), 0, 5, 10.0).is_err());
        assert!(execute_swap(&start, &CurveParams::baseline(), 0, 1, -1.0).is_err());
    }
}

//! Closed-form constant-product and constant-sum pricing. The hybrid curve
//! must collapse onto these at 𝒜 = 0 and 𝒜 → ∞.

use crate::error::{Error, Result};

fn check(reserves: &[f64], net_in: f64, in_index: usize, out_index: usize) -> Result<()> {
    if in_index >= reserves.len() || out_index >= reserves.len() || in_index == out_index {
        return Err(Error::invalid("token indices must be distinct and in range"));
    }
    if reserves.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
        return Err(Error::invalid("reserves must be strictly positive"));
    }
    if !(net_in.is_finite() && net_in >= 0.0) {
        return Err(Error::invalid("input amount must be non-negative"));
    }
    Ok(())
}

/// `x·y = k`: output is `y - k / (x + net_in)`.
pub fn reference_cpmm_quote(
    reserves: &[f64],
    net_in: f64,
    in_index: usize,
    out_index: usize,
) -> Result<f64> {
    check(reserves, net_in, in_index, out_index)?;
    let x = reserves[in_index];
    let y = reserves[out_index];
    Ok(y - x * y / (x + net_in))
}

/// `x + y = k`: output equals input until the output reserve runs dry.
pub fn reference_csmm_quote(
    reserves: &[f64],
    net_in: f64,
    in_index: usize,
    out_index: usize,
) -> Result<f64> {
    check(reserves, net_in, in_index, out_index)?;
    if net_in > reserves[out_index] {
        return Err(Error::QuoteInfeasible);
    }
    Ok(net_in)
}

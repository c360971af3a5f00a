//! Solvers for the hybrid constant-sum / constant-product invariant
//!
//! ```text
//!   A·nⁿ·Σxᵢ + D = A·D·nⁿ + Dⁿ⁺¹ / (nⁿ·Πxᵢ)
//! ```
//!
//! For a fixed set of reserves the residual `LHS - RHS` is concave and strictly
//! decreasing in `D` on `[n·(Πx)^(1/n), Σx]`, positive at the left end and
//! non-positive at the right end. Newton seeded at `Σx` therefore walks down
//! monotonically onto the root; bisection over the same bracket is the fallback.

use crate::error::{Error, Result};

/// Relative residual accepted on return from the D solver.
pub const D_TOLERANCE: f64 = 1e-10;
pub const MAX_NEWTON_ITERATIONS: usize = 256;
const MAX_BISECTION_ITERATIONS: usize = 2_000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvariantSolution {
    pub d_value: f64,
    pub iterations: usize,
    /// Absolute mismatch `|LHS - RHS|` at `d_value`.
    pub residual: f64,
}

/// `(LHS - RHS, LHS)` of the invariant. Products are accumulated as ratios to
/// stay in range for large pools.
fn residual_terms(reserves: &[f64], amp: f64, d: f64) -> (f64, f64) {
    let n = reserves.len() as f64;
    let ann = amp * n.powi(reserves.len() as i32);
    let sum: f64 = reserves.iter().sum();
    // D^{n+1} / (n^n Πx)
    let d_p = reserves.iter().fold(d, |acc, &x| acc * d / (n * x));
    let lhs = ann * sum + d;
    let rhs = ann * d + d_p;
    (lhs - rhs, lhs)
}

/// Absolute invariant residual `|LHS - RHS|`.
pub fn invariant_residual(reserves: &[f64], amp: f64, d: f64) -> f64 {
    residual_terms(reserves, amp, d).0.abs()
}

/// Residual relative to the magnitude of the left-hand side.
pub fn relative_residual(reserves: &[f64], amp: f64, d: f64) -> f64 {
    let (r, lhs) = residual_terms(reserves, amp, d);
    r.abs() / lhs.abs().max(f64::MIN_POSITIVE)
}

fn check_reserves(reserves: &[f64]) -> Result<()> {
    if reserves.len() < 2 {
        return Err(Error::invalid("a pool needs at least two tokens"));
    }
    if let Some(x) = reserves.iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(Error::invalid(format!("reserve {x} is not strictly positive")));
    }
    Ok(())
}

fn check_amp(amp: f64) -> Result<()> {
    if !(amp.is_finite() && amp >= 0.0) {
        return Err(Error::invalid(format!("leverage coefficient {amp} must be finite and >= 0")));
    }
    Ok(())
}

/// `n·(Πx)^(1/n)`, the constant-product value of D.
pub fn geometric_d(reserves: &[f64]) -> f64 {
    let n = reserves.len() as f64;
    let mean_ln = reserves.iter().map(|x| x.ln()).sum::<f64>() / n;
    n * mean_ln.exp()
}

/// Solve the invariant for D.
pub fn compute_d(reserves: &[f64], amp: f64) -> Result<InvariantSolution> {
    check_reserves(reserves)?;
    check_amp(amp)?;

    if amp == 0.0 {
        let d = geometric_d(reserves);
        return Ok(InvariantSolution {
            d_value: d,
            iterations: 0,
            residual: invariant_residual(reserves, amp, d),
        });
    }

    let n = reserves.len() as f64;
    let ann = amp * n.powi(reserves.len() as i32);
    let sum: f64 = reserves.iter().sum();

    let mut d = sum;
    for iteration in 1..=MAX_NEWTON_ITERATIONS {
        let d_p = reserves.iter().fold(d, |acc, &x| acc * d / (n * x));
        let f = ann * sum + d - ann * d - d_p;
        let df = 1.0 - ann - (n + 1.0) * d_p / d;
        let next = d - f / df;
        if !next.is_finite() || next <= 0.0 {
            break;
        }
        let step = (next - d).abs();
        d = next;
        if step <= 1e-13 * d {
            if relative_residual(reserves, amp, d) <= D_TOLERANCE {
                return Ok(InvariantSolution {
                    d_value: d,
                    iterations: iteration,
                    residual: invariant_residual(reserves, amp, d),
                });
            }
            break;
        }
    }

    bisect_d(reserves, amp, MAX_NEWTON_ITERATIONS)
}

fn bisect_d(reserves: &[f64], amp: f64, prior_iterations: usize) -> Result<InvariantSolution> {
    let mut lo = geometric_d(reserves);
    let mut hi: f64 = reserves.iter().sum();
    let mut best = hi;
    let mut used = 0;
    for iteration in 1..=MAX_BISECTION_ITERATIONS {
        used = iteration;
        let mid = 0.5 * (lo + hi);
        let (r, _) = residual_terms(reserves, amp, mid);
        if r > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        best = mid;
        if hi - lo <= 4.0 * f64::EPSILON * hi {
            break;
        }
    }
    let rel = relative_residual(reserves, amp, best);
    if rel <= D_TOLERANCE {
        Ok(InvariantSolution {
            d_value: best,
            iterations: prior_iterations + used,
            residual: invariant_residual(reserves, amp, best),
        })
    } else {
        Err(Error::SolverFailed {
            iterations: prior_iterations + used,
            residual: invariant_residual(reserves, amp, best),
        })
    }
}

/// Hold D and every reserve except `out_index` fixed, set reserve `in_index`
/// to `new_in_reserve`, and solve for the new value of reserve `out_index`.
///
/// With the other reserves folded into `S'` and `P'` the invariant is the
/// quadratic `y² + b·y - c = 0` with `b = S' + D/(A·nⁿ) - D` and
/// `c = Dⁿ⁺¹ / (A·nⁿ·nⁿ·P')`, whose positive root is taken in a
/// cancellation-free form and polished with Newton.
pub fn solve_output_reserve(
    reserves: &[f64],
    amp: f64,
    d_value: f64,
    in_index: usize,
    out_index: usize,
    new_in_reserve: f64,
) -> Result<f64> {
    let len = reserves.len();
    if len < 2 {
        return Err(Error::invalid("a pool needs at least two tokens"));
    }
    if in_index >= len || out_index >= len || in_index == out_index {
        return Err(Error::invalid(format!(
            "token indices ({in_index}, {out_index}) must be distinct and below {len}"
        )));
    }
    check_amp(amp)?;
    if !(new_in_reserve.is_finite() && new_in_reserve > 0.0) {
        return Err(Error::invalid(format!("new reserve {new_in_reserve} must be positive")));
    }
    if !(d_value.is_finite() && d_value > 0.0) {
        return Err(Error::invalid(format!("invariant {d_value} must be positive")));
    }

    let n = len as f64;
    let mut sum_others = 0.0;
    // Π over the n-1 known reserves of D/(n·x_k), times D/n: D^n / (n^n P').
    let mut y_cpmm = d_value / n;
    for (k, &x) in reserves.iter().enumerate() {
        if k == out_index {
            continue;
        }
        let x = if k == in_index { new_in_reserve } else { x };
        if !(x.is_finite() && x > 0.0) {
            return Err(Error::invalid(format!("reserve {x} is not strictly positive")));
        }
        sum_others += x;
        y_cpmm *= d_value / (n * x);
    }

    let y = if amp == 0.0 {
        y_cpmm
    } else {
        let ann = amp * n.powi(len as i32);
        let b = sum_others + d_value / ann - d_value;
        let c = y_cpmm * d_value / ann;
        let disc = (b * b + 4.0 * c).sqrt();
        let mut y = if b >= 0.0 { 2.0 * c / (b + disc) } else { 0.5 * (disc - b) };
        for _ in 0..2 {
            let g = y * y + b * y - c;
            let dg = 2.0 * y + b;
            if dg == 0.0 {
                break;
            }
            let next = y - g / dg;
            if next.is_finite() && next > 0.0 {
                y = next;
            }
        }
        y
    };

    if y.is_finite() && y > 0.0 {
        Ok(y)
    } else {
        Err(Error::QuoteInfeasible)
    }
}

use rand::Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Proposals allowed per draw before giving up.
pub const DEFAULT_REJECTION_BUDGET: usize = 10_000;

const SQRT_2PI: f64 = 2.506_628_274_631_000_2;

/// Normal(μ, σ) conditioned on `[lower, upper]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedNormal {
    pub mu: f64,
    pub sigma: f64,
    pub lower: f64,
    pub upper: f64,
}

impl TruncatedNormal {
    pub fn new(mu: f64, sigma: f64, lower: f64, upper: f64) -> Result<Self> {
        let dist = Self { mu, sigma, lower, upper };
        dist.validate()?;
        Ok(dist)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma.is_finite() && self.sigma > 0.0) {
            return Err(Error::invalid(format!("sigma {} must be positive", self.sigma)));
        }
        if !(self.mu.is_finite() && self.lower.is_finite() && self.upper.is_finite()) {
            return Err(Error::invalid("truncated normal parameters must be finite"));
        }
        if !(self.lower < self.upper) {
            return Err(Error::invalid(format!(
                "lower bound {} must be below upper bound {}",
                self.lower, self.upper
            )));
        }
        Ok(())
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        self.sample_with_budget(rng, DEFAULT_REJECTION_BUDGET)
    }

    /// Rejection sampling with a proposal picked from the standardized bounds
    /// `[a, b]`: the plain normal when the window holds the bulk of the mass,
    /// a uniform envelope for narrow windows, and an exponential envelope for
    /// one-sided tails.
    pub fn sample_with_budget<R: Rng + ?Sized>(&self, rng: &mut R, budget: usize) -> Result<f64> {
        self.validate()?;
        let a = (self.lower - self.mu) / self.sigma;
        let b = (self.upper - self.mu) / self.sigma;
        let z = if a >= 0.0 {
            sample_right_tail(rng, a, b, budget)?
        } else if b <= 0.0 {
            -sample_right_tail(rng, -b, -a, budget)?
        } else if b - a < SQRT_2PI {
            // window straddles the mode; the density peaks at 0
            sample_uniform_envelope(rng, a, b, 0.0, budget)?
        } else {
            sample_plain(rng, a, b, budget)?
        };
        Ok((self.mu + self.sigma * z).clamp(self.lower, self.upper))
    }
}

fn sample_plain<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64, budget: usize) -> Result<f64> {
    for _ in 0..budget {
        let z: f64 = StandardNormal.sample(rng);
        if (a..=b).contains(&z) {
            return Ok(z);
        }
    }
    Err(Error::SamplingBudgetExhausted { budget })
}

/// Uniform proposal on `[a, b]`, accepted with `exp((peak² - z²) / 2)`.
fn sample_uniform_envelope<R: Rng + ?Sized>(
    rng: &mut R,
    a: f64,
    b: f64,
    peak: f64,
    budget: usize,
) -> Result<f64> {
    for _ in 0..budget {
        let z = rng.random_range(a..=b);
        let accept = ((peak * peak - z * z) / 2.0).exp();
        if rng.random::<f64>() <= accept {
            return Ok(z);
        }
    }
    Err(Error::SamplingBudgetExhausted { budget })
}

/// Standard normal restricted to `[a, b]` with `0 <= a`.
fn sample_right_tail<R: Rng + ?Sized>(rng: &mut R, a: f64, b: f64, budget: usize) -> Result<f64> {
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    // Windows shorter than the tail's decay length take the uniform envelope.
    if (b - a) * a.max(1.0) < 1.0 {
        return sample_uniform_envelope(rng, a, b, a, budget);
    }
    let exp = Exp::new(rate).map_err(|e| Error::invalid(e.to_string()))?;
    for _ in 0..budget {
        let z = a + exp.sample(rng);
        if z > b {
            continue;
        }
        let accept = (-(z - rate) * (z - rate) / 2.0).exp();
        if rng.random::<f64>() <= accept {
            return Ok(z);
        }
    }
    Err(Error::SamplingBudgetExhausted { budget })
}

/// Convenience wrapper over [`TruncatedNormal::sample`].
pub fn sample_truncated_normal<R: Rng + ?Sized>(
    mu: f64,
    sigma: f64,
    lower: f64,
    upper: f64,
    rng: &mut R,
) -> Result<f64> {
    TruncatedNormal::new(mu, sigma, lower, upper)?.sample(rng)
}

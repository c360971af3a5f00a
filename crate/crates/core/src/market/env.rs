use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::sampling::TruncatedNormal;
use super::swap::{generate_swaps, SwapOrder, SwapQueue};
use super::user::{choose_trade_side, generate_users, User};
use crate::amm::{CurveParams, PoolState, FEE_LEVELS, MAX_LEVERAGE};
use crate::error::{Error, Result};

pub const SLIPPAGE_BUCKETS: u16 = 500;
pub const SLIPPAGE_RANGE_PCT: f64 = 20.0;
/// Bucket holding zero slippage.
pub const ZERO_BUCKET: u16 = 250;

/// Tolerance presets for the user population.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ToleranceMode {
    Normal,
    Loose,
}

impl ToleranceMode {
    pub fn distribution(self) -> TruncatedNormal {
        match self {
            ToleranceMode::Normal => TruncatedNormal { mu: 0.25, sigma: 0.25, lower: 0.1, upper: 5.0 },
            ToleranceMode::Loose => TruncatedNormal { mu: 0.75, sigma: 0.75, lower: 0.1, upper: 5.0 },
        }
    }
}

pub fn urgency_distribution() -> TruncatedNormal {
    TruncatedNormal { mu: 1.5f64.ln(), sigma: 0.25, lower: 0.0, upper: 2f64.ln() }
}

/// How a fresh order picks its size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AmountSpec {
    Uniform { min: f64, max: f64 },
    Fixed { amount: f64 },
}

impl AmountSpec {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            AmountSpec::Uniform { min, max } if max > min => rng.random_range(min..=max),
            AmountSpec::Uniform { min, .. } => min,
            AmountSpec::Fixed { amount } => amount,
        }
    }

    /// Size used when the environment has to guess an order's trade.
    pub fn typical(&self) -> f64 {
        match *self {
            AmountSpec::Uniform { min, max } => 0.5 * (min + max),
            AmountSpec::Fixed { amount } => amount,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub num_users: usize,
    pub swaps_per_epoch: usize,
    /// Initial reserve of each pool token.
    pub pool_reserve: f64,
    /// Initial balance of each token per user.
    pub user_balance: f64,
    pub tolerance: TruncatedNormal,
    pub urgency: TruncatedNormal,
    pub amount: AmountSpec,
    /// Places a held order is pushed back.
    pub hold_offset: usize,
    /// Attempts before the environment cancels an order.
    pub max_tries: u32,
    /// Cancellation chance on a failed attempt at zero urgency.
    pub cancel_probability: f64,
    /// Balance fraction below which a user switches the token they sell.
    pub side_threshold: f64,
}

impl EnvConfig {
    pub fn normal() -> Self {
        Self {
            num_users: 20,
            swaps_per_epoch: 400,
            pool_reserve: 20_000.0,
            user_balance: 1_000.0,
            tolerance: ToleranceMode::Normal.distribution(),
            urgency: urgency_distribution(),
            amount: AmountSpec::Uniform { min: 100.0, max: 1_000.0 },
            hold_offset: 10,
            max_tries: 15,
            cancel_probability: 0.4,
            side_threshold: 0.2,
        }
    }

    pub fn loose() -> Self {
        Self { tolerance: ToleranceMode::Loose.distribution(), ..Self::normal() }
    }

    pub fn high_liquidity() -> Self {
        Self {
            user_balance: 18_000.0,
            amount: AmountSpec::Uniform { min: 1_000.0, max: 18_000.0 },
            ..Self::normal()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, msg: &str| Err(Error::config(key, msg));
        if self.num_users == 0 {
            return bad("num_users", "must be at least 1");
        }
        if self.swaps_per_epoch == 0 {
            return bad("swaps_per_epoch", "must be at least 1");
        }
        if !(self.pool_reserve.is_finite() && self.pool_reserve > 0.0) {
            return bad("pool_reserve", "must be positive");
        }
        if !(self.user_balance.is_finite() && self.user_balance > 0.0) {
            return bad("user_balance", "must be positive");
        }
        self.tolerance.validate().map_err(|e| Error::config("tolerance", e.to_string()))?;
        self.urgency.validate().map_err(|e| Error::config("urgency", e.to_string()))?;
        match self.amount {
            AmountSpec::Uniform { min, max } if !(min > 0.0 && max >= min && max.is_finite()) => {
                return bad("amount", "uniform range needs 0 < min <= max");
            }
            AmountSpec::Fixed { amount } if !(amount > 0.0 && amount.is_finite()) => {
                return bad("amount", "fixed amount must be positive");
            }
            _ => {}
        }
        if self.max_tries == 0 {
            return bad("max_tries", "must be at least 1");
        }
        if !(0.0..=1.0).contains(&self.cancel_probability) {
            return bad("cancel_probability", "must lie in [0, 1]");
        }
        if !(0.0..=1.0).contains(&self.side_threshold) {
            return bad("side_threshold", "must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Discretized state seen by the controllers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Observation {
    pub slippage_bucket: u16,
    pub fee_level: u8,
    pub leverage: u8,
}

/// Map a slippage percentage onto one of 500 buckets of width 0.08 spanning
/// `[-20, 20]`, clamping outside values onto the edge buckets.
pub fn discretize_slippage(slippage_pct: f64) -> u16 {
    if slippage_pct.is_nan() {
        return SLIPPAGE_BUCKETS - 1;
    }
    // 1 / 0.08 = 12.5 exactly
    let raw = ((slippage_pct + SLIPPAGE_RANGE_PCT) * 12.5).floor();
    raw.clamp(0.0, f64::from(SLIPPAGE_BUCKETS - 1)) as u16
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum SwapOutcome {
    Success { amount: f64, fee: f64 },
    Holding,
    Canceled,
}

/// One attempt by `user` to fill `order` against the pool.
///
/// On the first attempt the side and size are chosen and stored on the order.
/// The swap executes when its price impact is under `τ·e^υ`; otherwise the
/// user cancels with probability `p / e^υ`, or holds and bumps urgency by 1%
/// (capped at the urgency distribution's upper bound).
pub fn attempt_swap<R: Rng + ?Sized>(
    order: &mut SwapOrder,
    user: &mut User,
    pool: &mut PoolState,
    params: &CurveParams,
    config: &EnvConfig,
    rng: &mut R,
) -> Result<SwapOutcome> {
    debug_assert_eq!(order.user_id, user.id);
    let (in_index, amount) = match (order.in_index, order.amount) {
        (Some(idx), Some(amt)) => (idx, amt),
        _ => {
            let idx = choose_trade_side(user, config.side_threshold, rng);
            let amt = config.amount.sample(rng).min(user.balances[idx]);
            order.in_index = Some(idx);
            order.amount = Some(amt);
            (idx, amt)
        }
    };
    let out_index = 1 - in_index;
    // other orders from the same user may have spent the balance since
    let gross_in = amount.min(user.balances[in_index]);

    let quote = if gross_in > 0.0 {
        match pool.quote(params, in_index, out_index, gross_in) {
            Ok(q) => Some(q),
            Err(Error::QuoteInfeasible) => None,
            Err(e) => return Err(e),
        }
    } else {
        None
    };

    let Some(quote) = quote else {
        hold(order, config);
        return Ok(SwapOutcome::Holding);
    };

    if quote.price_impact_pct < order.effective_tolerance() {
        pool.commit(&quote, in_index, out_index);
        user.balances[in_index] -= quote.gross_in;
        user.balances[out_index] += quote.amount_out;
        return Ok(SwapOutcome::Success { amount: quote.gross_in, fee: quote.fee });
    }

    let cancel_chance = config.cancel_probability / order.urgency.exp();
    if rng.random::<f64>() < cancel_chance {
        return Ok(SwapOutcome::Canceled);
    }
    hold(order, config);
    Ok(SwapOutcome::Holding)
}

fn hold(order: &mut SwapOrder, config: &EnvConfig) {
    order.urgency = (order.urgency * 1.01).min(config.urgency.upper);
    order.tries += 1;
    order.fresh = false;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum StepOutcome {
    Success { amount: f64, fee: f64 },
    Held,
    CanceledByUser,
    /// Order ran out of attempts.
    Expired,
    QueueEmpty,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub reward: f64,
    pub outcome: StepOutcome,
    pub observation: Observation,
    pub done: bool,
}

/// Per-epoch counters kept by the environment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub steps: usize,
    pub successes: usize,
    pub holds: usize,
    pub user_cancels: usize,
    pub expirations: usize,
    pub fees_collected: f64,
    pub total_reward: f64,
    pub fee_rate_sum: f64,
    pub leverage_sum: f64,
}

impl EpochStats {
    pub fn canceled(&self) -> usize {
        self.user_cancels + self.expirations
    }

    pub fn mean_fee_rate(&self) -> f64 {
        if self.steps == 0 { 0.0 } else { self.fee_rate_sum / self.steps as f64 }
    }

    pub fn mean_leverage(&self) -> f64 {
        if self.steps == 0 { 0.0 } else { self.leverage_sum / self.steps as f64 }
    }
}

/// Pool, users and swap queue for one simulated market.
#[derive(Debug, Clone)]
pub struct Environment {
    config: EnvConfig,
    pool: PoolState,
    params: CurveParams,
    users: Vec<User>,
    queue: SwapQueue,
    rng: ChaCha8Rng,
    stats: EpochStats,
}

impl Environment {
    /// Build an environment; call [`Environment::reset`] before stepping.
    pub fn new(config: EnvConfig) -> Result<Self> {
        config.validate()?;
        let pool = PoolState::balanced(2, config.pool_reserve)?;
        let users = generate_users(config.num_users, config.user_balance);
        Ok(Self {
            config,
            pool,
            params: CurveParams::baseline(),
            users,
            queue: SwapQueue::new(),
            rng: ChaCha8Rng::seed_from_u64(0),
            stats: EpochStats::default(),
        })
    }

    /// Restore initial liquidity and balances, draw a fresh order queue, and
    /// pick a uniformly random fee level and leverage.
    pub fn reset(&mut self, seed: u64) -> Result<Observation> {
        self.rng = ChaCha8Rng::seed_from_u64(seed);
        self.pool = PoolState::balanced(2, self.config.pool_reserve)?;
        self.users = generate_users(self.config.num_users, self.config.user_balance);
        self.queue = generate_swaps(
            self.config.swaps_per_epoch,
            &self.config.tolerance,
            &self.config.urgency,
            self.config.num_users,
            &mut self.rng,
        )?;
        let fee_level = self.rng.random_range(0..FEE_LEVELS);
        let leverage = self.rng.random_range(0..=MAX_LEVERAGE);
        self.params = CurveParams::from_levels(fee_level, leverage)?;
        self.stats = EpochStats::default();
        Ok(self.observe())
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    /// Swap the tolerance distribution; takes effect at the next reset.
    pub fn set_tolerance(&mut self, tolerance: TruncatedNormal) -> Result<()> {
        tolerance.validate()?;
        self.config.tolerance = tolerance;
        Ok(())
    }

    pub fn params(&self) -> CurveParams {
        self.params
    }

    pub fn set_params(&mut self, params: CurveParams) -> Result<()> {
        if !params.is_within_bounds() {
            return Err(Error::invalid(format!("parameters {params:?} outside controller bounds")));
        }
        self.params = params;
        Ok(())
    }

    pub fn pool(&self) -> &PoolState {
        &self.pool
    }

    pub fn users(&self) -> &[User] {
        &self.users
    }

    pub fn queue(&self) -> &SwapQueue {
        &self.queue
    }

    pub fn stats(&self) -> &EpochStats {
        &self.stats
    }

    pub fn is_done(&self) -> bool {
        self.queue.is_empty()
    }

    /// Per-token sum of user balances, pool reserves and skimmed fees.
    pub fn token_totals(&self) -> [f64; 2] {
        let mut totals = [0.0; 2];
        for (t, total) in totals.iter_mut().enumerate() {
            *total = self.users.iter().map(|u| u.balances[t]).sum::<f64>()
                + self.pool.reserves[t]
                + self.pool.accrued_fees[t];
        }
        totals
    }

    /// Discretized view: slippage of the head order's trade under the live
    /// parameters, plus the parameters themselves.
    pub fn observe(&self) -> Observation {
        let fee_level = self.params.fee_level().unwrap_or(0);
        let leverage = self.params.leverage.min(MAX_LEVERAGE) as u8;
        let slippage_bucket = self
            .queue
            .head()
            .map(|order| self.head_slippage_bucket(order))
            .unwrap_or(ZERO_BUCKET);
        Observation { slippage_bucket, fee_level, leverage }
    }

    fn head_slippage_bucket(&self, order: &SwapOrder) -> u16 {
        let user = &self.users[order.user_id];
        let (in_index, amount) = match (order.in_index, order.amount) {
            (Some(idx), Some(amt)) => (idx, amt),
            // Not yet decided: assume the user sells the token it holds more of.
            _ => {
                let idx = usize::from(user.balances[1] > user.balances[0]);
                (idx, self.config.amount.typical())
            }
        };
        let gross_in = amount.min(user.balances[in_index]);
        if gross_in <= 0.0 {
            return ZERO_BUCKET;
        }
        match self.pool.quote(&self.params, in_index, 1 - in_index, gross_in) {
            Ok(q) => discretize_slippage(q.slippage_pct),
            Err(_) => SLIPPAGE_BUCKETS - 1,
        }
    }

    /// Service the head of the queue.
    pub fn step(&mut self) -> Result<Step> {
        let Some(mut order) = self.queue.pop_head() else {
            return Ok(Step {
                reward: 0.0,
                outcome: StepOutcome::QueueEmpty,
                observation: self.observe(),
                done: true,
            });
        };

        self.stats.steps += 1;
        self.stats.fee_rate_sum += self.params.fee_rate;
        self.stats.leverage_sum += f64::from(self.params.leverage);

        let (reward, outcome) = if order.tries >= self.config.max_tries {
            (-1.0, StepOutcome::Expired)
        } else {
            let user = &mut self.users[order.user_id];
            match attempt_swap(&mut order, user, &mut self.pool, &self.params, &self.config, &mut self.rng)? {
                SwapOutcome::Success { amount, fee } => (fee, StepOutcome::Success { amount, fee }),
                SwapOutcome::Canceled => (-1.0, StepOutcome::CanceledByUser),
                SwapOutcome::Holding if order.tries >= self.config.max_tries => {
                    (-1.0, StepOutcome::Expired)
                }
                SwapOutcome::Holding => {
                    self.queue.reinsert(order, self.config.hold_offset);
                    (0.0, StepOutcome::Held)
                }
            }
        };

        match outcome {
            StepOutcome::Success { fee, .. } => {
                self.stats.successes += 1;
                self.stats.fees_collected += fee;
            }
            StepOutcome::Held => self.stats.holds += 1,
            StepOutcome::CanceledByUser => self.stats.user_cancels += 1,
            StepOutcome::Expired => self.stats.expirations += 1,
            StepOutcome::QueueEmpty => {}
        }
        self.stats.total_reward += reward;

        Ok(Step { reward, outcome, observation: self.observe(), done: self.queue.is_empty() })
    }

    /// Test hook: replace the queue wholesale.
    #[doc(hidden)]
    pub fn replace_queue(&mut self, queue: SwapQueue) {
        self.queue = queue;
    }
}

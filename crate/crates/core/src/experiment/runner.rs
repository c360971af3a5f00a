use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Scenario, SweepSpec};
use super::metrics::{terminal_reward, EpochMetrics};
use crate::agent::{apply_action, epsilon_at, index_stddev, Agent, AgentKind};
use crate::amm::CurveParams;
use crate::error::{Error, Result};
use crate::market::{AmountSpec, Environment, TruncatedNormal};

/// Output of one training run.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub config: ExperimentConfig,
    pub seed: u64,
    pub metrics: Vec<EpochMetrics>,
    pub agent: Agent,
    pub duration: Duration,
}

impl RunResult {
    pub fn terminal_reward(&self) -> f64 {
        terminal_reward(&self.metrics)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Environment seed for `epoch` of a run seeded with `seed`. Independent of the
/// agent, so different controllers see the same order flow.
pub fn epoch_seed(seed: u64, epoch: usize) -> u64 {
    splitmix64(splitmix64(seed) ^ epoch as u64)
}

fn agent_rng(seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    rng
}

/// Train one controller from scratch. Behavior-change scenarios switch the
/// tolerance distribution at the halfway epoch.
pub fn run_training(config: &ExperimentConfig, seed: u64) -> Result<RunResult> {
    config.validate()?;
    let start = Instant::now();
    let kind = config.agent;
    let mut env = Environment::new(config.env_config())?;
    let mut agent = Agent::new(kind, config.hyperparams);
    let mut rng = agent_rng(seed);
    let switch = match config.scenario {
        Scenario::BehaviorChange { to, .. } => Some((config.epochs / 2, to.distribution())),
        _ => None,
    };
    let mut metrics = Vec::with_capacity(config.epochs);
    for epoch in 0..config.epochs {
        let ctx = |e: Error| Error::Run { seed, epoch, source: Box::new(e) };
        if let Some((at, tolerance)) = switch {
            if epoch == at {
                env.set_tolerance(tolerance).map_err(ctx)?;
            }
        }
        let epsilon = epsilon_at(epoch, &config.hyperparams);
        let actions = run_epoch(&mut env, &mut agent, epsilon, config.update_interval, epoch_seed(seed, epoch), &mut rng)
            .map_err(ctx)?;
        let s = env.stats();
        metrics.push(EpochMetrics {
            epoch,
            total_reward: s.total_reward,
            fees_collected: s.fees_collected,
            successes: s.successes,
            held: s.holds,
            canceled: s.canceled(),
            user_cancels: s.user_cancels,
            expirations: s.expirations,
            steps: s.steps,
            decisions: actions.len(),
            mean_fee_rate: s.mean_fee_rate(),
            mean_leverage: s.mean_leverage(),
            epsilon,
            action_stddev: index_stddev(&actions),
        });
    }
    Ok(RunResult { config: config.clone(), seed, metrics, agent, duration: start.elapsed() })
}

/// Same as [`run_training`] but insists on a behavior-change scenario.
pub fn run_behavior_change(config: &ExperimentConfig, seed: u64) -> Result<RunResult> {
    if !matches!(config.scenario, Scenario::BehaviorChange { .. }) {
        return Err(Error::config("scenario", "behavior-change run needs a behavior-change scenario"));
    }
    run_training(config, seed)
}

/// Play one epoch to queue exhaustion, returning the actions taken.
fn run_epoch(
    env: &mut Environment,
    agent: &mut Agent,
    epsilon: f64,
    interval: usize,
    env_seed: u64,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<usize>> {
    let kind = agent.kind();
    let mut obs = env.reset(env_seed)?;
    if kind == AgentKind::Baseline {
        env.set_params(CurveParams::baseline())?;
        obs = env.observe();
    }
    let mut actions = Vec::new();
    while !env.is_done() {
        let action = agent.act(&obs, epsilon, rng);
        actions.push(action);
        env.set_params(apply_action(env.params(), kind.effect(action)))?;
        let mut reward = 0.0;
        let mut done = false;
        for _ in 0..interval {
            let step = env.step()?;
            reward += step.reward;
            if step.done {
                done = true;
                break;
            }
        }
        let next = env.observe();
        agent.learn(obs, action, reward, (!done).then_some(&next));
        obs = next;
    }
    Ok(actions)
}

/// Run every `(config, seed)` pair, on up to `jobs` threads. Results come back
/// in input order regardless of scheduling.
pub fn run_many(jobs: &[(ExperimentConfig, u64)], threads: usize) -> Result<Vec<RunResult>> {
    let run_all = || jobs.par_iter().map(|(cfg, seed)| run_training(cfg, *seed)).collect::<Result<Vec<_>>>();
    if threads <= 1 {
        return jobs.iter().map(|(cfg, seed)| run_training(cfg, *seed)).collect();
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::config("jobs", e.to_string()))?
        .install(run_all)
}

/// Per-agent outcome at one sweep value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub value: f64,
    pub agent: AgentKind,
    /// Mean over seeds of each run's terminal reward.
    pub terminal_reward: f64,
    pub per_seed: Vec<f64>,
}

/// Apply one sweep value to a base config.
pub fn sweep_point(base: &ExperimentConfig, spec: &SweepSpec, index: usize) -> ExperimentConfig {
    let mut cfg = base.clone();
    match spec {
        SweepSpec::SwapSize(sizes) => {
            let hl = Scenario::HighLiquidity.env_config();
            cfg.env.user_balance.get_or_insert(hl.user_balance);
            cfg.env.amount = Some(AmountSpec::Fixed { amount: sizes[index] });
        }
        SweepSpec::Tolerance(values) => {
            let v = values[index];
            cfg.env.tolerance = Some(TruncatedNormal { mu: v, sigma: v, lower: 0.1, upper: 5.0 });
        }
        SweepSpec::UpdateInterval(ks) => cfg.update_interval = ks[index],
    }
    cfg
}

/// Train every agent at every sweep value for every seed in `base`. Rows are
/// sorted by sweep value, then by agent order as given.
pub fn sweep(base: &ExperimentConfig, spec: &SweepSpec, agents: &[AgentKind], threads: usize) -> Result<Vec<SweepRow>> {
    if spec.is_empty() {
        return Err(Error::config("values", "sweep needs at least one value"));
    }
    if agents.is_empty() {
        return Err(Error::config("agents", "sweep needs at least one agent"));
    }
    let values = spec.values();
    let mut jobs = Vec::new();
    for i in 0..values.len() {
        let point = sweep_point(base, spec, i);
        point.validate()?;
        for &agent in agents {
            for &seed in &base.seeds {
                jobs.push((ExperimentConfig { agent, ..point.clone() }, seed));
            }
        }
    }
    let results = run_many(&jobs, threads)?;
    let mut rows = Vec::new();
    let mut chunks = results.chunks(base.seeds.len());
    for &value in &values {
        for &agent in agents {
            let per_seed: Vec<f64> = chunks.next().expect("one chunk per job group").iter().map(RunResult::terminal_reward).collect();
            let terminal_reward = per_seed.iter().sum::<f64>() / per_seed.len() as f64;
            rows.push(SweepRow { value, agent, terminal_reward, per_seed });
        }
    }
    rows.sort_by(|a, b| a.value.total_cmp(&b.value));
    Ok(rows)
}

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::amm::{fee_rate_for_level, CurveParams, FEE_LEVELS, MAX_LEVERAGE};
use crate::error::Error;

/// Which protocol knobs a controller may turn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AgentKind {
    /// Fee rate only: −1, 0, +1 levels.
    FeeOnly,
    /// Leverage only: −2, 0, +2.
    LeverageOnly,
    /// Cross product of the two, nine actions.
    Combined,
    /// Static 0.17% / 𝒜 = 42 protocol.
    Baseline,
}

const FEE_STEPS: [i8; 3] = [-1, 0, 1];
const LEVERAGE_STEPS: [i8; 3] = [-2, 0, 2];

impl AgentKind {
    pub const ALL: [AgentKind; 4] =
        [AgentKind::Baseline, AgentKind::FeeOnly, AgentKind::LeverageOnly, AgentKind::Combined];

    pub fn num_actions(self) -> usize {
        match self {
            AgentKind::FeeOnly | AgentKind::LeverageOnly => 3,
            AgentKind::Combined => 9,
            AgentKind::Baseline => 1,
        }
    }

    /// Decode an action index. Combined actions are laid out fee-major:
    /// `index = 3·fee_step + leverage_step`.
    pub fn effect(self, action: usize) -> ActionEffect {
        assert!(action < self.num_actions(), "action {action} invalid for {self}");
        match self {
            AgentKind::FeeOnly => ActionEffect::new(FEE_STEPS[action], 0),
            AgentKind::LeverageOnly => ActionEffect::new(0, LEVERAGE_STEPS[action]),
            AgentKind::Combined => ActionEffect::new(FEE_STEPS[action / 3], LEVERAGE_STEPS[action % 3]),
            AgentKind::Baseline => ActionEffect::new(0, 0),
        }
    }

    pub fn is_learning(self) -> bool {
        self != AgentKind::Baseline
    }

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::FeeOnly => "fee-only",
            AgentKind::LeverageOnly => "leverage-only",
            AgentKind::Combined => "combined",
            AgentKind::Baseline => "baseline",
        }
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "fee-only" | "fee" => Ok(AgentKind::FeeOnly),
            "leverage-only" | "leverage" => Ok(AgentKind::LeverageOnly),
            "combined" => Ok(AgentKind::Combined),
            "baseline" => Ok(AgentKind::Baseline),
            other => Err(Error::config(
                "agent",
                format!("unknown agent `{other}` (expected fee-only, leverage-only, combined or baseline)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionEffect {
    pub delta_fee_levels: i8,
    pub delta_leverage: i8,
}

impl ActionEffect {
    pub fn new(delta_fee_levels: i8, delta_leverage: i8) -> Self {
        Self { delta_fee_levels, delta_leverage }
    }
}

/// Move the parameters by `effect`, clamping to the fee and leverage bounds.
/// Off-grid fee rates snap to the nearest level first.
pub fn apply_action(params: CurveParams, effect: ActionEffect) -> CurveParams {
    let level = params
        .fee_level()
        .map(i32::from)
        .unwrap_or_else(|| ((params.fee_rate - 0.04) * 100.0).round() as i32);
    let level = (level + i32::from(effect.delta_fee_levels)).clamp(0, i32::from(FEE_LEVELS) - 1);
    let leverage = (i64::from(params.leverage.min(MAX_LEVERAGE)) + i64::from(effect.delta_leverage))
        .clamp(0, i64::from(MAX_LEVERAGE));
    CurveParams { leverage: leverage as u32, fee_rate: fee_rate_for_level(level as u8) }
}

use serde::{Deserialize, Serialize};

use crate::belief::OpponentModel;
use crate::error::{Error, Result};
use crate::lmsr::{LiquidityParam, QuantityVector};
use crate::posgi::{InfoModel, Outcome};
use crate::risk::{NegativeRewardMode, RiskPreference};
use crate::strategies::{StrategyKind, StrategyParams};

/// One market: population, liquidity, information and the realized event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MarketConfig {
    /// Trading periods (days).
    pub horizon: usize,
    pub n_agents: usize,
    /// LMSR liquidity.
    pub b: f64,
    /// Largest order per agent and period.
    pub max_trade: u32,
    pub initial_q: Vec<f64>,
    pub info: InfoModel,
    /// One entry per agent.
    pub strategies: Vec<StrategyKind>,
    /// Risk preference: one value for everyone or one per agent.
    pub theta: Vec<f64>,
    pub outcome: Outcome,
    pub seed: u64,
    /// State bound around the initial quantity; `n_agents * horizon` when unset.
    pub max_units: Option<i64>,
    /// Outcome-estimate shift applied for a positive or negative signal.
    pub signal_shift: f64,
    pub negative_reward: NegativeRewardMode,
    /// Opponent prediction used by every agent's belief filter.
    pub opponent_model: OpponentModel,
    pub strategy_params: StrategyParams,
    /// Run the existence and verifier checks on every period's stage game.
    pub audit_equilibria: bool,
    /// Lowest holding an agent may reach by selling; unlimited shorting when unset.
    pub inventory_floor: Option<f64>,
    /// Wall-clock delay per period for demos; results do not depend on it.
    pub pace_ms: u64,
}

impl Default for MarketConfig {
    fn default() -> Self {
        MarketConfig {
            horizon: 50,
            n_agents: 2,
            b: 100.0,
            max_trade: 1,
            initial_q: vec![0.0, 0.0],
            info: InfoModel::default(),
            strategies: vec![StrategyKind::Ce, StrategyKind::Ce],
            theta: vec![0.0],
            outcome: Outcome::Yes,
            seed: 0,
            max_units: None,
            signal_shift: 0.05,
            negative_reward: NegativeRewardMode::default(),
            opponent_model: OpponentModel::default(),
            strategy_params: StrategyParams::default(),
            audit_equilibria: false,
            inventory_floor: None,
            pace_ms: 0,
        }
    }
}

impl MarketConfig {
    /// Default market with every agent using `kind`.
    pub fn homogeneous(kind: StrategyKind) -> Self {
        MarketConfig {
            strategies: vec![kind; 2],
            ..MarketConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(Error::arg("horizon must be at least 1"));
        }
        if self.n_agents < 2 {
            return Err(Error::arg(format!(
                "need at least 2 agents, got {}",
                self.n_agents
            )));
        }
        LiquidityParam::new(self.b)?;
        if self.max_trade != 1 {
            return Err(Error::arg(format!(
                "max_trade must be 1 (unit orders only), got {}",
                self.max_trade
            )));
        }
        let q = QuantityVector::new(self.initial_q.clone())?;
        if q.len() != 2 {
            return Err(Error::arg(format!(
                "initial_q must list the event and its complement, got {} securities",
                q.len()
            )));
        }
        self.info.validate(self.n_agents)?;
        if self.strategies.len() != self.n_agents {
            return Err(Error::Dimension {
                what: "strategies",
                expected: self.n_agents,
                actual: self.strategies.len(),
            });
        }
        self.risk_preferences()?;
        if let Some(m) = self.max_units {
            if m <= 0 {
                return Err(Error::arg(format!("max_units must be positive, got {m}")));
            }
        }
        if !(self.signal_shift >= 0.0 && self.signal_shift < 0.5) {
            return Err(Error::arg(format!(
                "signal_shift must lie in [0, 0.5), got {}",
                self.signal_shift
            )));
        }
        if let Some(f) = self.inventory_floor {
            if !(f.is_finite() && f <= 0.0) {
                return Err(Error::arg(format!(
                    "inventory_floor must be finite and <= 0, got {f}"
                )));
            }
        }
        self.strategy_params.validate()
    }

    pub fn liquidity(&self) -> Result<LiquidityParam> {
        LiquidityParam::new(self.b)
    }

    pub fn risk_preferences(&self) -> Result<Vec<RiskPreference>> {
        let per_agent = match self.theta.len() {
            1 => vec![self.theta[0]; self.n_agents],
            n if n == self.n_agents => self.theta.clone(),
            n => {
                return Err(Error::Dimension {
                    what: "theta entries",
                    expected: self.n_agents,
                    actual: n,
                })
            }
        };
        per_agent.into_iter().map(RiskPreference::new).collect()
    }

    pub fn state_bound(&self) -> i64 {
        self.max_units
            .unwrap_or((self.n_agents * self.horizon) as i64)
    }
}

//! Trading strategies behind one decision interface.
//!
//! ZIP, CP and GD come from order-book double auctions. Here they are
//! reconstructions that trade against the posted LMSR price: each compares
//! the posted price with its own outcome estimate `p_hat` and buys, sells or
//! holds one unit.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{symmetrized_cash, trade_reward};
use crate::error::{Error, Result};
use crate::lmsr::{LiquidityParam, QuantityVector};
use crate::posgi::{Observation, TradeAction, TRADED_SECURITY};
use crate::risk::{crra_with, NegativeRewardMode, RiskPreference};

/// The six strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    /// Zero intelligence: uniform random action.
    Zi,
    /// Zero intelligence plus: adaptive profit margin.
    Zip,
    /// Competitive margin tracking recent price moves.
    Cp,
    /// Belief from the history of posted prices.
    Gd,
    /// Finite-horizon value iteration.
    Dp,
    /// Follows the mediator's correlated-equilibrium recommendation.
    Ce,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 6] = [
        StrategyKind::Zi,
        StrategyKind::Zip,
        StrategyKind::Cp,
        StrategyKind::Gd,
        StrategyKind::Dp,
        StrategyKind::Ce,
    ];

    pub const BASELINES: [StrategyKind; 5] = [
        StrategyKind::Zi,
        StrategyKind::Zip,
        StrategyKind::Cp,
        StrategyKind::Gd,
        StrategyKind::Dp,
    ];

    pub fn token(self) -> &'static str {
        match self {
            StrategyKind::Zi => "zi",
            StrategyKind::Zip => "zip",
            StrategyKind::Cp => "cp",
            StrategyKind::Gd => "gd",
            StrategyKind::Dp => "dp",
            StrategyKind::Ce => "ce",
        }
    }

    /// Comma-separated list such as `zi,ce`.
    pub fn parse_list(text: &str) -> Result<Vec<StrategyKind>> {
        text.split(',').map(|t| t.trim().parse()).collect()
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StrategyKind::ALL
            .into_iter()
            .find(|k| k.token().eq_ignore_ascii_case(s))
            .ok_or_else(|| {
                Error::arg(format!(
                    "unknown strategy `{s}` (expected one of zi, zip, cp, gd, dp, ce)"
                ))
            })
    }
}

/// Adaptation constants shared by the baselines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StrategyParams {
    /// Learning rate for ZIP and CP margins.
    pub beta: f64,
    pub initial_margin: f64,
    pub min_margin: f64,
    pub max_margin: f64,
    /// Grid points on the outcome probability used by DP.
    pub dp_grid: usize,
}

impl Default for StrategyParams {
    fn default() -> Self {
        StrategyParams {
            beta: 0.1,
            initial_margin: 0.05,
            min_margin: 1e-3,
            max_margin: 0.5,
            dp_grid: 51,
        }
    }
}

impl StrategyParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta < 1.0) {
            return Err(Error::arg(format!(
                "beta must lie in (0, 1), got {}",
                self.beta
            )));
        }
        if !(self.min_margin >= 0.0 && self.min_margin <= self.max_margin && self.max_margin < 1.0)
        {
            return Err(Error::arg(
                "margins must satisfy 0 <= min_margin <= max_margin < 1",
            ));
        }
        if !(self.initial_margin >= self.min_margin && self.initial_margin <= self.max_margin) {
            return Err(Error::arg(
                "initial_margin must lie within [min_margin, max_margin]",
            ));
        }
        if self.dp_grid < 2 {
            return Err(Error::arg("dp_grid needs at least 2 points"));
        }
        Ok(())
    }
}

/// Per-agent memory, one variant per kind.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategyState {
    Zi,
    Zip {
        margin: f64,
        last_price: Option<f64>,
    },
    Cp {
        margin: f64,
        last_price: Option<f64>,
    },
    Gd {
        /// Posted prices of earlier periods.
        history: Vec<f64>,
    },
    Dp,
    Ce,
}

impl StrategyState {
    pub fn new(kind: StrategyKind, params: &StrategyParams) -> Self {
        match kind {
            StrategyKind::Zi => StrategyState::Zi,
            StrategyKind::Zip => StrategyState::Zip {
                margin: params.initial_margin,
                last_price: None,
            },
            StrategyKind::Cp => StrategyState::Cp {
                margin: params.initial_margin,
                last_price: None,
            },
            StrategyKind::Gd => StrategyState::Gd {
                history: Vec::new(),
            },
            StrategyKind::Dp => StrategyState::Dp,
            StrategyKind::Ce => StrategyState::Ce,
        }
    }

    pub fn kind(&self) -> StrategyKind {
        match self {
            StrategyState::Zi => StrategyKind::Zi,
            StrategyState::Zip { .. } => StrategyKind::Zip,
            StrategyState::Cp { .. } => StrategyKind::Cp,
            StrategyState::Gd { .. } => StrategyKind::Gd,
            StrategyState::Dp => StrategyKind::Dp,
            StrategyState::Ce => StrategyKind::Ce,
        }
    }
}

/// Everything an agent may use to pick its action this period.
#[derive(Debug, Clone)]
pub struct DecisionContext<'a> {
    pub obs: &'a Observation,
    /// Outcome estimate after the signal adjustment.
    pub p_hat: f64,
    pub last_reward: Option<f64>,
    /// The agent's estimate of the outstanding quantities.
    pub q: &'a QuantityVector,
    pub b: LiquidityParam,
    /// Periods left including this one.
    pub remaining: usize,
    pub n_agents: usize,
    /// This agent's component of the mediator's sampled profile.
    pub recommendation: Option<TradeAction>,
    pub params: &'a StrategyParams,
    /// The agent's own risk preference; DP maximizes expected utility.
    pub risk: RiskPreference,
    pub negative_reward: NegativeRewardMode,
}

/// Pick this period's action and update the strategy memory.
pub fn decide<R: Rng + ?Sized>(
    kind: StrategyKind,
    state: &mut StrategyState,
    ctx: &DecisionContext<'_>,
    rng: &mut R,
) -> Result<TradeAction> {
    if state.kind() != kind {
        return Err(Error::arg(format!(
            "strategy state belongs to {} but {} was requested",
            state.kind(),
            kind
        )));
    }
    let posted = ctx.obs.posted_price;
    let p_hat = ctx.p_hat;
    let params = ctx.params;
    let action = match state {
        StrategyState::Zi => TradeAction::ALL[rng.random_range(0..3)],
        StrategyState::Zip { margin, last_price } => {
            if let Some(prev) = *last_price {
                // move toward the margin that would have accepted the last price
                let target = 0.9 * (prev - p_hat).abs() / p_hat;
                *margin = (*margin * (1.0 - params.beta) + params.beta * target)
                    .clamp(params.min_margin, params.max_margin);
            }
            *last_price = Some(posted);
            limit_decision(posted, p_hat, *margin)
        }
        StrategyState::Cp { margin, last_price } => {
            if let Some(prev) = *last_price {
                let target = (posted - prev).abs() / p_hat;
                *margin = (*margin + params.beta * (target - *margin))
                    .clamp(params.min_margin, params.max_margin);
            }
            *last_price = Some(posted);
            limit_decision(posted, p_hat, *margin)
        }
        StrategyState::Gd { history } => {
            let action = gd_decision(history, posted, p_hat);
            history.push(posted);
            action
        }
        StrategyState::Dp => dp_decision(ctx)?,
        StrategyState::Ce => ctx
            .recommendation
            .ok_or_else(|| Error::arg("CE strategy needs a recommendation from the mediator"))?,
    };
    Ok(action)
}

/// Buy below `p_hat (1 - m)`, sell above `p_hat (1 + m)`.
fn limit_decision(posted: f64, p_hat: f64, margin: f64) -> TradeAction {
    if posted < p_hat * (1.0 - margin) {
        TradeAction::Buy
    } else if posted > p_hat * (1.0 + margin) {
        TradeAction::Sell
    } else {
        TradeAction::Hold
    }
}

fn gd_decision(history: &[f64], posted: f64, p_hat: f64) -> TradeAction {
    if history.is_empty() {
        return TradeAction::Hold;
    }
    let n = history.len() as f64;
    let f_buy = history.iter().filter(|p| **p < p_hat).count() as f64 / n;
    let f_sell = history.iter().filter(|p| **p > p_hat).count() as f64 / n;
    let buy = f_buy * (p_hat - posted);
    let sell = f_sell * (posted - p_hat);
    if buy <= 0.0 && sell <= 0.0 {
        TradeAction::Hold
    } else if buy >= sell {
        TradeAction::Buy
    } else {
        TradeAction::Sell
    }
}

/// Value iteration over the traded-quantity offset from `ctx.q`, valuing
/// each unit at the grid projection of `p_hat`, with opponents acting
/// uniformly at random. Per-period rewards are mapped through the agent's
/// CRRA utility.
fn dp_decision(ctx: &DecisionContext<'_>) -> Result<TradeAction> {
    let grid = (ctx.params.dp_grid - 1) as f64;
    let value = ((ctx.p_hat * grid).round() / grid).clamp(1e-9, 1.0 - 1e-9);
    let n_opp = ctx.n_agents.saturating_sub(1);
    let horizon = ctx.remaining.max(1);
    let reach = (ctx.n_agents * horizon) as i64;
    let width = (2 * reach + 1) as usize;

    // Opponent net-direction distribution under uniform play.
    let mut opp = vec![(0i64, 1.0f64)];
    for _ in 0..n_opp {
        let mut next: Vec<(i64, f64)> = Vec::new();
        for (s, p) in &opp {
            for d in [-1, 0, 1] {
                match next.iter_mut().find(|(t, _)| *t == s + d) {
                    Some(e) => e.1 += p / 3.0,
                    None => next.push((s + d, p / 3.0)),
                }
            }
        }
        opp = next;
    }
    // Expected immediate reward of each own action at each reachable offset.
    let span_max = (ctx.n_agents * (horizon - 1)) as i64;
    let mut reward = vec![[0.0f64; 3]; width];
    for (idx, row) in reward.iter_mut().enumerate() {
        let offset = idx as i64 - reach;
        if offset.abs() > span_max {
            continue;
        }
        let q = ctx.q.shifted(TRADED_SECURITY, offset as f64)?;
        for (a_idx, own) in TradeAction::ALL.iter().enumerate() {
            if *own == TradeAction::Hold {
                continue;
            }
            let mut expected = 0.0;
            for_each_opponent_profile(n_opp, |profile, prob| {
                let mut actions = Vec::with_capacity(n_opp + 1);
                actions.push(*own);
                actions.extend_from_slice(profile);
                let cash = symmetrized_cash(&q, ctx.b, &actions)?;
                let r = trade_reward(*own, cash[0], value);
                expected += prob * crra_with(r, ctx.risk.theta(), ctx.negative_reward);
                Ok(())
            })?;
            row[a_idx] = expected;
        }
    }

    let mut v_next = vec![0.0f64; width];
    let mut first = [0.0f64; 3];
    for step in (0..horizon).rev() {
        let span = (ctx.n_agents * step) as i64;
        let mut v = vec![0.0f64; width];
        for offset in -span..=span {
            let idx = (offset + reach) as usize;
            let mut best = f64::NEG_INFINITY;
            for (a_idx, own) in TradeAction::ALL.iter().enumerate() {
                let mut total = reward[idx][a_idx];
                for (d, p) in &opp {
                    let next = (offset + own.direction() + d).clamp(-reach, reach);
                    total += p * v_next[(next + reach) as usize];
                }
                if step == 0 && offset == 0 {
                    first[a_idx] = total;
                }
                best = best.max(total);
            }
            v[idx] = best;
        }
        v_next = v;
    }
    let mut choice = TradeAction::Hold;
    let mut best = first[TradeAction::Hold.index()];
    for a in [TradeAction::Buy, TradeAction::Sell] {
        if first[a.index()] > best + 1e-12 {
            best = first[a.index()];
            choice = a;
        }
    }
    Ok(choice)
}

/// Calls `f` for every opponent action profile with its uniform probability.
fn for_each_opponent_profile(
    n_opp: usize,
    mut f: impl FnMut(&[TradeAction], f64) -> Result<()>,
) -> Result<()> {
    let total = 3usize.pow(n_opp as u32);
    let prob = 1.0 / total as f64;
    let mut profile = vec![TradeAction::Hold; n_opp];
    for k in 0..total {
        let mut rest = k;
        for slot in profile.iter_mut() {
            *slot = TradeAction::ALL[rest % 3];
            rest /= 3;
        }
        f(&profile, prob)?;
    }
    Ok(())
}

/// Percentage of periods where the two logs chose the same action.
pub fn agreement_rate(actions_a: &[TradeAction], actions_b: &[TradeAction]) -> Result<f64> {
    if actions_a.len() != actions_b.len() {
        return Err(Error::Dimension {
            what: "action logs",
            expected: actions_a.len(),
            actual: actions_b.len(),
        });
    }
    if actions_a.is_empty() {
        return Err(Error::arg("agreement rate of empty logs"));
    }
    let same = actions_a
        .iter()
        .zip(actions_b)
        .filter(|(a, b)| a == b)
        .count();
    Ok(100.0 * same as f64 / actions_a.len() as f64)
}

use crate::error::{Error, Result};
use crate::lmsr::{self, LiquidityParam, QuantityVector};
use crate::posgi::{MarketState, TradeAction, TRADED_SECURITY};
use crate::risk::{crra_with, NegativeRewardMode, RiskPreference};

use super::game::NormalFormGame;

const MAX_STAGE_AGENTS: usize = 16;

/// Stage game plus the monetary quantities behind its utilities.
#[derive(Debug, Clone, PartialEq)]
pub struct StageGame {
    /// Utilities after the CRRA map.
    pub game: NormalFormGame,
    /// Monetary reward `[profile][agent]` before the CRRA map.
    pub rewards: Vec<Vec<f64>>,
    /// Cash received by each agent `[profile][agent]`; payments are negative.
    pub cash: Vec<Vec<f64>>,
}

/// Cash flow of each agent when `actions` execute together at `q`.
///
/// Each agent's unit is priced after a random subset of the others' units,
/// averaged over all orderings of the agents. The flows sum to
/// `C(q) - C(q')` exactly.
pub fn symmetrized_cash(
    q: &QuantityVector,
    b: LiquidityParam,
    actions: &[TradeAction],
) -> Result<Vec<f64>> {
    let n = actions.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n > MAX_STAGE_AGENTS {
        return Err(Error::arg(format!(
            "at most {MAX_STAGE_AGENTS} agents per joint trade, got {n}"
        )));
    }
    let max_shift = (n - 1) as i64;
    // Unit prices by action and prior net shift.
    let mut buy = vec![0.0; 2 * n - 1];
    let mut sell = vec![0.0; 2 * n - 1];
    for shift in -max_shift..=max_shift {
        let pos = (shift + max_shift) as usize;
        let q_pre = q.shifted(TRADED_SECURITY, shift as f64)?;
        if actions.contains(&TradeAction::Buy) {
            buy[pos] = lmsr::buy_payment(&q_pre, TRADED_SECURITY, 1.0, b)?;
        }
        if actions.contains(&TradeAction::Sell) {
            sell[pos] = lmsr::sell_payout(&q_pre, TRADED_SECURITY, 1.0, b)?;
        }
    }
    // |S|! (n-1-|S|)! / n!
    let weights: Vec<f64> = (0..n)
        .map(|s| {
            let mut w = 1.0 / n as f64;
            for k in 1..=s {
                w *= k as f64 / (n - s + k - 1) as f64;
            }
            w
        })
        .collect();

    let mut cash = vec![0.0; n];
    for (i, action) in actions.iter().enumerate() {
        if *action == TradeAction::Hold {
            continue;
        }
        let others: Vec<i64> = actions
            .iter()
            .enumerate()
            .filter(|(j, _)| *j != i)
            .map(|(_, a)| a.direction())
            .collect();
        let mut total = 0.0;
        for mask in 0u32..(1u32 << others.len()) {
            let size = mask.count_ones() as usize;
            let shift: i64 = others
                .iter()
                .enumerate()
                .filter(|(j, _)| mask & (1 << j) != 0)
                .map(|(_, d)| d)
                .sum();
            let pos = (shift + max_shift) as usize;
            let flow = match action {
                TradeAction::Buy => -buy[pos],
                TradeAction::Sell => sell[pos],
                TradeAction::Hold => 0.0,
            };
            total += weights[size] * flow;
        }
        cash[i] = total;
    }
    Ok(cash)
}

/// Monetary reward of a unit trade valued at `belief`.
pub fn trade_reward(action: TradeAction, cash: f64, belief: f64) -> f64 {
    match action {
        TradeAction::Hold => 0.0,
        TradeAction::Buy => belief + cash,
        TradeAction::Sell => cash - belief,
    }
}

/// Normal-form game over `{hold, buy, sell}` for each agent, with utilities
/// from each agent's outcome belief and risk preference.
pub fn build_stage_game(
    s: &MarketState,
    b: LiquidityParam,
    beliefs: &[f64],
    risk: &[RiskPreference],
) -> Result<NormalFormGame> {
    Ok(build_stage_game_with(s, b, beliefs, risk, NegativeRewardMode::default())?.game)
}

/// [`build_stage_game`] with an explicit negative-reward mapping, keeping the
/// monetary tables.
pub fn build_stage_game_with(
    s: &MarketState,
    b: LiquidityParam,
    beliefs: &[f64],
    risk: &[RiskPreference],
    mode: NegativeRewardMode,
) -> Result<StageGame> {
    let n = beliefs.len();
    if n == 0 {
        return Err(Error::arg("stage game needs at least one agent"));
    }
    if risk.len() != n {
        return Err(Error::Dimension {
            what: "risk preferences",
            expected: n,
            actual: risk.len(),
        });
    }
    if let Some(p) = beliefs.iter().find(|p| !(**p > 0.0 && **p < 1.0)) {
        return Err(Error::arg(format!(
            "outcome beliefs must lie in (0, 1), got {p}"
        )));
    }
    let counts = vec![TradeAction::ALL.len(); n];
    let mut rewards = Vec::new();
    let mut cash_table = Vec::new();
    let mut failure = None;
    let game = NormalFormGame::from_fn(&counts, |profile| {
        let actions: Vec<TradeAction> = profile.iter().map(|&a| TradeAction::ALL[a]).collect();
        let cash = match symmetrized_cash(&s.q, b, &actions) {
            Ok(c) => c,
            Err(e) => {
                failure.get_or_insert(e);
                vec![0.0; n]
            }
        };
        let reward: Vec<f64> = (0..n)
            .map(|i| trade_reward(actions[i], cash[i], beliefs[i]))
            .collect();
        let utility = reward
            .iter()
            .zip(risk)
            .map(|(r, theta)| crra_with(*r, theta.theta(), mode))
            .collect();
        rewards.push(reward);
        cash_table.push(cash);
        utility
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let names = vec![
        TradeAction::ALL
            .iter()
            .map(|a| a.name().to_string())
            .collect();
        n
    ];
    Ok(StageGame {
        game: game.with_action_names(names)?,
        rewards,
        cash: cash_table,
    })
}

use std::time::Duration;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::config::MarketConfig;
use crate::belief::{
    condition_on, most_likely_state, outcome_belief, uniform_prior, update_belief, BeliefState,
    OpponentModel, OpponentTracker,
};
use crate::equilibrium::{
    build_stage_game_with, dual_feasibility_test, is_ce, pareto_ce, solve_ce, symmetrized_cash,
    trade_reward, CeObjective,
};
use crate::error::{Error, Result};
use crate::lmsr::{self, QuantityVector};
use crate::posgi::{
    apply_joint_action, build_state_space, observe, sample_signals, InfoSignal, JointAction,
    MarketObservationModel, MarketState, TradeAction, TransitionModel, TRADED_SECURITY,
};
use crate::risk::crra_with;
use crate::strategies::{decide, DecisionContext, StrategyKind, StrategyState};

/// Counters from checking each period's stage game.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct EquilibriumAudit {
    pub games: usize,
    /// Dual test reported no equilibrium.
    pub existence_failures: usize,
    /// `solve_ce` output failed `is_ce`.
    pub verification_failures: usize,
}

impl EquilibriumAudit {
    pub fn merge(&mut self, other: &EquilibriumAudit) {
        self.games += other.games;
        self.existence_failures += other.existence_failures;
        self.verification_failures += other.verification_failures;
    }
}

/// Everything recorded during one market run. Per-period tables are indexed
/// `[period][agent]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub config: MarketConfig,
    /// Posted price at the start of each period.
    pub prices: Vec<f64>,
    /// Posted price after the last period's trade.
    pub final_price: f64,
    pub actions: Vec<Vec<TradeAction>>,
    pub signals: Vec<Vec<InfoSignal>>,
    /// Outcome estimates each agent acted on.
    pub p_hats: Vec<Vec<f64>>,
    /// Monetary reward per period; the last period includes settlement.
    pub rewards: Vec<Vec<f64>>,
    pub utilities: Vec<Vec<f64>>,
    pub cumulative_utility: Vec<f64>,
    /// Net cash plus settlement per agent.
    pub profit: Vec<f64>,
    pub holdings: Vec<f64>,
    pub cash: Vec<f64>,
    pub settlement: Vec<f64>,
    /// Cash the market maker collected before settlement.
    pub market_maker_cash: f64,
    /// Settlement paid minus cash collected.
    pub market_maker_loss: f64,
    /// Largest per-period gap between agent cash flows and the cost change.
    pub max_ledger_error: f64,
    /// Joint trades voided because they would leave the state bounds.
    pub truncations: usize,
    /// Periods where no Pareto-supported equilibrium existed.
    pub ce_fallbacks: usize,
    pub belief_inconsistencies: usize,
    /// Sells turned into holds by the inventory floor.
    pub inventory_blocks: usize,
    pub audit: Option<EquilibriumAudit>,
}

impl RunResult {
    pub fn horizon(&self) -> usize {
        self.prices.len()
    }

    /// Mean cumulative utility over agents.
    pub fn mean_utility(&self) -> f64 {
        self.cumulative_utility.iter().sum::<f64>() / self.cumulative_utility.len() as f64
    }

    pub fn final_price_error(&self) -> f64 {
        (self.final_price - self.config.outcome.value()).abs()
    }

    /// Action log of one agent.
    pub fn agent_actions(&self, agent: usize) -> Vec<TradeAction> {
        self.actions.iter().map(|row| row[agent]).collect()
    }
}

/// Independent seed for a named stream of a run.
pub fn derive_seed(seed: u64, stream: u64, index: u64) -> u64 {
    let mut z = seed
        ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ index.wrapping_add(1).wrapping_mul(0xD1B5_4A32_D192_ED03);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

const SIGNAL_STREAM: u64 = 0;
const AGENT_STREAM: u64 = 1;
const MEDIATOR_STREAM: u64 = 2;

struct Agent {
    kind: StrategyKind,
    state: StrategyState,
    rng: ChaCha8Rng,
    omega: MarketObservationModel,
    belief: Option<BeliefState>,
    last_action: TradeAction,
    last_reward: Option<f64>,
    tracker: OpponentTracker,
    /// Offset of the most likely state after the previous update.
    last_offset: Option<i64>,
}

/// Runs one market from the first period to settlement.
pub fn run_market(config: &MarketConfig) -> Result<RunResult> {
    config.validate()?;
    let b = config.liquidity()?;
    let n = config.n_agents;
    let horizon = config.horizon;
    let risk = config.risk_preferences()?;
    let q0 = QuantityVector::new(config.initial_q.clone())?;
    let space = build_state_space(&q0, config.state_bound(), horizon)?;
    let transition_model = TransitionModel::market(&space, n)?;
    let signal_prior = config.info.signal_prior();
    let risk_averse = risk.iter().any(|r| r.theta() > 0.0);
    let needs_mediator = config.strategies.contains(&StrategyKind::Ce);

    let mut agents: Vec<Agent> = (0..n)
        .map(|i| {
            Ok(Agent {
                kind: config.strategies[i],
                state: StrategyState::new(config.strategies[i], &config.strategy_params),
                rng: ChaCha8Rng::seed_from_u64(derive_seed(config.seed, AGENT_STREAM, i as u64)),
                omega: MarketObservationModel::new(&space, b, config.info.reliability_for(i))?,
                belief: None,
                last_action: TradeAction::Hold,
                last_reward: None,
                tracker: OpponentTracker::new(n)?,
                last_offset: None,
            })
        })
        .collect::<Result<_>>()?;
    let mut signal_rng = ChaCha8Rng::seed_from_u64(derive_seed(config.seed, SIGNAL_STREAM, 0));

    let mut state = MarketState::new(q0.clone(), 0, horizon)?;
    let mut prices = Vec::with_capacity(horizon);
    let mut actions_log = Vec::with_capacity(horizon);
    let mut signals_log = Vec::with_capacity(horizon);
    let mut p_hat_log = Vec::with_capacity(horizon);
    let mut rewards = Vec::with_capacity(horizon);
    let mut holdings = vec![0.0; n];
    let mut cash = vec![0.0; n];
    // Value already credited for executed trades at each agent's estimate.
    let mut marked = vec![0.0; n];
    let mut max_ledger_error: f64 = 0.0;
    let mut truncations = 0;
    let mut ce_fallbacks = 0;
    let mut belief_inconsistencies = 0;
    let mut inventory_blocks = 0;
    let mut audit = config.audit_equilibria.then(EquilibriumAudit::default);

    for period in 0..horizon {
        let posted = lmsr::price_of(&state.q, TRADED_SECURITY, b)?;
        prices.push(posted);
        let signals = sample_signals(&mut signal_rng, &config.info, config.outcome, n);

        let mut p_hats = Vec::with_capacity(n);
        let mut estimates = Vec::with_capacity(n);
        let mut observations = Vec::with_capacity(n);
        for (agent, signal) in agents.iter_mut().zip(&signals) {
            let obs = observe(&state, b, *signal)?;
            let update = match &agent.belief {
                None => condition_on(
                    &uniform_prior(space.len())?,
                    &obs,
                    &agent.omega,
                    &signal_prior,
                )?,
                Some(prev) => {
                    let learned;
                    let model = match config.opponent_model {
                        OpponentModel::Uniform => &transition_model,
                        OpponentModel::Frequency => {
                            learned = TransitionModel::market_with_opponents(
                                &space,
                                &agent.tracker.distribution(),
                            )?;
                            &learned
                        }
                    };
                    update_belief(
                        prev,
                        agent.last_action,
                        &obs,
                        model,
                        &agent.omega,
                        &signal_prior,
                    )?
                }
            };
            if update.inconsistent {
                belief_inconsistencies += 1;
            }
            let estimate = outcome_belief(&update.belief, b, &space)?;
            let shift = f64::from(signal.value()) * config.signal_shift;
            p_hats.push((estimate + shift).clamp(0.01, 0.99));
            let likely = most_likely_state(&update.belief);
            let offset = likely as i64 - space.max_units();
            if let Some(prev) = agent.last_offset {
                agent
                    .tracker
                    .record(offset - prev - agent.last_action.direction());
            }
            agent.last_offset = Some(offset);
            estimates.push(space.quantities(likely)?);
            agent.belief = Some(update.belief);
            observations.push(obs);
        }

        let mut recommendation: Option<Vec<TradeAction>> = None;
        if needs_mediator || audit.is_some() {
            let game =
                build_stage_game_with(&state, b, &p_hats, &risk, config.negative_reward)?.game;
            if let Some(audit) = audit.as_mut() {
                audit.games += 1;
                if !dual_feasibility_test(&game)?.exists_ce {
                    audit.existence_failures += 1;
                }
                let ce = solve_ce(&game, CeObjective::Utilitarian)?;
                if !is_ce(&game, &ce.p, 1e-9)? {
                    audit.verification_failures += 1;
                }
            }
            if needs_mediator {
                let ce = if risk_averse {
                    match pareto_ce(&game)? {
                        Some(ce) => ce,
                        None => {
                            ce_fallbacks += 1;
                            solve_ce(&game, CeObjective::Utilitarian)?
                        }
                    }
                } else {
                    solve_ce(&game, CeObjective::Utilitarian)?
                };
                let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(
                    config.seed,
                    MEDIATOR_STREAM,
                    period as u64,
                ));
                let profile = ce.sample(&mut rng);
                recommendation = Some(
                    game.profile(profile)
                        .into_iter()
                        .map(|a| TradeAction::ALL[a])
                        .collect(),
                );
            }
        }

        let remaining = horizon - period;
        let mut actions = Vec::with_capacity(n);
        for (i, agent) in agents.iter_mut().enumerate() {
            let ctx = DecisionContext {
                obs: &observations[i],
                p_hat: p_hats[i],
                last_reward: agent.last_reward,
                q: &estimates[i],
                b,
                remaining,
                n_agents: n,
                recommendation: recommendation.as_ref().map(|r| r[i]),
                params: &config.strategy_params,
                risk: risk[i],
                negative_reward: config.negative_reward,
            };
            let action = decide(agent.kind, &mut agent.state, &ctx, &mut agent.rng)?;
            actions.push(action);
        }
        if let Some(floor) = config.inventory_floor {
            for (i, a) in actions.iter_mut().enumerate() {
                if *a == TradeAction::Sell && holdings[i] - 1.0 < floor {
                    *a = TradeAction::Hold;
                    inventory_blocks += 1;
                }
            }
        }

        let joint = JointAction(actions.clone());
        let step = apply_joint_action(&state.q, &joint, &space)?;
        let mut period_rewards = vec![0.0; n];
        let next_q = if step.truncated {
            truncations += 1;
            state.q.clone()
        } else {
            let flows = symmetrized_cash(&state.q, b, &actions)?;
            let cost_change = lmsr::cost(&step.q, b)? - lmsr::cost(&state.q, b)?;
            max_ledger_error =
                max_ledger_error.max((flows.iter().sum::<f64>() + cost_change).abs());
            for i in 0..n {
                cash[i] += flows[i];
                holdings[i] += actions[i].direction() as f64;
                marked[i] += actions[i].direction() as f64 * p_hats[i];
                period_rewards[i] = trade_reward(actions[i], flows[i], p_hats[i]);
            }
            step.q
        };

        for (agent, action) in agents.iter_mut().zip(&actions) {
            agent.last_action = *action;
        }
        if period + 1 < horizon {
            state = MarketState::new(next_q, period + 1, horizon)?;
        } else {
            state.q = next_q;
        }
        for (agent, r) in agents.iter_mut().zip(&period_rewards) {
            agent.last_reward = Some(*r);
        }
        rewards.push(period_rewards);
        actions_log.push(actions);
        signals_log.push(signals);
        p_hat_log.push(p_hats);
        if config.pace_ms > 0 {
            std::thread::sleep(Duration::from_millis(config.pace_ms));
        }
    }

    let positions: Vec<Vec<f64>> = holdings.iter().map(|h| vec![*h, 0.0]).collect();
    let settlement = lmsr::settle(&positions, config.outcome.winning_security())?;
    if let Some(last) = rewards.last_mut() {
        for i in 0..n {
            last[i] += settlement[i] - marked[i];
        }
    }
    let utilities: Vec<Vec<f64>> = rewards
        .iter()
        .map(|row| {
            row.iter()
                .zip(&risk)
                .map(|(r, theta)| crra_with(*r, theta.theta(), config.negative_reward))
                .collect()
        })
        .collect();
    let cumulative_utility = (0..n)
        .map(|i| utilities.iter().map(|row| row[i]).sum())
        .collect();
    let profit: Vec<f64> = (0..n).map(|i| cash[i] + settlement[i]).collect();
    let market_maker_cash = -cash.iter().sum::<f64>();
    let market_maker_loss = settlement.iter().sum::<f64>() - market_maker_cash;
    let final_price = lmsr::price_of(&state.q, TRADED_SECURITY, b)?;
    if !(final_price > 0.0 && final_price < 1.0) {
        return Err(Error::NumericDomain(format!(
            "final price {final_price} outside (0, 1)"
        )));
    }

    Ok(RunResult {
        config: config.clone(),
        prices,
        final_price,
        actions: actions_log,
        signals: signals_log,
        p_hats: p_hat_log,
        rewards,
        utilities,
        cumulative_utility,
        profit,
        holdings,
        cash,
        settlement,
        market_maker_cash,
        market_maker_loss,
        max_ledger_error,
        truncations,
        ce_fallbacks,
        belief_inconsistencies,
        inventory_blocks,
        audit,
    })
}

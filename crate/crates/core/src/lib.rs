//! Prediction-market simulation with an LMSR market maker, belief-filtering
//! agents and correlated-equilibrium trading strategies.

pub mod belief;
pub mod equilibrium;
pub mod error;
pub mod lmsr;
pub mod lp;
pub mod posgi;
pub mod risk;
pub mod sim;
pub mod strategies;

pub use belief::{
    outcome_belief, uniform_prior, update_belief, BeliefState, BeliefUpdate, OpponentModel,
    OpponentTracker,
};
pub use equilibrium::{
    build_stage_game, ce_calc, dual_feasibility_test, is_ce, pareto_ce, pareto_profiles, solve_ce,
    CeObjective, CorrelatedEquilibrium, NormalFormGame, ParetoProfileSet,
};
pub use error::{Error, Result};
pub use lmsr::{LiquidityParam, PriceVector, QuantityVector};
pub use posgi::{InfoModel, InfoSignal, MarketState, Observation, Outcome, TradeAction};
pub use risk::{crra, NegativeRewardMode, RiskPreference};
pub use sim::{
    export_results, run_experiment, run_market, ExperimentSummary, MarketConfig, RunResult,
};
pub use strategies::{agreement_rate, decide, StrategyKind, StrategyParams, StrategyState};

//! Stage games and correlated equilibria.
//!
//! A distribution `p` over joint profiles is a correlated equilibrium when no
//! player gains by deviating from a recommended action:
//!
//! ```text
//! sum_{phi_-i} p(phi_i, phi_-i) (u_i(phi_i, phi_-i) - u_i(phi_i', phi_-i)) >= 0
//! ```
//!
//! for every player `i` and every pair `phi_i != phi_i'`.

mod ce;
mod game;
mod pareto;
mod stage;

pub use ce::{
    ce_calc, ce_constraints, dual_feasibility_test, incentive_matrix, is_ce, primal_unbounded_test,
    solve_ce, CeCalcConfig, CeCalcPeriod, CeObjective, CorrelatedEquilibrium, DualTest,
};
pub use game::{GameDocument, NormalFormGame};
pub use pareto::{dominates, pareto_ce, pareto_profiles, ParetoProfileSet};
pub use stage::{
    build_stage_game, build_stage_game_with, symmetrized_cash, trade_reward, StageGame,
};

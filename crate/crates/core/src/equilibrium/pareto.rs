use serde::{Deserialize, Serialize};

use super::ce::{ce_constraints, optimize_lexicographic, CorrelatedEquilibrium};
use super::game::NormalFormGame;
use crate::error::{Error, Result};
use crate::lp::Relation;

/// Non-dominated joint profiles and their weighted welfare.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoProfileSet {
    /// Profile indices in ascending order.
    pub members: Vec<usize>,
    /// `sum_i lambda_i u_i` for each member, aligned with `members`.
    pub weighted_welfare: Vec<f64>,
    /// First member with the largest weighted welfare.
    pub best: usize,
}

impl ParetoProfileSet {
    pub fn contains(&self, profile: usize) -> bool {
        self.members.binary_search(&profile).is_ok()
    }
}

/// `a` Pareto-dominates `b`: no player worse off, one strictly better.
pub fn dominates(game: &NormalFormGame, a: usize, b: usize) -> bool {
    let mut strict = false;
    for i in 0..game.n_players() {
        let (ua, ub) = (game.utility(a, i), game.utility(b, i));
        if ua < ub {
            return false;
        }
        if ua > ub {
            strict = true;
        }
    }
    strict
}

/// Enumerate the Pareto set and pick the weighted-welfare maximizer.
pub fn pareto_profiles(game: &NormalFormGame, weights: &[f64]) -> Result<ParetoProfileSet> {
    if weights.len() != game.n_players() {
        return Err(Error::Dimension {
            what: "Pareto weights",
            expected: game.n_players(),
            actual: weights.len(),
        });
    }
    if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
        return Err(Error::arg("Pareto weights must be finite and non-negative"));
    }
    if weights.iter().all(|w| *w == 0.0) {
        return Err(Error::arg("Pareto weights must not all be zero"));
    }
    let n = game.n_profiles();
    let members: Vec<usize> = (0..n)
        .filter(|&k| !(0..n).any(|j| dominates(game, j, k)))
        .collect();
    let weighted_welfare: Vec<f64> = members
        .iter()
        .map(|&k| {
            weights
                .iter()
                .enumerate()
                .map(|(i, w)| w * game.utility(k, i))
                .sum()
        })
        .collect();
    let mut best_pos = 0;
    for (pos, w) in weighted_welfare.iter().enumerate() {
        if *w > weighted_welfare[best_pos] {
            best_pos = pos;
        }
    }
    Ok(ParetoProfileSet {
        best: members[best_pos],
        members,
        weighted_welfare,
    })
}

/// Utilitarian CE supported only on Pareto-optimal profiles, if one exists.
pub fn pareto_ce(game: &NormalFormGame) -> Result<Option<CorrelatedEquilibrium>> {
    let set = pareto_profiles(game, &vec![1.0; game.n_players()])?;
    let n = game.n_profiles();
    let mut lp = ce_constraints(game);
    lp.objective = (0..n).map(|k| game.welfare(k)).collect();
    for k in (0..n).filter(|k| !set.contains(*k)) {
        let mut row = vec![0.0; n];
        row[k] = 1.0;
        lp.add_constraint(row, Relation::Le, 0.0);
    }
    Ok(optimize_lexicographic(lp, true)?.map(|p| CorrelatedEquilibrium { p }))
}

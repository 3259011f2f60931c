use rand::Rng;
use serde::{Deserialize, Serialize};

use super::game::NormalFormGame;
use crate::error::{Error, Result};
use crate::lp::{solve_lp, LinearProgram, LpVerdict, Relation, Sense};

/// Welfare slack allowed while refining among optimal vertices.
const TIE_TOL: f64 = 1e-12;

/// Probability distribution over the joint profiles of a game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelatedEquilibrium {
    pub p: Vec<f64>,
}

impl CorrelatedEquilibrium {
    /// Expected utility of each player under `p`.
    pub fn expected_utilities(&self, game: &NormalFormGame) -> Vec<f64> {
        (0..game.n_players())
            .map(|i| {
                self.p
                    .iter()
                    .enumerate()
                    .map(|(k, pk)| pk * game.utility(k, i))
                    .sum()
            })
            .collect()
    }

    pub fn welfare(&self, game: &NormalFormGame) -> f64 {
        self.expected_utilities(game).iter().sum()
    }

    /// Profiles with probability above `tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        (0..self.p.len()).filter(|&k| self.p[k] > tol).collect()
    }

    /// Draw one joint profile.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let total: f64 = self.p.iter().map(|p| p.max(0.0)).sum();
        let mut u = rng.random::<f64>() * total;
        let mut last = 0;
        for (k, p) in self.p.iter().enumerate() {
            let p = p.max(0.0);
            if p == 0.0 {
                continue;
            }
            last = k;
            if u < p {
                return k;
            }
            u -= p;
        }
        last
    }
}

/// Selection rule among correlated equilibria.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CeObjective {
    /// Maximize expected total utility.
    #[default]
    Utilitarian,
    /// Any feasible point.
    Uniform,
}

/// Incentive rows, one per `(player, recommended, deviation)` with the
/// deviation distinct from the recommendation; columns are joint profiles.
pub fn incentive_matrix(game: &NormalFormGame) -> Vec<Vec<f64>> {
    let mut rows = Vec::new();
    for i in 0..game.n_players() {
        for rec in 0..game.n_actions(i) {
            for dev in 0..game.n_actions(i) {
                if dev == rec {
                    continue;
                }
                let row = (0..game.n_profiles())
                    .map(|k| {
                        if game.action_of(k, i) != rec {
                            0.0
                        } else {
                            game.utility(k, i) - game.utility(game.deviate(k, i, dev), i)
                        }
                    })
                    .collect();
                rows.push(row);
            }
        }
    }
    rows
}

/// CE feasibility system: incentive rows `>= 0`, then `sum p = 1`, with
/// `p >= 0` as variable bounds. The objective is zero.
pub fn ce_constraints(game: &NormalFormGame) -> LinearProgram {
    let n = game.n_profiles();
    let mut lp = LinearProgram::new(Sense::Maximize, vec![0.0; n]);
    for row in incentive_matrix(game) {
        lp.add_constraint(row, Relation::Ge, 0.0);
    }
    lp.add_constraint(vec![1.0; n], Relation::Eq, 1.0);
    lp
}

/// Welfare per profile measured from each player's worst outcome. Equal to
/// total utility up to a constant on the simplex, and unchanged when a
/// player's utilities are shifted.
fn welfare_objective(game: &NormalFormGame) -> Vec<f64> {
    let floors: Vec<f64> = (0..game.n_players())
        .map(|i| {
            (0..game.n_profiles())
                .map(|k| game.utility(k, i))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    (0..game.n_profiles())
        .map(|k| {
            (0..game.n_players())
                .map(|i| game.utility(k, i) - floors[i])
                .sum()
        })
        .collect()
}

/// A correlated equilibrium chosen by `objective`.
pub fn solve_ce(game: &NormalFormGame, objective: CeObjective) -> Result<CorrelatedEquilibrium> {
    let mut lp = ce_constraints(game);
    if objective == CeObjective::Utilitarian {
        lp.objective = welfare_objective(game);
    }
    let p = optimize_lexicographic(lp, objective == CeObjective::Utilitarian)?
        .ok_or_else(|| Error::Internal("correlated-equilibrium program is infeasible".into()))?;
    Ok(CorrelatedEquilibrium { p })
}

/// Solve `lp` over the simplex. When `refine` is set and the optimum is not
/// unique, ties are broken toward mass on earlier profiles.
pub(crate) fn optimize_lexicographic(
    mut lp: LinearProgram,
    refine: bool,
) -> Result<Option<Vec<f64>>> {
    let (mut x, best, alternatives) = match solve_lp(&lp)? {
        LpVerdict::Optimal {
            x,
            objective,
            alternative_optima,
        } => (x, objective, alternative_optima),
        LpVerdict::Infeasible => return Ok(None),
        LpVerdict::Unbounded { .. } => {
            return Err(Error::Internal(
                "objective over the simplex cannot be unbounded".into(),
            ))
        }
    };
    if refine && alternatives {
        let n = lp.n_vars();
        let first = x.clone();
        let objective = std::mem::replace(&mut lp.objective, vec![0.0; n]);
        let floor = best - TIE_TOL * (1.0 + best.abs());
        lp.add_constraint(objective.clone(), Relation::Ge, floor);
        for k in 0..n {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            lp.objective = e.clone();
            match solve_lp(&lp)? {
                LpVerdict::Optimal {
                    x: xk,
                    objective: vk,
                    alternative_optima,
                } => {
                    x = xk;
                    if !alternative_optima {
                        break;
                    }
                    lp.add_constraint(e, Relation::Ge, vk - 1e-12);
                }
                // Tolerances made the face empty; keep the last vertex.
                _ => break,
            }
        }
        let value: f64 = objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        if value < best - 100.0 * TIE_TOL * (1.0 + best.abs()) {
            x = first;
        }
    }
    Ok(Some(clean_distribution(x)))
}

fn clean_distribution(mut x: Vec<f64>) -> Vec<f64> {
    for v in &mut x {
        if *v < 0.0 {
            *v = 0.0;
        }
    }
    let total: f64 = x.iter().sum();
    if total > 0.0 && (total - 1.0).abs() > f64::EPSILON {
        x.iter_mut().for_each(|v| *v /= total);
    }
    x
}

/// Whether `p` satisfies every incentive row and the simplex within `tol`.
pub fn is_ce(game: &NormalFormGame, p: &[f64], tol: f64) -> Result<bool> {
    if p.len() != game.n_profiles() {
        return Err(Error::arg(format!(
            "distribution has {} entries, game has {} profiles",
            p.len(),
            game.n_profiles()
        )));
    }
    if p.iter().any(|v| !v.is_finite() || *v < -tol) {
        return Ok(false);
    }
    if (p.iter().sum::<f64>() - 1.0).abs() > tol {
        return Ok(false);
    }
    Ok(incentive_matrix(game)
        .iter()
        .all(|row| row.iter().zip(p).map(|(u, pk)| u * pk).sum::<f64>() >= -tol))
}

/// Outcome of the dual existence test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DualTest {
    pub exists_ce: bool,
}

/// Dual system `U^T p' <= -1, p' >= 0`. A correlated equilibrium exists iff
/// it has no solution.
pub fn dual_feasibility_test(game: &NormalFormGame) -> Result<DualTest> {
    let u = incentive_matrix(game);
    let m = u.len();
    let mut lp = LinearProgram::new(Sense::Maximize, vec![0.0; m]);
    for k in 0..game.n_profiles() {
        lp.add_constraint(u.iter().map(|row| row[k]).collect(), Relation::Le, -1.0);
    }
    let verdict = if m == 0 {
        // No incentive rows: the dual asks 0 <= -1 for every profile.
        LpVerdict::Infeasible
    } else {
        solve_lp(&lp)?
    };
    Ok(DualTest {
        exists_ce: matches!(verdict, LpVerdict::Infeasible),
    })
}

/// Primal form of the existence test: `max sum p` over `U p >= 0, p >= 0`
/// without normalization. Unbounded iff a correlated equilibrium exists.
pub fn primal_unbounded_test(game: &NormalFormGame) -> Result<bool> {
    let n = game.n_profiles();
    let mut lp = LinearProgram::new(Sense::Maximize, vec![1.0; n]);
    for row in incentive_matrix(game) {
        lp.add_constraint(row, Relation::Ge, 0.0);
    }
    Ok(matches!(solve_lp(&lp)?, LpVerdict::Unbounded { .. }))
}

/// Tuning for [`ce_calc`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CeCalcConfig {
    /// Per-element increment of the dual walk.
    pub epsilon: f64,
    pub max_iterations: usize,
}

impl Default for CeCalcConfig {
    fn default() -> Self {
        CeCalcConfig {
            epsilon: 1e-3,
            max_iterations: 10_000,
        }
    }
}

/// One period of [`ce_calc`].
#[derive(Debug, Clone, PartialEq)]
pub struct CeCalcPeriod {
    pub equilibrium: CorrelatedEquilibrium,
    /// Dual points visited while `U^T p' <= -1` held.
    pub duals: Vec<Vec<f64>>,
    pub u_rows: usize,
    /// Utility differences evaluated while assembling `U`.
    pub assembly_work: usize,
    pub fell_back: bool,
}

/// Per-period CE loop: assemble `U`, walk the dual, then solve for a
/// distribution orthogonal to every collected dual point.
pub fn ce_calc<F>(
    horizon: usize,
    mut supplier: F,
    config: CeCalcConfig,
) -> Result<Vec<CeCalcPeriod>>
where
    F: FnMut(usize) -> Result<NormalFormGame>,
{
    if horizon == 0 {
        return Err(Error::arg("ce_calc horizon must be at least 1"));
    }
    if !(config.epsilon > 0.0 && config.epsilon <= 1.0) {
        return Err(Error::arg(format!(
            "epsilon must lie in (0, 1], got {}",
            config.epsilon
        )));
    }
    let mut periods = Vec::with_capacity(horizon);
    for t in 0..horizon {
        let game = supplier(t)?;
        periods.push(ce_calc_period(&game, config)?);
    }
    Ok(periods)
}

fn ce_calc_period(game: &NormalFormGame, config: CeCalcConfig) -> Result<CeCalcPeriod> {
    let n_players = game.n_players();
    let n_profiles = game.n_profiles();

    let mut u: Vec<Vec<f64>> = Vec::new();
    let mut work = 0;
    for i in 0..n_players {
        for rec in 0..game.n_actions(i) {
            for dev in 0..game.n_actions(i) {
                if dev == rec {
                    continue;
                }
                let mut row = vec![0.0; n_profiles];
                for (k, cell) in row.iter_mut().enumerate() {
                    if game.action_of(k, i) == rec {
                        *cell = game.utility(k, i) - game.utility(game.deviate(k, i, dev), i);
                        work += 1;
                    }
                }
                u.push(row);
            }
        }
    }
    let u_rows = u.len();
    let max_actions = (0..n_players).map(|i| game.n_actions(i)).max().unwrap_or(0);
    let opponents = n_profiles / max_actions.max(1);
    debug_assert!(u_rows <= n_players * max_actions * max_actions);
    debug_assert!(work <= n_players * max_actions * max_actions * opponents);

    // Dual walk from p' = 0.
    let mut duals = Vec::new();
    let mut dual = vec![0.0; u_rows];
    let mut fell_back = false;
    let mut l = 0;
    while dual_point_feasible(&u, &dual) {
        duals.push(dual.clone());
        l += 1;
        if l > config.max_iterations {
            fell_back = true;
            break;
        }
        dual.iter_mut().for_each(|v| *v += config.epsilon);
        if dual.iter().any(|v| *v > 1.0) {
            break;
        }
    }

    let mut p = None;
    if !fell_back {
        let mut lp = ce_constraints(game);
        lp.objective = (0..n_profiles).map(|k| game.welfare(k)).collect();
        for d in &duals {
            let row: Vec<f64> = (0..n_profiles)
                .map(|k| u.iter().zip(d).map(|(r, dv)| r[k] * dv).sum())
                .collect();
            lp.add_constraint(row, Relation::Eq, 0.0);
        }
        p = optimize_lexicographic(lp, false)?;
        if p.is_none() {
            fell_back = true;
        }
    }
    let equilibrium = match p {
        Some(p) => CorrelatedEquilibrium { p },
        None => {
            log::warn!("ce_calc fallback: dual walk did not certify a distribution, solving the CE program directly");
            solve_ce(game, CeObjective::Utilitarian)?
        }
    };
    Ok(CeCalcPeriod {
        equilibrium,
        duals,
        u_rows,
        assembly_work: work,
        fell_back,
    })
}

/// Pointwise check of `U^T p' <= -1`.
fn dual_point_feasible(u: &[Vec<f64>], dual: &[f64]) -> bool {
    let n = u.first().map_or(0, Vec::len);
    if u.is_empty() {
        return false;
    }
    (0..n).all(|k| u.iter().zip(dual).map(|(r, d)| r[k] * d).sum::<f64>() <= -1.0)
}

//! Dense two-phase simplex with Bland's anti-cycling rule.
//!
//! Small, exact-verdict solver for the correlated-equilibrium programs: every
//! call reports optimal, infeasible, or unbounded (with an improving ray).
//! Pivoting is fully deterministic, so identical inputs give bit-identical
//! outputs.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest magnitude accepted as a pivot element.
pub const PIVOT_TOL: f64 = 1e-10;
/// Constraint violation tolerated in a reported solution.
pub const FEAS_TOL: f64 = 1e-9;

const MAX_PIVOTS: usize = 100_000;
/// Primal slack allowed when picking a larger pivot in the ratio test.
const HARRIS_TOL: f64 = 1e-11;
/// Consecutive degenerate pivots before switching to the strict rule.
const BLAND_AFTER: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// `opt c.x  s.t.  A x (<=|=|>=) rhs,  x >= lower`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub sense: Sense,
    pub objective: Vec<f64>,
    pub rows: Vec<Vec<f64>>,
    pub relations: Vec<Relation>,
    pub rhs: Vec<f64>,
    pub lower_bounds: Vec<f64>,
}

impl LinearProgram {
    /// Program over `objective.len()` variables, all bounded below by zero.
    pub fn new(sense: Sense, objective: Vec<f64>) -> Self {
        let n = objective.len();
        LinearProgram {
            sense,
            objective,
            rows: Vec::new(),
            relations: Vec::new(),
            rhs: Vec::new(),
            lower_bounds: vec![0.0; n],
        }
    }

    pub fn with_constraint(mut self, row: Vec<f64>, relation: Relation, rhs: f64) -> Self {
        self.add_constraint(row, relation, rhs);
        self
    }

    pub fn add_constraint(&mut self, row: Vec<f64>, relation: Relation, rhs: f64) {
        self.rows.push(row);
        self.relations.push(relation);
        self.rhs.push(rhs);
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn n_constraints(&self) -> usize {
        self.rows.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        let m = self.rows.len();
        if self.relations.len() != m {
            return Err(Error::Dimension {
                what: "relations",
                expected: m,
                actual: self.relations.len(),
            });
        }
        if self.rhs.len() != m {
            return Err(Error::Dimension {
                what: "right-hand sides",
                expected: m,
                actual: self.rhs.len(),
            });
        }
        if self.lower_bounds.len() != n {
            return Err(Error::Dimension {
                what: "lower bounds",
                expected: n,
                actual: self.lower_bounds.len(),
            });
        }
        for row in &self.rows {
            if row.len() != n {
                return Err(Error::Dimension {
                    what: "constraint row",
                    expected: n,
                    actual: row.len(),
                });
            }
        }
        let all = self
            .objective
            .iter()
            .chain(self.rhs.iter())
            .chain(self.lower_bounds.iter())
            .chain(self.rows.iter().flatten());
        if all.clone().any(|v| !v.is_finite()) {
            return Err(Error::arg("linear program has non-finite coefficients"));
        }
        Ok(())
    }

    /// Objective value at `x`.
    pub fn evaluate(&self, x: &[f64]) -> f64 {
        dot(&self.objective, x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum LpVerdict {
    Optimal {
        x: Vec<f64>,
        objective: f64,
        /// Some non-basic column has a zero reduced cost at the optimum, so
        /// the optimal face may contain more than this vertex.
        alternative_optima: bool,
    },
    Infeasible,
    /// `x + t * ray` stays feasible for every `t >= 0` from any feasible `x`
    /// and improves the objective without bound.
    Unbounded {
        ray: Vec<f64>,
    },
}

impl LpVerdict {
    pub fn is_optimal(&self) -> bool {
        matches!(self, LpVerdict::Optimal { .. })
    }

    pub fn status(&self) -> &'static str {
        match self {
            LpVerdict::Optimal { .. } => "optimal",
            LpVerdict::Infeasible => "infeasible",
            LpVerdict::Unbounded { .. } => "unbounded",
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum ColumnKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    /// `m` rows of `n_cols` coefficients followed by the right-hand side.
    cells: Vec<Vec<f64>>,
    basis: Vec<usize>,
    kinds: Vec<ColumnKind>,
}

enum PhaseEnd {
    Optimal,
    Unbounded(usize),
}

impl Tableau {
    fn n_cols(&self) -> usize {
        self.kinds.len()
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let width = self.n_cols() + 1;
        let p = self.cells[row][col];
        for v in self.cells[row].iter_mut() {
            *v /= p;
        }
        self.cells[row][col] = 1.0;
        let pivot_row = self.cells[row].clone();
        for (r, cells) in self.cells.iter_mut().enumerate() {
            if r == row {
                continue;
            }
            let factor = cells[col];
            if factor == 0.0 {
                continue;
            }
            for j in 0..width {
                let v = cells[j] - factor * pivot_row[j];
                cells[j] = if v.abs() < 1e-15 { 0.0 } else { v };
            }
            cells[col] = 0.0;
        }
        self.basis[row] = col;
    }

    fn reduced_costs(&self, costs: &[f64]) -> Vec<f64> {
        let mut d = costs.to_vec();
        for (r, &bv) in self.basis.iter().enumerate() {
            let cb = costs[bv];
            if cb != 0.0 {
                for (j, dj) in d.iter_mut().enumerate() {
                    *dj -= cb * self.cells[r][j];
                }
            }
        }
        d
    }

    /// Maximizes `costs . x` over the current basis, never letting a column
    /// with `allowed[j] == false` enter.
    ///
    /// The entering column is the lowest-index improving one. The leaving
    /// row comes from a two-pass ratio test that prefers large pivots among
    /// near-ties; after a long run of degenerate pivots it switches to the
    /// strict lowest-index rule, which cannot cycle.
    fn optimize(&mut self, costs: &[f64], allowed: &[bool]) -> Result<PhaseEnd> {
        let rhs = self.n_cols();
        let mut degenerate_run = 0;
        for _ in 0..MAX_PIVOTS {
            let d = self.reduced_costs(costs);
            let entering = (0..self.n_cols())
                .find(|&j| allowed[j] && d[j] > PIVOT_TOL && !self.basis.contains(&j));
            let Some(col) = entering else {
                return Ok(PhaseEnd::Optimal);
            };
            let candidates: Vec<usize> = (0..self.cells.len())
                .filter(|&r| self.cells[r][col] > PIVOT_TOL)
                .collect();
            if candidates.is_empty() {
                return Ok(PhaseEnd::Unbounded(col));
            }
            let row = if degenerate_run < BLAND_AFTER {
                let bound = candidates
                    .iter()
                    .map(|&r| (self.cells[r][rhs].max(0.0) + HARRIS_TOL) / self.cells[r][col])
                    .fold(f64::INFINITY, f64::min);
                let mut best = candidates[0];
                let mut best_a = f64::NEG_INFINITY;
                for &r in &candidates {
                    let a = self.cells[r][col];
                    if self.cells[r][rhs].max(0.0) / a <= bound && a > best_a {
                        best = r;
                        best_a = a;
                    }
                }
                best
            } else {
                let ratio = |r: usize| self.cells[r][rhs].max(0.0) / self.cells[r][col];
                let min = candidates
                    .iter()
                    .map(|&r| ratio(r))
                    .fold(f64::INFINITY, f64::min);
                *candidates
                    .iter()
                    .filter(|&&r| ratio(r) <= min)
                    .min_by_key(|&&r| self.basis[r])
                    .expect("candidate set is non-empty")
            };
            let step = self.cells[row][rhs].max(0.0) / self.cells[row][col];
            if step <= HARRIS_TOL {
                degenerate_run += 1;
            } else {
                degenerate_run = 0;
            }
            self.pivot(row, col);
            for r in 0..self.cells.len() {
                if self.cells[r][rhs] < 0.0 && self.cells[r][rhs] > -HARRIS_TOL {
                    self.cells[r][rhs] = 0.0;
                }
            }
        }
        Err(Error::Internal(format!(
            "simplex exceeded {MAX_PIVOTS} pivots"
        )))
    }
}

/// Solves `lp` to an exact verdict.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpVerdict> {
    lp.validate()?;
    let n = lp.n_vars();
    let m = lp.n_constraints();
    let maximize = lp.sense == Sense::Maximize;

    // Shift x = lower + y so that y >= 0, and orient rows to rhs >= 0.
    let mut rows: Vec<(Vec<f64>, Relation, f64)> = Vec::with_capacity(m);
    for i in 0..m {
        let a = lp.rows[i].clone();
        let mut b = lp.rhs[i] - dot(&a, &lp.lower_bounds);
        let mut rel = lp.relations[i];
        let mut a = a;
        // Unit max-norm rows keep the pivot tolerances meaningful.
        let scale = a.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        if scale > 0.0 {
            a.iter_mut().for_each(|v| *v /= scale);
            b /= scale;
        }
        if b < 0.0 {
            a.iter_mut().for_each(|v| *v = -*v);
            b = -b;
            rel = match rel {
                Relation::Le => Relation::Ge,
                Relation::Ge => Relation::Le,
                Relation::Eq => Relation::Eq,
            };
        }
        rows.push((a, rel, b));
    }

    let n_slack = rows.iter().filter(|(_, r, _)| *r != Relation::Eq).count();
    let n_art = rows.iter().filter(|(_, r, _)| *r != Relation::Le).count();
    let n_cols = n + n_slack + n_art;
    let mut kinds = vec![ColumnKind::Structural; n];
    kinds.extend(std::iter::repeat_n(ColumnKind::Slack, n_slack));
    kinds.extend(std::iter::repeat_n(ColumnKind::Artificial, n_art));

    let mut cells = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let (mut next_slack, mut next_art) = (n, n + n_slack);
    for (a, rel, b) in &rows {
        let mut row = vec![0.0; n_cols + 1];
        row[..n].copy_from_slice(a);
        row[n_cols] = *b;
        match rel {
            Relation::Le => {
                row[next_slack] = 1.0;
                basis.push(next_slack);
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -1.0;
                next_slack += 1;
                row[next_art] = 1.0;
                basis.push(next_art);
                next_art += 1;
            }
            Relation::Eq => {
                row[next_art] = 1.0;
                basis.push(next_art);
                next_art += 1;
            }
        }
        cells.push(row);
    }
    let mut tab = Tableau {
        cells,
        basis,
        kinds,
    };

    // Phase 1: drive the artificial variables to zero.
    if n_art > 0 {
        let costs: Vec<f64> = tab
            .kinds
            .iter()
            .map(|k| {
                if *k == ColumnKind::Artificial {
                    -1.0
                } else {
                    0.0
                }
            })
            .collect();
        let allowed = vec![true; n_cols];
        tab.optimize(&costs, &allowed)?;
        let infeasibility: f64 = tab
            .basis
            .iter()
            .enumerate()
            .filter(|(_, &bv)| tab.kinds[bv] == ColumnKind::Artificial)
            .map(|(r, _)| tab.cells[r][n_cols])
            .sum();
        if infeasibility > FEAS_TOL {
            return Ok(LpVerdict::Infeasible);
        }
        // Pivot artificials out of the basis; drop rows that are redundant.
        let mut r = 0;
        while r < tab.cells.len() {
            if tab.kinds[tab.basis[r]] == ColumnKind::Artificial {
                let col = (0..n_cols).find(|&j| {
                    tab.kinds[j] != ColumnKind::Artificial && tab.cells[r][j].abs() > PIVOT_TOL
                });
                match col {
                    Some(j) => tab.pivot(r, j),
                    None => {
                        tab.cells.remove(r);
                        tab.basis.remove(r);
                        continue;
                    }
                }
            }
            r += 1;
        }
    }

    // Phase 2 on the original objective, artificials barred from entering.
    let mut costs = vec![0.0; n_cols];
    for (j, c) in lp.objective.iter().enumerate() {
        costs[j] = if maximize { *c } else { -*c };
    }
    let allowed: Vec<bool> = tab
        .kinds
        .iter()
        .map(|k| *k != ColumnKind::Artificial)
        .collect();
    match tab.optimize(&costs, &allowed)? {
        PhaseEnd::Unbounded(col) => {
            let mut ray = vec![0.0; n];
            if col < n {
                ray[col] = 1.0;
            }
            for (r, &bv) in tab.basis.iter().enumerate() {
                if bv < n {
                    ray[bv] = -tab.cells[r][col];
                }
            }
            Ok(LpVerdict::Unbounded { ray })
        }
        PhaseEnd::Optimal => {
            let mut y = vec![0.0; n];
            for (r, &bv) in tab.basis.iter().enumerate() {
                if bv < n {
                    y[bv] = tab.cells[r][n_cols];
                }
            }
            let x: Vec<f64> = y
                .iter()
                .zip(&lp.lower_bounds)
                .map(|(yi, l)| yi + l)
                .collect();
            let d = tab.reduced_costs(&costs);
            let alternative_optima = (0..n_cols)
                .any(|j| allowed[j] && !tab.basis.contains(&j) && d[j].abs() <= PIVOT_TOL);
            Ok(LpVerdict::Optimal {
                objective: lp.evaluate(&x),
                x,
                alternative_optima,
            })
        }
    }
}

/// Whether `x` satisfies every constraint and bound of `lp` within `tol`.
pub fn check_feasible(lp: &LinearProgram, x: &[f64], tol: f64) -> Result<bool> {
    lp.validate()?;
    if x.len() != lp.n_vars() {
        return Err(Error::Dimension {
            what: "candidate point",
            expected: lp.n_vars(),
            actual: x.len(),
        });
    }
    if x.iter().zip(&lp.lower_bounds).any(|(xi, l)| *xi < l - tol) {
        return Ok(false);
    }
    Ok(lp
        .rows
        .iter()
        .zip(&lp.relations)
        .zip(&lp.rhs)
        .all(|((row, rel), b)| {
            let lhs = dot(row, x);
            match rel {
                Relation::Le => lhs <= b + tol,
                Relation::Ge => lhs >= b - tol,
                Relation::Eq => (lhs - b).abs() <= tol,
            }
        }))
}

/// Whether `ray` is a recession direction of `lp` that improves its
/// objective: homogeneous rows respected, bounds respected, objective
/// strictly better along the ray.
pub fn is_improving_ray(lp: &LinearProgram, ray: &[f64], tol: f64) -> bool {
    if ray.len() != lp.n_vars() || ray.iter().any(|r| *r < -tol) {
        return false;
    }
    let rows_ok = lp.rows.iter().zip(&lp.relations).all(|(row, rel)| {
        let lhs = dot(row, ray);
        match rel {
            Relation::Le => lhs <= tol,
            Relation::Ge => lhs >= -tol,
            Relation::Eq => lhs.abs() <= tol,
        }
    });
    let gain = dot(&lp.objective, ray);
    let improves = match lp.sense {
        Sense::Maximize => gain > tol,
        Sense::Minimize => gain < -tol,
    };
    rows_ok && improves
}

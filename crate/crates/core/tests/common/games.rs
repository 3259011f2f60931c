//! Game-theory oracles that enumerate instead of optimizing.

use posgi_core::equilibrium::NormalFormGame;
use rand::Rng;

pub fn prisoners_dilemma() -> NormalFormGame {
    NormalFormGame::bimatrix(
        &[vec![3.0, 0.0], vec![5.0, 1.0]],
        &[vec![3.0, 5.0], vec![0.0, 1.0]],
    )
    .unwrap()
}

pub fn chicken() -> NormalFormGame {
    NormalFormGame::bimatrix(
        &[vec![6.0, 2.0], vec![7.0, 0.0]],
        &[vec![6.0, 7.0], vec![2.0, 0.0]],
    )
    .unwrap()
}

/// Bimatrix game with integer payoffs drawn from `lo..=hi`.
pub fn random_integer_game<R: Rng>(
    rng: &mut R,
    rows: usize,
    cols: usize,
    lo: i32,
    hi: i32,
) -> NormalFormGame {
    let mut draw = || -> Vec<Vec<f64>> {
        (0..rows)
            .map(|_| {
                (0..cols)
                    .map(|_| rng.random_range(lo..=hi) as f64)
                    .collect()
            })
            .collect()
    };
    let a = draw();
    let b = draw();
    NormalFormGame::bimatrix(&a, &b).unwrap()
}

/// Bimatrix game with continuous payoffs in `[-1, 1)`.
pub fn random_real_game<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> NormalFormGame {
    let mut draw = || -> Vec<Vec<f64>> {
        (0..rows)
            .map(|_| (0..cols).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect()
    };
    let a = draw();
    let b = draw();
    NormalFormGame::bimatrix(&a, &b).unwrap()
}

fn payoff(game: &NormalFormGame, r: usize, c: usize, player: usize) -> f64 {
    game.utility(game.profile_index(&[r, c]), player)
}

/// Nash equilibria of a 2x2 game as joint distributions over its four
/// profiles: every pure equilibrium plus the fully mixed one if any.
pub fn nash_2x2(game: &NormalFormGame) -> Vec<Vec<f64>> {
    let mut out = Vec::new();
    for r in 0..2 {
        for c in 0..2 {
            let row_best = payoff(game, r, c, 0) >= payoff(game, 1 - r, c, 0);
            let col_best = payoff(game, r, c, 1) >= payoff(game, r, 1 - c, 1);
            if row_best && col_best {
                let mut p = vec![0.0; 4];
                p[game.profile_index(&[r, c])] = 1.0;
                out.push(p);
            }
        }
    }
    // Column mixes with q on column 0 so the row player is indifferent, and
    // symmetrically for the row mix x.
    let da = (payoff(game, 0, 0, 0) - payoff(game, 1, 0, 0))
        - (payoff(game, 0, 1, 0) - payoff(game, 1, 1, 0));
    let db = (payoff(game, 0, 0, 1) - payoff(game, 0, 1, 1))
        - (payoff(game, 1, 0, 1) - payoff(game, 1, 1, 1));
    if da != 0.0 && db != 0.0 {
        let q = -(payoff(game, 0, 1, 0) - payoff(game, 1, 1, 0)) / da;
        let x = -(payoff(game, 1, 0, 1) - payoff(game, 1, 1, 1)) / db;
        if (0.0..=1.0).contains(&q) && (0.0..=1.0).contains(&x) {
            let mut p = vec![0.0; 4];
            for r in 0..2 {
                for c in 0..2 {
                    let pr = if r == 0 { x } else { 1.0 - x };
                    let pc = if c == 0 { q } else { 1.0 - q };
                    p[game.profile_index(&[r, c])] = pr * pc;
                }
            }
            out.push(p);
        }
    }
    out
}

/// Profiles no other profile weakly improves for everyone and strictly for
/// someone, found by comparing utility vectors pairwise.
pub fn pareto_by_enumeration(game: &NormalFormGame) -> Vec<usize> {
    let vectors: Vec<Vec<f64>> = (0..game.n_profiles())
        .map(|k| (0..game.n_players()).map(|i| game.utility(k, i)).collect())
        .collect();
    (0..vectors.len())
        .filter(|&k| {
            !vectors.iter().any(|v| {
                v.iter().zip(&vectors[k]).all(|(a, b)| a >= b)
                    && v.iter().zip(&vectors[k]).any(|(a, b)| a > b)
            })
        })
        .collect()
}

/// Incentive rows `sum_k row[k] p[k] >= 0`, built independently of the
/// library from the bimatrix payoffs.
fn incentive_rows(game: &NormalFormGame) -> Vec<Vec<f64>> {
    let n = game.n_profiles();
    let mut rows = Vec::new();
    for player in 0..game.n_players() {
        let m = game.n_actions(player);
        for rec in 0..m {
            for dev in 0..m {
                if rec == dev {
                    continue;
                }
                let mut row = vec![0.0; n];
                for (k, slot) in row.iter_mut().enumerate() {
                    let mut profile = game.profile(k);
                    if profile[player] != rec {
                        continue;
                    }
                    let here = game.utility(k, player);
                    profile[player] = dev;
                    *slot = here - game.utility(game.profile_index(&profile), player);
                }
                rows.push(row);
            }
        }
    }
    rows
}

fn solve_square(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for r in 0..n {
            if r != col {
                let f = a[r][col] / a[col][col];
                if f != 0.0 {
                    for c in col..n {
                        a[r][c] -= f * a[col][c];
                    }
                    b[r] -= f * b[col];
                }
            }
        }
    }
    Some((0..n).map(|i| b[i] / a[i][i]).collect())
}

fn combinations(n: usize, k: usize, f: &mut impl FnMut(&[usize])) {
    fn go(start: usize, n: usize, k: usize, acc: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        if acc.len() == k {
            f(acc);
            return;
        }
        for i in start..n {
            if n - i < k - acc.len() {
                break;
            }
            acc.push(i);
            go(i + 1, n, k, acc, f);
            acc.pop();
        }
    }
    go(0, n, k, &mut Vec::with_capacity(k), f);
}

/// Vertices of the correlated-equilibrium polytope, by trying every choice
/// of tight inequalities.
pub fn ce_vertices(game: &NormalFormGame) -> Vec<Vec<f64>> {
    let n = game.n_profiles();
    let mut ineq = incentive_rows(game);
    for k in 0..n {
        let mut e = vec![0.0; n];
        e[k] = 1.0;
        ineq.push(e);
    }
    let mut out: Vec<Vec<f64>> = Vec::new();
    combinations(ineq.len(), n - 1, &mut |tight| {
        let mut a: Vec<Vec<f64>> = tight.iter().map(|&t| ineq[t].clone()).collect();
        a.push(vec![1.0; n]);
        let mut rhs = vec![0.0; n - 1];
        rhs.push(1.0);
        if let Some(x) = solve_square(a, rhs) {
            let feasible = ineq
                .iter()
                .all(|row| row.iter().zip(&x).map(|(r, v)| r * v).sum::<f64>() >= -1e-9);
            if feasible
                && !out
                    .iter()
                    .any(|v| v.iter().zip(&x).all(|(a, b)| (a - b).abs() < 1e-9))
            {
                out.push(x);
            }
        }
    });
    out
}

/// Largest total utility over the correlated-equilibrium polytope.
pub fn ce_max_welfare(game: &NormalFormGame) -> f64 {
    ce_vertices(game)
        .iter()
        .map(|p| {
            (0..game.n_profiles())
                .map(|k| p[k] * game.welfare(k))
                .sum::<f64>()
        })
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Whether `p` satisfies every incentive constraint within `tol`, checked
/// from the oracle's own rows.
pub fn satisfies_incentives(game: &NormalFormGame, p: &[f64], tol: f64) -> bool {
    incentive_rows(game)
        .iter()
        .all(|row| row.iter().zip(p).map(|(r, v)| r * v).sum::<f64>() >= -tol)
}

//! Hand-built linear programs with exact answers.

use posgi_core::lp::{LinearProgram, Relation, Sense};
use Relation::{Eq, Ge, Le};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Expect {
    /// Optimal value as `num / den`.
    Optimal(i64, i64),
    Infeasible,
    Unbounded,
}

pub struct LpCase {
    pub name: &'static str,
    pub lp: LinearProgram,
    pub expect: Expect,
}

fn max(c: &[f64]) -> LinearProgram {
    LinearProgram::new(Sense::Maximize, c.to_vec())
}

fn min(c: &[f64]) -> LinearProgram {
    LinearProgram::new(Sense::Minimize, c.to_vec())
}

fn case(name: &'static str, lp: LinearProgram, expect: Expect) -> LpCase {
    LpCase { name, lp, expect }
}

fn with_lower(mut lp: LinearProgram, lower: &[f64]) -> LinearProgram {
    lp.lower_bounds = lower.to_vec();
    lp
}

pub fn suite() -> Vec<LpCase> {
    use Expect::*;
    vec![
        // Optimal.
        case(
            "two-var textbook",
            max(&[3.0, 5.0])
                .with_constraint(vec![1.0, 0.0], Le, 4.0)
                .with_constraint(vec![0.0, 2.0], Le, 12.0)
                .with_constraint(vec![3.0, 2.0], Le, 18.0),
            Optimal(36, 1),
        ),
        case(
            "two constraints",
            max(&[2.0, 3.0])
                .with_constraint(vec![1.0, 1.0], Le, 4.0)
                .with_constraint(vec![1.0, 3.0], Le, 6.0),
            Optimal(9, 1),
        ),
        case(
            "covering min",
            min(&[1.0, 1.0])
                .with_constraint(vec![1.0, 2.0], Ge, 4.0)
                .with_constraint(vec![3.0, 1.0], Ge, 6.0),
            Optimal(14, 5),
        ),
        case(
            "diet",
            min(&[0.6, 1.0])
                .with_constraint(vec![10.0, 4.0], Ge, 20.0)
                .with_constraint(vec![5.0, 5.0], Ge, 20.0)
                .with_constraint(vec![2.0, 6.0], Ge, 12.0),
            Optimal(14, 5),
        ),
        case(
            "three resources",
            max(&[5.0, 4.0, 3.0])
                .with_constraint(vec![2.0, 3.0, 1.0], Le, 5.0)
                .with_constraint(vec![4.0, 1.0, 2.0], Le, 11.0)
                .with_constraint(vec![3.0, 4.0, 2.0], Le, 8.0),
            Optimal(13, 1),
        ),
        case(
            "klee-minty 3",
            max(&[4.0, 2.0, 1.0])
                .with_constraint(vec![1.0, 0.0, 0.0], Le, 5.0)
                .with_constraint(vec![4.0, 1.0, 0.0], Le, 25.0)
                .with_constraint(vec![8.0, 4.0, 1.0], Le, 125.0),
            Optimal(125, 1),
        ),
        case(
            "klee-minty 4",
            max(&[8.0, 4.0, 2.0, 1.0])
                .with_constraint(vec![1.0, 0.0, 0.0, 0.0], Le, 5.0)
                .with_constraint(vec![4.0, 1.0, 0.0, 0.0], Le, 25.0)
                .with_constraint(vec![8.0, 4.0, 1.0, 0.0], Le, 125.0)
                .with_constraint(vec![16.0, 8.0, 4.0, 1.0], Le, 625.0),
            Optimal(625, 1),
        ),
        case(
            "beale cycling",
            min(&[-0.75, 20.0, -0.5, 6.0])
                .with_constraint(vec![0.25, -8.0, -1.0, 9.0], Le, 0.0)
                .with_constraint(vec![0.5, -12.0, -0.5, 3.0], Le, 0.0)
                .with_constraint(vec![0.0, 0.0, 1.0, 0.0], Le, 1.0),
            Optimal(-5, 4),
        ),
        case(
            "equality line",
            max(&[1.0, 1.0])
                .with_constraint(vec![1.0, 1.0], Eq, 3.0)
                .with_constraint(vec![1.0, -1.0], Le, 1.0),
            Optimal(3, 1),
        ),
        case(
            "redundant equalities",
            max(&[1.0, 0.0])
                .with_constraint(vec![1.0, 1.0], Eq, 2.0)
                .with_constraint(vec![2.0, 2.0], Eq, 4.0),
            Optimal(2, 1),
        ),
        case(
            "degenerate corner",
            max(&[1.0, 1.0])
                .with_constraint(vec![1.0, 0.0], Le, 1.0)
                .with_constraint(vec![0.0, 1.0], Le, 1.0)
                .with_constraint(vec![1.0, 1.0], Le, 2.0),
            Optimal(2, 1),
        ),
        case(
            "shifted lower bounds",
            with_lower(
                max(&[-1.0, -1.0]).with_constraint(vec![1.0, 1.0], Le, 10.0),
                &[2.0, -1.0],
            ),
            Optimal(-1, 1),
        ),
        case(
            "negative rhs",
            min(&[1.0]).with_constraint(vec![-1.0], Le, -2.0),
            Optimal(2, 1),
        ),
        case(
            "transportation",
            min(&[8.0, 6.0, 10.0, 9.0, 12.0, 13.0])
                .with_constraint(vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0], Le, 20.0)
                .with_constraint(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0], Le, 30.0)
                .with_constraint(vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0], Ge, 10.0)
                .with_constraint(vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0], Ge, 25.0)
                .with_constraint(vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0], Ge, 15.0),
            Optimal(465, 1),
        ),
        case(
            "assignment",
            min(&[4.0, 1.0, 3.0, 2.0, 0.0, 5.0, 3.0, 2.0, 2.0])
                .with_constraint(vec![1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0], Eq, 1.0)
                .with_constraint(vec![0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0], Eq, 1.0)
                .with_constraint(vec![0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 1.0, 1.0, 1.0], Eq, 1.0)
                .with_constraint(vec![1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0], Eq, 1.0)
                .with_constraint(vec![0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0], Eq, 1.0)
                .with_constraint(vec![0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0], Eq, 1.0),
            Optimal(5, 1),
        ),
        case(
            "tied optimum",
            max(&[1.0, 1.0]).with_constraint(vec![1.0, 1.0], Le, 1.0),
            Optimal(1, 1),
        ),
        case(
            "zero objective",
            max(&[0.0, 0.0])
                .with_constraint(vec![1.0, 1.0], Eq, 1.0)
                .with_constraint(vec![1.0, -1.0], Ge, 0.0),
            Optimal(0, 1),
        ),
        case(
            "simplex max",
            max(&[0.3, 0.7, 0.5]).with_constraint(vec![1.0, 1.0, 1.0], Eq, 1.0),
            Optimal(7, 10),
        ),
        case(
            "simplex min",
            min(&[0.3, 0.7, 0.5]).with_constraint(vec![1.0, 1.0, 1.0], Eq, 1.0),
            Optimal(3, 10),
        ),
        case(
            "box",
            max(&[2.0, -1.0, 3.0])
                .with_constraint(vec![1.0, 0.0, 0.0], Le, 4.0)
                .with_constraint(vec![0.0, 1.0, 0.0], Le, 7.0)
                .with_constraint(vec![0.0, 0.0, 1.0], Le, 2.0),
            Optimal(14, 1),
        ),
        case(
            "fractional vertex",
            max(&[1.0, 1.0])
                .with_constraint(vec![3.0, 1.0], Le, 7.0)
                .with_constraint(vec![1.0, 3.0], Le, 7.0),
            Optimal(7, 2),
        ),
        case(
            "mixed relations",
            min(&[2.0, 3.0, 1.0])
                .with_constraint(vec![1.0, 1.0, 1.0], Ge, 4.0)
                .with_constraint(vec![1.0, -1.0, 0.0], Eq, 1.0)
                .with_constraint(vec![0.0, 0.0, 1.0], Le, 2.0),
            Optimal(13, 2),
        ),
        case(
            "all equality square",
            max(&[1.0, 2.0, 3.0])
                .with_constraint(vec![1.0, 1.0, 0.0], Eq, 3.0)
                .with_constraint(vec![0.0, 1.0, 1.0], Eq, 5.0)
                .with_constraint(vec![1.0, 0.0, 1.0], Eq, 4.0),
            Optimal(14, 1),
        ),
        case(
            "tiny coefficients",
            max(&[1e-3, 2e-3])
                .with_constraint(vec![1.0, 1.0], Le, 1.0)
                .with_constraint(vec![1.0, 4.0], Le, 2.0),
            Optimal(4, 3000),
        ),
        case(
            "scaled rows",
            max(&[1.0, 1.0])
                .with_constraint(vec![1000.0, 2000.0], Le, 4000.0)
                .with_constraint(vec![0.003, 0.001], Le, 0.006),
            Optimal(14, 5),
        ),
        case(
            "ge with zero rhs",
            min(&[1.0, 1.0])
                .with_constraint(vec![1.0, -2.0], Ge, 0.0)
                .with_constraint(vec![1.0, 1.0], Ge, 3.0),
            Optimal(3, 1),
        ),
        case(
            "production plan",
            max(&[20.0, 30.0, 25.0])
                .with_constraint(vec![2.0, 1.0, 1.0], Le, 100.0)
                .with_constraint(vec![1.0, 2.0, 1.0], Le, 80.0)
                .with_constraint(vec![1.0, 1.0, 2.0], Le, 90.0),
            Optimal(3175, 2),
        ),
        case(
            "lower bound active",
            with_lower(
                min(&[3.0, 1.0]).with_constraint(vec![1.0, 1.0], Ge, 2.0),
                &[1.0, 0.0],
            ),
            Optimal(4, 1),
        ),
        case(
            "nonbinding constraints",
            max(&[-1.0, -2.0])
                .with_constraint(vec![1.0, 1.0], Le, 10.0)
                .with_constraint(vec![1.0, -1.0], Le, 10.0),
            Optimal(0, 1),
        ),
        case(
            "negative objective min",
            min(&[-2.0, -1.0])
                .with_constraint(vec![1.0, 1.0], Le, 6.0)
                .with_constraint(vec![1.0, 0.0], Le, 4.0),
            Optimal(-10, 1),
        ),
        // Infeasible.
        case(
            "negative cap",
            max(&[1.0]).with_constraint(vec![1.0], Le, -1.0),
            Infeasible,
        ),
        case(
            "band gap",
            max(&[1.0, 1.0])
                .with_constraint(vec![1.0, 1.0], Ge, 5.0)
                .with_constraint(vec![1.0, 1.0], Le, 3.0),
            Infeasible,
        ),
        case(
            "conflicting equalities",
            max(&[1.0])
                .with_constraint(vec![1.0], Eq, 1.0)
                .with_constraint(vec![1.0], Eq, 2.0),
            Infeasible,
        ),
        case(
            "negative sum",
            min(&[1.0, 1.0]).with_constraint(vec![1.0, 1.0], Eq, -1.0),
            Infeasible,
        ),
        case(
            "lower bound above cap",
            with_lower(max(&[1.0]).with_constraint(vec![1.0], Le, 2.0), &[3.0]),
            Infeasible,
        ),
        case(
            "simplex with floor",
            max(&[1.0, 1.0, 1.0])
                .with_constraint(vec![1.0, 1.0, 1.0], Eq, 1.0)
                .with_constraint(vec![1.0, 1.0, 1.0], Ge, 2.0),
            Infeasible,
        ),
        case(
            "opposed differences",
            max(&[1.0, 1.0])
                .with_constraint(vec![1.0, -1.0], Ge, 1.0)
                .with_constraint(vec![-1.0, 1.0], Ge, 1.0),
            Infeasible,
        ),
        case(
            "solution outside orthant",
            max(&[1.0, 1.0])
                .with_constraint(vec![1.0, 1.0], Eq, 1.0)
                .with_constraint(vec![1.0, -1.0], Eq, 3.0),
            Infeasible,
        ),
        case(
            "capacity too small",
            max(&[1.0, 1.0])
                .with_constraint(vec![2.0, 3.0], Le, 6.0)
                .with_constraint(vec![1.0, 0.0], Ge, 4.0),
            Infeasible,
        ),
        case(
            "each at least one on simplex",
            max(&[1.0, 2.0])
                .with_constraint(vec![1.0, 1.0], Eq, 1.0)
                .with_constraint(vec![1.0, 0.0], Ge, 1.0)
                .with_constraint(vec![0.0, 1.0], Ge, 1.0),
            Infeasible,
        ),
        // Unbounded.
        case(
            "open wedge",
            max(&[1.0, 0.0]).with_constraint(vec![1.0, -1.0], Le, 1.0),
            Unbounded,
        ),
        case("no constraints", max(&[1.0, 1.0]), Unbounded),
        case(
            "free direction",
            min(&[-1.0, 0.0]).with_constraint(vec![0.0, 1.0], Le, 5.0),
            Unbounded,
        ),
        case(
            "only a floor",
            max(&[1.0]).with_constraint(vec![1.0], Ge, 1.0),
            Unbounded,
        ),
        case(
            "diagonal escape",
            max(&[1.0, -1.0]).with_constraint(vec![1.0, -2.0], Le, 3.0),
            Unbounded,
        ),
        case(
            "min along band",
            min(&[1.0, -2.0]).with_constraint(vec![-1.0, 1.0], Le, 4.0),
            Unbounded,
        ),
        case(
            "equality ray",
            max(&[2.0, 1.0]).with_constraint(vec![1.0, -1.0], Eq, 1.0),
            Unbounded,
        ),
        case(
            "uncoupled variable",
            max(&[0.0, 0.0, 1.0]).with_constraint(vec![1.0, 1.0, 0.0], Eq, 1.0),
            Unbounded,
        ),
        case(
            "both differences capped",
            min(&[-1.0, -1.0])
                .with_constraint(vec![1.0, -1.0], Le, 2.0)
                .with_constraint(vec![-1.0, 1.0], Le, 2.0),
            Unbounded,
        ),
        case(
            "ge cone",
            max(&[1.0, 1.0])
                .with_constraint(vec![1.0, -1.0], Ge, 0.0)
                .with_constraint(vec![1.0, 1.0], Ge, 2.0),
            Unbounded,
        ),
    ]
}

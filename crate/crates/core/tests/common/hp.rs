//! High-precision LMSR reference values straight from the definitions.

use astro_float::{BigFloat, Consts, RoundingMode};

/// Enough bits that a cost difference as small as the least normal f64
/// survives cancellation against costs of order `1e4 * 500`.
pub const PREC: usize = 1344;
const RM: RoundingMode = RoundingMode::ToEven;

pub struct Oracle {
    cc: Consts,
}

impl Oracle {
    pub fn new() -> Self {
        Oracle {
            cc: Consts::new().expect("constants cache"),
        }
    }

    fn lse_scaled(&mut self, q: &[f64], b: f64) -> BigFloat {
        let bb = BigFloat::from_f64(b, PREC);
        let mut total = BigFloat::from_f64(0.0, PREC);
        for &x in q {
            let scaled = BigFloat::from_f64(x, PREC).div(&bb, PREC, RM);
            total = total.add(&scaled.exp(PREC, RM, &mut self.cc), PREC, RM);
        }
        total.ln(PREC, RM, &mut self.cc)
    }

    /// `b ln sum_j exp(q_j / b)`.
    pub fn cost(&mut self, q: &[f64], b: f64) -> BigFloat {
        self.lse_scaled(q, b)
            .mul(&BigFloat::from_f64(b, PREC), PREC, RM)
    }

    /// `exp(q_k / b) / sum_j exp(q_j / b)`.
    pub fn price(&mut self, q: &[f64], k: usize, b: f64) -> BigFloat {
        let bb = BigFloat::from_f64(b, PREC);
        let own = BigFloat::from_f64(q[k], PREC).div(&bb, PREC, RM);
        own.sub(&self.lse_scaled(q, b), PREC, RM)
            .exp(PREC, RM, &mut self.cc)
    }

    /// `C(q + delta e_k) - C(q)`.
    pub fn buy(&mut self, q: &[f64], k: usize, delta: f64, b: f64) -> BigFloat {
        let after = self.shifted_cost(q, k, delta, 1, b);
        after.sub(&self.cost(q, b), PREC, RM)
    }

    /// `C(q) - C(q - delta e_k)`.
    pub fn sell(&mut self, q: &[f64], k: usize, delta: f64, b: f64) -> BigFloat {
        let before = self.shifted_cost(q, k, delta, -1, b);
        self.cost(q, b).sub(&before, PREC, RM)
    }

    fn shifted_cost(&mut self, q: &[f64], k: usize, delta: f64, sign: i32, b: f64) -> BigFloat {
        // q_k +- delta is formed exactly in high precision.
        let bb = BigFloat::from_f64(b, PREC);
        let mut total = BigFloat::from_f64(0.0, PREC);
        for (j, &x) in q.iter().enumerate() {
            let mut v = BigFloat::from_f64(x, PREC);
            if j == k {
                let d = BigFloat::from_f64(delta, PREC);
                v = if sign > 0 {
                    v.add(&d, PREC, RM)
                } else {
                    v.sub(&d, PREC, RM)
                };
            }
            let scaled = v.div(&bb, PREC, RM);
            total = total.add(&scaled.exp(PREC, RM, &mut self.cc), PREC, RM);
        }
        total.ln(PREC, RM, &mut self.cc).mul(&bb, PREC, RM)
    }
}

/// `|ours - exact| <= rel * |exact| + f64::MIN_POSITIVE`.
///
/// The absolute floor covers reference values below the smallest normal
/// f64, which no f64 result can match relatively.
pub fn close(ours: f64, exact: &BigFloat, rel: f64) -> bool {
    if !ours.is_finite() {
        return false;
    }
    let diff = BigFloat::from_f64(ours, PREC).sub(exact, PREC, RM).abs();
    let bound = exact
        .abs()
        .mul(&BigFloat::from_f64(rel, PREC), PREC, RM)
        .add(&BigFloat::from_f64(f64::MIN_POSITIVE, PREC), PREC, RM);
    matches!(diff.cmp(&bound), Some(c) if c <= 0)
}

/// Decimal rendering for failure messages.
pub fn show(x: &BigFloat) -> String {
    let mut cc = Consts::new().expect("constants cache");
    x.format(astro_float::Radix::Dec, RM, &mut cc)
        .map(|s| s.chars().take(40).collect())
        .unwrap_or_else(|_| "?".into())
}

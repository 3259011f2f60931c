//! Logarithmic market scoring rule (LMSR) market maker.
//!
//! The market maker quotes prices from the outstanding quantity vector `q`:
//!
//! ```text
//! C(q)   = b * ln(sum_j exp(q_j / b))
//! p_k(q) = exp(q_k / b) / sum_j exp(q_j / b)
//! ```
//!
//! A trade of `delta` units of security `k` costs `C(q + delta e_k) - C(q)`;
//! selling returns `C(q) - C(q - delta e_k)`. Both are evaluated in closed
//! form through `ln_1p`/`exp_m1` on log-prices, so the result keeps its
//! relative accuracy even when the cost function itself is many orders of
//! magnitude larger than the payment.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Outstanding purchased units per security.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct QuantityVector(Vec<f64>);

impl QuantityVector {
    pub fn new(quantities: Vec<f64>) -> Result<Self> {
        if quantities.len() < 2 {
            return Err(Error::arg(format!(
                "a market needs at least two securities, got {}",
                quantities.len()
            )));
        }
        if let Some(bad) = quantities.iter().find(|q| !q.is_finite()) {
            return Err(Error::arg(format!("quantity {bad} is not finite")));
        }
        Ok(QuantityVector(quantities))
    }

    /// All-zero quantities over `n` securities.
    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, security: usize) -> Option<f64> {
        self.0.get(security).copied()
    }

    /// Copy with `delta` added to one coordinate.
    pub fn shifted(&self, security: usize, delta: f64) -> Result<Self> {
        check_security(self, security)?;
        let mut q = self.0.clone();
        q[security] += delta;
        Self::new(q)
    }
}

impl TryFrom<Vec<f64>> for QuantityVector {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<QuantityVector> for Vec<f64> {
    fn from(q: QuantityVector) -> Self {
        q.0
    }
}

/// The liquidity parameter `b > 0`. Worst-case market-maker loss is
/// `b * ln(n)` for `n` securities.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct LiquidityParam(f64);

impl LiquidityParam {
    pub fn new(b: f64) -> Result<Self> {
        if b.is_finite() && b > 0.0 {
            Ok(LiquidityParam(b))
        } else {
            Err(Error::arg(format!(
                "liquidity b must be positive and finite, got {b}"
            )))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Worst-case loss of the market maker over `n_securities` outcomes.
    pub fn loss_bound(self, n_securities: usize) -> f64 {
        self.0 * (n_securities as f64).ln()
    }
}

impl TryFrom<f64> for LiquidityParam {
    type Error = Error;

    fn try_from(b: f64) -> Result<Self> {
        Self::new(b)
    }
}

impl From<LiquidityParam> for f64 {
    fn from(b: LiquidityParam) -> f64 {
        b.0
    }
}

/// Instantaneous prices; each entry lies in `(0, 1)` and the entries sum to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceVector(Vec<f64>);

impl PriceVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, security: usize) -> Option<f64> {
        self.0.get(security).copied()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

// Largest f64 strictly below 1.
const PRICE_CEIL: f64 = 1.0 - f64::EPSILON / 2.0;

fn check_security(q: &QuantityVector, security: usize) -> Result<()> {
    if security < q.len() {
        Ok(())
    } else {
        Err(Error::arg(format!(
            "security index {security} out of range for {} securities",
            q.len()
        )))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta.is_finite() && delta > 0.0 {
        Ok(())
    } else {
        Err(Error::arg(format!(
            "trade size must be positive and finite, got {delta}"
        )))
    }
}

fn finite(x: f64, what: &str) -> Result<f64> {
    if x.is_finite() {
        Ok(x)
    } else {
        Err(Error::NumericDomain(format!("{what} evaluated to {x}")))
    }
}

/// `ln(sum_j exp(x_j))` with the max subtracted before exponentiating.
fn log_sum_exp(xs: impl Iterator<Item = f64> + Clone) -> f64 {
    let m = xs.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `ln(1 + exp(t))` without overflow or loss of precision for small results.
fn softplus(t: f64) -> f64 {
    if t > 35.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

/// `ln p_k(q)` and `ln(1 - p_k(q))`, both taken as differences of
/// log-sum-exps over scaled quantities.
fn log_price_pair(q: &QuantityVector, security: usize, b: LiquidityParam) -> (f64, f64) {
    let scaled = q.as_slice().iter().map(move |x| x / b.0);
    let total = log_sum_exp(scaled.clone());
    let others = log_sum_exp(
        scaled
            .enumerate()
            .filter(move |(j, _)| *j != security)
            .map(|(_, x)| x),
    );
    (q.as_slice()[security] / b.0 - total, others - total)
}

/// Market-maker cost function `C(q)`.
pub fn cost(q: &QuantityVector, b: LiquidityParam) -> Result<f64> {
    let lse = log_sum_exp(q.as_slice().iter().map(|x| x / b.0));
    finite(b.0 * lse, "cost")
}

/// Instantaneous prices, the softmax of `q / b`.
pub fn price(q: &QuantityVector, b: LiquidityParam) -> Result<PriceVector> {
    let scaled: Vec<f64> = q.as_slice().iter().map(|x| x / b.0).collect();
    let m = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    finite(m, "scaled quantity")?;
    let weights: Vec<f64> = scaled.iter().map(|x| (x - m).exp()).collect();
    let total: f64 = weights.iter().sum();
    // Entries below the smallest normal f64, or within half an ulp of one,
    // are held just inside the open unit interval.
    let prices = weights
        .iter()
        .map(|w| (w / total).clamp(f64::MIN_POSITIVE, PRICE_CEIL))
        .collect();
    Ok(PriceVector(prices))
}

/// Price of a single security.
pub fn price_of(q: &QuantityVector, security: usize, b: LiquidityParam) -> Result<f64> {
    check_security(q, security)?;
    let (ln_p, _) = log_price_pair(q, security, b);
    Ok(finite(ln_p, "log price")?
        .exp()
        .clamp(f64::MIN_POSITIVE, PRICE_CEIL))
}

/// Payment for buying `delta` units of `security`: `C(q + delta e_k) - C(q)`.
pub fn buy_payment(
    q: &QuantityVector,
    security: usize,
    delta: f64,
    b: LiquidityParam,
) -> Result<f64> {
    check_security(q, security)?;
    check_delta(delta)?;
    let (ln_p, _) = log_price_pair(q, security, b);
    let x = delta / b.0;
    // C(q + d) - C(q) = b ln(1 + p (e^x - 1))
    let ln_expm1 = if x > 1.0 {
        x + (-(-x).exp()).ln_1p()
    } else {
        x.exp_m1().ln()
    };
    finite(b.0 * softplus(ln_p + ln_expm1), "buy payment")
}

/// Payout for selling `delta` units of `security`: `C(q) - C(q - delta e_k)`.
pub fn sell_payout(
    q: &QuantityVector,
    security: usize,
    delta: f64,
    b: LiquidityParam,
) -> Result<f64> {
    check_security(q, security)?;
    check_delta(delta)?;
    let (ln_p, ln_rest) = log_price_pair(q, security, b);
    let x = delta / b.0;
    // C(q) - C(q - d) = -b ln(1 - p (1 - e^-x))
    let v = (ln_p + (-(-x).exp_m1()).ln()).exp();
    let ln_remaining = if v < 0.5 {
        (-v).ln_1p()
    } else {
        // 1 - v = (1 - p) + p e^-x, summed in log space
        let (a, c) = (ln_rest, ln_p - x);
        let m = a.max(c);
        m + ((a - m).exp() + (c - m).exp()).ln()
    };
    finite(-b.0 * ln_remaining, "sell payout")
}

/// Settles every holder at $1 per share of the realized security.
///
/// Negative holdings (short positions) pay the corresponding amount.
pub fn settle(holdings: &[Vec<f64>], outcome: usize) -> Result<Vec<f64>> {
    holdings
        .iter()
        .enumerate()
        .map(|(agent, h)| {
            h.get(outcome).copied().ok_or_else(|| {
                Error::arg(format!(
                    "outcome index {outcome} out of range for agent {agent} holding {} securities",
                    h.len()
                ))
            })
        })
        .collect()
}

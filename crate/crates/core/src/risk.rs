//! Constant relative risk aversion (CRRA) utility.
//!
//! `u(R) = R^(1-theta) / (1-theta)` for `theta != 1`, `ln R` for `theta = 1`.
//! A negative reward raised to a fractional power is complex; by default the
//! real part of the principal value is used, `|R|^(1-theta) cos(pi (1-theta))
//! / (1-theta)`, which is the magnitude-and-angle reading. The signed-power
//! alternative `sign(R) |R|^(1-theta) / (1-theta)` is selectable.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Risk-preference factor `theta` in `(-1, 1)`; 0 is risk neutral, positive
/// values are risk averse.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RiskPreference(f64);

impl RiskPreference {
    pub const NEUTRAL: RiskPreference = RiskPreference(0.0);

    pub fn new(theta: f64) -> Result<Self> {
        if theta > -1.0 && theta < 1.0 {
            Ok(RiskPreference(theta))
        } else {
            Err(Error::arg(format!(
                "risk preference must lie in (-1, 1), got {theta}"
            )))
        }
    }

    pub fn theta(self) -> f64 {
        self.0
    }

    pub fn is_neutral(self) -> bool {
        self.0 == 0.0
    }
}

impl TryFrom<f64> for RiskPreference {
    type Error = Error;

    fn try_from(v: f64) -> Result<Self> {
        Self::new(v)
    }
}

impl From<RiskPreference> for f64 {
    fn from(r: RiskPreference) -> f64 {
        r.0
    }
}

/// How negative rewards are mapped to a real utility.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativeRewardMode {
    /// Real part of the principal complex power.
    #[default]
    PrincipalValue,
    /// `sign(R) * |R|^(1-theta) / (1-theta)`.
    SignedPower,
}

/// CRRA utility of `reward` under `pref`, using the principal-value mapping.
pub fn crra(reward: f64, pref: RiskPreference) -> f64 {
    crra_with(reward, pref.0, NegativeRewardMode::PrincipalValue)
}

/// CRRA utility for any `theta`, including the logarithmic case `theta = 1`.
pub fn crra_with(reward: f64, theta: f64, mode: NegativeRewardMode) -> f64 {
    if theta == 0.0 {
        return reward;
    }
    if reward == 0.0 {
        return 0.0;
    }
    let magnitude = reward.abs();
    if theta == 1.0 {
        // ln|R| on both sides of zero.
        return magnitude.ln();
    }
    let power = 1.0 - theta;
    let base = magnitude.powf(power) / power;
    if reward > 0.0 {
        return base;
    }
    match mode {
        NegativeRewardMode::PrincipalValue => base * (PI * power).cos(),
        NegativeRewardMode::SignedPower => -base,
    }
}

/// Numerical concavity test: every second difference of the utility over the
/// sorted positive `grid` is at most `1e-9`.
pub fn concavity_check(theta: f64, grid: &[f64]) -> Result<bool> {
    if grid.len() < 3 {
        return Err(Error::arg(format!(
            "concavity check needs at least 3 grid points, got {}",
            grid.len()
        )));
    }
    if grid.iter().any(|r| !(r.is_finite() && *r > 0.0)) {
        return Err(Error::arg("concavity grid must be finite and positive"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::arg("concavity grid must be strictly increasing"));
    }
    Ok(second_differences(theta, grid).iter().all(|d| *d <= 1e-9))
}

/// Divided second differences of the utility over a (possibly uneven) grid.
pub fn second_differences(theta: f64, grid: &[f64]) -> Vec<f64> {
    let u: Vec<f64> = grid
        .iter()
        .map(|r| crra_with(*r, theta, NegativeRewardMode::PrincipalValue))
        .collect();
    grid.windows(3)
        .zip(u.windows(3))
        .map(|(x, y)| {
            let left = (y[1] - y[0]) / (x[1] - x[0]);
            let right = (y[2] - y[1]) / (x[2] - x[1]);
            (right - left) / ((x[2] - x[0]) / 2.0)
        })
        .collect()
}

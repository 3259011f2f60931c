//! Exact Bayesian filtering of an agent's belief over market states.
//!
//! Given the previous belief `b`, the agent's own last action `a` and the
//! new observation `o`, the posterior is
//!
//! ```text
//! b'(s') ∝ sum_iota P(iota) Omega(s', iota, o) * sum_s T(s, a, s') b(s)
//! ```
//!
//! normalized by `P(o)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lmsr::{self, LiquidityParam};
use crate::posgi::{
    uniform_opponent_sum, ObservationModel, StateSpace, TradeAction, TransitionModel,
    TRADED_SECURITY,
};

const NORM_TOL: f64 = 1e-12;

/// Probability vector over an enumerated state set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeliefState(Vec<f64>);

impl BeliefState {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::arg("belief over an empty state set"));
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::arg("belief entries must be finite and non-negative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORM_TOL {
            return Err(Error::arg(format!("belief sums to {total}, not 1")));
        }
        Ok(BeliefState(probs))
    }

    /// Point mass on `state`.
    pub fn point(n_states: usize, state: usize) -> Result<Self> {
        if state >= n_states {
            return Err(Error::arg(format!(
                "state {state} out of range for {n_states} states"
            )));
        }
        let mut probs = vec![0.0; n_states];
        probs[state] = 1.0;
        Ok(BeliefState(probs))
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> f64 {
        -self
            .0
            .iter()
            .filter(|p| **p > 0.0)
            .map(|p| p * p.ln())
            .sum::<f64>()
    }

    fn normalized(mut v: Vec<f64>) -> Option<Self> {
        let total: f64 = v.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return None;
        }
        v.iter_mut().for_each(|p| *p /= total);
        Some(BeliefState(v))
    }
}

/// Posterior plus whether the observation was impossible under the model.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefUpdate {
    pub belief: BeliefState,
    /// The observation had zero likelihood everywhere; `belief` is the
    /// prediction step alone.
    pub inconsistent: bool,
}

/// Uniform belief over `state_count` states.
pub fn uniform_prior(state_count: usize) -> Result<BeliefState> {
    if state_count == 0 {
        return Err(Error::arg("state_count must be at least 1"));
    }
    Ok(BeliefState(vec![1.0 / state_count as f64; state_count]))
}

/// Prediction step `sum_s T(s, a, s') b(s)`.
pub fn predict(
    prev: &BeliefState,
    own_action: TradeAction,
    t: &TransitionModel,
) -> Result<Vec<f64>> {
    predict_index(prev, own_action.index(), t)
}

fn predict_index(prev: &BeliefState, action: usize, t: &TransitionModel) -> Result<Vec<f64>> {
    if prev.len() != t.n_states() {
        return Err(Error::Dimension {
            what: "belief vs transition states",
            expected: t.n_states(),
            actual: prev.len(),
        });
    }
    if action >= t.n_actions() {
        return Err(Error::arg(format!("action {action} out of range")));
    }
    let mut predicted = vec![0.0; prev.len()];
    for (s, &mass) in prev.probs().iter().enumerate() {
        if mass == 0.0 {
            continue;
        }
        for &(next, p) in t.successors(action, s) {
            predicted[next] += p * mass;
        }
    }
    Ok(predicted)
}

/// One Bayes-filter step over the agent's own action and observation.
pub fn update_belief<O: ObservationModel>(
    prev: &BeliefState,
    own_action: TradeAction,
    obs: &O::Obs,
    t: &TransitionModel,
    omega: &O,
    signal_prior: &[f64],
) -> Result<BeliefUpdate> {
    update_belief_indexed(prev, own_action.index(), obs, t, omega, signal_prior)
}

/// [`update_belief`] with the action given by its index into the transition
/// table, for models whose action set is not [`TradeAction`].
pub fn update_belief_indexed<O: ObservationModel>(
    prev: &BeliefState,
    action: usize,
    obs: &O::Obs,
    t: &TransitionModel,
    omega: &O,
    signal_prior: &[f64],
) -> Result<BeliefUpdate> {
    if omega.n_states() != t.n_states() {
        return Err(Error::Dimension {
            what: "observation vs transition states",
            expected: t.n_states(),
            actual: omega.n_states(),
        });
    }
    if signal_prior.len() != omega.n_signals() {
        return Err(Error::Dimension {
            what: "signal prior",
            expected: omega.n_signals(),
            actual: signal_prior.len(),
        });
    }
    let predicted = predict_index(prev, action, t)?;
    condition_weights(predicted, obs, omega, signal_prior)
}

/// Bayes step without a transition: conditions `prior` on `obs`.
pub fn condition_on<O: ObservationModel>(
    prior: &BeliefState,
    obs: &O::Obs,
    omega: &O,
    signal_prior: &[f64],
) -> Result<BeliefUpdate> {
    if omega.n_states() != prior.len() {
        return Err(Error::Dimension {
            what: "observation vs belief states",
            expected: prior.len(),
            actual: omega.n_states(),
        });
    }
    if signal_prior.len() != omega.n_signals() {
        return Err(Error::Dimension {
            what: "signal prior",
            expected: omega.n_signals(),
            actual: signal_prior.len(),
        });
    }
    condition_weights(prior.probs().to_vec(), obs, omega, signal_prior)
}

fn condition_weights<O: ObservationModel>(
    predicted: Vec<f64>,
    obs: &O::Obs,
    omega: &O,
    signal_prior: &[f64],
) -> Result<BeliefUpdate> {
    let posterior: Vec<f64> = predicted
        .iter()
        .enumerate()
        .map(|(next, &mass)| {
            if mass == 0.0 {
                return 0.0;
            }
            let likelihood: f64 = signal_prior
                .iter()
                .enumerate()
                .map(|(iota, p_iota)| p_iota * omega.likelihood(next, iota, obs))
                .sum();
            likelihood * mass
        })
        .collect();
    match BeliefState::normalized(posterior) {
        Some(belief) => Ok(BeliefUpdate {
            belief,
            inconsistent: false,
        }),
        None => {
            log::warn!(
                "belief inconsistency: observation has zero likelihood, keeping prediction only"
            );
            let belief = BeliefState::normalized(predicted).ok_or_else(|| {
                Error::Internal("prediction step lost all probability mass".into())
            })?;
            Ok(BeliefUpdate {
                belief,
                inconsistent: true,
            })
        }
    }
}

/// Point estimate: the most probable state, first on ties.
pub fn most_likely_state(belief: &BeliefState) -> usize {
    let mut best = 0;
    for (i, p) in belief.probs().iter().enumerate() {
        if *p > belief.probs()[best] {
            best = i;
        }
    }
    best
}

/// Outcome probability implied by a state belief: the expected posted price
/// of the traded security.
pub fn outcome_belief(belief: &BeliefState, b: LiquidityParam, space: &StateSpace) -> Result<f64> {
    if belief.len() != space.len() {
        return Err(Error::Dimension {
            what: "belief vs state space",
            expected: space.len(),
            actual: belief.len(),
        });
    }
    let mut p = 0.0;
    for (i, &mass) in belief.probs().iter().enumerate() {
        if mass > 0.0 {
            p += mass * lmsr::price_of(&space.quantities(i)?, TRADED_SECURITY, b)?;
        }
    }
    Ok(p)
}

/// How an agent predicts the other agents' combined move when filtering.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpponentModel {
    /// Each opponent buys, sells or holds with probability 1/3.
    #[default]
    Uniform,
    /// Smoothed empirical frequencies of the inferred combined move.
    Frequency,
}

/// Counts of the opponents' summed direction. Starts from the uniform-play
/// distribution with one pseudo-observation per possible value.
#[derive(Debug, Clone, PartialEq)]
pub struct OpponentTracker {
    reach: i64,
    counts: Vec<f64>,
}

impl OpponentTracker {
    pub fn new(n_agents: usize) -> Result<Self> {
        if n_agents < 2 {
            return Err(Error::arg("opponent tracking needs at least two agents"));
        }
        let prior = uniform_opponent_sum(n_agents - 1);
        let weight = prior.len() as f64;
        Ok(OpponentTracker {
            reach: (n_agents - 1) as i64,
            counts: prior.iter().map(|(_, p)| p * weight).collect(),
        })
    }

    /// Record one inferred combined move. Values no set of opponents could
    /// produce are ignored and reported as `false`.
    pub fn record(&mut self, sum: i64) -> bool {
        if sum.abs() > self.reach {
            return false;
        }
        self.counts[(sum + self.reach) as usize] += 1.0;
        true
    }

    /// Current predictive distribution, sorted by direction.
    pub fn distribution(&self) -> Vec<(i64, f64)> {
        let total: f64 = self.counts.iter().sum();
        self.counts
            .iter()
            .enumerate()
            .map(|(k, c)| (k as i64 - self.reach, c / total))
            .collect()
    }
}

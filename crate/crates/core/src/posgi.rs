//! The stochastic-game layer: market states, joint actions, the transition
//! and observation models, and the information-signal process.
//!
//! The market trades one security pair. Security 0 pays $1 when the event
//! happens and is the one agents trade; the complementary security's
//! quantity stays at its initial value, so a state is fully described by the
//! traded quantity's offset from its initial value.

use std::fmt;

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lmsr::{self, LiquidityParam, QuantityVector};

/// Index of the security that pays out when the event happens.
pub const TRADED_SECURITY: usize = 0;

/// Probability tolerance for rows of transition and observation tables.
const ROW_TOL: f64 = 1e-12;

/// Realized event outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Outcome {
    No,
    Yes,
}

impl Outcome {
    pub fn value(self) -> f64 {
        match self {
            Outcome::No => 0.0,
            Outcome::Yes => 1.0,
        }
    }

    /// Index of the security that pays $1 under this outcome.
    pub fn winning_security(self) -> usize {
        match self {
            Outcome::Yes => TRADED_SECURITY,
            Outcome::No => 1 - TRADED_SECURITY,
        }
    }
}

impl TryFrom<u8> for Outcome {
    type Error = Error;

    fn try_from(v: u8) -> Result<Self> {
        match v {
            0 => Ok(Outcome::No),
            1 => Ok(Outcome::Yes),
            other => Err(Error::arg(format!(
                "event outcome must be 0 or 1, got {other}"
            ))),
        }
    }
}

impl From<Outcome> for u8 {
    fn from(o: Outcome) -> u8 {
        match o {
            Outcome::No => 0,
            Outcome::Yes => 1,
        }
    }
}

/// One agent's trade in a period: sell one unit, hold, or buy one unit.
///
/// The declaration order (hold, buy, sell) is the canonical action order used
/// to enumerate joint profiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TradeAction {
    Hold,
    Buy,
    Sell,
}

impl TradeAction {
    pub const ALL: [TradeAction; 3] = [TradeAction::Hold, TradeAction::Buy, TradeAction::Sell];

    pub fn direction(self) -> i64 {
        match self {
            TradeAction::Sell => -1,
            TradeAction::Hold => 0,
            TradeAction::Buy => 1,
        }
    }

    pub fn from_direction(d: i64) -> Result<Self> {
        match d {
            -1 => Ok(TradeAction::Sell),
            0 => Ok(TradeAction::Hold),
            1 => Ok(TradeAction::Buy),
            other => Err(Error::arg(format!(
                "trade direction must be -1, 0 or 1, got {other}"
            ))),
        }
    }

    /// Position in [`TradeAction::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            TradeAction::Hold => "hold",
            TradeAction::Buy => "buy",
            TradeAction::Sell => "sell",
        }
    }
}

impl fmt::Display for TradeAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One action per agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JointAction(pub Vec<TradeAction>);

impl JointAction {
    pub fn net_direction(&self) -> i64 {
        self.0.iter().map(|a| a.direction()).sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Information signal about the event: negative, none, or positive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum InfoSignal {
    Negative,
    Neutral,
    Positive,
}

impl InfoSignal {
    pub const ALL: [InfoSignal; 3] = [
        InfoSignal::Negative,
        InfoSignal::Neutral,
        InfoSignal::Positive,
    ];

    pub fn value(self) -> i8 {
        match self {
            InfoSignal::Negative => -1,
            InfoSignal::Neutral => 0,
            InfoSignal::Positive => 1,
        }
    }

    /// Position in [`InfoSignal::ALL`].
    pub fn index(self) -> usize {
        self as usize
    }
}

impl TryFrom<i8> for InfoSignal {
    type Error = Error;

    fn try_from(v: i8) -> Result<Self> {
        match v {
            -1 => Ok(InfoSignal::Negative),
            0 => Ok(InfoSignal::Neutral),
            1 => Ok(InfoSignal::Positive),
            other => Err(Error::arg(format!(
                "signal must be -1, 0 or 1, got {other}"
            ))),
        }
    }
}

impl From<InfoSignal> for i8 {
    fn from(s: InfoSignal) -> i8 {
        s.value()
    }
}

/// Poisson information arrivals thinned by per-agent reliability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InfoModel {
    /// Expected arrivals per trading period.
    pub rate: f64,
    /// P(true signal = +1 | event happens); mirrored when it does not.
    pub positive_prob: f64,
    /// P(agent sees the true signal); one entry for everyone or one per agent.
    pub reliability: Vec<f64>,
}

impl Default for InfoModel {
    fn default() -> Self {
        InfoModel {
            rate: 0.5,
            positive_prob: 0.8,
            reliability: vec![0.9],
        }
    }
}

impl InfoModel {
    pub fn validate(&self, n_agents: usize) -> Result<()> {
        if !(self.rate.is_finite() && self.rate >= 0.0) {
            return Err(Error::arg(format!(
                "arrival rate must be >= 0, got {}",
                self.rate
            )));
        }
        let unit = |x: f64| (0.0..=1.0).contains(&x);
        if !unit(self.positive_prob) {
            return Err(Error::arg(format!(
                "positive_prob must lie in [0, 1], got {}",
                self.positive_prob
            )));
        }
        match self.reliability.len() {
            1 => {}
            n if n == n_agents => {}
            n => {
                return Err(Error::Dimension {
                    what: "reliability entries",
                    expected: n_agents,
                    actual: n,
                })
            }
        }
        if let Some(r) = self.reliability.iter().find(|r| !unit(**r)) {
            return Err(Error::arg(format!(
                "reliability must lie in [0, 1], got {r}"
            )));
        }
        Ok(())
    }

    pub fn reliability_for(&self, agent: usize) -> f64 {
        if self.reliability.len() == 1 {
            self.reliability[0]
        } else {
            self.reliability[agent]
        }
    }

    /// Probability that at least one signal arrives in a period.
    pub fn arrival_prob(&self) -> f64 {
        -(-self.rate).exp_m1()
    }

    /// Marginal signal distribution `P(iota)` for an agent that puts equal
    /// weight on both outcomes, indexed like [`InfoSignal::ALL`].
    pub fn signal_prior(&self) -> [f64; 3] {
        let arrive = self.arrival_prob();
        [arrive / 2.0, 1.0 - arrive, arrive / 2.0]
    }
}

/// Draws one period's signals: the number of arrivals is Poisson, a single
/// effective true signal is drawn when anything arrives, and each agent sees
/// it with its own reliability (otherwise it sees nothing).
pub fn sample_signals<R: Rng + ?Sized>(
    rng: &mut R,
    model: &InfoModel,
    outcome: Outcome,
    n_agents: usize,
) -> Vec<InfoSignal> {
    let arrivals = if model.rate > 0.0 {
        Poisson::new(model.rate)
            .map(|d| d.sample(rng))
            .unwrap_or(0.0)
    } else {
        0.0
    };
    if arrivals < 1.0 {
        return vec![InfoSignal::Neutral; n_agents];
    }
    let p_positive = match outcome {
        Outcome::Yes => model.positive_prob,
        Outcome::No => 1.0 - model.positive_prob,
    };
    let truth = if rng.random::<f64>() < p_positive {
        InfoSignal::Positive
    } else {
        InfoSignal::Negative
    };
    (0..n_agents)
        .map(|i| {
            if rng.random::<f64>() < model.reliability_for(i) {
                truth
            } else {
                InfoSignal::Neutral
            }
        })
        .collect()
}

/// Finite ordered set of traded-security quantities
/// `{q0 - max_units, ..., q0 + max_units}`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    initial: QuantityVector,
    max_units: i64,
}

impl StateSpace {
    pub fn len(&self) -> usize {
        (2 * self.max_units + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn max_units(&self) -> i64 {
        self.max_units
    }

    pub fn initial(&self) -> &QuantityVector {
        &self.initial
    }

    /// Index of the state whose traded quantity is `q0 + offset`.
    pub fn index_of_offset(&self, offset: i64) -> Option<usize> {
        (offset.abs() <= self.max_units).then(|| (offset + self.max_units) as usize)
    }

    pub fn offset_of_index(&self, index: usize) -> Option<i64> {
        (index < self.len()).then(|| index as i64 - self.max_units)
    }

    /// Full quantity vector of state `index`.
    pub fn quantities(&self, index: usize) -> Result<QuantityVector> {
        let offset = self
            .offset_of_index(index)
            .ok_or_else(|| Error::arg(format!("state index {index} out of range")))?;
        self.initial.shifted(TRADED_SECURITY, offset as f64)
    }

    /// Offset of `q` from the initial traded quantity, if it is an integer
    /// number of units inside the bounds.
    pub fn offset_of(&self, q: &QuantityVector) -> Option<i64> {
        let d = q.as_slice()[TRADED_SECURITY] - self.initial.as_slice()[TRADED_SECURITY];
        let r = d.round();
        ((d - r).abs() < 1e-9 && r.abs() <= self.max_units as f64).then_some(r as i64)
    }

    /// Posted price of the traded security in every state, in index order.
    pub fn prices(&self, b: LiquidityParam) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|i| lmsr::price_of(&self.quantities(i)?, TRADED_SECURITY, b))
            .collect()
    }
}

/// Enumerates the traded-security quantities reachable within `max_units`
/// of the initial state.
pub fn build_state_space(
    initial_q: &QuantityVector,
    max_units: i64,
    horizon: usize,
) -> Result<StateSpace> {
    if max_units <= 0 {
        return Err(Error::arg(format!(
            "max_units must be positive, got {max_units}"
        )));
    }
    if (max_units as usize) < horizon {
        log::debug!(
            "state bound {max_units} is below the horizon {horizon}; transitions may clamp"
        );
    }
    Ok(StateSpace {
        initial: initial_q.clone(),
        max_units,
    })
}

/// Hidden market state: outstanding quantities and the trading period.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketState {
    pub q: QuantityVector,
    pub period: usize,
    horizon: usize,
}

impl MarketState {
    pub fn new(q: QuantityVector, period: usize, horizon: usize) -> Result<Self> {
        if period >= horizon {
            return Err(Error::arg(format!(
                "period {period} outside horizon {horizon}"
            )));
        }
        Ok(MarketState { q, period, horizon })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn traded_quantity(&self) -> f64 {
        self.q.as_slice()[TRADED_SECURITY]
    }
}

/// Result of applying a joint action to the quantity vector.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantityStep {
    pub q: QuantityVector,
    /// The summed action would have left the state bounds and was clamped.
    pub truncated: bool,
}

/// Moves the traded quantity by the algebraic sum of the agents' actions,
/// clamping to the state space bounds.
pub fn apply_joint_action(
    q: &QuantityVector,
    action: &JointAction,
    space: &StateSpace,
) -> Result<QuantityStep> {
    let current = space
        .offset_of(q)
        .ok_or_else(|| Error::arg("quantity is not a state of this state space"))?;
    let target = current + action.net_direction();
    let clamped = target.clamp(-space.max_units, space.max_units);
    let truncated = clamped != target;
    if truncated {
        log::warn!(
            "state truncation: offset {target} clamped to {clamped} (bound {})",
            space.max_units
        );
    }
    Ok(QuantityStep {
        q: q.shifted(TRADED_SECURITY, (clamped - current) as f64)?,
        truncated,
    })
}

/// Deterministic transition `T(s, a, .)`: a point mass on the summed quantity
/// in the next period.
pub fn transition(
    s: &MarketState,
    action: &JointAction,
    space: &StateSpace,
) -> Result<(MarketState, bool)> {
    if s.period + 1 >= s.horizon {
        return Err(Error::arg(format!(
            "no transition out of the final period {} of {}",
            s.period, s.horizon
        )));
    }
    let step = apply_joint_action(&s.q, action, space)?;
    Ok((
        MarketState {
            q: step.q,
            period: s.period + 1,
            horizon: s.horizon,
        },
        step.truncated,
    ))
}

/// What an agent sees at the start of a period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub posted_price: f64,
    pub signal: InfoSignal,
}

/// Posted price of the traded security paired with the agent's signal.
pub fn observe(s: &MarketState, b: LiquidityParam, signal: InfoSignal) -> Result<Observation> {
    Ok(Observation {
        posted_price: lmsr::price_of(&s.q, TRADED_SECURITY, b)?,
        signal,
    })
}

/// Single-agent transition table `T(s, a_i, s')` over an enumerated state set.
///
/// Rows are stored sparsely: for each (action, state) the reachable
/// successors with their probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionModel {
    n_states: usize,
    n_actions: usize,
    rows: Vec<Vec<(usize, f64)>>,
}

impl TransitionModel {
    /// Builds from a dense table indexed `[action][state][next_state]`.
    pub fn from_dense(table: &[Vec<Vec<f64>>]) -> Result<Self> {
        let n_actions = table.len();
        let n_states = table.first().map_or(0, Vec::len);
        if n_actions == 0 || n_states == 0 {
            return Err(Error::arg("transition table must be non-empty"));
        }
        let mut rows = Vec::with_capacity(n_actions * n_states);
        for per_action in table {
            if per_action.len() != n_states {
                return Err(Error::Dimension {
                    what: "transition states",
                    expected: n_states,
                    actual: per_action.len(),
                });
            }
            for row in per_action {
                if row.len() != n_states {
                    return Err(Error::Dimension {
                        what: "transition successors",
                        expected: n_states,
                        actual: row.len(),
                    });
                }
                rows.push(
                    row.iter()
                        .copied()
                        .enumerate()
                        .filter(|(_, p)| *p != 0.0)
                        .collect(),
                );
            }
        }
        let model = TransitionModel {
            n_states,
            n_actions,
            rows,
        };
        model.validate()?;
        Ok(model)
    }

    /// Transition seen by one of `n_agents` agents that knows its own action
    /// and treats every other agent as buying, holding or selling with equal
    /// probability. Mass that would leave the state bounds is clamped to the
    /// boundary state.
    pub fn market(space: &StateSpace, n_agents: usize) -> Result<Self> {
        if n_agents == 0 {
            return Err(Error::arg("need at least one agent"));
        }
        Self::market_with_opponents(space, &uniform_opponent_sum(n_agents - 1))
    }

    /// Like [`TransitionModel::market`] with an explicit distribution over
    /// the opponents' summed direction.
    pub fn market_with_opponents(space: &StateSpace, opponent_sum: &[(i64, f64)]) -> Result<Self> {
        let n = space.len();
        let m = space.max_units();
        let mut rows = Vec::with_capacity(TradeAction::ALL.len() * n);
        for own in TradeAction::ALL {
            for s in 0..n {
                let offset = s as i64 - m;
                let mut row: Vec<(usize, f64)> = Vec::new();
                for (d, p) in opponent_sum {
                    let next = (offset + own.direction() + d).clamp(-m, m);
                    let idx = (next + m) as usize;
                    match row.iter_mut().find(|(k, _)| *k == idx) {
                        Some(slot) => slot.1 += p,
                        None => row.push((idx, *p)),
                    }
                }
                row.sort_by_key(|(k, _)| *k);
                rows.push(row);
            }
        }
        let model = TransitionModel {
            n_states: n,
            n_actions: TradeAction::ALL.len(),
            rows,
        };
        model.validate()?;
        Ok(model)
    }

    fn validate(&self) -> Result<()> {
        for (k, row) in self.rows.iter().enumerate() {
            if row.iter().any(|(_, p)| !(p.is_finite() && *p >= 0.0)) {
                return Err(Error::arg(format!(
                    "transition row {k} has a negative or non-finite entry"
                )));
            }
            let total: f64 = row.iter().map(|(_, p)| p).sum();
            if (total - 1.0).abs() > ROW_TOL {
                return Err(Error::arg(format!(
                    "transition row {k} sums to {total}, not 1"
                )));
            }
        }
        Ok(())
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Non-zero successors of `state` under `action`.
    pub fn successors(&self, action: usize, state: usize) -> &[(usize, f64)] {
        &self.rows[action * self.n_states + state]
    }

    pub fn prob(&self, state: usize, action: usize, next: usize) -> f64 {
        self.successors(action, state)
            .iter()
            .find(|(k, _)| *k == next)
            .map_or(0.0, |(_, p)| *p)
    }
}

/// Observation likelihood `Omega(s, iota, o) = P(o | s, iota)`.
pub trait ObservationModel {
    type Obs;

    fn n_states(&self) -> usize;

    fn n_signals(&self) -> usize;

    fn likelihood(&self, state: usize, signal: usize, obs: &Self::Obs) -> f64;
}

/// Dense observation table indexed `[state][signal][observation]`.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularObservationModel {
    table: Vec<Vec<Vec<f64>>>,
}

impl TabularObservationModel {
    pub fn new(table: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let n_signals = table.first().map_or(0, Vec::len);
        let n_obs = table.first().and_then(|t| t.first()).map_or(0, Vec::len);
        if n_signals == 0 || n_obs == 0 {
            return Err(Error::arg("observation table must be non-empty"));
        }
        for (s, per_state) in table.iter().enumerate() {
            if per_state.len() != n_signals {
                return Err(Error::Dimension {
                    what: "observation signals",
                    expected: n_signals,
                    actual: per_state.len(),
                });
            }
            for (i, row) in per_state.iter().enumerate() {
                if row.len() != n_obs {
                    return Err(Error::Dimension {
                        what: "observations",
                        expected: n_obs,
                        actual: row.len(),
                    });
                }
                let total: f64 = row.iter().sum();
                if row.iter().any(|p| !(p.is_finite() && *p >= 0.0))
                    || (total - 1.0).abs() > ROW_TOL
                {
                    return Err(Error::arg(format!(
                        "observation row (state {s}, signal {i}) is not a distribution"
                    )));
                }
            }
        }
        Ok(TabularObservationModel { table })
    }

    pub fn n_observations(&self) -> usize {
        self.table[0][0].len()
    }
}

impl ObservationModel for TabularObservationModel {
    type Obs = usize;

    fn n_states(&self) -> usize {
        self.table.len()
    }

    fn n_signals(&self) -> usize {
        self.table[0].len()
    }

    fn likelihood(&self, state: usize, signal: usize, obs: &usize) -> f64 {
        self.table[state][signal].get(*obs).copied().unwrap_or(0.0)
    }
}

/// Market observation model: the posted price is seen exactly, the signal
/// through the agent's reliability channel.
///
/// `Omega(s, iota, o) = 1{o.price = price(s)} * P(o.signal | iota)` with
/// `P(iota | iota != 0) = rho`, `P(0 | iota != 0) = 1 - rho`, `P(0 | 0) = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketObservationModel {
    prices: Vec<f64>,
    reliability: f64,
}

impl MarketObservationModel {
    pub fn new(space: &StateSpace, b: LiquidityParam, reliability: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&reliability) {
            return Err(Error::arg(format!(
                "reliability must lie in [0, 1], got {reliability}"
            )));
        }
        Ok(MarketObservationModel {
            prices: space.prices(b)?,
            reliability,
        })
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    fn signal_likelihood(&self, truth: InfoSignal, seen: InfoSignal) -> f64 {
        match (truth, seen) {
            (InfoSignal::Neutral, InfoSignal::Neutral) => 1.0,
            (InfoSignal::Neutral, _) => 0.0,
            (t, s) if t == s => self.reliability,
            (_, InfoSignal::Neutral) => 1.0 - self.reliability,
            _ => 0.0,
        }
    }
}

impl ObservationModel for MarketObservationModel {
    type Obs = Observation;

    fn n_states(&self) -> usize {
        self.prices.len()
    }

    fn n_signals(&self) -> usize {
        InfoSignal::ALL.len()
    }

    fn likelihood(&self, state: usize, signal: usize, obs: &Observation) -> f64 {
        let p = self.prices[state];
        if (p - obs.posted_price).abs() > 1e-12 * p.max(obs.posted_price) {
            return 0.0;
        }
        self.signal_likelihood(InfoSignal::ALL[signal], obs.signal)
    }
}

/// Distribution of the summed direction of `n_opponents` agents who each
/// buy, sell or hold with probability 1/3, sorted by direction.
pub fn uniform_opponent_sum(n_opponents: usize) -> Vec<(i64, f64)> {
    let mut sum = vec![(0i64, 1.0)];
    for _ in 0..n_opponents {
        let mut next: Vec<(i64, f64)> = Vec::new();
        for (s, p) in &sum {
            for d in -1..=1 {
                let v = s + d;
                match next.iter_mut().find(|(k, _)| *k == v) {
                    Some(slot) => slot.1 += p / 3.0,
                    None => next.push((v, p / 3.0)),
                }
            }
        }
        next.sort_by_key(|(k, _)| *k);
        sum = next;
    }
    sum
}

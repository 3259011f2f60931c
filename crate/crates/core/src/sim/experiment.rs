use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::MarketConfig;
use super::run::{run_market, EquilibriumAudit, RunResult};
use crate::error::{Error, Result};
use crate::posgi::TradeAction;
use crate::strategies::{agreement_rate, StrategyKind};

const Z_95: f64 = 1.959_963_984_540_054;

/// Sample mean with a 95% normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanCi {
    pub mean: f64,
    /// `None` with fewer than two samples.
    pub half_width: Option<f64>,
    pub n: usize,
}

impl MeanCi {
    pub fn from_samples(xs: &[f64]) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::arg("mean of an empty sample"));
        }
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let half_width = (n >= 2).then(|| {
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
            Z_95 * (var / n as f64).sqrt()
        });
        Ok(MeanCi {
            mean,
            half_width,
            n,
        })
    }

    pub fn low(&self) -> Option<f64> {
        self.half_width.map(|h| self.mean - h)
    }

    pub fn high(&self) -> Option<f64> {
        self.half_width.map(|h| self.mean + h)
    }

    /// Whole interval strictly above zero.
    pub fn is_positive(&self) -> bool {
        self.low().is_some_and(|l| l > 0.0)
    }
}

/// Aggregates for one strategy pairing over all seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairingSummary {
    pub label: String,
    pub strategies: Vec<StrategyKind>,
    /// Per-run mean over agents of cumulative utility.
    pub utility: MeanCi,
    pub per_agent_utility: Vec<MeanCi>,
    /// Agreement with the CE population on the same seeds, over the agents
    /// not using CE.
    pub fce_percent: Option<MeanCi>,
    pub final_price_error: MeanCi,
    /// Paired by seed: CE population utility minus this pairing's.
    pub ce_utility_advantage: MeanCi,
    /// Paired by seed: this pairing's final-price error minus the CE
    /// population's.
    pub ce_price_advantage: MeanCi,
    /// Mixed pairings only: CE agents' mean utility minus the others'.
    pub ce_agent_advantage: Option<MeanCi>,
}

/// Results of a batch comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub base: MarketConfig,
    pub seeds: Vec<u64>,
    /// The all-CE population run on the same seeds.
    pub reference: PairingSummary,
    pub rows: Vec<PairingSummary>,
    pub audit: Option<EquilibriumAudit>,
    pub ce_fallbacks: usize,
    pub truncations: usize,
}

/// Seeds `base.seed, base.seed + 1, ...`.
pub fn experiment_seeds(base: &MarketConfig, n_runs: usize) -> Vec<u64> {
    (0..n_runs as u64)
        .map(|r| base.seed.wrapping_add(r))
        .collect()
}

/// Runs `kinds` on each seed, in parallel, returned in seed order.
pub fn run_batch(
    base: &MarketConfig,
    kinds: &[StrategyKind],
    seeds: &[u64],
) -> Result<Vec<RunResult>> {
    let template = MarketConfig {
        strategies: kinds.to_vec(),
        n_agents: kinds.len(),
        ..base.clone()
    };
    template.validate()?;
    seeds
        .par_iter()
        .map(|seed| {
            run_market(&MarketConfig {
                seed: *seed,
                ..template.clone()
            })
        })
        .collect()
}

/// Label such as `zip` for a homogeneous pairing or `ce-zip` otherwise.
pub fn pairing_label(kinds: &[StrategyKind]) -> String {
    if kinds.windows(2).all(|w| w[0] == w[1]) {
        kinds[0].to_string()
    } else {
        kinds
            .iter()
            .map(|k| k.token())
            .collect::<Vec<_>>()
            .join("-")
    }
}

/// Runs every pairing and the all-CE reference on the same seeds.
pub fn run_experiment(
    base: &MarketConfig,
    pairings: &[Vec<StrategyKind>],
    n_runs: usize,
) -> Result<ExperimentSummary> {
    if pairings.is_empty() {
        return Err(Error::arg("no strategy pairings to compare"));
    }
    if n_runs == 0 {
        return Err(Error::arg("n_runs must be at least 1"));
    }
    let n_agents = pairings[0].len();
    if let Some(p) = pairings.iter().find(|p| p.len() != n_agents) {
        return Err(Error::arg(format!(
            "pairing {} has {} agents, expected {n_agents}",
            pairing_label(p),
            p.len()
        )));
    }
    let seeds = experiment_seeds(base, n_runs);
    let ce_kinds = vec![StrategyKind::Ce; n_agents];
    let reference_runs = run_batch(base, &ce_kinds, &seeds)?;
    let reference = summarize(&ce_kinds, &reference_runs, &reference_runs)?;

    let mut audit = base.audit_equilibria.then(EquilibriumAudit::default);
    let mut ce_fallbacks = 0;
    let mut truncations = 0;
    let mut tally = |runs: &[RunResult]| {
        for r in runs {
            if let (Some(total), Some(a)) = (audit.as_mut(), r.audit.as_ref()) {
                total.merge(a);
            }
            ce_fallbacks += r.ce_fallbacks;
            truncations += r.truncations;
        }
    };
    tally(&reference_runs);
    let mut rows = Vec::with_capacity(pairings.len());
    for kinds in pairings {
        let runs = run_batch(base, kinds, &seeds)?;
        tally(&runs);
        rows.push(summarize(kinds, &runs, &reference_runs)?);
    }
    Ok(ExperimentSummary {
        base: base.clone(),
        seeds,
        reference,
        rows,
        audit,
        ce_fallbacks,
        truncations,
    })
}

fn summarize(
    kinds: &[StrategyKind],
    runs: &[RunResult],
    reference: &[RunResult],
) -> Result<PairingSummary> {
    let utilities: Vec<f64> = runs.iter().map(RunResult::mean_utility).collect();
    let per_agent_utility = (0..kinds.len())
        .map(|i| {
            MeanCi::from_samples(
                &runs
                    .iter()
                    .map(|r| r.cumulative_utility[i])
                    .collect::<Vec<_>>(),
            )
        })
        .collect::<Result<_>>()?;
    let non_ce: Vec<usize> = (0..kinds.len())
        .filter(|i| kinds[*i] != StrategyKind::Ce)
        .collect();
    let fce_percent = if kinds.iter().all(|k| *k == StrategyKind::Ce) {
        Some(MeanCi::from_samples(&vec![100.0; runs.len()])?)
    } else {
        let rates = runs
            .iter()
            .zip(reference)
            .map(|(run, ce)| {
                let (mut own, mut theirs): (Vec<TradeAction>, Vec<TradeAction>) =
                    (Vec::new(), Vec::new());
                for &i in &non_ce {
                    own.extend(run.agent_actions(i));
                    theirs.extend(ce.agent_actions(i));
                }
                agreement_rate(&own, &theirs)
            })
            .collect::<Result<Vec<_>>>()?;
        Some(MeanCi::from_samples(&rates)?)
    };
    let errors: Vec<f64> = runs.iter().map(RunResult::final_price_error).collect();
    let utility_gap: Vec<f64> = runs
        .iter()
        .zip(reference)
        .map(|(run, ce)| ce.mean_utility() - run.mean_utility())
        .collect();
    let price_gap: Vec<f64> = runs
        .iter()
        .zip(reference)
        .map(|(run, ce)| run.final_price_error() - ce.final_price_error())
        .collect();
    let mixed = !non_ce.is_empty() && non_ce.len() < kinds.len();
    let ce_agent_advantage = if mixed {
        let gaps: Vec<f64> = runs
            .iter()
            .map(|r| {
                let (ce, other): (Vec<usize>, Vec<usize>) =
                    (0..kinds.len()).partition(|i| kinds[*i] == StrategyKind::Ce);
                let mean = |idx: &[usize]| {
                    idx.iter().map(|i| r.cumulative_utility[*i]).sum::<f64>() / idx.len() as f64
                };
                mean(&ce) - mean(&other)
            })
            .collect();
        Some(MeanCi::from_samples(&gaps)?)
    } else {
        None
    };
    Ok(PairingSummary {
        label: pairing_label(kinds),
        strategies: kinds.to_vec(),
        utility: MeanCi::from_samples(&utilities)?,
        per_agent_utility,
        fce_percent,
        final_price_error: MeanCi::from_samples(&errors)?,
        ce_utility_advantage: MeanCi::from_samples(&utility_gap)?,
        ce_price_advantage: MeanCi::from_samples(&price_gap)?,
        ce_agent_advantage,
    })
}

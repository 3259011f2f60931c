//! Market runs and batch experiments.
//!
//! Each period: signals arrive, agents observe the posted price and their own
//! signal, update beliefs, decide simultaneously, and the joint order executes
//! as one trade at symmetrized LMSR prices. The event settles after the last
//! period.

mod config;
mod experiment;
mod export;
mod run;

pub use config::MarketConfig;
pub use experiment::{
    experiment_seeds, pairing_label, run_batch, run_experiment, ExperimentSummary, MeanCi,
    PairingSummary,
};
pub use export::{export_results, Export, SCHEMA_VERSION};
pub use run::{derive_seed, run_market, EquilibriumAudit, RunResult};

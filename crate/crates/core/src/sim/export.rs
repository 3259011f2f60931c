use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::config::MarketConfig;
use super::experiment::ExperimentSummary;
use super::run::RunResult;
use crate::error::{Error, Result};

pub const SCHEMA_VERSION: u32 = 1;

/// Something that can be written as CSV files plus a manifest.
pub trait Export {
    /// Writes into `dir`, creating it if needed, and returns the files written.
    fn export(&self, dir: &Path) -> Result<Vec<PathBuf>>;
}

/// Writes `item` into `dir`.
pub fn export_results<T: Export + ?Sized>(item: &T, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    item.export(dir.as_ref())
}

#[derive(Serialize)]
struct Manifest<'a, T: Serialize> {
    schema_version: u32,
    generator: String,
    kind: &'static str,
    seed: u64,
    config: &'a MarketConfig,
    #[serde(flatten)]
    extra: T,
}

fn generator() -> String {
    format!("posgi-core {}", env!("CARGO_PKG_VERSION"))
}

fn prepare(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Serialization {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).map_err(|e| csv_error(path, e))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Serialization {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}

#[derive(Serialize)]
struct RunExtras<'a> {
    outcome: u8,
    final_price: f64,
    cumulative_utility: &'a [f64],
    profit: &'a [f64],
    holdings: &'a [f64],
    settlement: &'a [f64],
    market_maker_loss: f64,
    truncations: usize,
    ce_fallbacks: usize,
    belief_inconsistencies: usize,
}

impl Export for RunResult {
    fn export(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        prepare(dir)?;
        let prices = dir.join("prices.csv");
        let mut w = csv_writer(&prices)?;
        w.write_record(["period", "price"])
            .map_err(|e| csv_error(&prices, e))?;
        for (h, p) in self.prices.iter().enumerate() {
            w.write_record([(h + 1).to_string(), p.to_string()])
                .map_err(|e| csv_error(&prices, e))?;
        }
        w.flush().map_err(|e| Error::io(&prices, e))?;

        let agents = dir.join("agents.csv");
        let mut w = csv_writer(&agents)?;
        w.write_record([
            "period",
            "agent",
            "action",
            "reward",
            "utility",
            "cumulative_utility",
        ])
        .map_err(|e| csv_error(&agents, e))?;
        let n = self.cumulative_utility.len();
        let mut running = vec![0.0; n];
        for h in 0..self.horizon() {
            for i in 0..n {
                running[i] += self.utilities[h][i];
                w.write_record([
                    (h + 1).to_string(),
                    i.to_string(),
                    self.actions[h][i].name().to_string(),
                    self.rewards[h][i].to_string(),
                    self.utilities[h][i].to_string(),
                    running[i].to_string(),
                ])
                .map_err(|e| csv_error(&agents, e))?;
            }
        }
        w.flush().map_err(|e| Error::io(&agents, e))?;

        let manifest = dir.join("manifest.json");
        write_json(
            &manifest,
            &Manifest {
                schema_version: SCHEMA_VERSION,
                generator: generator(),
                kind: "run",
                seed: self.config.seed,
                config: &self.config,
                extra: RunExtras {
                    outcome: self.config.outcome.into(),
                    final_price: self.final_price,
                    cumulative_utility: &self.cumulative_utility,
                    profit: &self.profit,
                    holdings: &self.holdings,
                    settlement: &self.settlement,
                    market_maker_loss: self.market_maker_loss,
                    truncations: self.truncations,
                    ce_fallbacks: self.ce_fallbacks,
                    belief_inconsistencies: self.belief_inconsistencies,
                },
            },
        )?;
        Ok(vec![prices, agents, manifest])
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

#[derive(Serialize)]
struct SummaryExtras<'a> {
    n_runs: usize,
    summary: &'a ExperimentSummary,
}

impl Export for ExperimentSummary {
    fn export(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        prepare(dir)?;
        let summary = dir.join("summary.csv");
        let mut w = csv_writer(&summary)?;
        w.write_record([
            "strategy",
            "mean_utility",
            "ci_low",
            "ci_high",
            "fce_percent",
            "final_price_error",
        ])
        .map_err(|e| csv_error(&summary, e))?;
        for row in &self.rows {
            w.write_record([
                row.label.clone(),
                row.utility.mean.to_string(),
                opt(row.utility.low()),
                opt(row.utility.high()),
                opt(row.fce_percent.map(|f| f.mean)),
                row.final_price_error.mean.to_string(),
            ])
            .map_err(|e| csv_error(&summary, e))?;
        }
        w.flush().map_err(|e| Error::io(&summary, e))?;

        let manifest = dir.join("manifest.json");
        write_json(
            &manifest,
            &Manifest {
                schema_version: SCHEMA_VERSION,
                generator: generator(),
                kind: "experiment",
                seed: self.base.seed,
                config: &self.base,
                extra: SummaryExtras {
                    n_runs: self.seeds.len(),
                    summary: self,
                },
            },
        )?;
        Ok(vec![summary, manifest])
    }
}

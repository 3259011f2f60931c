use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use posgi_core::equilibrium::{incentive_matrix, pareto_ce, solve_ce, CeObjective, NormalFormGame};
use posgi_core::lmsr;
use posgi_core::{
    export_results, run_experiment, run_market, Error, LiquidityParam, MarketConfig, Outcome,
    QuantityVector, StrategyKind,
};

/// Prediction-market simulator with an LMSR market maker and
/// correlated-equilibrium trading agents.
#[derive(Parser)]
#[command(name = "posgi", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one market and write prices.csv, agents.csv and manifest.json.
    Run(RunArgs),
    /// Run the CE population against each baseline on paired seeds and write summary.csv.
    Compare(CompareArgs),
    /// Solve a correlated equilibrium for a game JSON file.
    CeSolve(CeSolveArgs),
    /// Print LMSR cost and prices for a quantity vector.
    Quote(QuoteArgs),
}

/// Market flags shared by `run` and `compare`. Unset flags fall back to the
/// config file, then to the built-in defaults.
#[derive(Args)]
struct MarketArgs {
    /// JSON market configuration; explicit flags override its fields.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Trading periods [default: 50]
    #[arg(long)]
    days: Option<usize>,
    /// LMSR liquidity parameter [default: 100]
    #[arg(long)]
    b: Option<f64>,
    /// Base seed; POSGI_SEED takes precedence when set [default: 0]
    #[arg(long)]
    seed: Option<u64>,
    /// CRRA risk parameter, one value or one per agent [default: 0]
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    theta: Option<Vec<f64>>,
    /// Realized event outcome: yes or no [default: yes]
    #[arg(long)]
    outcome: Option<String>,
    /// Check every stage game for equilibrium existence and verification [default: off]
    #[arg(long)]
    audit: bool,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    market: MarketArgs,
    /// Comma-separated strategies, one per agent: zi, zip, cp, gd, dp, ce [default: ce,ce]
    #[arg(long)]
    agents: Option<String>,
    /// Output directory
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    market: MarketArgs,
    /// Comma-separated baseline strategies, each run as a homogeneous population
    #[arg(long, default_value = "zi,zip,cp,gd,dp")]
    baselines: String,
    /// Seeded runs per pairing
    #[arg(long, default_value_t = 100)]
    runs: usize,
    /// Output directory
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct CeSolveArgs {
    /// Game file: {"players", "actions": [[names]], "utilities": [[per player] per profile]}
    file: PathBuf,
    /// Restrict support to Pareto-optimal profiles
    #[arg(long)]
    pareto: bool,
    /// Report any feasible point instead of the welfare maximizer
    #[arg(long)]
    uniform: bool,
}

#[derive(Args)]
struct QuoteArgs {
    /// Outstanding quantities, comma-separated
    #[arg(
        long,
        value_delimiter = ',',
        allow_negative_numbers = true,
        default_value = "0,0"
    )]
    q: Vec<f64>,
    /// Liquidity parameter
    #[arg(long, default_value_t = 100.0)]
    b: f64,
}

/// Usage and validation problems exit with 2, everything else with 1.
enum Failure {
    Usage(anyhow::Error),
    Runtime(anyhow::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Argument(_) | Error::Dimension { .. } => Failure::Usage(e.into()),
            _ => Failure::Runtime(e.into()),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Runtime(e)
    }
}

type CliResult = Result<(), Failure>;

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::CeSolve(a) => cmd_ce_solve(a),
        Command::Quote(a) => cmd_quote(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load_config(path: &Path) -> Result<MarketConfig, Failure> {
    let text = fs::read_to_string(path)
        .with_context(|| format!("reading config {}", path.display()))
        .map_err(Failure::Runtime)?;
    serde_json::from_str(&text)
        .map_err(|e| Failure::Usage(anyhow!("config {}: {e}", path.display())))
}

fn env_seed() -> Result<Option<u64>, Failure> {
    match std::env::var("POSGI_SEED") {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| {
            Failure::Usage(anyhow!(
                "POSGI_SEED must be a non-negative integer, got `{v}`"
            ))
        }),
        Err(_) => Ok(None),
    }
}

fn parse_outcome(text: &str) -> Result<Outcome, Failure> {
    match text.to_ascii_lowercase().as_str() {
        "yes" | "1" => Ok(Outcome::Yes),
        "no" | "0" => Ok(Outcome::No),
        _ => Err(Failure::Usage(anyhow!(
            "outcome must be yes or no, got `{text}`"
        ))),
    }
}

fn build_config(m: &MarketArgs, agents: Option<&str>) -> Result<MarketConfig, Failure> {
    let mut cfg = match &m.config {
        Some(path) => load_config(path)?,
        None => MarketConfig::default(),
    };
    if let Some(d) = m.days {
        cfg.horizon = d;
    }
    if let Some(b) = m.b {
        cfg.b = b;
    }
    if let Some(s) = m.seed {
        cfg.seed = s;
    }
    if let Some(s) = env_seed()? {
        cfg.seed = s;
    }
    if let Some(t) = &m.theta {
        cfg.theta = t.clone();
    }
    if let Some(o) = &m.outcome {
        cfg.outcome = parse_outcome(o)?;
    }
    if m.audit {
        cfg.audit_equilibria = true;
    }
    if let Some(list) = agents {
        let kinds = StrategyKind::parse_list(list)?;
        cfg.n_agents = kinds.len();
        cfg.strategies = kinds;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn cmd_run(a: RunArgs) -> CliResult {
    let cfg = build_config(&a.market, a.agents.as_deref())?;
    let result = run_market(&cfg)?;
    let files = export_results(&result, &a.out)?;
    println!(
        "final price {:.4} (outcome {}), mean utility {:.4}, market maker loss {:.4}",
        result.final_price,
        cfg.outcome.value(),
        result.mean_utility(),
        result.market_maker_loss
    );
    for f in files {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn cmd_compare(a: CompareArgs) -> CliResult {
    let cfg = build_config(&a.market, None)?;
    let baselines = StrategyKind::parse_list(&a.baselines)?;
    let pairings: Vec<Vec<StrategyKind>> =
        baselines.iter().map(|k| vec![*k; cfg.n_agents]).collect();
    let summary = run_experiment(&cfg, &pairings, a.runs)?;
    let fmt_ci = |m: &posgi_core::sim::MeanCi| match m.half_width {
        Some(h) => format!("{:>9.4} +- {:<8.4}", m.mean, h),
        None => format!("{:>9.4}             ", m.mean),
    };
    println!(
        "{:<8} {:<23} {:>8} {:>10}",
        "strategy", "utility (95% CI)", "%F_CE", "|p - o|"
    );
    for row in std::iter::once(&summary.reference).chain(&summary.rows) {
        let fce = row
            .fce_percent
            .map(|f| format!("{:.1}", f.mean))
            .unwrap_or_default();
        println!(
            "{:<8} {} {:>8} {:>10.4}",
            row.label,
            fmt_ci(&row.utility),
            fce,
            row.final_price_error.mean
        );
    }
    if let Some(audit) = &summary.audit {
        println!(
            "audit: {} stage games, {} existence failures, {} verification failures",
            audit.games, audit.existence_failures, audit.verification_failures
        );
    }
    for f in export_results(&summary, &a.out)? {
        println!("wrote {}", f.display());
    }
    Ok(())
}

fn cmd_ce_solve(a: CeSolveArgs) -> CliResult {
    let text = fs::read_to_string(&a.file)
        .with_context(|| format!("reading game {}", a.file.display()))
        .map_err(Failure::Runtime)?;
    let game = NormalFormGame::from_json(&text)
        .map_err(|e| Failure::Usage(anyhow!("game {}: {e}", a.file.display())))?;
    let ce = if a.pareto {
        match pareto_ce(&game)? {
            Some(ce) => ce,
            None => {
                println!("no correlated equilibrium is supported on Pareto-optimal profiles");
                return Ok(());
            }
        }
    } else {
        let objective = if a.uniform {
            CeObjective::Uniform
        } else {
            CeObjective::Utilitarian
        };
        solve_ce(&game, objective)?
    };
    println!("distribution:");
    for k in ce.support(1e-12) {
        println!("  {:<24} {:.10}", game.profile_label(k), ce.p[k]);
    }
    let eu = ce.expected_utilities(&game);
    println!("expected utility:");
    for (i, u) in eu.iter().enumerate() {
        println!("  player {i}: {u:.10}");
    }
    println!("welfare: {:.10}", ce.welfare(&game));
    let slacks: Vec<f64> = incentive_matrix(&game)
        .iter()
        .map(|row| row.iter().zip(&ce.p).map(|(u, p)| u * p).sum())
        .collect();
    let rendered: Vec<String> = slacks.iter().map(|s| format!("{s:.6}")).collect();
    println!("incentive slacks: [{}]", rendered.join(", "));
    Ok(())
}

fn cmd_quote(a: QuoteArgs) -> CliResult {
    let q = QuantityVector::new(a.q)?;
    let b = LiquidityParam::new(a.b)?;
    let prices = lmsr::price(&q, b)?;
    println!("cost: {:.12}", lmsr::cost(&q, b)?);
    for (k, p) in prices.as_slice().iter().enumerate() {
        println!("price[{k}]: {p:.12}");
    }
    Ok(())
}

//! Command-line arguments.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "selfpower", version, about = "Experiments on the self-power map x -> x^x mod p")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    /// Fixed-point census over primes, with both prediction tables.
    Census(CensusArgs),
    /// Per-prime Delta_p and the summed predictors at each threshold.
    Heuristics(HeuristicsArgs),
    /// Orbit sizes from random starts, with histograms.
    Orbits(OrbitsArgs),
    /// Random-endomorphism model on a cyclic group of order p - 1.
    Endo(EndoArgs),
    /// The linear-form constant c(q).
    Cq(CqArgs),
    /// Interpolation degree and the quadratic-character census.
    Interp(InterpArgs),
    /// Solution counts of f(x) = x^x mod p.
    Tfp(TfpArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Census(_) => "census",
            Command::Heuristics(_) => "heuristics",
            Command::Orbits(_) => "orbits",
            Command::Endo(_) => "endo",
            Command::Cq(_) => "cq",
            Command::Interp(_) => "interp",
            Command::Tfp(_) => "tfp",
        }
    }

    pub fn common(&self) -> &Common {
        match self {
            Command::Census(a) => &a.common,
            Command::Heuristics(a) => &a.common,
            Command::Orbits(a) => &a.common,
            Command::Endo(a) => &a.common,
            Command::Cq(a) => &a.common,
            Command::Interp(a) => &a.common,
            Command::Tfp(a) => &a.common,
        }
    }
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args, Serialize)]
pub struct Common {
    /// Master seed for every random stream.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 uses the available parallelism.
    #[arg(long, default_value_t = 0)]
    #[serde(skip)]
    pub workers: usize,
    /// Output directory.
    #[arg(long, default_value = "out")]
    #[serde(skip)]
    pub output: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Continue an interrupted run in the same output directory.
    #[arg(long)]
    #[serde(skip)]
    pub resume: bool,
    /// Numbers per sieve window; also the unit of resumable output.
    #[arg(long, default_value_t = selfpower::arith::DEFAULT_SEGMENT)]
    pub segment: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CensusArgs {
    /// Largest integer scanned; defaults to the largest threshold.
    #[arg(long)]
    pub n_max: Option<u64>,
    /// `a..b/step` (inclusive) or a comma-separated list.
    #[arg(long, value_parser = parse_thresholds)]
    pub thresholds: Option<Thresholds>,
    /// Image sizes and collisions are computed for primes up to this bound.
    #[arg(long, default_value_t = 10_000)]
    pub image_limit: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct HeuristicsArgs {
    #[arg(long)]
    pub n_max: Option<u64>,
    #[arg(long, value_parser = parse_thresholds)]
    pub thresholds: Option<Thresholds>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MapChoice {
    #[value(alias = "self_power", alias = "psi")]
    #[serde(rename = "self_power")]
    SelfPower,
    #[value(alias = "quad_plus_one")]
    #[serde(rename = "quad_plus_one")]
    Quad,
    Both,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct OrbitsArgs {
    #[arg(long, value_enum, default_value_t = MapChoice::Both)]
    pub map: MapChoice,
    /// Smallest prime sampled.
    #[arg(long, default_value_t = 3)]
    pub n_min: u64,
    #[arg(long)]
    pub n_max: u64,
    #[arg(long, default_value_t = 1)]
    pub per_prime_starts: u32,
    #[arg(long, default_value_t = selfpower::dynamics::DEFAULT_BINS)]
    pub bins: usize,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct EndoArgs {
    /// The prime; the group has order p - 1.
    #[arg(long)]
    pub p: u64,
    /// Endomorphisms applied per trial.
    #[arg(long, default_value_t = 10)]
    pub steps: u64,
    /// Number of trials.
    #[arg(long, default_value_t = 100_000)]
    pub samples: u64,
    /// Fixed start; drawn per trial when absent.
    #[arg(long)]
    pub x0: Option<u64>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CqMethodChoice {
    Exact,
    #[value(alias = "monte_carlo", alias = "mc")]
    MonteCarlo,
    #[value(alias = "upper_bound", alias = "bound")]
    UpperBound,
    /// Exact where the budget allows, Monte Carlo otherwise, plus the bound.
    Auto,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct CqArgs {
    /// Odd primes q: `a..b/step` or a comma-separated list.
    #[arg(long, value_parser = parse_thresholds)]
    pub q: Thresholds,
    #[arg(long, default_value_t = 1)]
    pub x0: u64,
    #[arg(long, value_enum, default_value_t = CqMethodChoice::Auto)]
    pub method: CqMethodChoice,
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct InterpArgs {
    #[arg(long, default_value_t = 3)]
    pub n_min: u64,
    #[arg(long)]
    pub n_max: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct TfpArgs {
    /// Coefficients of f, constant term first, e.g. `-1,1` for X - 1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
    pub poly: Vec<i64>,
    #[arg(long, default_value_t = 3)]
    pub n_min: u64,
    #[arg(long)]
    pub n_max: u64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(transparent)]
pub struct Thresholds(pub Vec<u64>);

/// Parses `a..b/step` (inclusive) or `n1,n2,...`. Items may be mixed, e.g.
/// `10,100..500/100`. The result must be strictly ascending.
pub fn parse_thresholds(s: &str) -> Result<Thresholds, String> {
    let mut out = Vec::new();
    for item in s.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        if let Some((a, rest)) = item.split_once("..") {
            let (b, step) = rest.split_once('/').unwrap_or((rest, "1"));
            let a: u64 = a.parse().map_err(|_| format!("bad range start in `{item}`"))?;
            let b: u64 = b.parse().map_err(|_| format!("bad range end in `{item}`"))?;
            let step: u64 = step.parse().map_err(|_| format!("bad step in `{item}`"))?;
            if step == 0 || a > b {
                return Err(format!("empty or invalid range `{item}`"));
            }
            out.extend((a..=b).step_by(step as usize));
        } else {
            out.push(item.parse().map_err(|_| format!("`{item}` is not a non-negative integer"))?);
        }
    }
    if out.is_empty() {
        return Err("no values given".into());
    }
    if out.windows(2).any(|w| w[0] >= w[1]) {
        return Err("values must be strictly ascending".into());
    }
    Ok(Thresholds(out))
}

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fundmat::estimator::StepSchedule;
use fundmat::Tolerances;

#[derive(Debug, Parser)]
#[command(
    name = "fundmat",
    version,
    about = "Stationary distributions, potentials and Q-factors of finite Markov systems"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Model document (JSON).
    #[arg(long, global = true)]
    pub model: Option<PathBuf>,
    /// `uniform`, `e1`, `stationary` or a JSON array such as `[0.5,0.5]`.
    #[arg(long, global = true, default_value = "uniform")]
    pub reference: ReferenceSpec,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the result here instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[command(flatten)]
    pub tolerances: ToleranceArgs,
}

#[derive(Debug, Args)]
pub struct ToleranceArgs {
    #[arg(long, global = true)]
    pub row_tol: Option<f64>,
    #[arg(long, global = true)]
    pub edge_tol: Option<f64>,
    /// Per-state solve tolerance; the effective value is this times S.
    #[arg(long, global = true)]
    pub solve_tol: Option<f64>,
    #[arg(long, global = true)]
    pub poisson_tol: Option<f64>,
    #[arg(long, global = true)]
    pub re_tol: Option<f64>,
    #[arg(long, global = true)]
    pub series_margin: Option<f64>,
    #[arg(long, global = true)]
    pub pivot_tol: Option<f64>,
    /// Skip irreducibility checks before direct solves.
    #[arg(long, global = true)]
    pub allow_unchecked: bool,
}

impl ToleranceArgs {
    pub fn resolve(&self) -> Tolerances {
        let d = Tolerances::default();
        Tolerances {
            row_tol: self.row_tol.unwrap_or(d.row_tol),
            edge_tol: self.edge_tol.unwrap_or(d.edge_tol),
            solve_tol_per_state: self.solve_tol.unwrap_or(d.solve_tol_per_state),
            poisson_tol: self.poisson_tol.unwrap_or(d.poisson_tol),
            re_tol: self.re_tol.unwrap_or(d.re_tol),
            series_margin: self.series_margin.unwrap_or(d.series_margin),
            pivot_tol: self.pivot_tol.unwrap_or(d.pivot_tol),
            allow_unchecked: self.allow_unchecked,
            ..d
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceSpec {
    Uniform,
    E1,
    Stationary,
    Explicit(Vec<f64>),
}

impl FromStr for ReferenceSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "uniform" => Ok(Self::Uniform),
            "e1" => Ok(Self::E1),
            "stationary" => Ok(Self::Stationary),
            t if t.starts_with('[') => serde_json::from_str::<Vec<f64>>(t)
                .map(Self::Explicit)
                .map_err(|e| format!("reference vector literal: {e}")),
            other => Err(format!(
                "unknown reference `{other}`; use uniform, e1, stationary or a JSON array"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Direct,
    Classic,
    ReferenceLevel,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a model and report its structure.
    Validate,
    /// Stationary distribution of a discrete-time chain.
    Stationary,
    /// Performance potentials of a discrete-time chain.
    Potentials {
        #[arg(long, value_enum, default_value_t = Method::Direct)]
        method: Method,
        /// Truncation horizon for `reference-level`.
        #[arg(long, default_value_t = 1000)]
        horizon: usize,
    },
    /// Q-factors of the policy in an MDP model.
    Qfactors,
    /// Stationary distribution of a continuous-time process.
    CtmcStationary,
    /// Potentials of a continuous-time process.
    CtmcPotentials {
        /// `direct` or `classic`.
        #[arg(long, value_enum, default_value_t = Method::Direct)]
        method: Method,
    },
    /// Online estimate of the potentials from a simulated path.
    Estimate(EstimateArgs),
    /// Truncated series for the fundamental matrix.
    Series {
        /// Fixed number of terms; without it, terms are added until the tail
        /// bound drops below `--target`.
        #[arg(long)]
        terms: Option<usize>,
        #[arg(long, default_value_t = 1e-10)]
        target: f64,
        #[arg(long, default_value_t = 100_000)]
        max_terms: usize,
    },
    /// Run verification reports; exits with status 1 if any check fails.
    Check {
        /// Only check the Poisson residual of the solution in `--solution`.
        #[arg(long, requires = "solution")]
        poisson: bool,
        /// Potentials document as written by `potentials`.
        #[arg(long)]
        solution: Option<PathBuf>,
        /// Uniformization rate for generator checks; defaults to the largest
        /// exit rate.
        #[arg(long)]
        gamma: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Several seeds, e.g. `1,2,5` or `1..10`; runs in parallel.
    #[arg(long, conflicts_with = "seed")]
    pub seeds: Option<SeedList>,
    #[arg(long, default_value_t = 1_000_000)]
    pub steps: u64,
    #[arg(long, default_value_t = 1e-4)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1000)]
    pub check_interval: u64,
    #[arg(long, default_value_t = 0)]
    pub start_state: usize,
    /// `power:a,b,p` for a/(b+t)^p, or `constant:alpha`.
    #[arg(long, default_value = "power:1,10,1")]
    pub schedule: ScheduleSpec,
    /// Write per-check-point snapshots as CSV; with several seeds the seed is
    /// inserted before the extension.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedList(pub Vec<u64>);

impl FromStr for SeedList {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = |e: std::num::ParseIntError| format!("seed list `{s}`: {e}");
        if let Some((lo, hi)) = s.split_once("..") {
            let (lo, hi) = (
                lo.trim().parse::<u64>().map_err(bad)?,
                hi.trim().parse::<u64>().map_err(bad)?,
            );
            if lo > hi {
                return Err(format!("seed range `{s}` is empty"));
            }
            return Ok(Self((lo..=hi).collect()));
        }
        s.split(',')
            .map(|x| x.trim().parse::<u64>().map_err(bad))
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}

#[derive(Debug, Clone)]
pub struct ScheduleSpec(pub StepSchedule);

impl FromStr for ScheduleSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (kind, params) = s
            .split_once(':')
            .ok_or_else(|| format!("schedule `{s}`: expected power:a,b,p or constant:alpha"))?;
        let values: Vec<f64> = params
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<f64>()
                    .map_err(|e| format!("schedule `{s}`: {e}"))
            })
            .collect::<Result<_, _>>()?;
        let schedule = match (kind, values.as_slice()) {
            ("power", &[a, b, p]) => StepSchedule::power(a, b, p),
            ("constant", &[alpha]) => StepSchedule::constant(alpha),
            _ => return Err(format!("schedule `{s}`: expected power:a,b,p or constant:alpha")),
        };
        schedule.map(Self).map_err(|e| e.to_string())
    }
}

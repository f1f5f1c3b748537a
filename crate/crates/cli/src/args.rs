use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use hubnet::simulate::AlphaLevel;
use serde::{Deserialize, Serialize};

#[derive(Debug, Parser)]
#[command(name = "hubnet", version, about = "Simulate and fit temporal-dependent hub models of grouped data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw parameters from the simulation design and sample a trajectory.
    Simulate(SimulateArgs),
    /// Fit a groups file by EM.
    Fit(FitArgs),
    /// Reduce raw multi-group records to one group per event.
    Preprocess(PreprocessArgs),
    /// Parametric bootstrap of the persistence factors of a fit.
    Bootstrap(BootstrapArgs),
    /// Compare estimated parameters against the truth.
    Eval(EvalArgs),
}

/// `α` given either as a number or as one of the symbolic levels
/// `log-half-n`, `log-n`, `log-2n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AlphaToken", into = "AlphaToken")]
pub enum AlphaSpec {
    Level(AlphaLevel),
    Value(f64),
}

impl AlphaSpec {
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            AlphaSpec::Level(level) => level.value(n),
            AlphaSpec::Value(x) => x,
        }
    }
}

impl FromStr for AlphaSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "log-half-n" => Ok(AlphaSpec::Level(AlphaLevel::LogHalfN)),
            "log-n" => Ok(AlphaSpec::Level(AlphaLevel::LogN)),
            "log-2n" => Ok(AlphaSpec::Level(AlphaLevel::Log2N)),
            other => other
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .map(AlphaSpec::Value)
                .ok_or_else(|| format!("{other:?} is neither a number nor one of log-half-n, log-n, log-2n")),
        }
    }
}

impl fmt::Display for AlphaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSpec::Level(AlphaLevel::LogHalfN) => f.write_str("log-half-n"),
            AlphaSpec::Level(AlphaLevel::LogN) => f.write_str("log-n"),
            AlphaSpec::Level(AlphaLevel::Log2N) => f.write_str("log-2n"),
            AlphaSpec::Value(x) => write!(f, "{x}"),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum AlphaToken {
    Number(f64),
    Text(String),
}

impl TryFrom<AlphaToken> for AlphaSpec {
    type Error = String;

    fn try_from(t: AlphaToken) -> Result<Self, Self::Error> {
        match t {
            AlphaToken::Number(x) => Ok(AlphaSpec::Value(x)),
            AlphaToken::Text(s) => s.parse(),
        }
    }
}

impl From<AlphaSpec> for AlphaToken {
    fn from(a: AlphaSpec) -> Self {
        match a {
            AlphaSpec::Value(x) => AlphaToken::Number(x),
            level => AlphaToken::Text(level.to_string()),
        }
    }
}

/// Simulation settings from a TOML file; every key is optional and the
/// command-line flags take precedence.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateFile {
    pub n: Option<usize>,
    #[serde(rename = "T")]
    pub t: Option<usize>,
    pub alpha: Option<AlphaSpec>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
    pub u_mean: Option<f64>,
    pub u_sd: Option<f64>,
    pub theta_mean: Option<f64>,
    pub theta_sd: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// TOML file with simulation settings.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of nodes.
    #[arg(long)]
    pub n: Option<usize>,
    /// Number of groups.
    #[arg(long = "T")]
    pub t: Option<usize>,
    /// Leader persistence: a number or log-half-n, log-n, log-2n.
    #[arg(long, allow_hyphen_values = true)]
    pub alpha: Option<AlphaSpec>,
    #[arg(long, allow_hyphen_values = true)]
    pub beta: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub u_mean: Option<f64>,
    #[arg(long)]
    pub u_sd: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub theta_mean: Option<f64>,
    #[arg(long)]
    pub theta_sd: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    /// Groups file (CSV).
    #[arg(long)]
    pub groups: PathBuf,
    /// The groups file has a leading time column.
    #[arg(long)]
    pub timestamps: bool,
    /// Fit the classical hub model (no temporal dependence).
    #[arg(long)]
    pub independent: bool,
    /// Start EM from this parameters file instead of the default initializer.
    #[arg(long)]
    pub warm_start: Option<PathBuf>,
    #[arg(long, default_value_t = 500)]
    pub max_iters: usize,
    /// Stop when the log-likelihood improves by less than this.
    #[arg(long, default_value_t = 1e-7)]
    pub em_tol: f64,
    /// Additional randomly perturbed starts; the best fit is kept.
    #[arg(long, default_value_t = 0)]
    pub restarts: u64,
    /// Seed for the perturbed starts.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    /// Raw records file.
    #[arg(long)]
    pub input: PathBuf,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct BootstrapArgs {
    /// Output directory of a previous `fit`.
    #[arg(long)]
    pub fit: PathBuf,
    /// Number of replicates.
    #[arg(long = "B", default_value_t = 200)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.95)]
    pub level: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Estimated parameters file.
    #[arg(long)]
    pub estimated: PathBuf,
    /// True parameters file.
    #[arg(long)]
    pub truth: PathBuf,
    /// Also write the report to this directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

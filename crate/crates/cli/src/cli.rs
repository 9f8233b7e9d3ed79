use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use sk_landscape::sk::DescentRule;

#[derive(Debug, Parser, Serialize)]
#[command(name = "sk-landscape", version = env!("SK_LANDSCAPE_VERSION"))]
#[command(about = "Local optima of the Sherrington-Kirkpatrick Hamiltonian")]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Serialize)]
pub struct Common {
    /// Master seed for every random quantity.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long, global = true, default_value_t = 0)]
    pub threads: usize,
    /// Output file. A manifest is written next to it as `<output>.manifest.json`.
    /// Without it, results go to standard output and no manifest is written.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Defaults to json for `constants`, `prob` and `selfcheck`, csv otherwise.
    #[arg(long, global = true)]
    pub format: Option<Format>,
    /// Leave the timestamp and wall time out of the manifest.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbMethod {
    OrthantQuadrature,
    Convolution,
    TiltedMc,
    NaiveMc,
    BruteForce,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Level {
    Quick,
    Full,
}

/// `--n 12` or `--n-list 8,16,32`.
#[derive(Debug, Args, Serialize)]
#[group(required = true, multiple = false)]
pub struct Sizes {
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<usize>>,
}

impl Sizes {
    pub fn values(&self) -> Vec<usize> {
        match (&self.n, &self.n_list) {
            (Some(n), _) => vec![*n],
            (None, Some(list)) => list.clone(),
            (None, None) => Vec::new(),
        }
    }
}

#[derive(Debug, Subcommand, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    /// v*, α* and the bracket 1/(2π) < α* < 2/(3π).
    Constants,
    /// λ*, μ*, R and θ on a grid of x.
    RateTable {
        /// start:stop:step, start at least sqrt(2/π).
        #[arg(long, default_value = "0.8:3:0.01")]
        x_grid: String,
    },
    /// Probability that a fixed configuration is a local minimum.
    Prob {
        #[command(flatten)]
        sizes: Sizes,
        #[arg(long, value_enum, default_value_t = ProbMethod::OrthantQuadrature)]
        method: ProbMethod,
        /// Samples (or instances, for brute-force) for the random methods.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
    },
    /// (1/n) log E[#local minima] and its distance to α*.
    Exponent {
        #[command(flatten)]
        sizes: Sizes,
    },
    /// log P{‖N‖₁ ≥ nx} and the Chernoff correction r_n.
    Tail {
        #[command(flatten)]
        sizes: Sizes,
        #[arg(long, default_value = "1:1.5:0.1")]
        x_grid: String,
    },
    /// P{−H/n^{3/2} ≥ Δ | local minimum} over a grid of Δ.
    Conditional {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value = "0:1:0.01")]
        delta_grid: String,
    },
    /// Greedy descent from random starts on fresh instances.
    Simulate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        replicas: u64,
        #[arg(long, default_value = "steepest")]
        rule: DescentRule,
    },
    /// All local minima of seeded instances, by exhaustive search.
    Enumerate {
        #[arg(long)]
        n: usize,
        /// Number of instances.
        #[arg(long, default_value_t = 1)]
        replicas: u64,
    },
    /// Run the invariant suite.
    Selfcheck {
        #[arg(long, value_enum, default_value_t = Level::Quick)]
        level: Level,
    },
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Constants => "constants",
            Command::RateTable { .. } => "rate-table",
            Command::Prob { .. } => "prob",
            Command::Exponent { .. } => "exponent",
            Command::Tail { .. } => "tail",
            Command::Conditional { .. } => "conditional",
            Command::Simulate { .. } => "simulate",
            Command::Enumerate { .. } => "enumerate",
            Command::Selfcheck { .. } => "selfcheck",
        }
    }

    pub fn default_format(&self) -> Format {
        match self {
            Command::Constants | Command::Prob { .. } | Command::Selfcheck { .. } => Format::Json,
            _ => Format::Csv,
        }
    }
}

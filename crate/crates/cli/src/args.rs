use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use compcond::experiments::{SlopeTarget, Which};
use compcond::PatternSpec;

/// Componentwise condition numbers of sparse matrices.
#[derive(Debug, Parser)]
#[command(name = "compcond", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Condition report for a matrix file (and optional right-hand side).
    Cond(CondArgs),
    /// Draw a Gaussian matrix on a pattern and write it as a matrix file.
    Sample(SampleArgs),
    /// Monte Carlo experiments; each writes one CSV document.
    #[command(subcommand)]
    Exp(ExpCommand),
}

#[derive(Debug, Args)]
pub struct CondArgs {
    /// Matrix file (`matrix n` header, then `i j value` lines).
    pub matrix: PathBuf,
    /// Right-hand side file (`vector n` header, then `i value` lines).
    #[arg(long)]
    pub rhs: Option<PathBuf>,
    /// Include the determinant-based upper-bound tables.
    #[arg(long)]
    pub bounds: bool,
    /// Emit JSON instead of the plain-text report.
    #[arg(long)]
    pub json: bool,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    /// dense | lower | upper | tridiag | band:K | file:PATH
    #[arg(long)]
    pub pattern: PatternSpec,
    /// Dimension; optional for file patterns.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trial index within the seed's stream family.
    #[arg(long, default_value_t = 0)]
    pub trial: u64,
    /// Matrix output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the right-hand side drawn after the matrix.
    #[arg(long)]
    pub rhs_out: Option<PathBuf>,
}

/// Options shared by every experiment.
#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; all cores when omitted. Output does not depend on it.
    #[arg(long)]
    pub threads: Option<usize>,
    /// CSV output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum ExpCommand {
    /// Tail frequencies P(cond >= t) against the theoretical bound.
    Tail {
        /// det | inv | solve
        #[arg(long)]
        which: Which,
        #[arg(long, default_value = "lower")]
        pattern: PatternSpec,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Ascending thresholds, comma separated.
        #[arg(long = "t", value_delimiter = ',', required = true)]
        t: Vec<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Mean log+ of a condition number against the expectation bound.
    Explog {
        /// det | inv | solve
        #[arg(long)]
        which: Which,
        #[arg(long, default_value = "lower")]
        pattern: PatternSpec,
        /// Dimensions, comma separated; optional for file patterns.
        #[arg(long, value_delimiter = ',')]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Logarithm base.
        #[arg(long, default_value_t = 2.0)]
        base: f64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Tail of |x.p / x.q| for Gaussian x against 1/t.
    Stail {
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        p: Vec<f64>,
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_negative_numbers = true
        )]
        q: Vec<f64>,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        /// Ascending thresholds (at least 2), comma separated.
        #[arg(long = "t", value_delimiter = ',', required = true)]
        t: Vec<f64>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Least-squares slope of mean log2 cond against log2 n on lower-triangular matrices.
    Slope {
        /// inv_comp | inv_mixed
        #[arg(long)]
        which: SlopeTarget,
        #[arg(long, value_delimiter = ',', default_value = "10,20,40,80,160,320")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Normwise condition growth of random lower-triangular matrices.
    Kappa {
        #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,256")]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 50)]
        trials: u64,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Forward error of substitution against the predicted bound.
    Accuracy {
        #[arg(long, default_value_t = 100)]
        n: usize,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[command(flatten)]
        run: RunArgs,
    },
}

//! Monte Carlo experiments over the random pattern ensemble.
//!
//! Trial `i` of a run draws everything it needs from the stream
//! `SeedSpec { master_seed, trial_index: i }`: the matrix first, then the
//! right-hand side when one is needed. Trials run on a rayon pool; their
//! records are collected in trial order and every statistic is accumulated
//! sequentially afterwards, so output does not depend on the thread count.

mod accuracy;
pub mod csv;
mod explog;
mod kappa;
mod slope;
mod stail;
mod tail;

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use crate::condition::{CondError, CondValue, Inverted};
use crate::linalg::LinalgError;
use crate::pattern::{Pattern, PatternError};
use crate::rng::{GaussianStream, SeedSpec};

pub use accuracy::{accuracy_experiment, AccuracyTrial};
pub use explog::{corollary_bound, expected_log_bound, expected_log_experiment, ExpectedLog};
pub use kappa::{kappa_experiment, KappaRow};
pub use slope::{ols_fit, slope_experiment, RegressionFit, SizeMean, SlopeResult, SlopeTarget};
pub use stail::stail_experiment;
pub use tail::{tail_bound, tail_experiment, tail_threshold, TailCurve};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ExperimentError {
    #[error("pattern is structurally singular (structural rank {rank} < n = {n}); every sample is singular")]
    VacuousPattern { rank: usize, n: usize },
    #[error("t = {t} is below the threshold {threshold} where the bound applies")]
    BelowThreshold { t: f64, threshold: f64 },
    #[error("t grid must be non-empty and ascending")]
    BadGrid,
    #[error("need ||p|| <= ||q||, got {p_norm} > {q_norm}")]
    NormPrecondition { p_norm: f64, q_norm: f64 },
    #[error("vectors p and q must have the same nonzero length")]
    VectorLength,
    #[error("need at least 2 distinct sizes for a fit, got {0}")]
    TooFewSizes(usize),
    #[error("logarithm base must exceed 1, got {0}")]
    InvalidBase(f64),
    #[error("trial count must be positive")]
    NoTrials,
    #[error("sizes must be positive")]
    ZeroSize,
    #[error("thread pool: {0}")]
    ThreadPool(String),
    #[error(transparent)]
    Cond(#[from] CondError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Pattern(#[from] PatternError),
}

/// Which condition number an experiment measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Which {
    /// `c_det(A)`
    Det,
    /// `max_kl c_kl(A)`
    Inv,
    /// `max_k c_k(A, b)` with `b ~ N(0, I)`
    Solve,
}

impl FromStr for Which {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "det" => Ok(Which::Det),
            "inv" => Ok(Which::Inv),
            "solve" => Ok(Which::Solve),
            _ => Err(format!("unknown target `{s}` (expected det|inv|solve)")),
        }
    }
}

impl fmt::Display for Which {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Which::Det => "det",
            Which::Inv => "inv",
            Which::Solve => "solve",
        })
    }
}

/// Trial count, seed and parallelism shared by every experiment.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct McConfig {
    pub trials: u64,
    pub master_seed: u64,
    /// Worker threads; `None` uses rayon's global pool.
    pub threads: Option<usize>,
}

impl McConfig {
    pub fn new(trials: u64, master_seed: u64) -> Self {
        Self {
            trials,
            master_seed,
            threads: None,
        }
    }

    pub fn with_threads(mut self, threads: usize) -> Self {
        self.threads = Some(threads);
        self
    }

    /// Same trials and threads under another master seed.
    pub fn reseeded(&self, master_seed: u64) -> Self {
        Self {
            master_seed,
            ..*self
        }
    }

    pub fn seed(&self, trial_index: u64) -> SeedSpec {
        SeedSpec::new(self.master_seed, trial_index)
    }
}

/// Runs `f` for every trial index and returns the results in index order.
pub fn run_trials<T, F>(cfg: &McConfig, f: F) -> Result<Vec<T>, ExperimentError>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    if cfg.trials == 0 {
        return Err(ExperimentError::NoTrials);
    }
    let work = || (0..cfg.trials).into_par_iter().map(&f).collect();
    match cfg.threads {
        None => Ok(work()),
        Some(threads) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| ExperimentError::ThreadPool(e.to_string()))?;
            Ok(pool.install(work))
        }
    }
}

/// One trial's outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialRecord {
    pub trial_index: u64,
    pub cond: CondValue,
    /// `0` when elimination hit an exactly zero pivot.
    pub min_pivot_mag: f64,
    pub near_singular: bool,
}

pub(crate) fn require_nonsingular(pattern: &Pattern) -> Result<(), ExperimentError> {
    if pattern.is_structurally_nonsingular() {
        Ok(())
    } else {
        Err(ExperimentError::VacuousPattern {
            rank: pattern.structural_rank(),
            n: pattern.n(),
        })
    }
}

/// Samples trial `seed` and evaluates the requested condition number.
pub fn cond_trial(which: Which, pattern: &Arc<Pattern>, seed: SeedSpec) -> TrialRecord {
    let mut stream = GaussianStream::new(seed);
    let a = stream.matrix(pattern);
    let singular = TrialRecord {
        trial_index: seed.trial_index,
        cond: CondValue::Infinite,
        min_pivot_mag: 0.0,
        near_singular: true,
    };
    let Ok(inv) = Inverted::new(&a) else {
        return singular;
    };
    let cond = match which {
        Which::Det => inv.cond_det(),
        Which::Inv => inv.inverse_condition().cond,
        Which::Solve => {
            let b = stream.vector(pattern.n());
            match inv.solve_condition(&b) {
                Ok(c) => c.cond,
                Err(_) => return singular,
            }
        }
    };
    TrialRecord {
        trial_index: seed.trial_index,
        cond,
        min_pivot_mag: inv.min_pivot_mag(),
        near_singular: inv.is_near_singular(),
    }
}

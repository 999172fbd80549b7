use std::sync::Arc;

use crate::pattern::Pattern;

use super::{cond_trial, require_nonsingular, run_trials, ExperimentError, McConfig, Which};

/// Sample mean of `log+` next to the corollary's upper bound.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedLog {
    pub n: usize,
    pub mean_logplus: f64,
    /// Standard error of `mean_logplus`.
    pub std_err: f64,
    pub bound: f64,
    pub base: f64,
    pub trials: u64,
    /// Trials that entered the mean.
    pub used: u64,
    /// Near-singular or infinite trials, excluded from the mean.
    pub excluded: u64,
}

/// `log_base(t0) + 1 / ln(base)`: the expectation bound for a variable with
/// `P(Z >= t) <= t0 / t`.
pub fn expected_log_bound(t0: f64, base: f64) -> f64 {
    assert!(t0 > 0.0 && base > 1.0, "need t0 > 0 and base > 1");
    t0.ln() / base.ln() + 1.0 / base.ln()
}

/// The tail constant `t0` of each target fed through [`expected_log_bound`]:
/// `|S|^2`, `4 |S|^2 n^2` or `10 |S|^2 n`.
pub fn corollary_bound(which: Which, pattern: &Pattern, base: f64) -> f64 {
    let s = pattern.len() as f64;
    let n = pattern.n() as f64;
    let t0 = match which {
        Which::Det => s * s,
        Which::Inv => 4.0 * s * s * n * n,
        Which::Solve => 10.0 * s * s * n,
    };
    expected_log_bound(t0, base)
}

pub fn expected_log_experiment(
    which: Which,
    pattern: &Arc<Pattern>,
    base: f64,
    cfg: &McConfig,
) -> Result<ExpectedLog, ExperimentError> {
    if base.is_nan() || base <= 1.0 {
        return Err(ExperimentError::InvalidBase(base));
    }
    require_nonsingular(pattern)?;
    let records = run_trials(cfg, |i| cond_trial(which, pattern, cfg.seed(i)))?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut used = 0u64;
    for r in records.iter().filter(|r| !r.near_singular) {
        if let Some(v) = r.cond.log_plus(base) {
            sum += v;
            sum_sq += v * v;
            used += 1;
        }
    }
    let mean = if used > 0 {
        sum / used as f64
    } else {
        f64::NAN
    };
    let var = if used > 1 {
        (sum_sq - used as f64 * mean * mean) / (used - 1) as f64
    } else {
        0.0
    };
    Ok(ExpectedLog {
        n: pattern.n(),
        mean_logplus: mean,
        std_err: (var.max(0.0) / used.max(1) as f64).sqrt(),
        bound: corollary_bound(which, pattern, base),
        base,
        trials: cfg.trials,
        used,
        excluded: cfg.trials - used,
    })
}

use std::sync::Arc;

use crate::pattern::Pattern;

use super::{cond_trial, require_nonsingular, run_trials, ExperimentError, McConfig, Which};

/// Empirical tail frequencies next to their theoretical upper bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct TailCurve {
    pub t_grid: Vec<f64>,
    pub empirical: Vec<f64>,
    pub bound: Vec<f64>,
    pub trials: u64,
    pub near_singular: u64,
}

impl TailCurve {
    /// Three binomial standard deviations at the bound, plus one count.
    pub fn slack(&self, idx: usize) -> f64 {
        let b = self.bound[idx];
        let m = self.trials as f64;
        3.0 * (b * (1.0 - b) / m).sqrt() + 1.0 / m
    }

    /// `empirical <= bound + slack` at every grid point.
    pub fn within_bound(&self) -> bool {
        (0..self.t_grid.len()).all(|i| self.empirical[i] <= self.bound[i] + self.slack(i))
    }
}

/// Smallest `t` the tail bound is stated for: `2|S|`, or `2(|S| + n)` for
/// linear systems.
pub fn tail_threshold(which: Which, pattern: &Pattern) -> f64 {
    let s = pattern.len() as f64;
    match which {
        Which::Det | Which::Inv => 2.0 * s,
        Which::Solve => 2.0 * (s + pattern.n() as f64),
    }
}

/// `min(1, |S|^2/t)`, `min(1, 4|S|^2 n^2/t)` or `min(1, 10|S|^2 n/t)`.
pub fn tail_bound(which: Which, pattern: &Pattern, t: f64) -> f64 {
    let s = pattern.len() as f64;
    let n = pattern.n() as f64;
    let scale = match which {
        Which::Det => s * s,
        Which::Inv => 4.0 * s * s * n * n,
        Which::Solve => 10.0 * s * s * n,
    };
    (scale / t).min(1.0)
}

pub(crate) fn check_grid(t_grid: &[f64], threshold: f64) -> Result<(), ExperimentError> {
    if t_grid.is_empty()
        || t_grid.iter().any(|t| t.is_nan())
        || t_grid.windows(2).any(|w| w[0] >= w[1])
    {
        return Err(ExperimentError::BadGrid);
    }
    match t_grid.iter().find(|&&t| t < threshold) {
        Some(&t) => Err(ExperimentError::BelowThreshold { t, threshold }),
        None => Ok(()),
    }
}

/// Frequency of `cond >= t` over the ensemble. Infinite and near-singular
/// trials count as exceeding every `t`.
pub fn tail_experiment(
    which: Which,
    pattern: &Arc<Pattern>,
    t_grid: &[f64],
    cfg: &McConfig,
) -> Result<TailCurve, ExperimentError> {
    require_nonsingular(pattern)?;
    check_grid(t_grid, tail_threshold(which, pattern))?;
    let records = run_trials(cfg, |i| cond_trial(which, pattern, cfg.seed(i)))?;

    let mut counts = vec![0u64; t_grid.len()];
    let mut near_singular = 0u64;
    for r in &records {
        if r.near_singular {
            near_singular += 1;
        }
        let value = if r.near_singular {
            f64::INFINITY
        } else {
            r.cond.to_f64()
        };
        for (count, &t) in counts.iter_mut().zip(t_grid) {
            if value >= t {
                *count += 1;
            }
        }
    }
    let m = cfg.trials as f64;
    Ok(TailCurve {
        t_grid: t_grid.to_vec(),
        empirical: counts.iter().map(|&c| c as f64 / m).collect(),
        bound: t_grid
            .iter()
            .map(|&t| tail_bound(which, pattern, t))
            .collect(),
        trials: cfg.trials,
        near_singular,
    })
}

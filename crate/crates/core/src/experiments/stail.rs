use crate::rng::sample_vector;

use super::tail::check_grid;
use super::{run_trials, ExperimentError, McConfig, TailCurve};

/// Frequency of `|x.p / x.q| >= t` for `x ~ N(0, I)`, against the bound
/// `1/t` that holds for `||p|| <= ||q||` and `t >= 2`.
pub fn stail_experiment(
    p: &[f64],
    q: &[f64],
    t_grid: &[f64],
    cfg: &McConfig,
) -> Result<TailCurve, ExperimentError> {
    if p.is_empty() || p.len() != q.len() {
        return Err(ExperimentError::VectorLength);
    }
    let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let (p_norm, q_norm) = (norm(p), norm(q));
    if p_norm > q_norm {
        return Err(ExperimentError::NormPrecondition { p_norm, q_norm });
    }
    check_grid(t_grid, 2.0)?;
    let n = p.len();
    let ratios = run_trials(cfg, |i| {
        let x = sample_vector(n, cfg.seed(i));
        let dot = |v: &[f64]| x.iter().zip(v).map(|(a, b)| a * b).sum::<f64>();
        // 0/0 is NaN and never counts
        (dot(p) / dot(q)).abs()
    })?;
    let m = cfg.trials as f64;
    let empirical = t_grid
        .iter()
        .map(|&t| ratios.iter().filter(|&&r| r >= t).count() as f64 / m)
        .collect();
    Ok(TailCurve {
        t_grid: t_grid.to_vec(),
        empirical,
        bound: t_grid.iter().map(|&t| (1.0 / t).min(1.0)).collect(),
        trials: cfg.trials,
        near_singular: 0,
    })
}

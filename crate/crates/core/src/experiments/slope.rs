use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::condition::{CondValue, Inverted};
use crate::pattern::{Pattern, PatternKind};
use crate::rng::{sample_matrix, SeedSpec};

use super::{run_trials, ExperimentError, McConfig};

/// Condition number regressed against `log2 n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlopeTarget {
    /// `c†(L_n)`, the largest componentwise condition of an inverse entry.
    InvComp,
    /// `m†(L_n)`, the mixed condition of inversion.
    InvMixed,
}

impl FromStr for SlopeTarget {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inv_comp" => Ok(SlopeTarget::InvComp),
            "inv_mixed" => Ok(SlopeTarget::InvMixed),
            _ => Err(format!(
                "unknown target `{s}` (expected inv_comp|inv_mixed)"
            )),
        }
    }
}

impl fmt::Display for SlopeTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SlopeTarget::InvComp => "inv_comp",
            SlopeTarget::InvMixed => "inv_mixed",
        })
    }
}

/// Ordinary least squares line through `points`.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_rms: f64,
    pub points: Vec<(f64, f64)>,
}

impl RegressionFit {
    pub fn predict(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

/// Fits `y = slope x + intercept`. Needs two distinct abscissae.
pub fn ols_fit(points: &[(f64, f64)]) -> Result<RegressionFit, ExperimentError> {
    let mut xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    xs.sort_by(f64::total_cmp);
    xs.dedup();
    if xs.len() < 2 {
        return Err(ExperimentError::TooFewSizes(xs.len()));
    }
    let m = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / m;
    let my = points.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = points
        .iter()
        .map(|&(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Ok(RegressionFit {
        slope,
        intercept,
        residual_rms: (sse / m).sqrt(),
        points: points.to_vec(),
    })
}

/// Per-size sample mean of `log2 cond`.
#[derive(Debug, Clone, PartialEq)]
pub struct SizeMean {
    pub n: usize,
    pub mean_log2: f64,
    /// Trials that entered the mean.
    pub used: u64,
    /// Near-singular or infinite trials, excluded from the mean.
    pub excluded: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeResult {
    pub target: SlopeTarget,
    pub fit: RegressionFit,
    pub rows: Vec<SizeMean>,
    pub trials: u64,
}

/// Mean `log2` of `c†` or `m†` over random lower-triangular matrices at each
/// size, then the OLS fit against `log2 n`. Size `n` draws its trials under
/// the master seed `SeedSpec::derive_master(master_seed, n)`.
pub fn slope_experiment(
    target: SlopeTarget,
    sizes: &[usize],
    cfg: &McConfig,
) -> Result<SlopeResult, ExperimentError> {
    if sizes.contains(&0) {
        return Err(ExperimentError::ZeroSize);
    }
    let mut distinct = sizes.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 2 {
        return Err(ExperimentError::TooFewSizes(distinct.len()));
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let pattern = Arc::new(Pattern::from_kind(PatternKind::LowerTriangular, n)?);
        let size_cfg = cfg.reseeded(SeedSpec::derive_master(cfg.master_seed, n as u64));
        let values = run_trials(&size_cfg, |i| {
            let a = sample_matrix(&pattern, size_cfg.seed(i));
            let inv = Inverted::new(&a)
                .ok()
                .filter(|inv| !inv.is_near_singular())?;
            let report = inv.inverse_condition();
            match target {
                SlopeTarget::InvComp => Some(report.cond),
                SlopeTarget::InvMixed => Some(report.mixed),
            }
        })?;
        let mut sum = 0.0;
        let mut used = 0u64;
        for v in values.into_iter().flatten() {
            if let CondValue::Finite(x) = v {
                if x > 0.0 {
                    sum += x.log2();
                    used += 1;
                }
            }
        }
        rows.push(SizeMean {
            n,
            mean_log2: if used > 0 {
                sum / used as f64
            } else {
                f64::NAN
            },
            used,
            excluded: cfg.trials - used,
        });
    }
    let points: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n as f64).log2(), r.mean_log2))
        .collect();
    Ok(SlopeResult {
        target,
        fit: ols_fit(&points)?,
        rows,
        trials: cfg.trials,
    })
}

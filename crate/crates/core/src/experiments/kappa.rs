use std::sync::Arc;

use crate::condition::{CondValue, Inverted};
use crate::pattern::{Pattern, PatternKind};
use crate::rng::{sample_matrix, SeedSpec};

use super::{run_trials, ExperimentError, McConfig};

/// Normwise against componentwise growth at one size.
#[derive(Debug, Clone, PartialEq)]
pub struct KappaRow {
    pub n: usize,
    /// Mean of `kappa^(1/n)` with `kappa = ||L||_inf ||L^-1||_inf`.
    pub mean_kappa_root: f64,
    pub mean_log2_kappa: f64,
    /// Mean `log2 c†(L)` over the same samples.
    pub mean_log2_cond_inv: f64,
    pub trials: u64,
    /// Near-singular trials, excluded from every mean.
    pub excluded: u64,
}

struct Sample {
    log2_kappa: f64,
    log2_cond: f64,
}

/// Random lower-triangular matrices at each size. Size `n` draws its trials
/// under `SeedSpec::derive_master(master_seed, n)`.
pub fn kappa_experiment(sizes: &[usize], cfg: &McConfig) -> Result<Vec<KappaRow>, ExperimentError> {
    if sizes.contains(&0) {
        return Err(ExperimentError::ZeroSize);
    }
    let mut rows = Vec::with_capacity(sizes.len());
    for &n in sizes {
        let pattern = Arc::new(Pattern::from_kind(PatternKind::LowerTriangular, n)?);
        let size_cfg = cfg.reseeded(SeedSpec::derive_master(cfg.master_seed, n as u64));
        let samples = run_trials(&size_cfg, |i| {
            let a = sample_matrix(&pattern, size_cfg.seed(i));
            let inv = Inverted::new(&a)
                .ok()
                .filter(|inv| !inv.is_near_singular())?;
            let log2_kappa = a.norm_inf().log2() + inv.inverse().norm_inf().log2();
            let log2_cond = match inv.inverse_condition().cond {
                CondValue::Finite(c) => c.log2(),
                CondValue::Zero => f64::NEG_INFINITY,
                CondValue::Infinite => f64::INFINITY,
            };
            Some(Sample {
                log2_kappa,
                log2_cond,
            })
        })?;
        let (mut root, mut log_k, mut log_c, mut used) = (0.0, 0.0, 0.0, 0u64);
        for s in samples.iter().flatten() {
            root += (s.log2_kappa / n as f64).exp2();
            log_k += s.log2_kappa;
            log_c += s.log2_cond;
            used += 1;
        }
        let mean = |sum: f64| {
            if used > 0 {
                sum / used as f64
            } else {
                f64::NAN
            }
        };
        rows.push(KappaRow {
            n,
            mean_kappa_root: mean(root),
            mean_log2_kappa: mean(log_k),
            mean_log2_cond_inv: mean(log_c),
            trials: cfg.trials,
            excluded: cfg.trials - used,
        });
    }
    Ok(rows)
}

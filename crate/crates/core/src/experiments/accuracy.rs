use std::sync::Arc;

use crate::condition::Inverted;
use crate::linalg::{self, DoubleDouble, UNIT_ROUNDOFF};
use crate::pattern::{Pattern, PatternKind};
use crate::rng::GaussianStream;

use super::{run_trials, ExperimentError, McConfig};

/// Forward error of binary64 substitution on one triangular system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AccuracyTrial {
    pub trial: u64,
    /// `max_k |xhat_k - x_k| / |x_k|` against the double-double solution.
    pub observed: f64,
    /// `c(T, b) (n + 1) u`.
    pub predictor: f64,
    /// `observed / predictor`, `0` when both vanish.
    pub ratio: f64,
    pub log2_kappa: f64,
    pub near_singular: bool,
}

fn relative_gap(xhat: f64, exact: DoubleDouble) -> f64 {
    let diff = (DoubleDouble::from_f64(xhat) - exact).to_f64().abs();
    let scale = exact.to_f64().abs();
    if scale != 0.0 {
        diff / scale
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Solves `T x = b` for random lower-triangular `T` and `b ~ N(0, I)` drawn
/// from the same trial stream, and compares the substitution result with a
/// double-double reference.
pub fn accuracy_experiment(
    n: usize,
    cfg: &McConfig,
) -> Result<Vec<AccuracyTrial>, ExperimentError> {
    if n == 0 {
        return Err(ExperimentError::ZeroSize);
    }
    let pattern = Arc::new(Pattern::from_kind(PatternKind::LowerTriangular, n)?);
    let trials = run_trials(cfg, |i| -> Result<AccuracyTrial, ExperimentError> {
        let mut stream = GaussianStream::new(cfg.seed(i));
        let t = stream.matrix(&pattern);
        let b = stream.vector(n);
        let inv = Inverted::new(&t)?;
        let xhat = linalg::triangular_solve(&t, &b)?;
        let exact = linalg::refined_solve_dd(&t, &b)?;
        let observed = xhat
            .iter()
            .zip(&exact)
            .map(|(&xh, &x)| relative_gap(xh, x))
            .fold(0.0, f64::max);
        let cond = inv.solve_condition(&b)?.cond.to_f64();
        let predictor = cond * (n as f64 + 1.0) * UNIT_ROUNDOFF;
        let ratio = if observed == 0.0 {
            0.0
        } else {
            observed / predictor
        };
        Ok(AccuracyTrial {
            trial: i,
            observed,
            predictor,
            ratio,
            log2_kappa: t.norm_inf().log2() + inv.inverse().norm_inf().log2(),
            near_singular: inv.is_near_singular(),
        })
    })?;
    trials.into_iter().collect()
}

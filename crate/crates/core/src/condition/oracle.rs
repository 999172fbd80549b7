//! Brute-force evaluation of the condition definitions.
//!
//! Every data entry is perturbed to `v (1 ± step)` and all sign combinations
//! are enumerated; to first order the worst case of a linear functional over
//! the box sits at one of those vertices. No inverse-based formula is used,
//! only the function being conditioned.

use std::sync::Arc;

use crate::linalg::{self, LinalgError};
use crate::matrix::Matrix;

use super::CondError;

/// Cap on `|S|` (plus `n` when the right-hand side is perturbed).
pub const ORACLE_MAX_UNKNOWNS: usize = 14;

pub const DEFAULT_STEPS: [f64; 3] = [1e-4, 1e-5, 1e-6];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleTarget {
    Det,
    /// Entry `(k, l)` of the inverse.
    InvEntry {
        k: usize,
        l: usize,
    },
    /// Component `k` of `A^-1 b`.
    SolveEntry {
        k: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Estimate at the smallest step. `0` or `inf` when the unperturbed
    /// value is zero.
    pub value: f64,
    /// `(step, estimate)` for every step tried.
    pub per_step: Vec<(f64, f64)>,
    /// Largest relative deviation of any estimate from `value`.
    pub spread: f64,
}

pub fn bruteforce_cond(
    target: OracleTarget,
    a: &Matrix,
    b: Option<&[f64]>,
    steps: &[f64],
) -> Result<OracleResult, CondError> {
    let n = a.n();
    if let Some(&bad) = steps.iter().find(|&&s| !(s > 0.0 && s < 1.0)) {
        return Err(CondError::InvalidStep(bad));
    }
    assert!(!steps.is_empty(), "at least one step is required");
    let rhs = match target {
        OracleTarget::SolveEntry { k } => {
            if k >= n {
                return Err(CondError::IndexOutOfRange { index: k, n });
            }
            let b = b.expect("solve target needs a right-hand side");
            if b.len() != n {
                return Err(LinalgError::DimensionMismatch {
                    expected: n,
                    found: b.len(),
                }
                .into());
            }
            Some(b)
        }
        OracleTarget::InvEntry { k, l } => {
            for index in [k, l] {
                if index >= n {
                    return Err(CondError::IndexOutOfRange { index, n });
                }
            }
            None
        }
        OracleTarget::Det => None,
    };
    let unknowns = a.pattern().len() + rhs.map_or(0, <[f64]>::len);
    if unknowns > ORACLE_MAX_UNKNOWNS {
        return Err(CondError::OracleTooLarge {
            unknowns,
            max: ORACLE_MAX_UNKNOWNS,
        });
    }

    let eval = |m: &Matrix, v: Option<&[f64]>| -> Result<f64, LinalgError> {
        match target {
            OracleTarget::Det => Ok(linalg::det(m)),
            OracleTarget::InvEntry { k, l } => Ok(linalg::inverse(m)?.get(k, l)),
            OracleTarget::SolveEntry { k } => Ok(linalg::solve(m, v.expect("rhs"))?[k]),
        }
    };
    let base = eval(a, rhs)?;

    // only nonzero data moves under relative perturbation
    let entries: Vec<usize> = a
        .pattern()
        .support()
        .iter()
        .map(|&(i, j)| i * n + j)
        .filter(|&idx| a.as_slice()[idx] != 0.0)
        .collect();
    let rhs_entries: Vec<usize> = rhs
        .map(|b| (0..n).filter(|&i| b[i] != 0.0).collect())
        .unwrap_or_default();
    let bits = entries.len() + rhs_entries.len();

    let pattern = Arc::clone(a.pattern());
    let mut per_step = Vec::with_capacity(steps.len());
    for &step in steps {
        let mut worst = 0.0f64;
        for signs in 0u32..(1u32 << bits) {
            let sign = |bit: usize| if signs >> bit & 1 == 1 { -step } else { step };
            let mut data = a.as_slice().to_vec();
            for (bit, &idx) in entries.iter().enumerate() {
                data[idx] *= 1.0 + sign(bit);
            }
            let perturbed = Matrix::masked(Arc::clone(&pattern), data);
            let pb: Option<Vec<f64>> = rhs.map(|b| {
                let mut pb = b.to_vec();
                for (offset, &i) in rhs_entries.iter().enumerate() {
                    pb[i] *= 1.0 + sign(entries.len() + offset);
                }
                pb
            });
            // a vertex may land on a singular matrix only for huge steps
            let value = eval(&perturbed, pb.as_deref())?;
            worst = worst.max((value - base).abs());
        }
        let estimate = if base != 0.0 {
            worst / (step * base.abs())
        } else if worst == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        per_step.push((step, estimate));
    }
    let smallest =
        per_step.iter().copied().fold(
            (f64::INFINITY, 0.0),
            |acc, cur| if cur.0 < acc.0 { cur } else { acc },
        );
    let value = smallest.1;
    let spread = per_step
        .iter()
        .map(|&(_, v)| {
            if v == value {
                0.0
            } else {
                (v - value).abs() / value.abs()
            }
        })
        .fold(0.0, f64::max);
    Ok(OracleResult {
        value,
        per_step,
        spread,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn hand_examples() {
        let a = Matrix::from_rows(&[&[2.0, 1.0], &[1.0, 1.0]]);
        let det = bruteforce_cond(OracleTarget::Det, &a, None, &[1e-6]).unwrap();
        assert!(rel(det.value, 6.0) <= 1e-4);
        let inv =
            bruteforce_cond(OracleTarget::InvEntry { k: 0, l: 1 }, &a, None, &[1e-6]).unwrap();
        assert!(rel(inv.value, 7.0) <= 1e-3);
        let sol = bruteforce_cond(
            OracleTarget::SolveEntry { k: 1 },
            &a,
            Some(&[3.0, 2.0]),
            &DEFAULT_STEPS,
        )
        .unwrap();
        assert!(rel(sol.value, 14.0) <= 1e-3);
        assert_eq!(sol.per_step.len(), 3);
        assert!(sol.spread < 1e-3);
    }

    #[test]
    fn guards() {
        let big = Matrix::dense(4, vec![1.0; 16]);
        assert!(matches!(
            bruteforce_cond(OracleTarget::Det, &big, None, &[1e-6]),
            Err(CondError::OracleTooLarge {
                unknowns: 16,
                max: 14
            })
        ));
        let a = Matrix::identity(2);
        assert_eq!(
            bruteforce_cond(OracleTarget::Det, &a, None, &[0.0]),
            Err(CondError::InvalidStep(0.0))
        );
        assert!(matches!(
            bruteforce_cond(OracleTarget::InvEntry { k: 2, l: 0 }, &a, None, &[1e-6]),
            Err(CondError::IndexOutOfRange { index: 2, n: 2 })
        ));
    }

    #[test]
    fn zero_target_conventions() {
        let id = Matrix::identity(3);
        let off =
            bruteforce_cond(OracleTarget::InvEntry { k: 0, l: 1 }, &id, None, &[1e-6]).unwrap();
        assert_eq!(off.value, 0.0);
        let singular = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]);
        let d = bruteforce_cond(OracleTarget::Det, &singular, None, &[1e-6]).unwrap();
        assert_eq!(d.value, f64::INFINITY);
    }
}

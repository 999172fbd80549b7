//! Componentwise and mixed condition numbers of the determinant, the inverse
//! and the solution of a linear system, relative to perturbations that keep
//! the sparsity pattern.
//!
//! With `G = A^-1`, first-order perturbation of each entry by a relative
//! amount at most `d` gives:
//!
//! * determinant: `c_det(A) = sum_{(i,j) in S} |a_ij g_ji|`
//! * inverse entry: `c_kl(A) = sum_{(i,j) in S} |g_ki a_ij g_jl| / |g_kl|`
//! * solution entry: `c_k(A, b) = ((|G||A||x|)_k + (|G||b|)_k) / |x_k|`
//!
//! Mixed variants use the entrywise max norm on matrices and the infinity
//! norm on vectors. When the denominator vanishes the value is [`CondValue::Zero`]
//! if the numerator vanishes too and [`CondValue::Infinite`] otherwise; sums of
//! absolute values are compared to zero exactly.

mod oracle;

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::linalg::{self, factorize, Factorization, LinalgError};
use crate::matrix::Matrix;

pub use oracle::{bruteforce_cond, OracleResult, OracleTarget, DEFAULT_STEPS, ORACLE_MAX_UNKNOWNS};

/// Largest dimension the bound helpers accept (they factor `n^2` minors).
pub const BOUND_MAX_N: usize = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CondError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("brute-force oracle needs {unknowns} sign bits, limit is {max}")]
    OracleTooLarge { unknowns: usize, max: usize },
    #[error("perturbation step {0} must lie in (0, 1)")]
    InvalidStep(f64),
    #[error("index {index} out of range for n = {n}")]
    IndexOutOfRange { index: usize, n: usize },
}

/// Extended nonnegative condition value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "tag", content = "value", rename_all = "lowercase")]
pub enum CondValue {
    Finite(f64),
    Zero,
    Infinite,
}

impl CondValue {
    /// `numerator / |denominator|` with the zero-denominator convention.
    pub fn from_ratio(numerator: f64, denominator: f64) -> Self {
        if denominator != 0.0 {
            CondValue::Finite(numerator / denominator.abs())
        } else if numerator == 0.0 {
            CondValue::Zero
        } else {
            CondValue::Infinite
        }
    }

    /// Numeric value with `Zero -> 0` and `Infinite -> inf`.
    pub fn to_f64(self) -> f64 {
        match self {
            CondValue::Finite(v) => v,
            CondValue::Zero => 0.0,
            CondValue::Infinite => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, CondValue::Finite(_))
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, CondValue::Infinite)
    }

    /// `log_base(v)` for `v >= 1`, else `0`; `None` for `Infinite`.
    pub fn log_plus(self, base: f64) -> Option<f64> {
        match self {
            CondValue::Finite(v) if v >= 1.0 => Some(v.ln() / base.ln()),
            CondValue::Finite(_) | CondValue::Zero => Some(0.0),
            CondValue::Infinite => None,
        }
    }
}

/// Maximum with `Infinite` dominating; the first maximizer wins ties.
fn argmax<I: IntoIterator<Item = CondValue>>(values: I) -> (CondValue, usize) {
    let mut best = (CondValue::Zero, 0usize);
    let mut best_f = f64::NEG_INFINITY;
    for (idx, v) in values.into_iter().enumerate() {
        let f = v.to_f64();
        if f > best_f {
            best = (v, idx);
            best_f = f;
            if v.is_infinite() {
                break;
            }
        }
    }
    best
}

/// `d(u, v) = max_i |u_i - v_i| / |v_i|` with `0/0 = 0` and `x/0 = inf`.
pub fn comp_distance(u: &[f64], v: &[f64]) -> f64 {
    assert_eq!(u.len(), v.len(), "comp_distance needs equal lengths");
    u.iter().zip(v).fold(0.0, |acc, (&ui, &vi)| {
        let diff = (ui - vi).abs();
        let w = if vi != 0.0 {
            diff / vi.abs()
        } else if diff == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        acc.max(w)
    })
}

impl fmt::Display for CondValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CondValue::Finite(v) => write!(f, "{v}"),
            CondValue::Zero => f.write_str("0"),
            CondValue::Infinite => f.write_str("inf"),
        }
    }
}

/// A nonsingular matrix together with its factorization and masked inverse.
#[derive(Debug, Clone)]
pub struct Inverted<'a> {
    a: &'a Matrix,
    factors: Factorization<'a>,
    gamma: Matrix,
}

/// Componentwise and mixed condition of `A -> A^-1`.
#[derive(Debug, Clone, PartialEq)]
pub struct InverseCondition {
    pub n: usize,
    /// `c_kl`, row-major.
    pub entries: Vec<CondValue>,
    pub cond: CondValue,
    pub argmax: (usize, usize),
    pub mixed: CondValue,
}

impl InverseCondition {
    pub fn entry(&self, k: usize, l: usize) -> CondValue {
        self.entries[k * self.n + l]
    }
}

/// Componentwise and mixed condition of `(A, b) -> A^-1 b`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveCondition {
    pub x: Vec<f64>,
    pub entries: Vec<CondValue>,
    pub cond: CondValue,
    pub argmax: usize,
    pub mixed: CondValue,
}

impl<'a> Inverted<'a> {
    pub fn new(a: &'a Matrix) -> Result<Self, LinalgError> {
        let factors = factorize(a)?;
        let gamma = Matrix::masked(linalg::inverse_pattern(a), factors.inverse_data());
        Ok(Self { a, factors, gamma })
    }

    pub fn matrix(&self) -> &Matrix {
        self.a
    }

    pub fn inverse(&self) -> &Matrix {
        &self.gamma
    }

    pub fn factors(&self) -> &Factorization<'a> {
        &self.factors
    }

    pub fn min_pivot_mag(&self) -> f64 {
        self.factors.min_pivot_mag()
    }

    pub fn is_near_singular(&self) -> bool {
        linalg::is_near_singular(self.min_pivot_mag(), self.a.max_abs())
    }

    pub fn cond_det(&self) -> CondValue {
        let s: f64 = self
            .a
            .pattern()
            .support()
            .iter()
            .map(|&(i, j)| (self.a.get(i, j) * self.gamma.get(j, i)).abs())
            .sum();
        CondValue::Finite(s)
    }

    /// `sum_{(i,j) in S} |g_ki a_ij g_jl|`
    fn inv_numerator(&self, k: usize, l: usize) -> f64 {
        self.a
            .pattern()
            .support()
            .iter()
            .map(|&(i, j)| (self.gamma.get(k, i) * self.a.get(i, j) * self.gamma.get(j, l)).abs())
            .sum()
    }

    fn inv_value(&self, k: usize, l: usize, numerator: f64) -> CondValue {
        if !self.gamma.pattern().contains(k, l) {
            // g_kl vanishes identically on the pattern, so do its derivatives
            return CondValue::Zero;
        }
        CondValue::from_ratio(numerator, self.gamma.get(k, l))
    }

    pub fn inv_entry(&self, k: usize, l: usize) -> CondValue {
        self.inv_value(k, l, self.inv_numerator(k, l))
    }

    /// `N = |G| |A| |G|`, row-major.
    pub fn inv_numerators(&self) -> Vec<f64> {
        let n = self.a.n();
        let g: Vec<f64> = self.gamma.as_slice().iter().map(|v| v.abs()).collect();
        let a = self.a.as_slice();
        let mut ga = vec![0.0; n * n];
        matmul_abs_acc(&g, a, &mut ga, n);
        let mut numer = vec![0.0; n * n];
        matmul_abs_acc(&ga, &g, &mut numer, n);
        numer
    }

    pub fn inverse_condition(&self) -> InverseCondition {
        let n = self.a.n();
        let numer = self.inv_numerators();
        let entries: Vec<CondValue> = (0..n * n)
            .map(|idx| self.inv_value(idx / n, idx % n, numer[idx]))
            .collect();
        let (cond, idx) = argmax(entries.iter().copied());
        let max_numer = numer.iter().fold(0.0f64, |m, &v| m.max(v));
        let max_gamma = self.gamma.max_abs();
        InverseCondition {
            n,
            entries,
            cond,
            argmax: (idx / n.max(1), idx % n.max(1)),
            mixed: CondValue::from_ratio(max_numer, max_gamma),
        }
    }

    pub fn solve_condition(&self, b: &[f64]) -> Result<SolveCondition, CondError> {
        let n = self.a.n();
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: b.len(),
            }
            .into());
        }
        let inv_pattern = self.gamma.pattern();
        let structural: Vec<bool> = (0..n)
            .map(|k| (0..n).any(|i| b[i] != 0.0 && inv_pattern.contains(k, i)))
            .collect();
        let mut x = self.factors.solve(b);
        for (xk, &live) in x.iter_mut().zip(&structural) {
            if !live {
                *xk = 0.0;
            }
        }
        // r = |A||x| + |b|
        let r: Vec<f64> = (0..n)
            .map(|i| {
                let ax: f64 = self
                    .a
                    .row(i)
                    .iter()
                    .zip(&x)
                    .map(|(a, v)| (a * v).abs())
                    .sum();
                ax + b[i].abs()
            })
            .collect();
        let numer: Vec<f64> = (0..n)
            .map(|k| {
                self.gamma
                    .row(k)
                    .iter()
                    .zip(&r)
                    .map(|(g, v)| g.abs() * v)
                    .sum()
            })
            .collect();
        let entries: Vec<CondValue> = (0..n)
            .map(|k| {
                if structural[k] {
                    CondValue::from_ratio(numer[k], x[k])
                } else {
                    CondValue::Zero
                }
            })
            .collect();
        let (cond, argmax) = argmax(entries.iter().copied());
        let max_numer = numer.iter().fold(0.0f64, |m, &v| m.max(v));
        let max_x = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Ok(SolveCondition {
            x,
            entries,
            cond,
            argmax,
            mixed: CondValue::from_ratio(max_numer, max_x),
        })
    }
}

/// `out += |lhs| * rhs_abs` where `lhs` is already nonnegative; skips zero
/// entries of `lhs` so triangular and banded products stay cheap.
fn matmul_abs_acc(lhs: &[f64], rhs: &[f64], out: &mut [f64], n: usize) {
    for i in 0..n {
        let out_row = &mut out[i * n..(i + 1) * n];
        for k in 0..n {
            let l = lhs[i * n + k];
            if l == 0.0 {
                continue;
            }
            let rhs_row = &rhs[k * n..(k + 1) * n];
            for (o, r) in out_row.iter_mut().zip(rhs_row) {
                *o += l * r.abs();
            }
        }
    }
}

fn check_index(index: usize, n: usize) -> Result<(), CondError> {
    if index < n {
        Ok(())
    } else {
        Err(CondError::IndexOutOfRange { index, n })
    }
}

/// `c_det(A)`. Singular inputs give `Zero` or `Infinite` according to whether
/// `sum |a_ij det(A_(ij))|` vanishes; structurally singular patterns always
/// give `Zero`.
pub fn cond_det(a: &Matrix) -> CondValue {
    if !a.pattern().is_structurally_nonsingular() {
        return CondValue::Zero;
    }
    match Inverted::new(a) {
        Ok(inv) => inv.cond_det(),
        Err(_) => {
            let s: f64 = a
                .pattern()
                .support()
                .iter()
                .filter(|&&(i, j)| a.get(i, j) != 0.0)
                .map(|&(i, j)| (a.get(i, j) * linalg::minor_det(a, i, j)).abs())
                .sum();
            if s == 0.0 {
                CondValue::Zero
            } else {
                CondValue::Infinite
            }
        }
    }
}

pub fn cond_inv_entry(a: &Matrix, k: usize, l: usize) -> Result<CondValue, CondError> {
    check_index(k, a.n())?;
    check_index(l, a.n())?;
    Ok(Inverted::new(a)?.inv_entry(k, l))
}

/// Maximum of the inverse-entry conditions and its first row-major maximizer.
pub fn cond_inv(a: &Matrix) -> Result<(CondValue, (usize, usize)), CondError> {
    let c = Inverted::new(a)?.inverse_condition();
    Ok((c.cond, c.argmax))
}

pub fn mixed_inv(a: &Matrix) -> Result<CondValue, CondError> {
    Ok(Inverted::new(a)?.inverse_condition().mixed)
}

pub fn cond_solve_entry(a: &Matrix, b: &[f64], k: usize) -> Result<CondValue, CondError> {
    check_index(k, a.n())?;
    Ok(Inverted::new(a)?.solve_condition(b)?.entries[k])
}

pub fn cond_solve(a: &Matrix, b: &[f64]) -> Result<(CondValue, usize), CondError> {
    let c = Inverted::new(a)?.solve_condition(b)?;
    Ok((c.cond, c.argmax))
}

pub fn mixed_solve(a: &Matrix, b: &[f64]) -> Result<CondValue, CondError> {
    Ok(Inverted::new(a)?.solve_condition(b)?.mixed)
}

/// `c_det(A) + c_det(A_(lk))`, an upper bound for `c_kl(A)`.
pub fn cond_inv_bound(a: &Matrix, k: usize, l: usize) -> Result<f64, CondError> {
    let n = a.n();
    check_index(k, n)?;
    check_index(l, n)?;
    if n > BOUND_MAX_N {
        return Err(LinalgError::TooLarge {
            n,
            max: BOUND_MAX_N,
        }
        .into());
    }
    let outer = Inverted::new(a)?.cond_det();
    Ok(outer.to_f64() + cond_det(&linalg::submatrix(a, l, k)).to_f64())
}

/// `c_det(A) + c_det(R_k)`, an upper bound for `c_k(A, b)`.
pub fn cond_solve_bound(a: &Matrix, b: &[f64], k: usize) -> Result<f64, CondError> {
    let n = a.n();
    check_index(k, n)?;
    if b.len() != n {
        return Err(LinalgError::DimensionMismatch {
            expected: n,
            found: b.len(),
        }
        .into());
    }
    let outer = Inverted::new(a)?.cond_det();
    Ok(outer.to_f64() + cond_det(&linalg::replace_column(a, k, b)).to_f64())
}

/// Lemma-style upper bounds next to the values they bound.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundTables {
    /// `c_det(A) + c_det(A_(lk))`, row-major over `(k, l)`.
    pub inv: Vec<f64>,
    /// `c_det(A) + c_det(R_k)`, present with a right-hand side.
    pub solve: Option<Vec<f64>>,
}

/// Everything computed for one matrix (and optional right-hand side).
#[derive(Debug, Clone, PartialEq)]
pub struct CondReport {
    pub n: usize,
    pub cond_det: CondValue,
    /// `None` when the matrix is singular.
    pub inverse: Option<InverseCondition>,
    pub solve: Option<SolveCondition>,
    pub bounds: Option<BoundTables>,
    pub min_pivot_mag: Option<f64>,
}

pub fn cond_report(
    a: &Matrix,
    b: Option<&[f64]>,
    with_bounds: bool,
) -> Result<CondReport, CondError> {
    let n = a.n();
    if let Some(b) = b {
        if b.len() != n {
            return Err(LinalgError::DimensionMismatch {
                expected: n,
                found: b.len(),
            }
            .into());
        }
    }
    let det_value = cond_det(a);
    let inv = match Inverted::new(a) {
        Ok(inv) => inv,
        Err(LinalgError::Singular { .. }) => {
            return Ok(CondReport {
                n,
                cond_det: det_value,
                inverse: None,
                solve: None,
                bounds: None,
                min_pivot_mag: None,
            })
        }
        Err(e) => return Err(e.into()),
    };
    let inverse = inv.inverse_condition();
    let solve = b.map(|b| inv.solve_condition(b)).transpose()?;
    let bounds = if with_bounds {
        if n > BOUND_MAX_N {
            return Err(LinalgError::TooLarge {
                n,
                max: BOUND_MAX_N,
            }
            .into());
        }
        let base = inv.cond_det().to_f64();
        let inv_bounds = (0..n * n)
            .map(|idx| base + cond_det(&linalg::submatrix(a, idx % n, idx / n)).to_f64())
            .collect();
        let solve_bounds = b.map(|b| {
            (0..n)
                .map(|k| base + cond_det(&linalg::replace_column(a, k, b)).to_f64())
                .collect()
        });
        Some(BoundTables {
            inv: inv_bounds,
            solve: solve_bounds,
        })
    } else {
        None
    };
    Ok(CondReport {
        n,
        cond_det: det_value,
        inverse: Some(inverse),
        solve,
        bounds,
        min_pivot_mag: Some(inv.min_pivot_mag()),
    })
}

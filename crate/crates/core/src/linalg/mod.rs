//! Dense binary64 linear algebra for the condition formulas.
//!
//! Triangular inputs (detected from the entries) are handled by substitution
//! without pivoting, which keeps their inverses exactly triangular and
//! componentwise accurate. Everything else goes through partial-pivoting LU.
//! Computed inverses are masked with the structural inverse pattern, so
//! entries that vanish identically over the pattern are exactly zero.

mod dd;
mod lu;

use std::sync::Arc;

use thiserror::Error;

use crate::matrix::Matrix;
use crate::pattern::Pattern;

pub use dd::DoubleDouble;
pub use lu::{lu_factor, LuFactors};

/// Unit roundoff of binary64, `2^-53`.
pub const UNIT_ROUNDOFF: f64 = 1.0 / (1u64 << 53) as f64;

/// Largest dimension [`det_laplace`] accepts.
pub const LAPLACE_MAX_N: usize = 10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is singular (pivot {index})")]
    Singular { index: usize },
    #[error("triangular matrix has a zero diagonal entry at {index}")]
    ZeroDiagonal { index: usize },
    #[error("matrix is neither lower nor upper triangular")]
    NotTriangular,
    #[error("dimension {n} exceeds the limit {max}")]
    TooLarge { n: usize, max: usize },
    #[error("expected length {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

/// `true` when the smallest pivot is below `2^-50` times the largest entry.
pub fn is_near_singular(min_pivot_mag: f64, max_abs: f64) -> bool {
    min_pivot_mag < 2f64.powi(-50) * max_abs
}

/// A factored nonsingular matrix.
#[derive(Debug, Clone)]
pub enum Factorization<'a> {
    Lower(&'a Matrix),
    Upper(&'a Matrix),
    General(LuFactors),
}

/// Factors `a`, preferring substitution for triangular inputs.
pub fn factorize(a: &Matrix) -> Result<Factorization<'_>, LinalgError> {
    if !a.pattern().is_structurally_nonsingular() {
        return Err(LinalgError::Singular {
            index: a.pattern().structural_rank(),
        });
    }
    let lower = a.is_lower_triangular();
    if lower || a.is_upper_triangular() {
        if let Some(index) = (0..a.n()).find(|&i| a.get(i, i) == 0.0) {
            return Err(LinalgError::Singular { index });
        }
        return Ok(if lower {
            Factorization::Lower(a)
        } else {
            Factorization::Upper(a)
        });
    }
    lu_factor(a).map(Factorization::General)
}

impl Factorization<'_> {
    pub fn n(&self) -> usize {
        match self {
            Factorization::Lower(t) | Factorization::Upper(t) => t.n(),
            Factorization::General(f) => f.n(),
        }
    }

    /// Smallest pivot magnitude (the smallest `|t_ii|` for triangular input).
    pub fn min_pivot_mag(&self) -> f64 {
        match self {
            Factorization::Lower(t) | Factorization::Upper(t) => (0..t.n())
                .map(|i| t.get(i, i).abs())
                .fold(f64::INFINITY, f64::min),
            Factorization::General(f) => f.min_pivot_mag(),
        }
    }

    pub fn det(&self) -> f64 {
        match self {
            Factorization::Lower(t) | Factorization::Upper(t) => {
                (0..t.n()).map(|i| t.get(i, i)).product()
            }
            Factorization::General(f) => f.det(),
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        match self {
            Factorization::Lower(t) => forward_substitute(t, b, 0),
            Factorization::Upper(t) => backward_substitute(t, b, t.n()),
            Factorization::General(f) => f.solve(b),
        }
    }

    /// Row-major inverse, not yet masked.
    pub fn inverse_data(&self) -> Vec<f64> {
        let n = self.n();
        let mut inv = vec![0.0; n * n];
        let mut e = vec![0.0; n];
        for l in 0..n {
            e[l] = 1.0;
            let col = match self {
                Factorization::Lower(t) => forward_substitute(t, &e, l),
                Factorization::Upper(t) => backward_substitute(t, &e, l + 1),
                Factorization::General(f) => f.solve(&e),
            };
            e[l] = 0.0;
            for (k, v) in col.into_iter().enumerate() {
                inv[k * n + l] = v;
            }
        }
        inv
    }
}

/// Lower-triangular solve assuming `b[..start]` is zero.
fn forward_substitute(t: &Matrix, b: &[f64], start: usize) -> Vec<f64> {
    let n = t.n();
    let mut x = vec![0.0; n];
    for i in start..n {
        let row = t.row(i);
        let s: f64 = row[start..i]
            .iter()
            .zip(&x[start..i])
            .map(|(a, y)| a * y)
            .sum();
        x[i] = (b[i] - s) / row[i];
    }
    x
}

/// Upper-triangular solve assuming `b[end..]` is zero.
fn backward_substitute(t: &Matrix, b: &[f64], end: usize) -> Vec<f64> {
    let mut x = vec![0.0; t.n()];
    for i in (0..end).rev() {
        let row = t.row(i);
        let s: f64 = row[i + 1..end]
            .iter()
            .zip(&x[i + 1..end])
            .map(|(a, y)| a * y)
            .sum();
        x[i] = (b[i] - s) / row[i];
    }
    x
}

fn check_len(expected: usize, found: usize) -> Result<(), LinalgError> {
    if expected == found {
        Ok(())
    } else {
        Err(LinalgError::DimensionMismatch { expected, found })
    }
}

/// Determinant; exactly `0.0` for structurally singular patterns and for
/// matrices where elimination meets an all-zero pivot column.
pub fn det(a: &Matrix) -> f64 {
    factorize(a).map(|f| f.det()).unwrap_or(0.0)
}

/// Cofactor expansion along the first row. Terms with a zero entry are
/// skipped, so structurally singular inputs give exactly `+0.0`.
pub fn det_laplace(a: &Matrix) -> Result<f64, LinalgError> {
    let n = a.n();
    if n > LAPLACE_MAX_N {
        return Err(LinalgError::TooLarge {
            n,
            max: LAPLACE_MAX_N,
        });
    }
    let cols: Vec<usize> = (0..n).collect();
    Ok(laplace(a, 0, &cols))
}

fn laplace(a: &Matrix, row: usize, cols: &[usize]) -> f64 {
    match cols.len() {
        0 => 1.0,
        1 => a.get(row, cols[0]),
        _ => {
            let mut sum = 0.0;
            let mut rest = Vec::with_capacity(cols.len() - 1);
            for (pos, &c) in cols.iter().enumerate() {
                let v = a.get(row, c);
                if v == 0.0 {
                    continue;
                }
                rest.clear();
                rest.extend(
                    cols.iter()
                        .enumerate()
                        .filter(|&(p, _)| p != pos)
                        .map(|(_, &c)| c),
                );
                let sub = laplace(a, row + 1, &rest);
                if sub == 0.0 {
                    continue;
                }
                let term = v * sub;
                sum += if pos % 2 == 0 { term } else { -term };
            }
            sum
        }
    }
}

/// Inverse with the structural inverse pattern; entries that vanish
/// identically over `a`'s pattern are exactly zero.
pub fn inverse(a: &Matrix) -> Result<Matrix, LinalgError> {
    let f = factorize(a)?;
    Ok(Matrix::masked(inverse_pattern(a), f.inverse_data()))
}

pub(crate) fn inverse_pattern(a: &Matrix) -> Arc<Pattern> {
    a.pattern()
        .inverse_pattern()
        .expect("factorized matrix has a structurally nonsingular pattern")
}

/// `A_(ij)`: `a` without row `i` and column `j`, on the induced pattern.
pub fn submatrix(a: &Matrix, i: usize, j: usize) -> Matrix {
    let n = a.n();
    assert!(i < n && j < n, "minor index out of range");
    let mut data = Vec::with_capacity((n - 1) * (n - 1));
    for r in (0..n).filter(|&r| r != i) {
        let row = a.row(r);
        data.extend((0..n).filter(|&c| c != j).map(|c| row[c]));
    }
    Matrix::masked(Arc::new(a.pattern().minor(i, j)), data)
}

/// `det(A_(ij))`, computed from the submatrix itself so it stays meaningful
/// when `a` is singular.
pub fn minor_det(a: &Matrix, i: usize, j: usize) -> f64 {
    det(&submatrix(a, i, j))
}

/// `R_k`: `a` with column `k` replaced by `b`. The pattern is `a`'s pattern
/// off column `k` plus the whole column `k`.
pub fn replace_column(a: &Matrix, k: usize, b: &[f64]) -> Matrix {
    let n = a.n();
    assert!(k < n, "column index out of range");
    assert_eq!(b.len(), n);
    let mut data = a.as_slice().to_vec();
    for i in 0..n {
        data[i * n + k] = b[i];
    }
    Matrix::masked(Arc::new(a.pattern().with_full_column(k)), data)
}

pub fn solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    check_len(a.n(), b.len())?;
    Ok(factorize(a)?.solve(b))
}

/// Forward or backward substitution in binary64.
pub fn triangular_solve(t: &Matrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    check_len(t.n(), b.len())?;
    let lower = t.is_lower_triangular();
    if !lower && !t.is_upper_triangular() {
        return Err(LinalgError::NotTriangular);
    }
    if let Some(index) = (0..t.n()).find(|&i| t.get(i, i) == 0.0) {
        return Err(LinalgError::ZeroDiagonal { index });
    }
    Ok(if lower {
        forward_substitute(t, b, 0)
    } else {
        backward_substitute(t, b, t.n())
    })
}

/// Reference solution in double-double arithmetic, rounded to binary64.
pub fn refined_solve(a: &Matrix, b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    Ok(refined_solve_dd(a, b)?
        .into_iter()
        .map(DoubleDouble::to_f64)
        .collect())
}

/// Reference solution in double-double arithmetic.
///
/// Triangular systems are solved by substitution carried out entirely in
/// double-double. Other systems use double-double Gaussian elimination with
/// partial pivoting followed by two steps of iterative refinement with
/// double-double residuals.
pub fn refined_solve_dd(a: &Matrix, b: &[f64]) -> Result<Vec<DoubleDouble>, LinalgError> {
    check_len(a.n(), b.len())?;
    match factorize(a)? {
        Factorization::Lower(t) => Ok(dd_forward(t, b)),
        Factorization::Upper(t) => Ok(dd_backward(t, b)),
        Factorization::General(_) => dd_general_solve(a, b),
    }
}

fn dd_forward(t: &Matrix, b: &[f64]) -> Vec<DoubleDouble> {
    let n = t.n();
    let mut x = vec![DoubleDouble::ZERO; n];
    for i in 0..n {
        let row = t.row(i);
        let mut s = DoubleDouble::from_f64(b[i]);
        for j in 0..i {
            if row[j] != 0.0 {
                s = s - x[j].mul_f64(row[j]);
            }
        }
        x[i] = s.div_f64(row[i]);
    }
    x
}

fn dd_backward(t: &Matrix, b: &[f64]) -> Vec<DoubleDouble> {
    let n = t.n();
    let mut x = vec![DoubleDouble::ZERO; n];
    for i in (0..n).rev() {
        let row = t.row(i);
        let mut s = DoubleDouble::from_f64(b[i]);
        for j in i + 1..n {
            if row[j] != 0.0 {
                s = s - x[j].mul_f64(row[j]);
            }
        }
        x[i] = s.div_f64(row[i]);
    }
    x
}

fn dd_general_solve(a: &Matrix, b: &[f64]) -> Result<Vec<DoubleDouble>, LinalgError> {
    let n = a.n();
    let mut lu: Vec<DoubleDouble> = a.as_slice().iter().map(|&v| v.into()).collect();
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let p = (k..n)
            .max_by(|&r, &s| {
                lu[r * n + k]
                    .abs()
                    .to_f64()
                    .total_cmp(&lu[s * n + k].abs().to_f64())
                    .then(s.cmp(&r))
            })
            .expect("nonempty range");
        if lu[p * n + k].hi == 0.0 {
            return Err(LinalgError::Singular { index: k });
        }
        if p != k {
            for c in 0..n {
                lu.swap(k * n + c, p * n + c);
            }
            perm.swap(k, p);
        }
        let pivot = lu[k * n + k];
        for r in k + 1..n {
            let m = lu[r * n + k] / pivot;
            lu[r * n + k] = m;
            if m.hi != 0.0 {
                for c in k + 1..n {
                    lu[r * n + c] = lu[r * n + c] - m * lu[k * n + c];
                }
            }
        }
    }
    let lu_solve = |rhs: &[DoubleDouble]| -> Vec<DoubleDouble> {
        let mut x: Vec<DoubleDouble> = perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            for j in 0..i {
                x[i] = x[i] - lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] = x[i] - lu[i * n + j] * x[j];
            }
            x[i] = x[i] / lu[i * n + i];
        }
        x
    };
    let rhs: Vec<DoubleDouble> = b.iter().map(|&v| v.into()).collect();
    let mut x = lu_solve(&rhs);
    for _ in 0..2 {
        let r: Vec<DoubleDouble> = (0..n)
            .map(|i| {
                a.row(i)
                    .iter()
                    .zip(&x)
                    .filter(|(&aij, _)| aij != 0.0)
                    .fold(rhs[i], |acc, (&aij, &xj)| acc - xj.mul_f64(aij))
            })
            .collect();
        let d = lu_solve(&r);
        for (xi, di) in x.iter_mut().zip(d) {
            *xi = *xi + di;
        }
    }
    Ok(x)
}

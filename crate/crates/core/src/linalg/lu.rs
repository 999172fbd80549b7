use crate::matrix::Matrix;

use super::LinalgError;

/// `P A = L U` with unit-diagonal `L`, from Gaussian elimination with partial
/// pivoting. `L` (below the diagonal) and `U` share one row-major buffer.
#[derive(Debug, Clone)]
pub struct LuFactors {
    n: usize,
    lu: Vec<f64>,
    /// Row `i` of `P A` is row `perm[i]` of `A`.
    perm: Vec<usize>,
    parity: f64,
    min_pivot_mag: f64,
}

pub fn lu_factor(a: &Matrix) -> Result<LuFactors, LinalgError> {
    let n = a.n();
    let mut lu = a.as_slice().to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut parity = 1.0;
    let mut min_pivot_mag = f64::INFINITY;

    for k in 0..n {
        let (p, mag) = (k..n)
            .map(|r| (r, lu[r * n + k].abs()))
            .fold(
                (k, -1.0),
                |best, cur| if cur.1 > best.1 { cur } else { best },
            );
        if mag == 0.0 {
            return Err(LinalgError::Singular { index: k });
        }
        min_pivot_mag = min_pivot_mag.min(mag);
        if p != k {
            for c in 0..n {
                lu.swap(k * n + c, p * n + c);
            }
            perm.swap(k, p);
            parity = -parity;
        }
        let pivot = lu[k * n + k];
        for r in k + 1..n {
            let m = lu[r * n + k] / pivot;
            lu[r * n + k] = m;
            if m != 0.0 {
                for c in k + 1..n {
                    lu[r * n + c] -= m * lu[k * n + c];
                }
            }
        }
    }
    if n == 0 {
        min_pivot_mag = 0.0;
    }
    Ok(LuFactors {
        n,
        lu,
        perm,
        parity,
        min_pivot_mag,
    })
}

impl LuFactors {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn permutation(&self) -> &[usize] {
        &self.perm
    }

    /// Sign of the row permutation, `+1.0` or `-1.0`.
    pub fn parity(&self) -> f64 {
        self.parity
    }

    pub fn min_pivot_mag(&self) -> f64 {
        self.min_pivot_mag
    }

    pub fn l(&self) -> Matrix {
        let n = self.n;
        let data = (0..n * n)
            .map(|idx| {
                let (i, j) = (idx / n, idx % n);
                match i.cmp(&j) {
                    std::cmp::Ordering::Greater => self.lu[idx],
                    std::cmp::Ordering::Equal => 1.0,
                    std::cmp::Ordering::Less => 0.0,
                }
            })
            .collect();
        Matrix::dense(n, data)
    }

    pub fn u(&self) -> Matrix {
        let n = self.n;
        let data = (0..n * n)
            .map(|idx| {
                if idx / n <= idx % n {
                    self.lu[idx]
                } else {
                    0.0
                }
            })
            .collect();
        Matrix::dense(n, data)
    }

    pub fn det(&self) -> f64 {
        (0..self.n).fold(self.parity, |d, k| d * self.lu[k * self.n + k])
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        assert_eq!(b.len(), n);
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let row = &self.lu[i * n..i * n + i];
            let s: f64 = row.iter().zip(&x[..i]).map(|(l, y)| l * y).sum();
            x[i] -= s;
        }
        for i in (0..n).rev() {
            let row = &self.lu[i * n + i + 1..(i + 1) * n];
            let s: f64 = row.iter().zip(&x[i + 1..]).map(|(u, y)| u * y).sum();
            x[i] = (x[i] - s) / self.lu[i * n + i];
        }
        x
    }
}

//! Dense square matrices tagged with a sparsity pattern.

use std::fmt::Write as _;
use std::path::Path;
use std::sync::Arc;

use crate::pattern::{content_lines, parse_header, parse_index_pair, Pattern, PatternError};

/// Row-major `n x n` matrix whose entries outside `pattern` are exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
    pattern: Arc<Pattern>,
}

impl Matrix {
    /// Wraps `data` with an explicit pattern; fails if an off-pattern entry is
    /// nonzero.
    pub fn with_pattern(pattern: Arc<Pattern>, data: Vec<f64>) -> Result<Self, PatternError> {
        let n = pattern.n();
        assert_eq!(data.len(), n * n, "data length must be n * n");
        for (idx, &v) in data.iter().enumerate() {
            if v != 0.0 && !pattern.mask()[idx] {
                return Err(PatternError::OutOfRange {
                    i: idx / n + 1,
                    j: idx % n + 1,
                    n,
                });
            }
        }
        Ok(Self { n, data, pattern })
    }

    /// Like [`Matrix::with_pattern`] but zeroes off-pattern entries instead of
    /// rejecting them.
    pub fn masked(pattern: Arc<Pattern>, mut data: Vec<f64>) -> Self {
        assert_eq!(
            data.len(),
            pattern.n() * pattern.n(),
            "data length must be n * n"
        );
        for (v, &keep) in data.iter_mut().zip(pattern.mask()) {
            if !keep {
                *v = 0.0;
            }
        }
        Self {
            n: pattern.n(),
            data,
            pattern,
        }
    }

    /// Row-major data with the pattern taken to be the nonzero entries.
    pub fn from_vec(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "data length must be n * n");
        let mask = data.iter().map(|&v| v != 0.0).collect();
        Self {
            n,
            data,
            pattern: Arc::new(Pattern::from_mask(n, mask)),
        }
    }

    /// Square matrix from rows; the pattern is the set of nonzero entries.
    pub fn from_rows(rows: &[&[f64]]) -> Self {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            assert_eq!(row.len(), n, "matrix must be square");
            data.extend_from_slice(row);
        }
        Self::from_vec(n, data)
    }

    /// Dense matrix with the full pattern.
    pub fn dense(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n, "data length must be n * n");
        Self {
            n,
            data,
            pattern: Arc::new(Pattern::dense(n)),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, &v) in d.iter().enumerate() {
            data[i * n + i] = v;
        }
        Self {
            n,
            data,
            pattern: Arc::new(Pattern::diagonal(n)),
        }
    }

    pub fn zeros(pattern: Arc<Pattern>) -> Self {
        let n = pattern.n();
        Self {
            n,
            data: vec![0.0; n * n],
            pattern,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pattern(&self) -> &Arc<Pattern> {
        &self.pattern
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max_i sum_j |a_ij|`
    pub fn norm_inf(&self) -> f64 {
        (0..self.n)
            .map(|i| self.row(i).iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Same pattern, entries mapped by `f(i, j, a_ij)`. Off-pattern entries
    /// stay zero.
    pub fn map_support(&self, mut f: impl FnMut(usize, usize, f64) -> f64) -> Matrix {
        let mut data = vec![0.0; self.n * self.n];
        for &(i, j) in self.pattern.support() {
            let idx = i * self.n + j;
            data[idx] = f(i, j, self.data[idx]);
        }
        Matrix {
            n: self.n,
            data,
            pattern: Arc::clone(&self.pattern),
        }
    }

    /// `true` if every entry above the diagonal is zero.
    pub fn is_lower_triangular(&self) -> bool {
        (0..self.n).all(|i| self.row(i)[i + 1..].iter().all(|&v| v == 0.0))
    }

    /// `true` if every entry below the diagonal is zero.
    pub fn is_upper_triangular(&self) -> bool {
        (0..self.n).all(|i| self.row(i)[..i].iter().all(|&v| v == 0.0))
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Parses the text format: a `matrix n` header followed by 1-based
    /// `i j value` lines. Listed positions (zeros included) form the pattern.
    pub fn parse(text: &str) -> Result<Self, PatternError> {
        let mut lines = content_lines(text);
        let (line, header) = lines.next().ok_or(PatternError::Parse {
            line: 1,
            msg: "missing `matrix n` header".into(),
        })?;
        let n = parse_header(line, header, "matrix")?;
        let mut mask = vec![false; n * n];
        let mut data = vec![0.0; n * n];
        for (line, fields) in lines {
            if fields.len() != 3 {
                return Err(PatternError::Parse {
                    line,
                    msg: format!("expected `i j value`, found {} fields", fields.len()),
                });
            }
            let (i, j) = parse_index_pair(line, &fields, n)?;
            let value: f64 = fields[2].parse().map_err(|_| PatternError::Parse {
                line,
                msg: format!("invalid value `{}`", fields[2]),
            })?;
            if !value.is_finite() {
                return Err(PatternError::Parse {
                    line,
                    msg: format!("non-finite value `{}`", fields[2]),
                });
            }
            if std::mem::replace(&mut mask[i * n + j], true) {
                return Err(PatternError::Parse {
                    line,
                    msg: format!("duplicate entry ({}, {})", i + 1, j + 1),
                });
            }
            data[i * n + j] = value;
        }
        Ok(Self {
            n,
            data,
            pattern: Arc::new(Pattern::from_mask(n, mask)),
        })
    }

    pub fn read_file(path: &Path) -> Result<Self, PatternError> {
        let text = std::fs::read_to_string(path).map_err(|e| PatternError::Io {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Writes every pattern position with 17 significant digits, which
    /// round-trips binary64 exactly.
    pub fn to_text(&self) -> String {
        let mut out = format!("matrix {}\n", self.n);
        for &(i, j) in self.pattern.support() {
            let _ = writeln!(out, "{} {} {:.16e}", i + 1, j + 1, self.get(i, j));
        }
        out
    }
}

/// Parses a right-hand side: a `vector n` header followed by 1-based
/// `i value` lines; unlisted entries are zero.
pub fn parse_vector(text: &str) -> Result<Vec<f64>, PatternError> {
    let mut lines = content_lines(text);
    let (line, header) = lines.next().ok_or(PatternError::Parse {
        line: 1,
        msg: "missing `vector n` header".into(),
    })?;
    let n = parse_header(line, header, "vector")?;
    let mut out = vec![0.0; n];
    let mut seen = vec![false; n];
    for (line, fields) in lines {
        if fields.len() != 2 {
            return Err(PatternError::Parse {
                line,
                msg: format!("expected `i value`, found {} fields", fields.len()),
            });
        }
        let i: usize = fields[0].parse().map_err(|_| PatternError::Parse {
            line,
            msg: format!("invalid index `{}`", fields[0]),
        })?;
        if i == 0 || i > n {
            return Err(PatternError::OutOfRangeAt { line, i, j: 1, n });
        }
        let value: f64 = fields[1]
            .parse()
            .ok()
            .filter(|v: &f64| v.is_finite())
            .ok_or_else(|| PatternError::Parse {
                line,
                msg: format!("invalid value `{}`", fields[1]),
            })?;
        if std::mem::replace(&mut seen[i - 1], true) {
            return Err(PatternError::Parse {
                line,
                msg: format!("duplicate entry {i}"),
            });
        }
        out[i - 1] = value;
    }
    Ok(out)
}

pub fn vector_to_text(v: &[f64]) -> String {
    let mut out = format!("vector {}\n", v.len());
    for (i, x) in v.iter().enumerate() {
        let _ = writeln!(out, "{} {:.16e}", i + 1, x);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pattern::PatternKind;
    use proptest::prelude::*;

    #[test]
    fn from_rows_infers_pattern() {
        let a = Matrix::from_rows(&[&[2.0, 0.0], &[1.0, 1.0]]);
        assert_eq!(a.pattern().support(), &[(0, 0), (1, 0), (1, 1)]);
        assert!(a.is_lower_triangular());
        assert!(!a.is_upper_triangular());
        assert_eq!(a.norm_inf(), 2.0);
    }

    #[test]
    fn with_pattern_rejects_off_pattern_values() {
        let p = Arc::new(Pattern::from_kind(PatternKind::LowerTriangular, 2).unwrap());
        assert!(Matrix::with_pattern(Arc::clone(&p), vec![1.0, 2.0, 3.0, 4.0]).is_err());
        let m = Matrix::masked(p, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.as_slice(), &[1.0, 0.0, 3.0, 4.0]);
    }

    #[test]
    fn matrix_text_keeps_listed_zeros_in_pattern() {
        let m = Matrix::parse("matrix 2\n1 1 2.5\n1 2 0\n2 2 -1e-3 # tail\n").unwrap();
        assert_eq!(m.pattern().len(), 3);
        assert_eq!(m.get(1, 1), -1e-3);
        assert_eq!(m.get(1, 0), 0.0);
        assert!(matches!(
            Matrix::parse("matrix 2\n1 3 1.0\n"),
            Err(PatternError::OutOfRangeAt { line: 2, .. })
        ));
        assert!(matches!(
            Matrix::parse("matrix 2\n1 1 nan\n"),
            Err(PatternError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn vector_text() {
        assert_eq!(
            parse_vector("vector 3\n1 3\n3 2.5\n").unwrap(),
            vec![3.0, 0.0, 2.5]
        );
        assert!(parse_vector("vector 2\n3 1\n").is_err());
        assert!(parse_vector("vector 2\n1 1\n1 2\n").is_err());
    }

    proptest! {
        #[test]
        fn text_round_trip_is_bit_exact(
            vals in proptest::collection::vec(-1e300f64..1e300, 9),
            tiny in proptest::collection::vec(-1e-300f64..1e-300, 9),
        ) {
            let data: Vec<f64> = vals.iter().zip(&tiny).enumerate()
                .map(|(k, (a, b))| if k % 2 == 0 { *a } else { *b })
                .collect();
            let m = Matrix::dense(3, data);
            let back = Matrix::parse(&m.to_text()).unwrap();
            for (x, y) in m.as_slice().iter().zip(back.as_slice()) {
                prop_assert_eq!(x.to_bits(), y.to_bits());
            }
            let v = parse_vector(&vector_to_text(&vals)).unwrap();
            prop_assert_eq!(v, vals);
        }
    }
}

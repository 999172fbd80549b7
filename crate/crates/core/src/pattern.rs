//! Sparsity patterns: the set of positions a matrix is allowed to be nonzero at.
//!
//! A [`Pattern`] stores its support as 0-based `(row, col)` pairs in row-major
//! order together with a dense boolean mask, a maximum row/column matching and
//! the structural rank derived from it. Text files use 1-based indices.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::sync::{Arc, OnceLock};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PatternError {
    #[error("pattern dimension must be at least 1")]
    EmptyDimension,
    #[error("band width {k} out of range for n = {n} (expected 0..={max})", max = n.saturating_sub(1))]
    BandOutOfRange { k: usize, n: usize },
    #[error("index ({i}, {j}) out of range for n = {n}")]
    OutOfRange { i: usize, j: usize, n: usize },
    #[error("duplicate pair ({i}, {j})")]
    Duplicate { i: usize, j: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: index ({i}, {j}) out of range for n = {n}")]
    OutOfRangeAt {
        line: usize,
        i: usize,
        j: usize,
        n: usize,
    },
    #[error("pattern file declares n = {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("a dimension is required for pattern kind `{0}`")]
    MissingDimension(String),
    #[error("unknown pattern spec `{0}` (expected dense|lower|upper|tridiag|band:K|file:PATH)")]
    UnknownSpec(String),
    #[error("cannot read {path}: {msg}")]
    Io { path: PathBuf, msg: String },
}

/// Named pattern shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    Dense,
    /// `{(i, j) : j <= i}`
    LowerTriangular,
    /// `{(i, j) : j >= i}`
    UpperTriangular,
    /// `{(i, j) : |i - j| <= 1}`
    Tridiagonal,
    /// `{(i, j) : |i - j| <= k}`
    Band(usize),
}

impl PatternKind {
    fn contains(self, i: usize, j: usize) -> bool {
        match self {
            PatternKind::Dense => true,
            PatternKind::LowerTriangular => j <= i,
            PatternKind::UpperTriangular => j >= i,
            PatternKind::Tridiagonal => i.abs_diff(j) <= 1,
            PatternKind::Band(k) => i.abs_diff(j) <= k,
        }
    }
}

/// A pattern source as written on the command line:
/// `dense`, `lower`, `upper`, `tridiag`, `band:K` or `file:PATH`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PatternSpec {
    Kind(PatternKind),
    File(PathBuf),
}

impl PatternSpec {
    /// Builds the pattern. Named shapes need `n`; a file carries its own
    /// dimension, which must agree with `n` when one is given.
    pub fn resolve(&self, n: Option<usize>) -> Result<Pattern, PatternError> {
        match self {
            PatternSpec::Kind(kind) => {
                let n = n.ok_or_else(|| PatternError::MissingDimension(self.to_string()))?;
                Pattern::from_kind(*kind, n)
            }
            PatternSpec::File(path) => {
                let p = Pattern::read_file(path)?;
                match n {
                    Some(n) if n != p.n() => Err(PatternError::DimensionMismatch {
                        expected: n,
                        found: p.n(),
                    }),
                    _ => Ok(p),
                }
            }
        }
    }
}

impl FromStr for PatternSpec {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let kind = match s {
            "dense" => PatternKind::Dense,
            "lower" | "lower_triangular" => PatternKind::LowerTriangular,
            "upper" | "upper_triangular" => PatternKind::UpperTriangular,
            "tridiag" | "tridiagonal" => PatternKind::Tridiagonal,
            _ => {
                if let Some(k) = s.strip_prefix("band:") {
                    let k = k
                        .parse()
                        .map_err(|_| PatternError::UnknownSpec(s.to_string()))?;
                    PatternKind::Band(k)
                } else if let Some(path) = s.strip_prefix("file:") {
                    return Ok(PatternSpec::File(PathBuf::from(path)));
                } else {
                    return Err(PatternError::UnknownSpec(s.to_string()));
                }
            }
        };
        Ok(PatternSpec::Kind(kind))
    }
}

impl fmt::Display for PatternSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PatternSpec::Kind(PatternKind::Dense) => f.write_str("dense"),
            PatternSpec::Kind(PatternKind::LowerTriangular) => f.write_str("lower"),
            PatternSpec::Kind(PatternKind::UpperTriangular) => f.write_str("upper"),
            PatternSpec::Kind(PatternKind::Tridiagonal) => f.write_str("tridiag"),
            PatternSpec::Kind(PatternKind::Band(k)) => write!(f, "band:{k}"),
            PatternSpec::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

/// Support set `S` of an `n x n` matrix.
#[derive(Debug)]
pub struct Pattern {
    n: usize,
    support: Vec<(usize, usize)>,
    mask: Vec<bool>,
    /// `row_match[i] = Some(j)` when row `i` is matched to column `j`.
    row_match: Vec<Option<usize>>,
    structural_rank: usize,
    inverse: OnceLock<Option<Arc<Pattern>>>,
}

impl Clone for Pattern {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            support: self.support.clone(),
            mask: self.mask.clone(),
            row_match: self.row_match.clone(),
            structural_rank: self.structural_rank,
            inverse: OnceLock::new(),
        }
    }
}

impl PartialEq for Pattern {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.support == other.support
    }
}

impl Eq for Pattern {}

impl Pattern {
    /// Builds a pattern from 0-based pairs in any order.
    pub fn new(
        n: usize,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self, PatternError> {
        let mut mask = vec![false; n * n];
        for (i, j) in pairs {
            if i >= n || j >= n {
                return Err(PatternError::OutOfRange {
                    i: i + 1,
                    j: j + 1,
                    n,
                });
            }
            if std::mem::replace(&mut mask[i * n + j], true) {
                return Err(PatternError::Duplicate { i: i + 1, j: j + 1 });
            }
        }
        Ok(Self::from_mask(n, mask))
    }

    /// Builds a pattern from a row-major `n * n` mask.
    pub fn from_mask(n: usize, mask: Vec<bool>) -> Self {
        assert_eq!(mask.len(), n * n, "mask length must be n * n");
        let support: Vec<_> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| mask[i * n + j])
            .collect();
        let row_match = maximum_matching(n, &support);
        let structural_rank = row_match.iter().filter(|m| m.is_some()).count();
        Self {
            n,
            support,
            mask,
            row_match,
            structural_rank,
            inverse: OnceLock::new(),
        }
    }

    pub fn from_kind(kind: PatternKind, n: usize) -> Result<Self, PatternError> {
        if n == 0 {
            return Err(PatternError::EmptyDimension);
        }
        if let PatternKind::Band(k) = kind {
            if k >= n {
                return Err(PatternError::BandOutOfRange { k, n });
            }
        }
        let mask = (0..n * n)
            .map(|idx| kind.contains(idx / n, idx % n))
            .collect();
        Ok(Self::from_mask(n, mask))
    }

    pub fn dense(n: usize) -> Self {
        Self::from_mask(n, vec![true; n * n])
    }

    pub fn diagonal(n: usize) -> Self {
        Self::from_mask(n, (0..n * n).map(|idx| idx / n == idx % n).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Support pairs, 0-based, row-major.
    pub fn support(&self) -> &[(usize, usize)] {
        &self.support
    }

    /// `|S|`
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.n && j < self.n && self.mask[i * self.n + j]
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Size of a maximum row/column matching over the support.
    pub fn structural_rank(&self) -> usize {
        self.structural_rank
    }

    /// True iff the generic matrix with this support is nonsingular, i.e. the
    /// determinant restricted to the pattern is not the zero polynomial.
    pub fn is_structurally_nonsingular(&self) -> bool {
        self.structural_rank == self.n
    }

    /// Row-to-column assignment of the maximum matching.
    pub fn matching(&self) -> &[Option<usize>] {
        &self.row_match
    }

    /// Pattern with row `i` and column `j` removed.
    pub fn minor(&self, i: usize, j: usize) -> Pattern {
        assert!(i < self.n && j < self.n, "minor index out of range");
        let m = self.n - 1;
        let mut mask = Vec::with_capacity(m * m);
        for r in (0..self.n).filter(|&r| r != i) {
            for c in (0..self.n).filter(|&c| c != j) {
                mask.push(self.mask[r * self.n + c]);
            }
        }
        Pattern::from_mask(m, mask)
    }

    /// This pattern with column `k` made full.
    pub fn with_full_column(&self, k: usize) -> Pattern {
        assert!(k < self.n, "column index out of range");
        let mut mask = self.mask.clone();
        for i in 0..self.n {
            mask[i * self.n + k] = true;
        }
        Pattern::from_mask(self.n, mask)
    }

    /// Structural pattern of the inverse, or `None` when the pattern is
    /// structurally singular.
    ///
    /// Entry `(k, l)` of the inverse is not identically zero over the pattern
    /// iff the minor deleting row `l` and column `k` has a perfect matching.
    /// With the columns permuted so that the matching sits on the diagonal,
    /// that is reachability from `k`'s matched row to `l` in the digraph of the
    /// permuted matrix, which is what is computed here.
    pub fn inverse_pattern(&self) -> Option<Arc<Pattern>> {
        self.inverse
            .get_or_init(|| self.compute_inverse_pattern().map(Arc::new))
            .clone()
    }

    fn compute_inverse_pattern(&self) -> Option<Pattern> {
        if !self.is_structurally_nonsingular() {
            return None;
        }
        let n = self.n;
        // col_owner[c] = row matched to column c
        let mut col_owner = vec![0usize; n];
        for (r, c) in self.row_match.iter().enumerate() {
            col_owner[c.expect("perfect matching")] = r;
        }
        // permuted matrix B[r][t] = A[r][sigma(t)], edge r -> t
        let mut adj = vec![Vec::new(); n];
        for &(i, j) in &self.support {
            adj[i].push(col_owner[j]);
        }
        let mut mask = vec![false; n * n];
        let mut seen = vec![false; n];
        let mut stack = Vec::with_capacity(n);
        for start in 0..n {
            seen.iter_mut().for_each(|s| *s = false);
            seen[start] = true;
            stack.push(start);
            // (A^-1)[sigma(start)][l] != 0  iff  l reachable from start
            let k = self.row_match[start].expect("perfect matching");
            while let Some(r) = stack.pop() {
                mask[k * n + r] = true;
                for &t in &adj[r] {
                    if !seen[t] {
                        seen[t] = true;
                        stack.push(t);
                    }
                }
            }
        }
        Some(Pattern::from_mask(n, mask))
    }

    /// Parses the text format: a `pattern n` header followed by one 1-based
    /// `i j` pair per line. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, PatternError> {
        let mut lines = content_lines(text);
        let (line, header) = lines.next().ok_or(PatternError::Parse {
            line: 1,
            msg: "missing `pattern n` header".into(),
        })?;
        let n = parse_header(line, header, "pattern")?;
        let mut mask = vec![false; n * n];
        for (line, fields) in lines {
            if fields.len() != 2 {
                return Err(PatternError::Parse {
                    line,
                    msg: format!("expected `i j`, found {} fields", fields.len()),
                });
            }
            let (i, j) = parse_index_pair(line, &fields, n)?;
            if std::mem::replace(&mut mask[i * n + j], true) {
                return Err(PatternError::Parse {
                    line,
                    msg: format!("duplicate pair ({}, {})", i + 1, j + 1),
                });
            }
        }
        Ok(Self::from_mask(n, mask))
    }

    pub fn read_file(path: &Path) -> Result<Self, PatternError> {
        let text = std::fs::read_to_string(path).map_err(|e| PatternError::Io {
            path: path.to_path_buf(),
            msg: e.to_string(),
        })?;
        Self::parse(&text)
    }

    /// Inverse of [`Pattern::parse`].
    pub fn to_text(&self) -> String {
        let mut out = format!("pattern {}\n", self.n);
        for &(i, j) in &self.support {
            out.push_str(&format!("{} {}\n", i + 1, j + 1));
        }
        out
    }
}

/// Non-empty, comment-stripped lines as `(1-based line number, fields)`.
pub(crate) fn content_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(idx, raw)| {
        let body = raw.split('#').next().unwrap_or("");
        let fields: Vec<&str> = body.split_whitespace().collect();
        (!fields.is_empty()).then_some((idx + 1, fields))
    })
}

pub(crate) fn parse_header(
    line: usize,
    fields: Vec<&str>,
    keyword: &str,
) -> Result<usize, PatternError> {
    match fields.as_slice() {
        [kw, n] if *kw == keyword => n.parse().map_err(|_| PatternError::Parse {
            line,
            msg: format!("invalid dimension `{n}`"),
        }),
        _ => Err(PatternError::Parse {
            line,
            msg: format!("expected `{keyword} n` header"),
        }),
    }
}

/// Parses a 1-based `i j` pair and returns it 0-based.
pub(crate) fn parse_index_pair(
    line: usize,
    fields: &[&str],
    n: usize,
) -> Result<(usize, usize), PatternError> {
    let parse = |s: &str| {
        s.parse::<usize>().map_err(|_| PatternError::Parse {
            line,
            msg: format!("invalid index `{s}`"),
        })
    };
    let i = parse(fields[0])?;
    let j = parse(fields[1])?;
    if i == 0 || j == 0 || i > n || j > n {
        return Err(PatternError::OutOfRangeAt { line, i, j, n });
    }
    Ok((i - 1, j - 1))
}

/// Augmenting-path (Kuhn) maximum matching of rows to columns, seeded with a
/// greedy pass so banded and triangular shapes finish in `O(|S|)`.
fn maximum_matching(n: usize, support: &[(usize, usize)]) -> Vec<Option<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(i, j) in support {
        adj[i].push(j);
    }
    let mut row_match: Vec<Option<usize>> = vec![None; n];
    let mut col_match: Vec<Option<usize>> = vec![None; n];
    // Diagonal first: every shape used here has it when it can.
    for i in 0..n {
        if adj[i].contains(&i) {
            row_match[i] = Some(i);
            col_match[i] = Some(i);
        }
    }
    for i in 0..n {
        if row_match[i].is_none() {
            if let Some(&j) = adj[i].iter().find(|&&j| col_match[j].is_none()) {
                row_match[i] = Some(j);
                col_match[j] = Some(i);
            }
        }
    }
    let mut visited = vec![false; n];
    for root in 0..n {
        if row_match[root].is_some() {
            continue;
        }
        visited.iter_mut().for_each(|v| *v = false);
        augment(root, &adj, &mut visited, &mut row_match, &mut col_match);
    }
    row_match
}

fn augment(
    row: usize,
    adj: &[Vec<usize>],
    visited: &mut [bool],
    row_match: &mut [Option<usize>],
    col_match: &mut [Option<usize>],
) -> bool {
    for &col in &adj[row] {
        if visited[col] {
            continue;
        }
        visited[col] = true;
        let free = match col_match[col] {
            None => true,
            Some(other) => augment(other, adj, visited, row_match, col_match),
        };
        if free {
            row_match[row] = Some(col);
            col_match[col] = Some(row);
            return true;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kind_cardinalities() {
        let lower = Pattern::from_kind(PatternKind::LowerTriangular, 10).unwrap();
        assert_eq!(lower.len(), 55);
        assert_eq!(lower.structural_rank(), 10);

        let dense = Pattern::from_kind(PatternKind::Dense, 3).unwrap();
        assert_eq!(dense.len(), 9);
        assert_eq!(dense.structural_rank(), 3);

        let tri = Pattern::from_kind(PatternKind::Tridiagonal, 4).unwrap();
        assert_eq!(tri.len(), 10);

        let band0 = Pattern::from_kind(PatternKind::Band(0), 4).unwrap();
        assert_eq!(band0, Pattern::diagonal(4));
        let band1 = Pattern::from_kind(PatternKind::Band(1), 4).unwrap();
        assert_eq!(band1, tri);
        let upper = Pattern::from_kind(PatternKind::UpperTriangular, 4).unwrap();
        assert!(upper.contains(0, 3) && !upper.contains(3, 0));
    }

    #[test]
    fn kind_preconditions() {
        assert_eq!(
            Pattern::from_kind(PatternKind::Dense, 0),
            Err(PatternError::EmptyDimension)
        );
        assert!(matches!(
            Pattern::from_kind(PatternKind::Band(4), 4),
            Err(PatternError::BandOutOfRange { k: 4, n: 4 })
        ));
    }

    #[test]
    fn structural_rank_examples() {
        let row_only = Pattern::new(2, [(0, 0), (0, 1)]).unwrap();
        assert_eq!(row_only.structural_rank(), 1);
        assert!(!row_only.is_structurally_nonsingular());

        let anti = Pattern::new(2, [(0, 1), (1, 0)]).unwrap();
        assert_eq!(anti.structural_rank(), 2);

        let lower = Pattern::from_kind(PatternKind::LowerTriangular, 5).unwrap();
        assert_eq!(lower.structural_rank(), 5);
    }

    #[test]
    fn matching_needs_augmentation() {
        // greedy would pair row 0 with column 0 and strand row 1
        let p = Pattern::new(3, [(0, 0), (0, 1), (1, 0), (2, 2)]).unwrap();
        assert_eq!(p.structural_rank(), 3);
        let p = Pattern::new(3, [(0, 1), (1, 1), (2, 1), (2, 2)]).unwrap();
        assert_eq!(p.structural_rank(), 2);
    }

    #[test]
    fn rejects_bad_pairs() {
        assert!(matches!(
            Pattern::new(2, [(0, 2)]),
            Err(PatternError::OutOfRange { i: 1, j: 3, n: 2 })
        ));
        assert!(matches!(
            Pattern::new(2, [(0, 1), (0, 1)]),
            Err(PatternError::Duplicate { i: 1, j: 2 })
        ));
    }

    #[test]
    fn text_format() {
        let text = "# tridiagonal-ish\npattern 3\n1 1\n2 1 # below\n\n2 2\n3 3\n";
        let p = Pattern::parse(text).unwrap();
        assert_eq!(p.support(), &[(0, 0), (1, 0), (1, 1), (2, 2)]);
        assert_eq!(Pattern::parse(&p.to_text()).unwrap(), p);

        let err = Pattern::parse("pattern 2\n1 1\n3 1\n").unwrap_err();
        assert_eq!(
            err,
            PatternError::OutOfRangeAt {
                line: 3,
                i: 3,
                j: 1,
                n: 2
            }
        );
        assert!(matches!(
            Pattern::parse("matrix 2\n"),
            Err(PatternError::Parse { line: 1, .. })
        ));
        assert!(matches!(
            Pattern::parse("pattern 2\n1 x\n"),
            Err(PatternError::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn spec_strings() {
        for s in [
            "dense",
            "lower",
            "upper",
            "tridiag",
            "band:3",
            "file:/tmp/p.txt",
        ] {
            let spec: PatternSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("band:x".parse::<PatternSpec>().is_err());
        assert!("banded".parse::<PatternSpec>().is_err());
        assert!(matches!(
            PatternSpec::Kind(PatternKind::Dense).resolve(None),
            Err(PatternError::MissingDimension(_))
        ));
    }

    /// Oracle: entry (k, l) of the inverse is structurally nonzero iff the
    /// minor without row l and column k is structurally nonsingular.
    fn inverse_pattern_by_minors(p: &Pattern) -> Vec<bool> {
        let n = p.n();
        (0..n * n)
            .map(|idx| {
                let (k, l) = (idx / n, idx % n);
                p.minor(l, k).is_structurally_nonsingular()
            })
            .collect()
    }

    #[test]
    fn inverse_pattern_matches_minor_oracle() {
        let mut stream = crate::rng::GaussianStream::new(crate::rng::SeedSpec::new(0x1234, 0));
        let mut next = || stream.next_u64();
        let mut checked = 0;
        for trial in 0..400 {
            let n = 1 + trial % 6;
            let density = 0.2 + 0.6 * ((next() % 1000) as f64 / 1000.0);
            let mask: Vec<bool> = (0..n * n)
                .map(|_| (next() % 1000) as f64 / 1000.0 < density)
                .collect();
            let p = Pattern::from_mask(n, mask);
            match p.inverse_pattern() {
                Some(inv) => {
                    assert_eq!(
                        inv.mask(),
                        inverse_pattern_by_minors(&p).as_slice(),
                        "{p:?}"
                    );
                    checked += 1;
                }
                None => assert!(!p.is_structurally_nonsingular()),
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn triangular_inverse_pattern_is_triangular() {
        let p = Pattern::from_kind(PatternKind::LowerTriangular, 6).unwrap();
        assert_eq!(*p.inverse_pattern().unwrap(), p);
        let d = Pattern::diagonal(4);
        assert_eq!(*d.inverse_pattern().unwrap(), d);
        let t = Pattern::from_kind(PatternKind::Tridiagonal, 5).unwrap();
        assert_eq!(t.inverse_pattern().unwrap().len(), 25);
    }
}

//! Componentwise and mixed condition numbers over fixed sparsity patterns.
//!
//! * [`pattern`]: sparsity patterns, structural rank and structural inverses
//! * [`matrix`]: dense matrices tagged with a pattern, text file formats
//! * [`rng`]: seeded Gaussian sampling of the pattern ensemble
//! * [`linalg`]: LU, determinants, inverses, minors, substitution and a
//!   double-double reference solver
//! * [`condition`]: condition numbers of the determinant, inverse and linear
//!   systems, their bounds, and a brute-force oracle
//! * [`experiments`]: Monte Carlo checks of tail and expected-log bounds

pub mod condition;
pub mod experiments;
pub mod linalg;
pub mod matrix;
pub mod pattern;
pub mod rng;

pub use condition::{CondError, CondReport, CondValue};
pub use linalg::LinalgError;
pub use matrix::Matrix;
pub use pattern::{Pattern, PatternError, PatternKind, PatternSpec};
pub use rng::SeedSpec;

//! Numerical laboratory for q-deformed Gaussian operator algebras.
//!
//! Builds truncated q-Fock spaces over `R^d`, assembles the left and right
//! creation and annihilation operators, verifies their algebraic identities
//! and estimates the norms and spectral gap that control factoriality of
//! the generated von Neumann algebra.

pub mod combinatorics;
pub mod config;
pub mod error;
pub mod fock;
pub mod linalg;
pub mod operators;
pub mod oracle;
pub mod spectral;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use fock::{CacheStats, EmpiricalConstants, GramCache, SpaceKind, TruncatedFock, Word};
pub use linalg::{EigExtremes, EigenBackend, EigenSolver};
pub use operators::{FockOperator, FockVector, LadderSet};
pub use spectral::{SpectralOptions, SpectralReport, ThresholdMode, ThresholdReport};

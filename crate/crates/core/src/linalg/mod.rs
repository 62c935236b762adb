//! Dense linear-algebra kernels used by every other module.
//!
//! Singular value decompositions go through Golub–Kahan bidiagonalization
//! followed by implicit-shift QR on the bidiagonal. Small problems use the
//! Householder reduction directly; larger truncated problems build the
//! bidiagonal with Lanczos steps (full reorthogonalization) and only keep the
//! leading Krylov basis. Symmetric spectra use Householder tridiagonalization
//! and implicit QL.

mod dense;
mod eigen;
mod gaussian;
mod svd;

pub use dense::{hadamard, hadamard_power, DenseMatrix, FactoredVectorPair};
pub use eigen::{symmetric_eigen, top_two_eigenpairs, SymmetricEigen, TopEigenpairs};
pub use gaussian::{gaussian_matrix, RngSeed};
pub use svd::{full_svd, operator_norm, truncated_svd, SvdTriple};

use thiserror::Error;

/// Columns of computed singular/eigen vector sets are orthonormal to this tolerance.
pub const ORTHONORMALITY_TOL: f64 = 1e-8;
/// Residual tolerance for eigenpairs, relative to the eigenvalue magnitude.
pub const RESIDUAL_TOL: f64 = 1e-6;
/// Tolerance for identities that hold exactly in real arithmetic.
pub const ALGEBRAIC_TOL: f64 = 1e-12;
/// Symmetry check applied before symmetric eigensolves.
pub const SYMMETRY_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("{op}: shape {left:?} incompatible with {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("rank {rank} out of range 1..={max}")]
    RankOutOfRange { rank: usize, max: usize },
    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },
    #[error("{routine} did not converge after {iterations} iterations")]
    NoConvergence {
        routine: &'static str,
        iterations: usize,
    },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("matrix is not symmetric: max |a_ij - a_ji| = {max_asymmetry:e}")]
    NotSymmetric { max_asymmetry: f64 },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

//! Pivoted cross approximation (CA) and pivoted Cholesky decompositions for
//! symmetric positive semi-definite matrices.
//!
//! The factorizations only ever look at one column of the matrix per
//! iteration, so they run against a [`ColumnOracle`] instead of a stored
//! matrix. On top of them the crate provides
//!
//! * a reduced-system solver for rank-deficient, consistent SPSD systems,
//! * a log-determinant approximation that survives determinants far below
//!   the smallest representable float,
//! * Gaussian RBF interpolation that selects its own basis,
//! * low-rank eigendecomposition and Karhunen-Loève sampling of random
//!   fields,
//! * a benchmark harness comparing the PCD solver against regularized
//!   Cholesky and plain LU.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`). The
//! aliases at the crate root fix the scalar to `f64`, which is what the
//! file formats and the CLI use.

// `!(x > 0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod crossapprox;
pub mod error;
pub mod kernels;
pub mod loweig;
pub mod matcore;
#[cfg(feature = "oracles")]
pub mod oracles;
pub mod pivchol;
pub mod rbf;
pub mod scalar;

pub use crossapprox::{diag_pivoted_ca, fully_pivoted_ca, pivot_logdet, CaResult, LogDet, StopRule};
pub use error::{Error, Result};
pub use kernels::{
    covariance_oracle, kernel_matrix_oracle, synth_surface, CovarianceModel, CovarianceOracle, GaussianRbf,
    KernelOracle, PointSet, SyntheticSurface,
};
pub use loweig::{kle_pipeline, lowrank_eigen, EigenPairs, KleField, KleReport};
pub use matcore::{
    apply_row_permutation, read_matrix, solve_triangular, write_matrix, ColumnOracle, DenseMatrix, DenseOracle,
    FnOracle, MatrixFormat, Permutation, Triangle,
};
pub use pivchol::{logdet_approx, pcd_fullrank, pcd_lowrank, reduced_solve, FullPivotedCholesky, PivotedCholesky};
pub use rbf::{rbf_fit_chol, rbf_fit_lu, rbf_fit_pcd, rbf_predict, rmse, FitMethod, RbfModel};
pub use scalar::Scalar;

/// Double precision dense matrix, the type used by the file formats.
pub type Matrix = DenseMatrix<f64>;
/// Single precision dense matrix.
pub type Matrix32 = DenseMatrix<f32>;
pub type CaResult64 = CaResult<f64>;
pub type PivotedCholesky64 = PivotedCholesky<f64>;
pub type FullPivotedCholesky64 = FullPivotedCholesky<f64>;
pub type StopRule64 = StopRule<f64>;
pub type PointSet64 = PointSet<f64>;
pub type RbfModel64 = RbfModel<f64>;
pub type EigenPairs64 = EigenPairs<f64>;
pub type KleField64 = KleField<f64>;

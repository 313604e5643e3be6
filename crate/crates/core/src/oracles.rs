//! Dense reference implementations for tests and acceptance runs.
//!
//! Everything here goes through `nalgebra` and none of it calls into the
//! factorizations of this crate, so agreement with the main code paths is
//! independent evidence. O(n³), meant for n up to a few thousand.

use std::fmt;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::loweig::EigenPairs;
use crate::matcore::DenseMatrix;
use crate::pivchol::PivotedCholesky;

fn to_na(m: &DenseMatrix<f64>) -> DMatrix<f64> {
    DMatrix::from_column_slice(m.rows(), m.cols(), m.as_slice())
}

fn from_na(m: &DMatrix<f64>) -> DenseMatrix<f64> {
    DenseMatrix::from_col_major(m.nrows(), m.ncols(), m.as_slice().to_vec()).expect("shape matches data")
}

fn square(m: &DenseMatrix<f64>) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::Dimension(format!("expected a square matrix, got {}x{}", m.rows(), m.cols())))
    }
}

/// Unpivoted Cholesky factor `L` with `M = L·Lᵀ`.
pub fn dense_cholesky(m: &DenseMatrix<f64>) -> Result<DenseMatrix<f64>> {
    square(m)?;
    let chol = nalgebra::Cholesky::new(to_na(m))
        .ok_or_else(|| Error::Factorization("reference Cholesky: matrix is not positive definite".into()))?;
    Ok(from_na(&chol.l()))
}

/// Solves `M·x = f` by partial-pivoting LU.
pub fn lu_solve(m: &DenseMatrix<f64>, f: &[f64]) -> Result<Vec<f64>> {
    square(m)?;
    if f.len() != m.rows() {
        return Err(Error::Dimension(format!("right-hand side has {} entries, matrix has {} rows", f.len(), m.rows())));
    }
    let lu = to_na(m).lu();
    let x = lu.solve(&DVector::from_column_slice(f)).ok_or(Error::Singular { step: 0 })?;
    Ok(x.as_slice().to_vec())
}

/// `log|det M|` and the sign of the determinant, from LU.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactLogDet {
    pub log_abs: f64,
    /// `+1`, `−1`, or `0` for an exactly singular matrix.
    pub sign: f64,
}

pub fn exact_logdet(m: &DenseMatrix<f64>) -> Result<ExactLogDet> {
    square(m)?;
    let lu = to_na(m).lu();
    let u = lu.u();
    let mut sign: f64 = lu.p().determinant();
    let mut log_abs = 0.0;
    for i in 0..u.nrows() {
        let d = u[(i, i)];
        if d == 0.0 {
            return Ok(ExactLogDet { log_abs: f64::NEG_INFINITY, sign: 0.0 });
        }
        sign *= d.signum();
        log_abs += d.abs().ln();
    }
    Ok(ExactLogDet { log_abs, sign })
}

/// Full symmetric eigendecomposition, eigenvalues descending and **not**
/// clamped, so slightly negative values of indefinite input survive.
pub fn dense_symm_eigen(m: &DenseMatrix<f64>) -> Result<EigenPairs<f64>> {
    square(m)?;
    let eig = SymmetricEigen::new(to_na(m));
    let mut order: Vec<usize> = (0..m.rows()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let vectors = from_na(&eig.eigenvectors).select_cols(&order);
    Ok(EigenPairs { values: order.iter().map(|&i| eig.eigenvalues[i]).collect(), vectors })
}

pub fn min_eigenvalue(m: &DenseMatrix<f64>) -> Result<f64> {
    square(m)?;
    Ok(to_na(m).symmetric_eigenvalues().min())
}

/// `M[:, j] · M[β, j]⁻¹ · M[β, :]`.
pub fn skeleton_eval(m: &DenseMatrix<f64>, beta: &[usize], j: &[usize]) -> Result<DenseMatrix<f64>> {
    if beta.len() != j.len() {
        return Err(Error::Dimension(format!("{} pivot rows but {} pivot columns", beta.len(), j.len())));
    }
    if let Some(&i) = beta.iter().chain(j).find(|&&i| i >= m.rows().max(m.cols())) {
        return Err(Error::Dimension(format!("pivot index {i} out of range")));
    }
    let cols = to_na(&m.select_cols(j));
    let rows = to_na(&m.select_rows(beta));
    let block = to_na(&m.select(beta, j));
    let solved = block.lu().solve(&rows).ok_or(Error::Singular { step: 0 })?;
    Ok(from_na(&(cols * solved)))
}

/// Max-entry norm of `M̃·N`, where `M̃ = M[p, p] = [[Φ*, Zᵀ], [Z, Y]]` and
/// `N = [−Φ*⁻¹·Zᵀ; I]`. The lower block of `M̃·N` is the remainder on the
/// unpivoted indices; the upper block vanishes.
pub fn nullspace_residual(m: &DenseMatrix<f64>, pcd: &PivotedCholesky<f64>) -> Result<f64> {
    square(m)?;
    let n = m.rows();
    let k = pcd.rank();
    if pcd.order() != n {
        return Err(Error::Dimension(format!("factorization of order {} for a {n}x{n} matrix", pcd.order())));
    }
    if k == n {
        return Ok(0.0);
    }
    let p = pcd.perm.as_slice();
    let mt = to_na(&m.select(p, p));
    let phi = mt.view((0, 0), (k, k)).into_owned();
    let zt = mt.view((0, k), (k, n - k)).into_owned();
    let top =
        if k == 0 { DMatrix::zeros(0, n - k) } else { -phi.lu().solve(&zt).ok_or(Error::Singular { step: 0 })? };
    let mut null = DMatrix::zeros(n, n - k);
    null.view_mut((0, 0), (k, n - k)).copy_from(&top);
    null.view_mut((k, 0), (n - k, n - k)).fill_with_identity();
    Ok((mt * null).amax())
}

/// One comparison between a reference and a candidate.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleReport {
    pub quantity: String,
    pub reference: Vec<f64>,
    pub candidate: Vec<f64>,
    /// Max absolute entry-wise deviation.
    pub abs_dev: f64,
    /// `abs_dev / max|reference|` (equal to `abs_dev` for a zero reference).
    pub rel_dev: f64,
    pub tolerance: f64,
    /// Whether the tolerance applies to `rel_dev` rather than `abs_dev`.
    pub relative: bool,
    pub pass: bool,
}

impl OracleReport {
    pub fn compare(quantity: &str, reference: &[f64], candidate: &[f64], tolerance: f64, relative: bool) -> Self {
        let abs_dev = if reference.len() == candidate.len() {
            reference.iter().zip(candidate).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        let scale = reference.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let rel_dev = if scale > 0.0 { abs_dev / scale } else { abs_dev };
        let measured = if relative { rel_dev } else { abs_dev };
        OracleReport {
            quantity: quantity.to_string(),
            reference: reference.to_vec(),
            candidate: candidate.to_vec(),
            abs_dev,
            rel_dev,
            tolerance,
            relative,
            pass: measured <= tolerance,
        }
    }

    pub fn scalar(quantity: &str, reference: f64, candidate: f64, tolerance: f64, relative: bool) -> Self {
        Self::compare(quantity, &[reference], &[candidate], tolerance, relative)
    }
}

impl fmt::Display for OracleReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} quantity={} abs_dev={:.3e} rel_dev={:.3e} tol={:.3e} ({})",
            if self.pass { "PASS" } else { "FAIL" },
            self.quantity,
            self.abs_dev,
            self.rel_dev,
            self.tolerance,
            if self.relative { "relative" } else { "absolute" },
        )?;
        if self.reference.len() == 1 && self.candidate.len() == 1 {
            write!(f, " reference={:.12e} candidate={:.12e}", self.reference[0], self.candidate[0])?;
        }
        Ok(())
    }
}

//! Pivoted Cholesky decompositions assembled from the diagonal-pivoted CA
//! factor, the determinant approximation and the reduced-system solver.

use crate::crossapprox::{diag_pivoted_ca, CaResult, LogDet, StopRule};
use crate::error::{Error, Result};
use crate::matcore::{
    apply_row_permutation, solve_triangular, solve_triangular_transpose, ColumnOracle, DenseMatrix, Permutation,
    Triangle,
};
use crate::scalar::Scalar;

/// Low-rank pivoted Cholesky factorization `M[p, p] ≈ L·Lᵀ`.
#[derive(Debug, Clone)]
pub struct PivotedCholesky<T> {
    /// `n x k`, lower triangular.
    pub l: DenseMatrix<T>,
    /// Leading `k x k` block of `l`; `L*·L*ᵀ = M[β, β]`.
    pub l_star: DenseMatrix<T>,
    /// Pivots followed by the remaining indices in ascending order.
    pub perm: Permutation,
    /// Pivot indices in selection order (the first `k` entries of `perm`).
    pub beta: Vec<usize>,
    /// Largest entry of `M[p, p] - L·Lᵀ`.
    pub epsilon: T,
    pub gammas: Vec<T>,
    /// Input was found not to be SPSD; see [`CaResult::negative_diagonal`].
    pub negative_diagonal: bool,
}

impl<T: Scalar> PivotedCholesky<T> {
    pub fn rank(&self) -> usize {
        self.beta.len()
    }

    pub fn order(&self) -> usize {
        self.perm.len()
    }

    /// Indices that were never pivots, ascending.
    pub fn complement(&self) -> &[usize] {
        &self.perm.as_slice()[self.rank()..]
    }

    /// Builds the factorization from a diagonal-pivoted CA result.
    pub fn from_ca(ca: CaResult<T>) -> Result<Self> {
        if !ca.is_symmetric() {
            return Err(Error::InvalidParameter(
                "pivoted Cholesky needs a diagonal-pivoted (symmetric) CA result".into(),
            ));
        }
        let perm = pivot_permutation(ca.a.rows(), &ca.row_pivots)?;
        let l = apply_row_permutation(&ca.a, &perm)?;
        let l_star = ca.a.select_rows(&ca.row_pivots);
        Ok(PivotedCholesky {
            l,
            l_star,
            perm,
            beta: ca.row_pivots,
            epsilon: ca.epsilon,
            gammas: ca.gammas,
            negative_diagonal: ca.negative_diagonal,
        })
    }
}

/// `[β ∥ complement]` with the complement in ascending order.
fn pivot_permutation(n: usize, beta: &[usize]) -> Result<Permutation> {
    let mut is_pivot = vec![false; n];
    for &b in beta {
        is_pivot[b] = true;
    }
    let mut p = beta.to_vec();
    p.extend((0..n).filter(|&i| !is_pivot[i]));
    Permutation::new(p)
}

/// Low-rank pivoted Cholesky decomposition driven by [`diag_pivoted_ca`].
pub fn pcd_lowrank<T: Scalar, O: ColumnOracle<T> + ?Sized>(
    oracle: &O,
    stop: StopRule<T>,
) -> Result<PivotedCholesky<T>> {
    PivotedCholesky::from_ca(diag_pivoted_ca(oracle, stop)?)
}

/// Full-rank pivoted Cholesky factorization `M[p, p] ≈ Lₙ·Lₙᵀ`, square and
/// lower triangular, whose diagonal reproduces the diagonal of `M[p, p]`.
#[derive(Debug, Clone)]
pub struct FullPivotedCholesky<T> {
    pub l_n: DenseMatrix<T>,
    pub perm: Permutation,
    /// Error of the low-rank part; a loose bound for `Lₙ·Lₙᵀ`.
    pub epsilon: T,
    /// Number of CA iterations before the diagonal fill.
    pub rank_used: usize,
    /// Some fill value came from a remainder diagonal entry that was
    /// negative beyond roundoff and was replaced by zero.
    pub clamped_fill: bool,
}

/// Runs the CA, then fills the unused diagonal positions with the square
/// roots of the remaining diagonal, one fill column per non-pivot index in
/// ascending order.
pub fn pcd_fullrank<T: Scalar, O: ColumnOracle<T> + ?Sized>(
    oracle: &O,
    stop: StopRule<T>,
) -> Result<FullPivotedCholesky<T>> {
    let ca = diag_pivoted_ca(oracle, stop)?;
    let n = ca.a.rows();
    let k = ca.rank();
    let perm = pivot_permutation(n, &ca.row_pivots)?;

    let mut a = DenseMatrix::zeros(n, n);
    for q in 0..k {
        a.column_mut(q).copy_from_slice(ca.a.column(q));
    }
    let mut clamped_fill = false;
    for (m, &j) in perm.as_slice()[k..].iter().enumerate() {
        let d = ca.remainder_diagonal[j];
        if d < T::zero() {
            clamped_fill = true;
        }
        a[(j, k + m)] = d.max(T::zero()).sqrt();
    }
    Ok(FullPivotedCholesky {
        l_n: apply_row_permutation(&a, &perm)?,
        perm,
        epsilon: ca.epsilon,
        rank_used: k,
        clamped_fill,
    })
}

/// `log det M ≈ Σ 2·log Lₙ[i,i]` over the positive diagonal entries, with
/// zero entries counted separately.
pub fn logdet_approx<T: Scalar>(f: &FullPivotedCholesky<T>) -> LogDet<T> {
    let mut out = LogDet { log_abs_sum: T::zero(), zero_count: 0 };
    for v in f.l_n.diagonal() {
        if v > T::zero() {
            out.log_abs_sum += T::of(2) * v.ln();
        } else {
            out.zero_count += 1;
        }
    }
    out
}

/// Solves the pivot-block system `L*·L*ᵀ·w* = f[β]` and pads the solution
/// with zeros at the non-pivot indices. For a consistent system this is a
/// solution of `M·w = f` up to the factorization error.
pub fn reduced_solve<T: Scalar>(f_pcd: &PivotedCholesky<T>, f: &[T]) -> Result<Vec<T>> {
    let n = f_pcd.order();
    if f.len() != n {
        return Err(Error::Dimension(format!("right-hand side of length {} for order {n}", f.len())));
    }
    let f_star: Vec<T> = f_pcd.beta.iter().map(|&b| f[b]).collect();
    let y = solve_triangular(&f_pcd.l_star, &f_star, Triangle::Lower)?;
    let w_star = solve_triangular_transpose(&f_pcd.l_star, &y, Triangle::Lower)?;
    let mut w = vec![T::zero(); n];
    for (&b, &v) in f_pcd.beta.iter().zip(&w_star) {
        w[b] = v;
    }
    Ok(w)
}

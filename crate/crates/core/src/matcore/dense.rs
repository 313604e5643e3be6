//! O(n³) dense factorizations backing the regularized-Cholesky and LU
//! baselines.

use super::{solve_triangular, solve_triangular_transpose, DenseMatrix, Triangle};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Unpivoted Cholesky factor `L` of a symmetric positive definite matrix.
/// Only the lower triangle of `a` is read.
pub fn cholesky<T: Scalar>(a: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
    if !a.is_square() {
        return Err(Error::Dimension(format!("cholesky needs a square matrix, got {}x{}", a.rows(), a.cols())));
    }
    let n = a.rows();
    let mut l = DenseMatrix::zeros(n, n);
    for j in 0..n {
        l.column_mut(j)[j..].copy_from_slice(&a.column(j)[j..]);
    }
    // Left-looking: column j receives the updates of every earlier column.
    let mut acc = vec![T::zero(); n];
    for j in 0..n {
        acc[j..].copy_from_slice(&l.column(j)[j..]);
        for q in 0..j {
            let s = l[(j, q)];
            if s == T::zero() {
                continue;
            }
            let src = &l.column(q)[j..];
            for (d, &v) in acc[j..].iter_mut().zip(src) {
                *d -= v * s;
            }
        }
        let pivot = acc[j];
        if !(pivot > T::zero()) {
            return Err(Error::Factorization(format!(
                "non-positive pivot {pivot:e} at column {j}; matrix is not positive definite"
            )));
        }
        let root = pivot.sqrt();
        let col = l.column_mut(j);
        col[j] = root;
        for i in j + 1..n {
            col[i] = acc[i] / root;
        }
    }
    Ok(l)
}

/// Solves `L Lᵀ x = b` for a Cholesky factor `L`.
pub fn cholesky_solve<T: Scalar>(l: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    let y = solve_triangular(l, b, Triangle::Lower)?;
    solve_triangular_transpose(l, &y, Triangle::Lower)
}

/// LU factorization with partial pivoting, `P A = L U`, packed in one
/// matrix (unit lower triangle implied).
#[derive(Debug, Clone)]
pub struct Lu<T> {
    packed: DenseMatrix<T>,
    /// `pivots[k]` is the row swapped with row `k` at step `k`.
    pivots: Vec<usize>,
}

impl<T: Scalar> Lu<T> {
    /// Fails only when a pivot column is exactly zero.
    pub fn new(a: &DenseMatrix<T>) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Dimension(format!("LU needs a square matrix, got {}x{}", a.rows(), a.cols())));
        }
        let n = a.rows();
        let mut m = a.clone();
        let mut pivots = Vec::with_capacity(n);
        for k in 0..n {
            let col = m.column(k);
            let (p, _) =
                (k..n).fold((k, T::zero()), |(bi, bv), i| if col[i].abs() > bv { (i, col[i].abs()) } else { (bi, bv) });
            if col[p] == T::zero() {
                return Err(Error::Singular { step: k });
            }
            pivots.push(p);
            if p != k {
                for j in 0..n {
                    let c = m.column_mut(j);
                    c.swap(k, p);
                }
            }
            let inv = T::one() / m[(k, k)];
            for v in &mut m.column_mut(k)[k + 1..] {
                *v *= inv;
            }
            // Right-looking rank-1 update of the trailing block, column by column.
            let (head, tail) = m.data.split_at_mut((k + 1) * n);
            let lcol = &head[k * n + k + 1..k * n + n];
            for c in tail.chunks_exact_mut(n) {
                let s = c[k];
                if s == T::zero() {
                    continue;
                }
                for (d, &l) in c[k + 1..].iter_mut().zip(lcol) {
                    *d -= l * s;
                }
            }
        }
        Ok(Lu { packed: m, pivots })
    }

    pub fn solve(&self, b: &[T]) -> Result<Vec<T>> {
        let n = self.packed.rows();
        if b.len() != n {
            return Err(Error::Dimension(format!("right-hand side of length {} for order {n}", b.len())));
        }
        let mut x = b.to_vec();
        for (k, &p) in self.pivots.iter().enumerate() {
            x.swap(k, p);
        }
        for j in 0..n {
            let xj = x[j];
            let col = self.packed.column(j);
            for i in j + 1..n {
                x[i] -= col[i] * xj;
            }
        }
        for j in (0..n).rev() {
            let col = self.packed.column(j);
            x[j] /= col[j];
            let xj = x[j];
            for i in 0..j {
                x[i] -= col[i] * xj;
            }
        }
        Ok(x)
    }
}

pub fn lu_solve<T: Scalar>(a: &DenseMatrix<T>, b: &[T]) -> Result<Vec<T>> {
    Lu::new(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_of_textbook_matrix() {
        let a =
            DenseMatrix::<f64>::from_rows(&[[4.0, 12.0, -16.0], [12.0, 37.0, -43.0], [-16.0, -43.0, 98.0]]).unwrap();
        let l = cholesky(&a).unwrap();
        let expect = DenseMatrix::from_rows(&[[2.0, 0.0, 0.0], [6.0, 1.0, 0.0], [-8.0, 5.0, 3.0]]).unwrap();
        assert!(l.max_abs_diff(&expect) < 1e-14);
        let x = cholesky_solve(&l, &[1.0, 2.0, 3.0]).unwrap();
        let back = a.mul_vec(&x).unwrap();
        assert!(back.iter().zip([1.0, 2.0, 3.0]).all(|(a, b)| (a - b).abs() < 1e-10));
    }

    #[test]
    fn cholesky_breaks_down_on_indefinite() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(matches!(cholesky(&a), Err(Error::Factorization(_))));
    }

    #[test]
    fn lu_needs_pivoting() {
        let a = DenseMatrix::<f64>::from_rows(&[[0.0, 1.0, 2.0], [1.0, 0.0, 3.0], [4.0, -3.0, 8.0]]).unwrap();
        let x = lu_solve(&a, &[3.0, 4.0, 9.0]).unwrap();
        let back = a.mul_vec(&x).unwrap();
        assert!(back.iter().zip([3.0, 4.0, 9.0]).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn lu_reports_exact_singularity() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        assert!(matches!(lu_solve(&a, &[1.0, 1.0]), Err(Error::Singular { step: 1 })));
    }
}

use super::DenseMatrix;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Column-at-a-time access to an implicit square matrix.
///
/// Implementations must be pure: the same `j` always yields bit-identical
/// values, and `column(j)[j] == diagonal()[j]`.
pub trait ColumnOracle<T: Scalar> {
    fn dim(&self) -> usize;

    /// Writes column `j` into `out` (length `dim()`).
    fn column_into(&self, j: usize, out: &mut [T]);

    fn diagonal(&self) -> Vec<T>;

    fn column(&self, j: usize) -> Vec<T> {
        let mut out = vec![T::zero(); self.dim()];
        self.column_into(j, &mut out);
        out
    }

    /// Materializes the whole matrix. Test-scale only.
    fn to_dense(&self) -> DenseMatrix<T> {
        let n = self.dim();
        let mut m = DenseMatrix::zeros(n, n);
        for j in 0..n {
            self.column_into(j, m.column_mut(j));
        }
        m
    }
}

impl<T: Scalar, O: ColumnOracle<T> + ?Sized> ColumnOracle<T> for &O {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn column_into(&self, j: usize, out: &mut [T]) {
        (**self).column_into(j, out)
    }

    fn diagonal(&self) -> Vec<T> {
        (**self).diagonal()
    }
}

/// Oracle over a stored square matrix.
#[derive(Debug, Clone, Copy)]
pub struct DenseOracle<'a, T> {
    m: &'a DenseMatrix<T>,
}

impl<'a, T: Scalar> DenseOracle<'a, T> {
    pub fn new(m: &'a DenseMatrix<T>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!("oracle needs a square matrix, got {}x{}", m.rows(), m.cols())));
        }
        Ok(DenseOracle { m })
    }
}

impl<T: Scalar> ColumnOracle<T> for DenseOracle<'_, T> {
    fn dim(&self) -> usize {
        self.m.rows()
    }

    fn column_into(&self, j: usize, out: &mut [T]) {
        out.copy_from_slice(self.m.column(j));
    }

    fn diagonal(&self) -> Vec<T> {
        self.m.diagonal()
    }
}

/// Oracle defined by an entry function `f(i, j)`.
pub struct FnOracle<F> {
    n: usize,
    entry: F,
}

impl<F> FnOracle<F> {
    pub fn new(n: usize, entry: F) -> Self {
        FnOracle { n, entry }
    }
}

impl<T: Scalar, F: Fn(usize, usize) -> T> ColumnOracle<T> for FnOracle<F> {
    fn dim(&self) -> usize {
        self.n
    }

    fn column_into(&self, j: usize, out: &mut [T]) {
        for (i, o) in out.iter_mut().enumerate() {
            *o = (self.entry)(i, j);
        }
    }

    fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| (self.entry)(i, i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dense_oracle_rejects_rectangles() {
        let m = DenseMatrix::<f64>::zeros(2, 3);
        assert!(DenseOracle::new(&m).is_err());
    }

    #[test]
    fn fn_oracle_densifies() {
        let o = FnOracle::new(3, |i: usize, j: usize| (i * 3 + j) as f64);
        let d = o.to_dense();
        assert_eq!(d[(1, 2)], 5.0);
        assert_eq!(o.diagonal(), vec![0.0, 4.0, 8.0]);
        assert_eq!(o.column(1), vec![1.0, 4.0, 7.0]);
    }
}

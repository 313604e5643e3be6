//! Dense column-major storage, permutations, triangular solves, column
//! oracles and the matrix file formats.

pub mod dense;
mod io;
mod oracle;

use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub use io::{
    matrix_to_csv, read_matrix, read_matrix_as, read_permutation, write_matrix, write_matrix_as, write_permutation,
    MatrixFormat,
};
pub use oracle::{ColumnOracle, DenseOracle, FnOracle};

/// Dense matrix in column-major order.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for j in 0..cols {
            for i in 0..rows {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!("{} values supplied for a {rows}x{cols} matrix", data.len())));
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Builds a matrix from row slices, all of the same length.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let ncols = rows.first().map_or(0, |r| r.as_ref().len());
        if let Some(bad) = rows.iter().position(|r| r.as_ref().len() != ncols) {
            return Err(Error::Dimension(format!(
                "row {bad} has {} entries, expected {ncols}",
                rows[bad].as_ref().len()
            )));
        }
        Ok(Self::from_fn(rows.len(), ncols, |i, j| rows[i].as_ref()[j]))
    }

    /// Stacks equal-length columns side by side.
    pub fn from_columns(rows: usize, columns: &[Vec<T>]) -> Result<Self> {
        let mut data = Vec::with_capacity(rows * columns.len());
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(Error::Dimension(format!("column {j} has {} entries, expected {rows}", c.len())));
            }
            data.extend_from_slice(c);
        }
        Ok(DenseMatrix { rows, cols: columns.len(), data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Column-major backing slice.
    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<T> {
        self.data
    }

    pub fn get(&self, i: usize, j: usize) -> Option<T> {
        (i < self.rows && j < self.cols).then(|| self.data[j * self.rows + i])
    }

    pub fn column(&self, j: usize) -> &[T] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn column_mut(&mut self, j: usize) -> &mut [T] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn row(&self, i: usize) -> Vec<T> {
        (0..self.cols).map(|j| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Submatrix `self[rows, cols]`.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        Self::from_fn(rows.len(), cols.len(), |i, j| self[(rows[i], cols[j])])
    }

    pub fn select_rows(&self, rows: &[usize]) -> Self {
        Self::from_fn(rows.len(), self.cols, |i, j| self[(rows[i], j)])
    }

    pub fn select_cols(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self[(i, cols[j])])
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for j in 0..rhs.cols {
            let dst = &mut out.data[j * self.rows..(j + 1) * self.rows];
            for q in 0..self.cols {
                let s = rhs[(q, j)];
                if s == T::zero() {
                    continue;
                }
                for (d, &a) in dst.iter_mut().zip(self.column(q)) {
                    *d += a * s;
                }
            }
        }
        Ok(out)
    }

    /// `self * selfᵀ`.
    pub fn mul_self_transpose(&self) -> Self {
        let n = self.rows;
        let mut out = Self::zeros(n, n);
        for q in 0..self.cols {
            let col = self.column(q);
            for j in 0..n {
                let s = col[j];
                if s == T::zero() {
                    continue;
                }
                let dst = &mut out.data[j * n..(j + 1) * n];
                for (d, &a) in dst.iter_mut().zip(col) {
                    *d += a * s;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!("vector of length {} against {} columns", x.len(), self.cols)));
        }
        let mut out = vec![T::zero(); self.rows];
        for (j, &s) in x.iter().enumerate() {
            if s == T::zero() {
                continue;
            }
            for (d, &a) in out.iter_mut().zip(self.column(j)) {
                *d += a * s;
            }
        }
        Ok(out)
    }

    pub fn sub(&self, rhs: &Self) -> Result<Self> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::Dimension(format!(
                "cannot subtract {}x{} from {}x{}",
                rhs.rows, rhs.cols, self.rows, self.cols
            )));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(&a, &b)| a - b).collect();
        Ok(DenseMatrix { rows: self.rows, cols: self.cols, data })
    }

    /// Largest entry in modulus (0 for an empty matrix).
    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &v| m.max(v.abs()))
    }

    /// `max |self - rhs|` entry-wise; infinite on shape mismatch.
    pub fn max_abs_diff(&self, rhs: &Self) -> T {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return T::infinity();
        }
        self.data.iter().zip(&rhs.data).fold(T::zero(), |m, (&a, &b)| m.max((a - b).abs()))
    }

    pub fn map<U: Scalar>(&self, f: impl Fn(T) -> U) -> DenseMatrix<U> {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&v| f(v)).collect() }
    }

    pub fn is_lower_triangular(&self) -> bool {
        (0..self.cols).all(|j| (0..j.min(self.rows)).all(|i| self[(i, j)] == T::zero()))
    }
}

impl<T> Index<(usize, usize)> for DenseMatrix<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds for {}x{}", self.rows, self.cols);
        &self.data[j * self.rows + i]
    }
}

impl<T> IndexMut<(usize, usize)> for DenseMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        assert!(i < self.rows && j < self.cols, "index ({i}, {j}) out of bounds for {}x{}", self.rows, self.cols);
        &mut self.data[j * self.rows + i]
    }
}

impl<T: std::fmt::Debug> std::fmt::Debug for DenseMatrix<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, " ")?;
            for j in 0..self.cols {
                write!(f, " {:?}", self.data[j * self.rows + i])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// A bijection of `0..n`, stored 0-based.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(entries: Vec<usize>) -> Result<Self> {
        let n = entries.len();
        let mut seen = vec![false; n];
        for &e in &entries {
            if e >= n || std::mem::replace(&mut seen[e], true) {
                return Err(Error::InvalidParameter(format!("{entries:?} is not a permutation of 0..{n}")));
            }
        }
        Ok(Permutation(entries))
    }

    pub fn identity(n: usize) -> Self {
        Permutation((0..n).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.0.len()];
        for (i, &p) in self.0.iter().enumerate() {
            inv[p] = i;
        }
        Permutation(inv)
    }

    /// `out[i] = v[p[i]]`.
    pub fn apply<T: Copy>(&self, v: &[T]) -> Result<Vec<T>> {
        if v.len() != self.0.len() {
            return Err(Error::Dimension(format!(
                "permutation of length {} applied to {} entries",
                self.0.len(),
                v.len()
            )));
        }
        Ok(self.0.iter().map(|&p| v[p]).collect())
    }

    /// Symmetric permutation `M[p, p]` of a square matrix.
    pub fn permute_symmetric<T: Scalar>(&self, m: &DenseMatrix<T>) -> Result<DenseMatrix<T>> {
        if !m.is_square() || m.rows() != self.len() {
            return Err(Error::Dimension(format!(
                "permutation of length {} against a {}x{} matrix",
                self.len(),
                m.rows(),
                m.cols()
            )));
        }
        Ok(m.select(&self.0, &self.0))
    }
}

/// Row permutation: `result[i, :] = a[p[i], :]`.
pub fn apply_row_permutation<T: Scalar>(a: &DenseMatrix<T>, p: &Permutation) -> Result<DenseMatrix<T>> {
    if p.len() != a.rows() {
        return Err(Error::Dimension(format!("permutation of length {} against {} rows", p.len(), a.rows())));
    }
    Ok(a.select_rows(p.as_slice()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Triangle {
    Lower,
    Upper,
}

fn check_triangular_system<T: Scalar>(l: &DenseMatrix<T>, b: &[T]) -> Result<()> {
    if !l.is_square() {
        return Err(Error::Dimension(format!("triangular solve needs a square matrix, got {}x{}", l.rows(), l.cols())));
    }
    if b.len() != l.rows() {
        return Err(Error::Dimension(format!("right-hand side of length {} for order {}", b.len(), l.rows())));
    }
    if let Some(index) = (0..l.rows()).find(|&i| l[(i, i)] == T::zero()) {
        return Err(Error::SingularTriangular { index });
    }
    Ok(())
}

/// Solves `L x = b` by forward (lower) or back (upper) substitution. Only
/// the named triangle of `l` is read.
pub fn solve_triangular<T: Scalar>(l: &DenseMatrix<T>, b: &[T], side: Triangle) -> Result<Vec<T>> {
    check_triangular_system(l, b)?;
    let n = b.len();
    let mut x = b.to_vec();
    // Column-oriented substitution walks contiguous columns.
    match side {
        Triangle::Lower => {
            for j in 0..n {
                let col = l.column(j);
                x[j] /= col[j];
                let xj = x[j];
                for i in j + 1..n {
                    x[i] -= col[i] * xj;
                }
            }
        }
        Triangle::Upper => {
            for j in (0..n).rev() {
                let col = l.column(j);
                x[j] /= col[j];
                let xj = x[j];
                for i in 0..j {
                    x[i] -= col[i] * xj;
                }
            }
        }
    }
    Ok(x)
}

/// Solves `Lᵀ x = b` reading the stored triangle of `l` without forming the
/// transpose.
pub fn solve_triangular_transpose<T: Scalar>(l: &DenseMatrix<T>, b: &[T], side: Triangle) -> Result<Vec<T>> {
    check_triangular_system(l, b)?;
    let n = b.len();
    let mut x = b.to_vec();
    // Row i of Lᵀ is column i of L, so these are dot products over columns.
    match side {
        Triangle::Lower => {
            for i in (0..n).rev() {
                let col = l.column(i);
                let s: T = (i + 1..n).map(|q| col[q] * x[q]).sum();
                x[i] = (x[i] - s) / col[i];
            }
        }
        Triangle::Upper => {
            for i in 0..n {
                let col = l.column(i);
                let s: T = (0..i).map(|q| col[q] * x[q]).sum();
                x[i] = (x[i] - s) / col[i];
            }
        }
    }
    Ok(x)
}

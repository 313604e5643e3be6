//! Cross approximation.
//!
//! [`fully_pivoted_ca`] searches the whole remainder for its largest entry
//! and updates the whole remainder every iteration: O(kmn), any matrix.
//!
//! [`diag_pivoted_ca`] exploits that an SPSD matrix attains its largest
//! modulus on the diagonal and that removing a diagonal-pivot cross keeps the
//! remainder SPSD. Only the diagonal of the remainder is tracked; the
//! corrections owed to a column are applied when that column becomes a
//! pivot. O(k²n) work, one oracle column per iteration, and the returned
//! error is exact: the largest remaining diagonal entry is the largest
//! entry of the remainder.

use std::fmt;

use crate::error::{Error, Result};
use crate::matcore::{ColumnOracle, DenseMatrix};
use crate::scalar::{argmax, Scalar};

/// When to stop adding rank-1 terms. The condition is checked at the head
/// of every iteration against the current entry-wise error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopRule<T> {
    /// Exactly `k` iterations unless the remainder vanishes first.
    FixedRank(usize),
    /// Iterate while the error exceeds the tolerance.
    Tolerance(T),
    /// Iterate while the error exceeds `ℓ·u·mean|M_ij|`, with `ℓ` the
    /// iterations executed so far and the mean taken over the absolute
    /// entries of every column fetched so far.
    Dynamic,
}

impl<T: Scalar> StopRule<T> {
    fn validate(&self, n: usize) -> Result<()> {
        match *self {
            StopRule::FixedRank(k) if k > n => {
                Err(Error::InvalidParameter(format!("rank {k} exceeds matrix order {n}")))
            }
            StopRule::Tolerance(t) if !(t > T::zero()) || !t.is_finite() => {
                Err(Error::InvalidParameter(format!("tolerance must be positive and finite, got {t:e}")))
            }
            _ => Ok(()),
        }
    }

    fn should_stop(&self, executed: usize, error: T, scale: &MeanAbs<T>) -> bool {
        match *self {
            StopRule::FixedRank(k) => executed >= k,
            StopRule::Tolerance(t) => error <= t,
            StopRule::Dynamic => error <= T::of(executed) * T::roundoff_at(scale.mean()),
        }
    }

    pub fn mode_name(&self) -> &'static str {
        match self {
            StopRule::FixedRank(_) => "fixed-rank",
            StopRule::Tolerance(_) => "tolerance",
            StopRule::Dynamic => "dynamic",
        }
    }
}

impl<T: Scalar> fmt::Display for StopRule<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StopRule::FixedRank(k) => write!(f, "fixed-rank k={k}"),
            StopRule::Tolerance(t) => write!(f, "tolerance eps_tol={t:e}"),
            StopRule::Dynamic => write!(f, "dynamic eps_tol=l*u*mean|M_ij|"),
        }
    }
}

/// Running mean of absolute values over fetched columns.
#[derive(Debug, Default)]
struct MeanAbs<T> {
    sum: T,
    count: usize,
}

impl<T: Scalar> MeanAbs<T> {
    fn add(&mut self, values: &[T]) {
        self.sum += values.iter().map(|v| v.abs()).sum::<T>();
        self.count += values.len();
    }

    fn mean(&self) -> T {
        if self.count == 0 {
            T::zero()
        } else {
            self.sum / T::of(self.count)
        }
    }
}

/// Output of a cross approximation `A·B ≈ M`.
#[derive(Debug, Clone)]
pub struct CaResult<T> {
    /// Left factor, `m x k`.
    pub a: DenseMatrix<T>,
    /// Right factor `k x n` for the fully pivoted variant. `None` for the
    /// diagonal variant, where it is `aᵀ`.
    pub b: Option<DenseMatrix<T>>,
    /// Pivot rows, 0-based, in selection order.
    pub row_pivots: Vec<usize>,
    /// Pivot columns; equal to `row_pivots` for the diagonal variant.
    pub col_pivots: Vec<usize>,
    /// Pivot values, one per iteration.
    pub gammas: Vec<T>,
    /// Largest entry in modulus of the final remainder.
    pub epsilon: T,
    /// Diagonal of the final remainder.
    pub remainder_diagonal: Vec<T>,
    /// Set when the remainder diagonal went negative beyond roundoff, which
    /// means the input was not SPSD; iteration stopped there.
    pub negative_diagonal: bool,
}

impl<T: Scalar> CaResult<T> {
    pub fn rank(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.b.is_none()
    }

    pub fn right_factor(&self) -> DenseMatrix<T> {
        self.b.clone().unwrap_or_else(|| self.a.transpose())
    }

    /// Dense `A·B`. O(mnk); meant for checks on small matrices.
    pub fn approximation(&self) -> DenseMatrix<T> {
        match &self.b {
            Some(b) => self.a.matmul(b).expect("factor shapes agree"),
            None => self.a.mul_self_transpose(),
        }
    }
}

fn ensure_finite<T: Scalar>(values: &[T], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::InvalidParameter(format!("{what} has a non-finite value at index {i}"))),
        None => Ok(()),
    }
}

/// Fully pivoted cross approximation of an arbitrary `m x n` matrix.
///
/// The pivot is the largest-modulus entry of the remainder. Ties prefer
/// diagonal entries, then the smaller row, then the smaller column.
pub fn fully_pivoted_ca<T: Scalar>(m: &DenseMatrix<T>, stop: StopRule<T>) -> Result<CaResult<T>> {
    let (rows, cols) = (m.rows(), m.cols());
    stop.validate(rows.min(cols))?;
    ensure_finite(m.as_slice(), "matrix")?;

    let mut r = m.clone();
    let mut a_cols: Vec<Vec<T>> = Vec::new();
    let mut b_rows: Vec<Vec<T>> = Vec::new();
    let (mut row_pivots, mut col_pivots, mut gammas) = (Vec::new(), Vec::new(), Vec::new());
    let mut scale = MeanAbs::default();

    let epsilon = loop {
        let (pi, pj, err) = max_modulus_entry(&r);
        if err == T::zero() || stop.should_stop(gammas.len(), err, &scale) {
            break err;
        }
        let gamma = r[(pi, pj)];
        scale.add(m.column(pj));
        let a_col = r.column(pj).to_vec();
        let b_row: Vec<T> = (0..cols).map(|j| r[(pi, j)] / gamma).collect();

        for (j, &bj) in b_row.iter().enumerate() {
            if bj == T::zero() {
                continue;
            }
            for (rv, &av) in r.column_mut(j).iter_mut().zip(&a_col) {
                *rv -= av * bj;
            }
        }
        // The pivot cross of the remainder is zero in exact arithmetic.
        r.column_mut(pj).fill(T::zero());
        for j in 0..cols {
            r[(pi, j)] = T::zero();
        }

        a_cols.push(a_col);
        b_rows.push(b_row);
        row_pivots.push(pi);
        col_pivots.push(pj);
        gammas.push(gamma);
    };

    let k = gammas.len();
    let a = DenseMatrix::from_columns(rows, &a_cols)?;
    let b = DenseMatrix::from_fn(k, cols, |l, j| b_rows[l][j]);
    Ok(CaResult {
        a,
        b: Some(b),
        row_pivots,
        col_pivots,
        gammas,
        epsilon,
        remainder_diagonal: r.diagonal(),
        negative_diagonal: false,
    })
}

fn max_modulus_entry<T: Scalar>(r: &DenseMatrix<T>) -> (usize, usize, T) {
    let mut best = (0, 0, T::zero());
    let mut have = false;
    for j in 0..r.cols() {
        for (i, &v) in r.column(j).iter().enumerate() {
            let v = v.abs();
            let better = if !have || v > best.2 {
                true
            } else if v < best.2 {
                false
            } else {
                let (bi, bj) = (best.0, best.1);
                match (i == j, bi == bj) {
                    (true, false) => true,
                    (false, true) => false,
                    _ => (i, j) < (bi, bj),
                }
            };
            if better {
                best = (i, j, v);
                have = true;
            }
        }
    }
    best
}

/// Diagonally pivoted cross approximation `A·Aᵀ ≈ M` of an SPSD matrix
/// given through a column oracle. Never materializes `M`.
pub fn diag_pivoted_ca<T: Scalar, O: ColumnOracle<T> + ?Sized>(oracle: &O, stop: StopRule<T>) -> Result<CaResult<T>> {
    let n = oracle.dim();
    stop.validate(n)?;
    let mut d = oracle.diagonal();
    if d.len() != n {
        return Err(Error::Dimension(format!("oracle of order {n} returned a diagonal of length {}", d.len())));
    }
    ensure_finite(&d, "oracle diagonal")?;

    let max_diag = d.iter().fold(T::zero(), |m, &v| m.max(v));
    let noise_floor = T::of(10) * T::roundoff_at(max_diag);

    // Column-major n x k, grown one column per iteration.
    let mut a: Vec<T> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let mut gammas: Vec<T> = Vec::new();
    let mut scale = MeanAbs::default();
    let mut column = vec![T::zero(); n];
    let mut negative_diagonal = false;

    let epsilon = loop {
        for v in d.iter_mut() {
            if *v < T::zero() {
                if *v >= -noise_floor {
                    *v = T::zero();
                } else {
                    negative_diagonal = true;
                }
            }
        }
        let (pivot, gamma) = argmax(&d).unwrap_or((0, T::zero()));
        let err = gamma.max(T::zero());
        if negative_diagonal || gamma <= T::zero() || stop.should_stop(pivots.len(), err, &scale) {
            break err;
        }

        oracle.column_into(pivot, &mut column);
        ensure_finite(&column, "oracle column")?;
        scale.add(&column);

        // Redeem the updates owed to this column by the earlier pivots.
        for prev in a.chunks_exact(n) {
            let s = prev[pivot];
            if s == T::zero() {
                continue;
            }
            for (c, &p) in column.iter_mut().zip(prev) {
                *c -= p * s;
            }
        }
        let root = gamma.sqrt();
        for c in column.iter_mut() {
            *c /= root;
        }
        // Rows of earlier pivots are exactly zero in the remainder.
        for &p in &pivots {
            column[p] = T::zero();
        }
        column[pivot] = root;

        for (dv, &c) in d.iter_mut().zip(&column) {
            *dv -= c * c;
        }
        d[pivot] = T::zero();

        a.extend_from_slice(&column);
        pivots.push(pivot);
        gammas.push(gamma);
    };

    let k = pivots.len();
    Ok(CaResult {
        a: DenseMatrix::from_col_major(n, k, a)?,
        b: None,
        row_pivots: pivots.clone(),
        col_pivots: pivots,
        gammas,
        epsilon,
        remainder_diagonal: d,
        negative_diagonal,
    })
}

/// Logarithm of a determinant, kept as a sum of logs so it cannot
/// underflow.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet<T> {
    /// Sum of `log|x|` over the nonzero factors.
    pub log_abs_sum: T,
    /// Number of factors that were exactly zero.
    pub zero_count: usize,
}

impl<T: Scalar> LogDet<T> {
    /// The log-determinant: `-inf` as soon as one factor is zero.
    pub fn value(&self) -> T {
        if self.zero_count > 0 {
            T::neg_infinity()
        } else {
            self.log_abs_sum
        }
    }

    pub fn is_singular(&self) -> bool {
        self.zero_count > 0
    }
}

/// `log|det M[β, j]|` as the sum of `log|γ|` over the pivots.
pub fn pivot_logdet<T: Scalar>(result: &CaResult<T>) -> LogDet<T> {
    let mut out = LogDet { log_abs_sum: T::zero(), zero_count: 0 };
    for &g in &result.gammas {
        if g == T::zero() {
            out.zero_count += 1;
        } else {
            out.log_abs_sum += g.abs().ln();
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::DenseOracle;

    fn m(rows: &[&[f64]]) -> DenseMatrix<f64> {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn full_rank_one_in_one_step() {
        let mat = m(&[&[1.0, 1.0], &[1.0, 1.0]]);
        let r = fully_pivoted_ca(&mat, StopRule::FixedRank(2)).unwrap();
        assert_eq!(r.rank(), 1);
        assert_eq!(r.epsilon, 0.0);
        assert_eq!(r.approximation(), mat);
    }

    #[test]
    fn full_two_by_two_trace() {
        // R1 = M, pivot (0,0)=4, A=[4,2], B=[1,0.5]; R2 = [[0,0],[0,1]], pivot 1.
        let mat = m(&[&[4.0, 2.0], &[2.0, 2.0]]);
        let r = fully_pivoted_ca(&mat, StopRule::FixedRank(2)).unwrap();
        assert_eq!(r.gammas, vec![4.0, 1.0]);
        assert_eq!(r.row_pivots, vec![0, 1]);
        assert!(r.approximation().max_abs_diff(&mat) < 1e-15);
        assert_eq!(r.epsilon, 0.0);
    }

    #[test]
    fn full_zero_rank_reports_max_entry() {
        let mat = m(&[&[1.0, -7.0], &[3.0, 2.0]]);
        let r = fully_pivoted_ca(&mat, StopRule::FixedRank(0)).unwrap();
        assert_eq!(r.rank(), 0);
        assert_eq!(r.epsilon, 7.0);
        assert_eq!((r.a.rows(), r.a.cols()), (2, 0));
    }

    #[test]
    fn full_prefers_diagonal_on_ties() {
        let mat = m(&[&[1.0, -3.0], &[-3.0, 3.0]]);
        let r = fully_pivoted_ca(&mat, StopRule::FixedRank(1)).unwrap();
        assert_eq!((r.row_pivots[0], r.col_pivots[0]), (1, 1));
    }

    #[test]
    fn full_handles_rectangles() {
        let mat = m(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.5]]);
        let r = fully_pivoted_ca(&mat, StopRule::FixedRank(2)).unwrap();
        assert!(r.approximation().max_abs_diff(&mat) < 1e-14);
        assert!(fully_pivoted_ca(&mat, StopRule::FixedRank(3)).is_err());
    }

    #[test]
    fn diag_two_by_two_is_cholesky() {
        let mat = m(&[&[4.0, 2.0], &[2.0, 2.0]]);
        let r = diag_pivoted_ca(&DenseOracle::new(&mat).unwrap(), StopRule::FixedRank(2)).unwrap();
        assert_eq!(r.a, m(&[&[2.0, 0.0], &[1.0, 1.0]]));
        assert_eq!(r.row_pivots, vec![0, 1]);
        assert_eq!(r.epsilon, 0.0);
        assert_eq!(r.approximation(), mat);
    }

    #[test]
    fn diag_picks_largest_diagonal() {
        let mat = m(&[&[1.0, 0.0], &[0.0, 3.0]]);
        let r = diag_pivoted_ca(&DenseOracle::new(&mat).unwrap(), StopRule::FixedRank(1)).unwrap();
        assert_eq!(r.row_pivots, vec![1]);
        assert_eq!(r.a.column(0), &[0.0, 3f64.sqrt()]);
        assert_eq!(r.epsilon, 1.0);
    }

    #[test]
    fn diag_rank_one_adaptive() {
        let v = [0.3, -1.2, 0.7, 2.1, -0.4];
        let mat = DenseMatrix::from_fn(5, 5, |i, j| v[i] * v[j]);
        let r = diag_pivoted_ca(&DenseOracle::new(&mat).unwrap(), StopRule::Tolerance(1e-12)).unwrap();
        assert_eq!(r.rank(), 1);
        assert!(r.epsilon <= 1e-12);
        assert_eq!(r.row_pivots, vec![3]);
    }

    #[test]
    fn diag_identity_ties_to_smallest() {
        let id = DenseMatrix::<f64>::identity(3);
        let r = diag_pivoted_ca(&DenseOracle::new(&id).unwrap(), StopRule::FixedRank(2)).unwrap();
        assert_eq!(r.row_pivots, vec![0, 1]);
        assert_eq!(r.epsilon, 1.0);
    }

    #[test]
    fn diag_flags_indefinite_input() {
        let mat = m(&[&[1.0, 2.0], &[2.0, 1.0]]);
        let r = diag_pivoted_ca(&DenseOracle::new(&mat).unwrap(), StopRule::FixedRank(2)).unwrap();
        assert!(r.negative_diagonal);
        assert_eq!(r.rank(), 1);
    }

    #[test]
    fn diag_zero_matrix_stops_immediately() {
        let z = DenseMatrix::<f64>::zeros(4, 4);
        let r = diag_pivoted_ca(&DenseOracle::new(&z).unwrap(), StopRule::FixedRank(4)).unwrap();
        assert_eq!(r.rank(), 0);
        assert_eq!(r.epsilon, 0.0);
    }

    struct Lying;
    impl ColumnOracle<f64> for Lying {
        fn dim(&self) -> usize {
            3
        }
        fn column_into(&self, _: usize, out: &mut [f64]) {
            out.fill(0.0)
        }
        fn diagonal(&self) -> Vec<f64> {
            vec![1.0; 2]
        }
    }

    #[test]
    fn diag_rejects_inconsistent_oracle() {
        assert!(matches!(diag_pivoted_ca(&Lying, StopRule::FixedRank(1)), Err(Error::Dimension(_))));
    }

    #[test]
    fn stop_rule_validation() {
        let id = DenseMatrix::<f64>::identity(2);
        let o = DenseOracle::new(&id).unwrap();
        assert!(diag_pivoted_ca(&o, StopRule::FixedRank(3)).is_err());
        assert!(diag_pivoted_ca(&o, StopRule::Tolerance(0.0)).is_err());
        assert!(diag_pivoted_ca(&o, StopRule::Tolerance(-1.0)).is_err());
    }

    #[test]
    fn dynamic_rule_runs_full_rank_on_identity() {
        let id = DenseMatrix::<f64>::identity(4);
        let r = diag_pivoted_ca(&DenseOracle::new(&id).unwrap(), StopRule::Dynamic).unwrap();
        assert_eq!(r.rank(), 4);
    }

    #[test]
    fn pivot_logdet_examples() {
        let mat = m(&[&[4.0, 2.0], &[2.0, 2.0]]);
        let r = diag_pivoted_ca(&DenseOracle::new(&mat).unwrap(), StopRule::FixedRank(2)).unwrap();
        let ld = pivot_logdet(&r);
        assert!((ld.value() - 4f64.ln()).abs() < 1e-15);
        assert!((ld.value() - 1.3862944).abs() < 1e-7);

        let empty = diag_pivoted_ca(&DenseOracle::new(&mat).unwrap(), StopRule::FixedRank(0)).unwrap();
        assert_eq!(pivot_logdet(&empty).value(), 0.0);

        let id = DenseMatrix::<f64>::identity(5);
        let r = diag_pivoted_ca(&DenseOracle::new(&id).unwrap(), StopRule::FixedRank(5)).unwrap();
        assert_eq!(pivot_logdet(&r).value(), 0.0);

        let mut zeroed = r.clone();
        zeroed.gammas[2] = 0.0;
        let ld = pivot_logdet(&zeroed);
        assert_eq!(ld.value(), f64::NEG_INFINITY);
        assert_eq!(ld.zero_count, 1);
    }

    #[test]
    fn works_in_single_precision() {
        let mat = DenseMatrix::<f32>::from_rows(&[[4.0f32, 2.0], [2.0, 2.0]]).unwrap();
        let r = diag_pivoted_ca(&DenseOracle::new(&mat).unwrap(), StopRule::FixedRank(2)).unwrap();
        assert_eq!(r.a.column(0), &[2.0f32, 1.0]);
    }
}

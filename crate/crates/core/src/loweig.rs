//! Eigendecomposition of `A·Aᵀ` from a tall factor `A` and Karhunen-Loève
//! sampling of the resulting random field.
//!
//! With `A = Q·R` (thin Householder QR) the nonzero spectrum of `A·Aᵀ` is
//! the spectrum of the small `R·Rᵀ = U·Λ·Uᵀ`, and `Φ = Q·U`. Cost O(k²n)
//! for the QR plus O(k³) for the Jacobi eigensolver.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::crossapprox::{diag_pivoted_ca, StopRule};
use crate::error::{Error, Result};
use crate::matcore::{ColumnOracle, DenseMatrix};
use crate::scalar::Scalar;

/// Identifier of the random stream used by [`KleField::sample`], recorded in
/// sample file headers.
pub const RNG_ALGORITHM: &str = "chacha20(seed, stream=draw)+rand_distr-0.5-StandardNormal";

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPairs<T> {
    /// Descending, clamped at zero.
    pub values: Vec<T>,
    /// Orthonormal columns, `n x k`.
    pub vectors: DenseMatrix<T>,
}

impl<T: Scalar> EigenPairs<T> {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// `Φ·Λ·Φᵀ`.
    pub fn reconstruct(&self) -> DenseMatrix<T> {
        let mut scaled = self.vectors.clone();
        for (j, &l) in self.values.iter().enumerate() {
            let s = l.sqrt();
            scaled.column_mut(j).iter_mut().for_each(|v| *v *= s);
        }
        scaled.mul_self_transpose()
    }

    /// Leading `k` pairs.
    pub fn truncate(&self, k: usize) -> Self {
        let k = k.min(self.len());
        let cols: Vec<usize> = (0..k).collect();
        EigenPairs { values: self.values[..k].to_vec(), vectors: self.vectors.select_cols(&cols) }
    }
}

struct ThinQr<T> {
    q: DenseMatrix<T>,
    r: DenseMatrix<T>,
}

/// Householder QR of a tall `n x k` matrix, thin form.
fn householder_qr<T: Scalar>(a: &DenseMatrix<T>) -> ThinQr<T> {
    let (n, k) = (a.rows(), a.cols());
    let mut w = a.clone();
    let mut reflectors: Vec<(Vec<T>, T)> = Vec::with_capacity(k);

    for j in 0..k {
        let x = &w.column(j)[j..];
        let norm = x.iter().map(|v| v.powi(2)).sum::<T>().sqrt();
        let mut v = x.to_vec();
        if norm == T::zero() {
            reflectors.push((v, T::zero()));
            continue;
        }
        let alpha = if x[0] > T::zero() { -norm } else { norm };
        v[0] -= alpha;
        let vv: T = v.iter().map(|t| t.powi(2)).sum();
        let tau = T::of(2) / vv;
        for c in j..k {
            let col = &mut w.column_mut(c)[j..];
            let s = tau * v.iter().zip(col.iter()).map(|(&a, &b)| a * b).sum::<T>();
            col.iter_mut().zip(&v).for_each(|(d, &vi)| *d -= s * vi);
        }
        reflectors.push((v, tau));
    }

    let r = DenseMatrix::from_fn(k, k, |i, j| if i <= j { w[(i, j)] } else { T::zero() });
    // Q = H_0 ⋯ H_{k-1} applied to the first k unit vectors, last reflector first.
    let mut q = DenseMatrix::from_fn(n, k, |i, j| if i == j { T::one() } else { T::zero() });
    for (j, (v, tau)) in reflectors.iter().enumerate().rev() {
        if *tau == T::zero() {
            continue;
        }
        for c in 0..k {
            let col = &mut q.column_mut(c)[j..];
            let s = *tau * v.iter().zip(col.iter()).map(|(&a, &b)| a * b).sum::<T>();
            col.iter_mut().zip(v).for_each(|(d, &vi)| *d -= s * vi);
        }
    }
    ThinQr { q, r }
}

/// Cyclic Jacobi eigensolver for a symmetric matrix. Returns eigenvalues in
/// no particular order and the matching eigenvectors as columns.
fn jacobi_eigen<T: Scalar>(s: &DenseMatrix<T>) -> (Vec<T>, DenseMatrix<T>) {
    let k = s.rows();
    let mut a = s.clone();
    let mut v = DenseMatrix::identity(k);
    let half_u = T::unit_roundoff() / T::of(2);
    for _sweep in 0..100 {
        let mut rotated = false;
        for p in 0..k {
            for q in p + 1..k {
                let apq = a[(p, q)];
                let (app, aqq) = (a[(p, p)], a[(q, q)]);
                if apq.abs() <= T::min_positive_value() || apq.abs() <= half_u * (app * aqq).abs().sqrt() {
                    if apq != T::zero() {
                        a[(p, q)] = T::zero();
                        a[(q, p)] = T::zero();
                    }
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (T::of(2) * apq);
                let t = if tau.abs() > T::from_f64_lossy(1e150) {
                    T::one() / (T::of(2) * tau)
                } else {
                    let sign = if tau >= T::zero() { T::one() } else { -T::one() };
                    sign / (tau.abs() + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let sn = t * c;
                for r in 0..k {
                    let (arp, arq) = (a[(r, p)], a[(r, q)]);
                    a[(r, p)] = c * arp - sn * arq;
                    a[(r, q)] = sn * arp + c * arq;
                }
                for r in 0..k {
                    let (apr, aqr) = (a[(p, r)], a[(q, r)]);
                    a[(p, r)] = c * apr - sn * aqr;
                    a[(q, r)] = sn * apr + c * aqr;
                }
                a[(p, q)] = T::zero();
                a[(q, p)] = T::zero();
                for r in 0..k {
                    let (vrp, vrq) = (v[(r, p)], v[(r, q)]);
                    v[(r, p)] = c * vrp - sn * vrq;
                    v[(r, q)] = sn * vrp + c * vrq;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    (a.diagonal(), v)
}

/// Sorts descending, clamps at zero and fixes each column's sign so its
/// largest-magnitude entry is positive.
fn normalize_pairs<T: Scalar>(values: Vec<T>, vectors: DenseMatrix<T>) -> EigenPairs<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(std::cmp::Ordering::Equal));
    let mut out = vectors.select_cols(&order);
    for j in 0..out.cols() {
        let col = out.column_mut(j);
        let lead = col.iter().fold(T::zero(), |best, &x| if x.abs() > best.abs() { x } else { best });
        if lead < T::zero() {
            col.iter_mut().for_each(|x| *x = -*x);
        }
    }
    EigenPairs { values: order.iter().map(|&i| values[i].max(T::zero())).collect(), vectors: out }
}

/// Symmetric eigendecomposition of a small dense matrix (Jacobi).
pub fn symmetric_eigen<T: Scalar>(s: &DenseMatrix<T>) -> Result<EigenPairs<T>> {
    if !s.is_square() {
        return Err(Error::Dimension(format!(
            "eigendecomposition needs a square matrix, got {}x{}",
            s.rows(),
            s.cols()
        )));
    }
    let (values, vectors) = jacobi_eigen(s);
    Ok(normalize_pairs(values, vectors))
}

/// Eigenpairs of `A·Aᵀ` for a tall factor `A` (`n x k`, `k <= n`).
pub fn lowrank_eigen<T: Scalar>(a: &DenseMatrix<T>) -> Result<EigenPairs<T>> {
    let (n, k) = (a.rows(), a.cols());
    if k > n {
        return Err(Error::Dimension(format!("factor is {n}x{k}; needs at least as many rows as columns")));
    }
    let ThinQr { q, r } = householder_qr(a);
    let rrt = r.mul_self_transpose();
    let (values, u) = jacobi_eigen(&rrt);
    let sorted = normalize_pairs(values, u);
    let vectors = q.matmul(&sorted.vectors)?;
    // Recompute signs on Φ rather than U.
    Ok(normalize_pairs(sorted.values, vectors))
}

/// Truncated Karhunen-Loève expansion `Σ_{α<k'} ξ_α √λ_α φ_α`.
#[derive(Debug, Clone)]
pub struct KleField<T> {
    pub eig: EigenPairs<T>,
    pub k_prime: usize,
    pub seed: u64,
    /// Columns `√λ_α φ_α`, `n x k'`.
    modes: DenseMatrix<T>,
}

impl<T: Scalar> KleField<T> {
    pub fn new(eig: EigenPairs<T>, k_prime: usize, seed: u64) -> Result<Self> {
        if k_prime > eig.len() {
            return Err(Error::InvalidParameter(format!(
                "truncation {k_prime} exceeds the {} available eigenpairs",
                eig.len()
            )));
        }
        let mut modes = eig.truncate(k_prime).vectors;
        for (j, &l) in eig.values[..k_prime].iter().enumerate() {
            let s = l.sqrt();
            modes.column_mut(j).iter_mut().for_each(|v| *v *= s);
        }
        Ok(KleField { eig, k_prime, seed, modes })
    }

    pub fn len(&self) -> usize {
        self.modes.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.rows() == 0
    }

    /// Field for explicit coefficients `ξ` (length `k'`).
    pub fn realize(&self, xi: &[T]) -> Result<Vec<T>> {
        if xi.len() != self.k_prime {
            return Err(Error::Dimension(format!("{} coefficients for truncation {}", xi.len(), self.k_prime)));
        }
        self.modes.mul_vec(xi)
    }

    /// Sample number `draw`: ChaCha20 seeded with `seed`, stream `draw`. The
    /// same `(seed, draw)` always yields the same field, on every platform
    /// and regardless of which thread computes it.
    pub fn sample(&self, draw: u64) -> Vec<T> {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(draw);
        kle_sample(self, &mut rng)
    }

    /// Covariance `Φ'·Λ'·Φ'ᵀ` of the truncated field.
    pub fn covariance(&self) -> DenseMatrix<T> {
        self.modes.mul_self_transpose()
    }
}

/// Draws `k'` standard normal coefficients from `rng` and returns the field.
pub fn kle_sample<T: Scalar, R: Rng + ?Sized>(field: &KleField<T>, rng: &mut R) -> Vec<T> {
    let xi: Vec<T> = (0..field.k_prime).map(|_| T::from_f64_lossy(rng.sample::<f64, _>(StandardNormal))).collect();
    field.realize(&xi).expect("coefficient count matches truncation")
}

#[derive(Debug, Clone, PartialEq)]
pub struct KleReport<T> {
    pub epsilon: T,
    pub rank: usize,
    pub max_diag: T,
    pub ca_seconds: f64,
    pub eigen_seconds: f64,
}

/// CA of the covariance, eigendecomposition of the factor, and a KLE field
/// truncated to `min(k', rank)` terms.
pub fn kle_pipeline<T: Scalar, O: ColumnOracle<T> + ?Sized>(
    oracle: &O,
    stop: StopRule<T>,
    k_prime: usize,
    seed: u64,
) -> Result<(KleField<T>, KleReport<T>)> {
    let start = Instant::now();
    let max_diag = oracle.diagonal().into_iter().fold(T::zero(), T::max);
    let ca = diag_pivoted_ca(oracle, stop)?;
    let ca_seconds = start.elapsed().as_secs_f64();

    let start = Instant::now();
    let eig = lowrank_eigen(&ca.a)?;
    let eigen_seconds = start.elapsed().as_secs_f64();

    let k = ca.rank();
    let field = KleField::new(eig, k_prime.min(k), seed)?;
    Ok((field, KleReport { epsilon: ca.epsilon, rank: k, max_diag, ca_seconds, eigen_seconds }))
}

//! Gaussian kernels, the column oracles built from them, and a synthetic
//! wing-like surface used as a stand-in geometry for random-field runs.

use std::cmp::Ordering;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matcore::{read_matrix_as, write_matrix_as, ColumnOracle, DenseMatrix, MatrixFormat};
use crate::scalar::Scalar;

/// `n` pairwise distinct points in `R^d`, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet<T> {
    dim: usize,
    coords: Vec<T>,
}

impl<T: Scalar> PointSet<T> {
    pub fn new(dim: usize, coords: Vec<T>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidParameter("points need at least one coordinate".into()));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(Error::Dimension(format!("{} coordinates do not split into {dim}-d points", coords.len())));
        }
        if let Some(i) = coords.iter().position(|c| !c.is_finite()) {
            return Err(Error::InvalidParameter(format!("non-finite coordinate in point {}", i / dim)));
        }
        let set = PointSet { dim, coords };
        if let Some((a, b)) = set.find_duplicate() {
            return Err(Error::InvalidParameter(format!("points {a} and {b} coincide")));
        }
        Ok(set)
    }

    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let dim = rows.first().map_or(1, |r| r.as_ref().len());
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for (i, r) in rows.iter().enumerate() {
            if r.as_ref().len() != dim {
                return Err(Error::Dimension(format!(
                    "point {i} has {} coordinates, expected {dim}",
                    r.as_ref().len()
                )));
            }
            coords.extend_from_slice(r.as_ref());
        }
        Self::new(dim, coords)
    }

    /// One-dimensional point set.
    pub fn from_values(xs: &[T]) -> Result<Self> {
        Self::new(1, xs.to_vec())
    }

    fn find_duplicate(&self) -> Option<(usize, usize)> {
        let mut order: Vec<usize> = (0..self.len()).collect();
        let cmp = |a: &usize, b: &usize| {
            self.point(*a)
                .iter()
                .zip(self.point(*b))
                .map(|(x, y)| x.partial_cmp(y).unwrap_or(Ordering::Equal))
                .find(|o| *o != Ordering::Equal)
                .unwrap_or(Ordering::Equal)
        };
        order.sort_by(cmp);
        order.windows(2).find(|w| cmp(&w[0], &w[1]) == Ordering::Equal).map(|w| (w[0].min(w[1]), w[0].max(w[1])))
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[T] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[T]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[T] {
        &self.coords
    }

    /// Points with the given indices, in that order.
    pub fn subset(&self, indices: &[usize]) -> Self {
        let mut coords = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            coords.extend_from_slice(self.point(i));
        }
        PointSet { dim: self.dim, coords }
    }
}

/// Reads a point CSV: one point per line, `dim` coordinates, optionally
/// followed by extra columns returned separately (a σ column for covariance
/// models, target values for fitting).
pub fn read_point_csv<T: Scalar>(path: impl AsRef<Path>, dim: usize) -> Result<(PointSet<T>, DenseMatrix<T>)> {
    let m: DenseMatrix<T> = read_matrix_as(path, MatrixFormat::Csv)?;
    if m.cols() < dim {
        return Err(Error::Dimension(format!("point file has {} columns, need at least {dim}", m.cols())));
    }
    let coords: Vec<usize> = (0..dim).collect();
    let rest: Vec<usize> = (dim..m.cols()).collect();
    let pts = m.select_cols(&coords);
    let points = PointSet::new(dim, (0..m.rows()).flat_map(|i| pts.row(i)).collect())?;
    Ok((points, m.select_cols(&rest)))
}

/// Writes points (and optional extra per-point columns) as CSV.
pub fn write_point_csv<T: Scalar>(points: &PointSet<T>, extra: &[&[T]], path: impl AsRef<Path>) -> Result<()> {
    let n = points.len();
    let cols = points.dim() + extra.len();
    if let Some(bad) = extra.iter().position(|e| e.len() != n) {
        return Err(Error::Dimension(format!("extra column {bad} has {} entries for {n} points", extra[bad].len())));
    }
    let m =
        DenseMatrix::from_fn(
            n,
            cols,
            |i, j| {
                if j < points.dim() {
                    points.point(i)[j]
                } else {
                    extra[j - points.dim()][i]
                }
            },
        );
    write_matrix_as(&m, path, MatrixFormat::Csv)
}

fn validate_lengths<T: Scalar>(theta: &[T], what: &str) -> Result<()> {
    if theta.is_empty() {
        return Err(Error::InvalidParameter(format!("{what} needs at least one component")));
    }
    if let Some(t) = theta.iter().find(|t| !(**t > T::zero()) || !t.is_finite()) {
        return Err(Error::InvalidParameter(format!("{what} components must be positive, got {t:e}")));
    }
    Ok(())
}

/// Gaussian radial basis function `φ(x, c) = exp(-‖(x - c)/θ‖²)`, with a
/// scalar shape parameter or one per dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianRbf<T> {
    theta: Vec<T>,
}

impl<T: Scalar> GaussianRbf<T> {
    pub fn new(theta: Vec<T>) -> Result<Self> {
        validate_lengths(&theta, "shape parameter")?;
        Ok(GaussianRbf { theta })
    }

    pub fn isotropic(theta: T) -> Result<Self> {
        Self::new(vec![theta])
    }

    pub fn theta(&self) -> &[T] {
        &self.theta
    }

    /// Errors unless θ is scalar or has one entry per dimension.
    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.theta.len() == 1 || self.theta.len() == dim {
            Ok(())
        } else {
            Err(Error::Dimension(format!("{} shape parameters for {dim}-d points", self.theta.len())))
        }
    }

    /// Unchecked evaluation; `x`, `c` and θ must have compatible lengths.
    #[inline]
    pub fn eval(&self, x: &[T], c: &[T]) -> T {
        let r2: T = if self.theta.len() == 1 {
            let inv = T::one() / self.theta[0];
            x.iter().zip(c).map(|(&a, &b)| ((a - b) * inv).powi(2)).sum()
        } else {
            x.iter().zip(c).zip(&self.theta).map(|((&a, &b), &t)| ((a - b) / t).powi(2)).sum()
        };
        (-r2).exp()
    }
}

/// Checked kernel evaluation.
pub fn rbf_eval<T: Scalar>(kernel: &GaussianRbf<T>, x: &[T], c: &[T]) -> Result<T> {
    if x.len() != c.len() {
        return Err(Error::Dimension(format!("points of dimension {} and {}", x.len(), c.len())));
    }
    kernel.check_dim(x.len())?;
    Ok(kernel.eval(x, c))
}

/// Kernel matrix `Φ_ij = φ(x_i, x_j)` served one column at a time.
#[derive(Debug, Clone, Copy)]
pub struct KernelOracle<'a, T> {
    kernel: &'a GaussianRbf<T>,
    points: &'a PointSet<T>,
}

pub fn kernel_matrix_oracle<'a, T: Scalar>(
    kernel: &'a GaussianRbf<T>,
    points: &'a PointSet<T>,
) -> Result<KernelOracle<'a, T>> {
    if points.is_empty() {
        return Err(Error::EmptyInput("kernel oracle over an empty point set".into()));
    }
    kernel.check_dim(points.dim())?;
    Ok(KernelOracle { kernel, points })
}

impl<T: Scalar> ColumnOracle<T> for KernelOracle<'_, T> {
    fn dim(&self) -> usize {
        self.points.len()
    }

    fn column_into(&self, j: usize, out: &mut [T]) {
        let c = self.points.point(j);
        for (o, x) in out.iter_mut().zip(self.points.iter()) {
            *o = self.kernel.eval(x, c);
        }
    }

    fn diagonal(&self) -> Vec<T> {
        vec![T::one(); self.points.len()]
    }
}

/// Covariance `c_ij = σ_i σ_j exp(-Σ_a (Δ_a/θ_a)²)` over points in `R³`.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel<T> {
    pub sigma: Vec<T>,
    pub theta: [T; 3],
}

impl<T: Scalar> CovarianceModel<T> {
    pub fn new(sigma: Vec<T>, theta: [T; 3]) -> Result<Self> {
        validate_lengths(&theta, "correlation length")?;
        if let Some(s) = sigma.iter().find(|s| !(**s >= T::zero()) || !s.is_finite()) {
            return Err(Error::InvalidParameter(format!("standard deviations must be >= 0, got {s:e}")));
        }
        Ok(CovarianceModel { sigma, theta })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CovarianceOracle<'a, T> {
    model: &'a CovarianceModel<T>,
    points: &'a PointSet<T>,
}

pub fn covariance_oracle<'a, T: Scalar>(
    model: &'a CovarianceModel<T>,
    points: &'a PointSet<T>,
) -> Result<CovarianceOracle<'a, T>> {
    if points.dim() != 3 {
        return Err(Error::Dimension(format!("covariance model needs 3-d points, got {}-d", points.dim())));
    }
    if model.sigma.len() != points.len() {
        return Err(Error::Dimension(format!("{} sigma values for {} points", model.sigma.len(), points.len())));
    }
    // Re-validate in case the public fields were edited after construction.
    CovarianceModel::new(model.sigma.clone(), model.theta)?;
    Ok(CovarianceOracle { model, points })
}

impl<T: Scalar> ColumnOracle<T> for CovarianceOracle<'_, T> {
    fn dim(&self) -> usize {
        self.points.len()
    }

    fn column_into(&self, j: usize, out: &mut [T]) {
        let c = self.points.point(j);
        let sj = self.model.sigma[j];
        let inv = self.model.theta.map(|t| T::one() / t);
        for (i, o) in out.iter_mut().enumerate() {
            let si = self.model.sigma[i];
            if si == T::zero() || sj == T::zero() {
                *o = T::zero();
                continue;
            }
            let x = self.points.point(i);
            let r2 =
                ((x[0] - c[0]) * inv[0]).powi(2) + ((x[1] - c[1]) * inv[1]).powi(2) + ((x[2] - c[2]) * inv[2]).powi(2);
            *o = si * sj * (-r2).exp();
        }
    }

    fn diagonal(&self) -> Vec<T> {
        self.model.sigma.iter().map(|&s| s * s).collect()
    }
}

/// Seeded point cloud on a thin wing-like surface with a smooth σ field.
#[derive(Debug, Clone)]
pub struct SyntheticSurface<T> {
    pub points: PointSet<T>,
    pub sigma: Vec<T>,
}

/// Chord length (x extent) of the synthetic surface.
pub const SURFACE_CHORD: f64 = 0.2;
/// Span (y extent).
pub const SURFACE_SPAN: f64 = 0.5;
/// Maximum half-thickness (z extent) at mid-chord of the root.
pub const SURFACE_THICKNESS: f64 = 0.004;
/// Peak of the σ field.
pub const SIGMA_MAX: f64 = 1.0;

/// Samples `n` points on the surface
///
/// ```text
/// x = C·u,  y = S·v,  z = ±H·sin(πu)·(1 - v/2),   (u, v) ~ U[0,1)², sign ~ ±1
/// σ = σ_max · sin(πu)² · exp(-((v - 0.6)/0.35)²)
/// ```
///
/// with `C`, `S`, `H`, `σ_max` the `SURFACE_*` / [`SIGMA_MAX`] constants.
/// The sign picks the upper or lower skin. σ vanishes at the leading and
/// trailing edges. Deterministic in `(n, seed)` (ChaCha8).
pub fn synth_surface<T: Scalar>(n: usize, seed: u64) -> Result<SyntheticSurface<T>> {
    if n == 0 {
        return Err(Error::InvalidParameter("synthetic surface needs at least one point".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pi = std::f64::consts::PI;
    let mut coords = Vec::with_capacity(3 * n);
    let mut sigma = Vec::with_capacity(n);
    for _ in 0..n {
        let u: f64 = rng.random();
        let v: f64 = rng.random();
        let side = if rng.random::<bool>() { 1.0 } else { -1.0 };
        let camber = (pi * u).sin();
        coords.push(T::from_f64_lossy(SURFACE_CHORD * u));
        coords.push(T::from_f64_lossy(SURFACE_SPAN * v));
        coords.push(T::from_f64_lossy(side * SURFACE_THICKNESS * camber * (1.0 - 0.5 * v)));
        let bump = camber * camber * (-((v - 0.6) / 0.35).powi(2)).exp();
        sigma.push(T::from_f64_lossy(SIGMA_MAX * bump));
    }
    Ok(SyntheticSurface { points: PointSet::new(3, coords)?, sigma })
}

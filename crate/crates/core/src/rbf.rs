//! Gaussian RBF interpolation.
//!
//! Three ways to get the weights of `s(x) = Σ w_i φ(x, x_i)`:
//!
//! * [`FitMethod::Pcd`]: pivoted Cholesky with the dynamic tolerance picks a
//!   subset of the centers; only their weights are solved for, the rest
//!   stay zero. No regularization, O(k²n).
//! * [`FitMethod::Chol`]: dense Cholesky of `Φ + λI`, O(n³).
//! * [`FitMethod::Lu`]: dense LU of the unregularized `Φ`, O(n³).

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crossapprox::StopRule;
use crate::error::{Error, Result};
use crate::kernels::{kernel_matrix_oracle, GaussianRbf, PointSet};
use crate::matcore::dense::{cholesky, cholesky_solve, Lu};
use crate::matcore::{ColumnOracle, DenseMatrix};
use crate::pivchol::{pcd_lowrank, reduced_solve};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    Pcd,
    Chol,
    Lu,
}

impl FitMethod {
    pub const ALL: [FitMethod; 3] = [FitMethod::Pcd, FitMethod::Chol, FitMethod::Lu];

    pub fn name(self) -> &'static str {
        match self {
            FitMethod::Pcd => "pcd",
            FitMethod::Chol => "chol",
            FitMethod::Lu => "lu",
        }
    }
}

impl std::fmt::Display for FitMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for FitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pcd" => Ok(FitMethod::Pcd),
            "chol" => Ok(FitMethod::Chol),
            "lu" => Ok(FitMethod::Lu),
            other => Err(Error::InvalidParameter(format!("unknown fit method '{other}' (pcd, chol, lu)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitDiagnostics<T> {
    /// Factorization error (PCD only).
    pub epsilon: Option<T>,
    /// Number of centers carrying a weight.
    pub rank: usize,
    /// Regularization added to the diagonal (Chol only).
    pub lambda: Option<T>,
    /// Wall time of factorization and solve, kernel evaluation included.
    pub fit_seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbfModel<T> {
    pub centers: PointSet<T>,
    pub kernel: GaussianRbf<T>,
    /// One weight per center; zero outside `beta` for PCD fits.
    pub weights: Vec<T>,
    /// Centers selected by the PCD fit, in pivot order. Empty otherwise.
    pub beta: Vec<usize>,
    pub method: FitMethod,
    pub diagnostics: FitDiagnostics<T>,
}

fn check_fit_inputs<T: Scalar>(points: &PointSet<T>, f: &[T], kernel: &GaussianRbf<T>) -> Result<()> {
    if points.is_empty() {
        return Err(Error::EmptyInput("no centers to fit".into()));
    }
    if points.len() != f.len() {
        return Err(Error::Dimension(format!("{} centers but {} sample values", points.len(), f.len())));
    }
    kernel.check_dim(points.dim())
}

/// Dense kernel matrix `Φ`.
pub fn kernel_matrix<T: Scalar>(kernel: &GaussianRbf<T>, points: &PointSet<T>) -> Result<DenseMatrix<T>> {
    Ok(kernel_matrix_oracle(kernel, points)?.to_dense())
}

/// `n·u·mean|Φ_ij|`, the regularization used by the Chol baseline when
/// none is given.
pub fn default_lambda<T: Scalar>(phi: &DenseMatrix<T>) -> T {
    let n = phi.rows();
    let entries = phi.as_slice();
    if entries.is_empty() {
        return T::zero();
    }
    let mean = entries.iter().map(|v| v.abs()).sum::<T>() / T::of(entries.len());
    T::of(n) * T::roundoff_at(mean)
}

/// PCD fit with the dynamic tolerance `ℓ·u·mean|Φ_ij|`.
pub fn rbf_fit_pcd<T: Scalar>(points: &PointSet<T>, f: &[T], kernel: &GaussianRbf<T>) -> Result<RbfModel<T>> {
    rbf_fit_pcd_with(points, f, kernel, StopRule::Dynamic)
}

/// PCD fit with an explicit stopping rule.
pub fn rbf_fit_pcd_with<T: Scalar>(
    points: &PointSet<T>,
    f: &[T],
    kernel: &GaussianRbf<T>,
    stop: StopRule<T>,
) -> Result<RbfModel<T>> {
    check_fit_inputs(points, f, kernel)?;
    let start = Instant::now();
    let oracle = kernel_matrix_oracle(kernel, points)?;
    let pcd = pcd_lowrank(&oracle, stop)?;
    let weights = reduced_solve(&pcd, f)?;
    let fit_seconds = start.elapsed().as_secs_f64();
    Ok(RbfModel {
        centers: points.clone(),
        kernel: kernel.clone(),
        weights,
        diagnostics: FitDiagnostics { epsilon: Some(pcd.epsilon), rank: pcd.rank(), lambda: None, fit_seconds },
        beta: pcd.beta,
        method: FitMethod::Pcd,
    })
}

/// Regularized dense Cholesky fit of `(Φ + λI) w = f`. `None` selects
/// [`default_lambda`].
pub fn rbf_fit_chol<T: Scalar>(
    points: &PointSet<T>,
    f: &[T],
    kernel: &GaussianRbf<T>,
    lambda: Option<T>,
) -> Result<RbfModel<T>> {
    check_fit_inputs(points, f, kernel)?;
    if let Some(l) = lambda {
        if !(l >= T::zero()) || !l.is_finite() {
            return Err(Error::InvalidParameter(format!("regularization must be >= 0, got {l:e}")));
        }
    }
    let start = Instant::now();
    let mut phi = kernel_matrix(kernel, points)?;
    let lambda = lambda.unwrap_or_else(|| default_lambda(&phi));
    for i in 0..phi.rows() {
        phi[(i, i)] += lambda;
    }
    let l = cholesky(&phi)?;
    let weights = cholesky_solve(&l, f)?;
    let fit_seconds = start.elapsed().as_secs_f64();
    Ok(RbfModel {
        centers: points.clone(),
        kernel: kernel.clone(),
        diagnostics: FitDiagnostics { epsilon: None, rank: weights.len(), lambda: Some(lambda), fit_seconds },
        weights,
        beta: Vec::new(),
        method: FitMethod::Chol,
    })
}

/// Unregularized dense LU fit of `Φ w = f`.
pub fn rbf_fit_lu<T: Scalar>(points: &PointSet<T>, f: &[T], kernel: &GaussianRbf<T>) -> Result<RbfModel<T>> {
    check_fit_inputs(points, f, kernel)?;
    let start = Instant::now();
    let phi = kernel_matrix(kernel, points)?;
    let weights = Lu::new(&phi)?.solve(f)?;
    let fit_seconds = start.elapsed().as_secs_f64();
    Ok(RbfModel {
        centers: points.clone(),
        kernel: kernel.clone(),
        diagnostics: FitDiagnostics { epsilon: None, rank: weights.len(), lambda: None, fit_seconds },
        weights,
        beta: Vec::new(),
        method: FitMethod::Lu,
    })
}

pub fn rbf_fit<T: Scalar>(
    method: FitMethod,
    points: &PointSet<T>,
    f: &[T],
    kernel: &GaussianRbf<T>,
) -> Result<RbfModel<T>> {
    match method {
        FitMethod::Pcd => rbf_fit_pcd(points, f, kernel),
        FitMethod::Chol => rbf_fit_chol(points, f, kernel, None),
        FitMethod::Lu => rbf_fit_lu(points, f, kernel),
    }
}

/// Evaluates the interpolant at every query point. Zero weights are
/// skipped, so a PCD model costs O(k·d) per query. Queries are evaluated
/// in parallel.
pub fn rbf_predict<T: Scalar>(model: &RbfModel<T>, queries: &PointSet<T>) -> Result<Vec<T>> {
    if queries.dim() != model.centers.dim() {
        return Err(Error::Dimension(format!("{}-d queries against a {}-d model", queries.dim(), model.centers.dim())));
    }
    let active: Vec<(&[T], T)> = model
        .weights
        .iter()
        .enumerate()
        .filter(|(_, w)| **w != T::zero())
        .map(|(i, &w)| (model.centers.point(i), w))
        .collect();
    let kernel = &model.kernel;
    let out = queries
        .coords()
        .par_chunks(queries.dim())
        .map(|x| active.iter().map(|&(c, w)| w * kernel.eval(x, c)).sum())
        .collect();
    Ok(out)
}

/// Root mean square error.
pub fn rmse<T: Scalar>(pred: &[T], truth: &[T]) -> Result<T> {
    if pred.is_empty() {
        return Err(Error::EmptyInput("rmse of empty vectors".into()));
    }
    if pred.len() != truth.len() {
        return Err(Error::Dimension(format!("{} predictions for {} reference values", pred.len(), truth.len())));
    }
    let sum: T = pred.iter().zip(truth).map(|(&p, &t)| (p - t).powi(2)).sum();
    Ok((sum / T::of(pred.len())).sqrt())
}

/// On-disk JSON form of a model.
///
/// ```json
/// {
///   "format": "pivotal-rbf-model", "version": 1,
///   "method": "pcd", "theta": [0.2], "dim": 1,
///   "centers": [[0.25], [0.75]],
///   "beta": [1],
///   "weights": [{"index": 1, "value": 0.5}],
///   "diagnostics": {"epsilon": 1e-16, "rank": 1, "lambda": null, "fit_seconds": 0.001}
/// }
/// ```
///
/// Only nonzero weights are listed; every other center has weight zero.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub format: String,
    pub version: u32,
    pub method: FitMethod,
    pub theta: Vec<f64>,
    pub dim: usize,
    pub centers: Vec<Vec<f64>>,
    pub beta: Vec<usize>,
    pub weights: Vec<WeightEntry>,
    pub diagnostics: DiagnosticsFile,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WeightEntry {
    pub index: usize,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsFile {
    pub epsilon: Option<f64>,
    pub rank: usize,
    pub lambda: Option<f64>,
    pub fit_seconds: f64,
}

const MODEL_FORMAT: &str = "pivotal-rbf-model";

impl<T: Scalar> RbfModel<T> {
    pub fn to_file(&self) -> ModelFile {
        ModelFile {
            format: MODEL_FORMAT.into(),
            version: 1,
            method: self.method,
            theta: self.kernel.theta().iter().map(|t| t.to_f64_lossy()).collect(),
            dim: self.centers.dim(),
            centers: self.centers.iter().map(|p| p.iter().map(|v| v.to_f64_lossy()).collect()).collect(),
            beta: self.beta.clone(),
            weights: self
                .weights
                .iter()
                .enumerate()
                .filter(|(_, w)| **w != T::zero())
                .map(|(index, w)| WeightEntry { index, value: w.to_f64_lossy() })
                .collect(),
            diagnostics: DiagnosticsFile {
                epsilon: self.diagnostics.epsilon.map(|e| e.to_f64_lossy()),
                rank: self.diagnostics.rank,
                lambda: self.diagnostics.lambda.map(|l| l.to_f64_lossy()),
                fit_seconds: self.diagnostics.fit_seconds,
            },
        }
    }

    pub fn from_file(file: &ModelFile) -> Result<Self> {
        if file.format != MODEL_FORMAT {
            return Err(Error::InvalidParameter(format!("not a model file (format '{}')", file.format)));
        }
        let conv = |v: &f64| T::from_f64_lossy(*v);
        let mut coords = Vec::with_capacity(file.centers.len() * file.dim);
        for (i, c) in file.centers.iter().enumerate() {
            if c.len() != file.dim {
                return Err(Error::Dimension(format!("center {i} has {} coordinates, expected {}", c.len(), file.dim)));
            }
            coords.extend(c.iter().map(conv));
        }
        let centers = PointSet::new(file.dim, coords)?;
        let mut weights = vec![T::zero(); centers.len()];
        for w in &file.weights {
            *weights
                .get_mut(w.index)
                .ok_or_else(|| Error::Dimension(format!("weight index {} out of range", w.index)))? = conv(&w.value);
        }
        if let Some(&b) = file.beta.iter().find(|&&b| b >= centers.len()) {
            return Err(Error::Dimension(format!("selected center {b} out of range")));
        }
        let kernel = GaussianRbf::new(file.theta.iter().map(conv).collect())?;
        kernel.check_dim(file.dim)?;
        Ok(RbfModel {
            centers,
            kernel,
            weights,
            beta: file.beta.clone(),
            method: file.method,
            diagnostics: FitDiagnostics {
                epsilon: file.diagnostics.epsilon.as_ref().map(conv),
                rank: file.diagnostics.rank,
                lambda: file.diagnostics.lambda.as_ref().map(conv),
                fit_seconds: file.diagnostics.fit_seconds,
            },
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&self.to_file())?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Self::from_file(&serde_json::from_str(text)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }
}

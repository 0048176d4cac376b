//! Ridge regression with closed-form leave-one-out λ selection.
//!
//! Features are standardized with training statistics, the target is
//! centered, and the dual (kernel) form is solved through one symmetric
//! eigendecomposition of the n×n Gram matrix — cheap when features vastly
//! outnumber rows, which is exactly the Rocket/MiniRocket regime (≈ 600 rows
//! × 10–20k columns). The same eigendecomposition yields every leave-one-out
//! residual for every λ on the grid without refitting, via the standard hat
//! identity e_i = (y_i − ŷ_i)/(1 − h_ii).

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::{Error, Result};

/// Keeps eigenvalues and leverage denominators safely positive.
const EIGEN_FLOOR: f64 = 1e-12;

/// Features with (almost) no training variance get their std clamped here so
/// standardization never divides by zero; their weight is then meaningless
/// but harmless, since the standardized column is ~0.
const STD_FLOOR: f64 = 1e-12;

/// A fitted ridge regressor, including the normalization frozen at fit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RidgeModel {
    /// One weight per (standardized) feature column.
    pub weights: Vec<f64>,
    pub intercept: f64,
    /// The regularization strength the model was solved at.
    pub lambda: f64,
    /// Per-column training means subtracted before applying weights.
    pub feat_mean: Vec<f64>,
    /// Per-column training standard deviations (population, floored).
    pub feat_std: Vec<f64>,
    /// Mean leave-one-out RMSE at `lambda`, for reporting.
    pub loo_rmse: f64,
}

/// The spec'd default search grid: 10 points, logarithmic in [1e−3, 1e3].
pub fn default_lambda_grid() -> Vec<f64> {
    let (lo, hi, n) = (1e-3f64, 1e3f64, 10);
    (0..n)
        .map(|i| 10f64.powf(lo.log10() + (hi.log10() - lo.log10()) * i as f64 / (n - 1) as f64))
        .collect()
}

/// Per-column mean and floored population std of a feature matrix.
fn column_stats(features: &FeatureMatrix) -> (Vec<f64>, Vec<f64>) {
    let (n, p) = (features.rows(), features.cols());
    let mut mean = vec![0.0; p];
    for r in 0..n {
        for (m, v) in mean.iter_mut().zip(features.row(r)) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let mut var = vec![0.0; p];
    for r in 0..n {
        for ((s, v), m) in var.iter_mut().zip(features.row(r)).zip(&mean) {
            let d = v - m;
            *s += d * d;
        }
    }
    let std: Vec<f64> =
        var.iter().map(|s| (s / n as f64).sqrt().max(STD_FLOOR)).collect();
    (mean, std)
}

/// Standardized training matrix Z (n×p) with the given statistics.
fn standardized(features: &FeatureMatrix, mean: &[f64], std: &[f64]) -> DMatrix<f64> {
    let (n, p) = (features.rows(), features.cols());
    DMatrix::from_fn(n, p, |r, c| (features.row(r)[c] - mean[c]) / std[c])
}

fn check_fit_inputs(features: &FeatureMatrix, targets: &[f64]) -> Result<()> {
    if features.rows() != targets.len() {
        return Err(Error::Dimensions(format!(
            "{} feature rows for {} targets",
            features.rows(),
            targets.len()
        )));
    }
    if features.rows() < 2 {
        return Err(Error::Config("ridge fit needs at least 2 rows".into()));
    }
    features.ensure_finite()?;
    if targets.iter().any(|y| !y.is_finite()) {
        return Err(Error::Value("non-finite regression target".into()));
    }
    Ok(())
}

/// Eigendecomposition of the centered Gram matrix, shared by fit paths.
struct DualBasis {
    /// Standardized features, centered per column by construction when the
    /// stats come from the same matrix.
    z: DMatrix<f64>,
    /// Eigenvectors of Z·Zᵀ (columns), n×n.
    u: DMatrix<f64>,
    /// Eigenvalues of Z·Zᵀ, clamped to ≥ 0.
    d: DVector<f64>,
    /// Uᵀ·(y − ȳ)
    uty: DVector<f64>,
    y_mean: f64,
    yc: DVector<f64>,
}

impl DualBasis {
    fn build(features: &FeatureMatrix, targets: &[f64], mean: &[f64], std: &[f64]) -> Self {
        let z = standardized(features, mean, std);
        let n = z.nrows();
        let gram = &z * z.transpose();
        let eigen = SymmetricEigen::new(gram);
        let d = eigen.eigenvalues.map(|v| v.max(0.0));
        let u = eigen.eigenvectors;
        let y_mean = targets.iter().sum::<f64>() / n as f64;
        let yc = DVector::from_iterator(n, targets.iter().map(|y| y - y_mean));
        let uty = u.transpose() * &yc;
        Self { z, u, d, uty, y_mean, yc }
    }

    /// Leave-one-out residuals at one λ: e_i = (y_i − ŷ_i)/(1 − h_ii) with
    /// ŷ from the full fit and h the hat diagonal. The intercept over centered
    /// targets contributes the constant 1/n leverage term.
    fn loo_rmse(&self, lambda: f64) -> f64 {
        let n = self.z.nrows();
        // Shrinkage factors d/(d+λ) per eigendirection.
        let shrink: Vec<f64> = self.d.iter().map(|&d| d / (d + lambda)).collect();
        let mut sum_sq = 0.0;
        for i in 0..n {
            let mut fit_i = 0.0; // Σ_j U_ij · s_j · (Uᵀyc)_j — ŷc_i
            let mut h_ii = 1.0 / n as f64;
            for j in 0..n {
                let u_ij = self.u[(i, j)];
                fit_i += u_ij * shrink[j] * self.uty[j];
                h_ii += u_ij * u_ij * shrink[j];
            }
            let denom = (1.0 - h_ii).max(EIGEN_FLOOR);
            let residual = (self.yc[i] - fit_i) / denom;
            sum_sq += residual * residual;
        }
        (sum_sq / n as f64).sqrt()
    }

    /// Primal weights at one λ through the dual: w = Zᵀ·U·diag(1/(d+λ))·Uᵀ·yc.
    fn weights(&self, lambda: f64) -> DVector<f64> {
        let scaled = DVector::from_iterator(
            self.d.len(),
            self.d.iter().zip(self.uty.iter()).map(|(&d, &uy)| uy / (d + lambda)),
        );
        let alpha = &self.u * scaled;
        self.z.transpose() * alpha
    }
}

/// Fits a ridge model, picking λ from `lambda_grid` by exact leave-one-out
/// RMSE computed from a single eigendecomposition of the Gram matrix.
pub fn ridge_fit(
    features: &FeatureMatrix,
    targets: &[f64],
    lambda_grid: &[f64],
) -> Result<RidgeModel> {
    if lambda_grid.is_empty() || lambda_grid.iter().any(|&l| !(l > 0.0)) {
        return Err(Error::Config("λ grid must be non-empty and positive".into()));
    }
    check_fit_inputs(features, targets)?;
    let (mean, std) = column_stats(features);
    let basis = DualBasis::build(features, targets, &mean, &std);

    let mut best = (lambda_grid[0], f64::INFINITY);
    for &lambda in lambda_grid {
        let rmse = basis.loo_rmse(lambda);
        // Strict < keeps the first (smallest) λ on ties.
        if rmse < best.1 {
            best = (lambda, rmse);
        }
    }
    let (lambda, loo_rmse) = best;
    let weights = basis.weights(lambda);
    Ok(RidgeModel {
        weights: weights.iter().copied().collect(),
        intercept: basis.y_mean,
        lambda,
        feat_mean: mean,
        feat_std: std,
        loo_rmse,
    })
}

/// Fits at one fixed λ, skipping the grid search.
pub fn ridge_fit_at(features: &FeatureMatrix, targets: &[f64], lambda: f64) -> Result<RidgeModel> {
    if !(lambda > 0.0) {
        return Err(Error::Config(format!("λ must be positive, got {lambda}")));
    }
    check_fit_inputs(features, targets)?;
    let (mean, std) = column_stats(features);
    let basis = DualBasis::build(features, targets, &mean, &std);
    let loo_rmse = basis.loo_rmse(lambda);
    let weights = basis.weights(lambda);
    Ok(RidgeModel {
        weights: weights.iter().copied().collect(),
        intercept: basis.y_mean,
        lambda,
        feat_mean: mean,
        feat_std: std,
        loo_rmse,
    })
}

/// Predictions for a feature matrix: standardize with the model's training
/// statistics, apply weights, add the intercept.
pub fn ridge_predict(model: &RidgeModel, features: &FeatureMatrix) -> Result<Vec<f64>> {
    if features.cols() != model.weights.len() {
        return Err(Error::Mismatch(format!(
            "model has {} weights, features have {} columns",
            model.weights.len(),
            features.cols()
        )));
    }
    features.ensure_finite()?;
    let mut out = Vec::with_capacity(features.rows());
    for r in 0..features.rows() {
        let row = features.row(r);
        let mut acc = model.intercept;
        for (((v, m), s), w) in
            row.iter().zip(&model.feat_mean).zip(&model.feat_std).zip(&model.weights)
        {
            acc += (v - m) / s * w;
        }
        out.push(acc);
    }
    Ok(out)
}

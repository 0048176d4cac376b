//! Random-convolution feature extraction and the ridge regressor on top.
//!
//! Two extractors turn a normalized 20-channel reading into a flat feature
//! row: `rocket` (10,000 random kernels, max + PPV pooling) and `minirocket`
//! (84 fixed two-valued kernels across a log-spaced dilation ladder, PPV
//! only). A ridge regressor with closed-form leave-one-out λ selection maps
//! feature rows to Ra.

mod minirocket;
mod ridge;
mod rocket;

pub use minirocket::{
    kernel_positions, minirocket_convolve, minirocket_fit, minirocket_fit_quantiles,
    minirocket_transform, MiniRocketParams, MINIROCKET_KERNELS,
};
pub use ridge::{
    default_lambda_grid, ridge_fit, ridge_fit_at, ridge_predict, RidgeModel,
};
pub use rocket::{generate_rocket_kernels, rocket_transform, KernelBank, RocketKernel};

use std::fs;
use std::io::{Read as _, Write as _};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense row-major matrix: one row per reading, one column per feature.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, values: vec![0.0; rows * cols] }
    }

    /// Stacks equally long feature rows into a matrix.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut values = Vec::with_capacity(rows.len() * cols);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimensions(format!(
                    "feature row {i} has {} columns, expected {cols}",
                    row.len()
                )));
            }
            values.extend_from_slice(row);
        }
        Ok(Self { rows: rows.len(), cols, values })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.values[r * self.cols..(r + 1) * self.cols]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Errors if any stored value is NaN or infinite.
    pub fn ensure_finite(&self) -> Result<()> {
        if let Some(pos) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Value(format!(
                "non-finite feature at row {}, column {}",
                pos / self.cols.max(1),
                pos % self.cols.max(1)
            )));
        }
        Ok(())
    }
}

/// Sidecar describing a persisted feature matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub rows: usize,
    pub cols: usize,
    /// Extractor fingerprint, e.g. `"minirocket"`.
    pub extractor: String,
    pub seed: u64,
}

fn sidecar_path(bin_path: &Path) -> PathBuf {
    bin_path.with_extension("json")
}

/// Writes the matrix as little-endian f64 values (row-major) next to a JSON
/// sidecar holding `{rows, cols, extractor, seed}`.
pub fn save_feature_matrix(
    matrix: &FeatureMatrix,
    bin_path: &Path,
    extractor: &str,
    seed: u64,
) -> Result<()> {
    let meta = FeatureMeta {
        rows: matrix.rows,
        cols: matrix.cols,
        extractor: extractor.to_string(),
        seed,
    };
    let mut file = fs::File::create(bin_path)?;
    let mut buf = Vec::with_capacity(matrix.values.len() * 8);
    for v in &matrix.values {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    file.write_all(&buf)?;
    let mut json = serde_json::to_string_pretty(&meta)?;
    json.push('\n');
    fs::write(sidecar_path(bin_path), json)?;
    Ok(())
}

/// Loads a matrix written by [`save_feature_matrix`], checking that the
/// binary payload matches the sidecar's dimensions.
pub fn load_feature_matrix(bin_path: &Path) -> Result<(FeatureMatrix, FeatureMeta)> {
    let meta: FeatureMeta = serde_json::from_str(&fs::read_to_string(sidecar_path(bin_path))?)?;
    let mut bytes = Vec::new();
    fs::File::open(bin_path)?.read_to_end(&mut bytes)?;
    let expected = meta.rows * meta.cols * 8;
    if bytes.len() != expected {
        return Err(Error::TruncatedPayload { expected, found: bytes.len() });
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    Ok((FeatureMatrix { rows: meta.rows, cols: meta.cols, values }, meta))
}

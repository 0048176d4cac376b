//! Closed-form baseline: from a raw laser reading to Ra.
//!
//! Processing chain:
//! 1. per-channel rank thresholding of the intensity matrix,
//! 2. intensity-weighted mean sensor angle per timestep, halved — the surface
//!    gradient (reflection doubles the surface angle),
//! 3. linear interpolation across dark (zero-intensity) timesteps,
//! 4. accumulation of gradient tangents into a height profile,
//! 5. FFT high-pass at the waviness cutoff (80 µm),
//! 6. Ra — mean absolute deviation from the mean height.
//!
//! An affine calibration fitted on training data maps baseline outputs onto
//! the stylus truth line.

mod filter;

pub use filter::highpass_roughness;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::SensorGeometry;
use crate::profile::SurfaceProfile;
use crate::reading::{ChannelMatrix, LaserReading};

/// Waviness cutoff separating roughness from waviness, µm.
pub const DEFAULT_CUTOFF_UM: f64 = 80.0;

/// Default rank for the thresholding stage.
pub const DEFAULT_THETA: usize = 2;

/// Gradients at or beyond this magnitude (degrees) abort integration; the
/// sensor arc cannot produce them (max recoverable gradient ≈ 31.85°).
const TAN_GUARD_DEG: f64 = 89.9;

/// Parameters of the baseline pipeline.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BaselineConfig {
    /// Rank of the per-channel value subtracted during thresholding.
    pub theta: usize,
    /// Waviness cutoff wavelength, µm.
    pub cutoff_um: f64,
}

impl Default for BaselineConfig {
    fn default() -> Self {
        Self { theta: DEFAULT_THETA, cutoff_um: DEFAULT_CUTOFF_UM }
    }
}

/// Per-timestep surface gradient angles in radians, with a mask marking
/// timesteps that actually saw light.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientSeries {
    values_rad: Vec<f64>,
    valid: Vec<bool>,
}

impl GradientSeries {
    pub fn len(&self) -> usize {
        self.values_rad.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values_rad.is_empty()
    }

    /// Gradient angles in radians; entries where `valid()` is false are 0.
    pub fn values_rad(&self) -> &[f64] {
        &self.values_rad
    }

    pub fn valid(&self) -> &[bool] {
        &self.valid
    }

    pub fn fully_valid(&self) -> bool {
        self.valid.iter().all(|&v| v)
    }
}

/// Subtracts the θ-th smallest value of each channel from that channel and
/// clamps negatives to zero, turning the ambient noise floor into exact
/// zeros.
pub fn threshold(reading: &LaserReading, theta: usize) -> Result<ChannelMatrix> {
    let t = reading.timesteps();
    if theta < 1 || theta > t {
        return Err(Error::Config(format!(
            "theta must be in [1, {t}], got {theta}"
        )));
    }
    let mut out = ChannelMatrix::zeros(reading.channels(), t);
    let mut scratch = vec![0u8; t];
    for c in 0..reading.channels() {
        let row = reading.channel(c);
        scratch.copy_from_slice(row);
        let (_, &mut rank_value, _) = scratch.select_nth_unstable(theta - 1);
        let floor = rank_value as f64;
        let dest = out.channel_mut(c);
        for (d, &v) in dest.iter_mut().zip(row) {
            *d = (v as f64 - floor).max(0.0);
        }
    }
    Ok(out)
}

/// Intensity-weighted mean sensor angle per timestep, halved and converted to
/// radians. Timesteps with zero total intensity are masked invalid rather
/// than dividing by zero.
pub fn gradients(thresholded: &ChannelMatrix, geometry: &SensorGeometry) -> Result<GradientSeries> {
    if thresholded.channels != geometry.angles_deg().len() {
        return Err(Error::Dimensions(format!(
            "matrix has {} channels, geometry has {}",
            thresholded.channels,
            geometry.angles_deg().len()
        )));
    }
    let t = thresholded.timesteps;
    let mut weighted = vec![0.0f64; t];
    let mut total = vec![0.0f64; t];
    for c in 0..thresholded.channels {
        let angle = geometry.angle_deg(c);
        let row = thresholded.channel(c);
        for j in 0..t {
            weighted[j] += row[j] * angle;
            total[j] += row[j];
        }
    }

    let mut values_rad = vec![0.0f64; t];
    let mut valid = vec![false; t];
    for j in 0..t {
        if total[j] > 0.0 {
            let gradient_deg = 0.5 * weighted[j] / total[j];
            values_rad[j] = gradient_deg.to_radians();
            valid[j] = true;
        }
    }
    Ok(GradientSeries { values_rad, valid })
}

/// Fills masked timesteps by linear interpolation between the nearest valid
/// neighbours; leading and trailing gaps take the nearest valid value.
pub fn interpolate_gaps(series: &GradientSeries) -> Result<GradientSeries> {
    let n = series.len();
    let first_valid = series.valid.iter().position(|&v| v);
    let Some(first) = first_valid else {
        return Err(Error::Value(
            "no valid gradients to interpolate from (reading entirely dark)".into(),
        ));
    };
    let last = series.valid.iter().rposition(|&v| v).unwrap();

    let mut values = series.values_rad.clone();
    for j in 0..first {
        values[j] = series.values_rad[first];
    }
    for j in last + 1..n {
        values[j] = series.values_rad[last];
    }

    let mut left = first;
    let mut j = first + 1;
    while j <= last {
        if series.valid[j] {
            left = j;
            j += 1;
            continue;
        }
        // Find the right edge of this invalid run; `last` is valid, so the
        // scan always terminates on a valid index.
        let mut right = j + 1;
        while !series.valid[right] {
            right += 1;
        }
        let left_value = series.values_rad[left];
        let right_value = series.values_rad[right];
        let span = (right - left) as f64;
        for k in j..right {
            let frac = (k - left) as f64 / span;
            values[k] = left_value + (right_value - left_value) * frac;
        }
        left = right;
        j = right + 1;
    }

    Ok(GradientSeries { values_rad: values, valid: vec![true; n] })
}

/// Accumulates gradient tangents into a height profile:
/// `surface[i] = Σ_{j=0..i} tan(g_j)·step`.
pub fn integrate(series: &GradientSeries, step_um: f64) -> Result<SurfaceProfile> {
    if !series.fully_valid() {
        return Err(Error::Value(
            "gradient series still has masked timesteps; interpolate first".into(),
        ));
    }
    let guard = TAN_GUARD_DEG.to_radians();
    let mut heights = Vec::with_capacity(series.len());
    let mut acc = 0.0f64;
    for (j, &g) in series.values_rad.iter().enumerate() {
        if g.abs() >= guard {
            return Err(Error::Value(format!(
                "gradient {:.3}° at timestep {j} is too close to the tan singularity",
                g.to_degrees()
            )));
        }
        acc += g.tan() * step_um;
        heights.push(acc);
    }
    SurfaceProfile::new(heights, step_um)
}

/// Mean absolute deviation of a height sequence from its mean — the Ra
/// roughness parameter.
pub fn ra(heights: &[f64]) -> Result<f64> {
    if heights.is_empty() {
        return Err(Error::Dimensions("Ra of an empty profile".into()));
    }
    let n = heights.len() as f64;
    let mean = heights.iter().sum::<f64>() / n;
    Ok(heights.iter().map(|z| (z - mean).abs()).sum::<f64>() / n)
}

/// The full baseline pipeline for one reading.
pub fn baseline_ra(
    reading: &LaserReading,
    geometry: &SensorGeometry,
    config: &BaselineConfig,
) -> Result<f64> {
    let thresholded = threshold(reading, config.theta)?;
    let raw_gradients = gradients(&thresholded, geometry)?;
    let filled = interpolate_gaps(&raw_gradients)?;
    let surface = integrate(&filled, reading.step_um)?;
    let roughness = highpass_roughness(&surface, config.cutoff_um)?;
    ra(roughness.heights())
}

/// Least-squares affine map from baseline predictions onto stylus truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineCalibration {
    /// Multiplicative term.
    pub a: f64,
    /// Additive term, µm.
    pub b: f64,
}

/// Fits `a·pred + b ≈ truth` by least squares on training pairs.
pub fn fit_affine_calibration(pred: &[f64], truth: &[f64]) -> Result<AffineCalibration> {
    if pred.len() != truth.len() {
        return Err(Error::Dimensions(format!(
            "{} predictions vs {} truths",
            pred.len(),
            truth.len()
        )));
    }
    if pred.len() < 2 {
        return Err(Error::Dimensions("calibration needs at least 2 pairs".into()));
    }
    let n = pred.len() as f64;
    let mean_x = pred.iter().sum::<f64>() / n;
    let mean_y = truth.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in pred.iter().zip(truth) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    if sxx <= 0.0 || !sxx.is_finite() {
        return Err(Error::Value(
            "calibration is degenerate: predictions are constant".into(),
        ));
    }
    let a = sxy / sxx;
    let b = mean_y - a * mean_x;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Value("calibration fit produced non-finite terms".into()));
    }
    Ok(AffineCalibration { a, b })
}

/// Applies a fitted calibration to one prediction.
pub fn apply_calibration(cal: &AffineCalibration, x: f64) -> f64 {
    cal.a * x + cal.b
}

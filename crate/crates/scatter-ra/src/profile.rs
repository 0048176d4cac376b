//! Height-profile types shared by the simulator and the baseline pipeline.

use crate::error::{Error, Result};

/// A surface height profile in µm, sampled every `step_um` along the track.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceProfile {
    heights: Vec<f64>,
    step_um: f64,
}

impl SurfaceProfile {
    /// Wraps a height sequence, rejecting non-finite values.
    pub fn new(heights: Vec<f64>, step_um: f64) -> Result<Self> {
        if heights.is_empty() {
            return Err(Error::Dimensions("profile must be non-empty".into()));
        }
        if !(step_um.is_finite() && step_um > 0.0) {
            return Err(Error::Value(format!("step_um must be positive, got {step_um}")));
        }
        if let Some(bad) = heights.iter().position(|h| !h.is_finite()) {
            return Err(Error::Value(format!("non-finite height at index {bad}")));
        }
        Ok(Self { heights, step_um })
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn step_um(&self) -> f64 {
        self.step_um
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }
}

/// A height profile after waviness removal; same length and step as the
/// surface profile it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct RoughnessProfile {
    heights: Vec<f64>,
    step_um: f64,
}

impl RoughnessProfile {
    pub(crate) fn from_filtered(heights: Vec<f64>, step_um: f64) -> Self {
        Self { heights, step_um }
    }

    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    pub fn step_um(&self) -> f64 {
        self.step_um
    }

    pub fn len(&self) -> usize {
        self.heights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heights.is_empty()
    }
}

//! Laser scatterometry → surface roughness (Ra) toolkit.
//!
//! A scatterometer head shines a laser on moving strip steel and records the
//! angular distribution of reflected light on a 20-photodiode arc, one column
//! every 0.8 µm. This crate turns those readings into the Ra roughness
//! parameter two ways and measures how well each does:
//!
//! - [`baseline`] — the closed-form pipeline: intensity thresholding,
//!   intensity-weighted gradient angles, gap interpolation, tangent
//!   integration into a height profile, FFT waviness removal, Ra.
//! - [`features`] + ridge regression — Rocket/MiniRocket random-kernel
//!   transforms feeding a closed-form ridge regressor with leave-one-out
//!   lambda selection.
//! - [`sim`] — a forward-scatter simulator that fabricates steel samples with
//!   known stylus-track Ra values, standing in for the proprietary line data.
//! - [`eval`] — split protocols (per-sample 20 % hold-out, leave-one-sample
//!   k-fold), per-channel normalization, metrics, and experiment drivers.
//!
//! The `scatter-ra` binary exposes the whole thing as subcommands.

pub mod baseline;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod features;
pub mod geometry;
pub mod profile;
pub mod reading;
mod seedmix;
pub mod sim;

pub use dataset::{load_dataset, mean_ra_label, save_dataset, Coating, Dataset, SteelSample};
pub use error::{Error, Result};
pub use geometry::{build_sensor_geometry, SensorGeometry, SENSOR_COUNT, STEP_UM};
pub use profile::{RoughnessProfile, SurfaceProfile};
pub use reading::{read_reading, write_reading, ChannelMatrix, LaserReading};

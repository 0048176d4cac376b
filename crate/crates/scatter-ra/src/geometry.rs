//! Photodiode array geometry.
//!
//! The measurement head holds 20 photodiodes on an arc around the laser axis.
//! Adjacent sensors are spaced 6.7° apart except for the central pair, which
//! straddles the laser with a 6.8° gap; the full arc spans 127.4°. Angles are
//! measured from the surface normal (the laser axis), negative on one side,
//! positive on the other, and are kept in degrees — converting to radians is
//! the job of whoever feeds them into trigonometry.

use crate::error::{Error, Result};

/// Number of photodiode channels in a reading.
pub const SENSOR_COUNT: usize = 20;

/// Spatial sampling step along the strip, in µm.
pub const STEP_UM: f64 = 0.8;

/// Timesteps per reading on the production line.
pub const PRODUCTION_TIMESTEPS: usize = 65_536;

/// Default timesteps for desk-scale work; small enough that exhaustive tests
/// stay fast, large enough to hold several waviness periods.
pub const DEFAULT_TIMESTEPS: usize = 4_096;

/// Ordered sensor angles in degrees, negative-to-positive.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorGeometry {
    angles_deg: [f64; SENSOR_COUNT],
}

/// Builds the canonical 20-sensor arc: ±3.4°, ±10.1°, ±16.8°, ±23.5°, ±30.2°,
/// ±36.9°, ±43.6°, ±50.3°, ±57.0°, ±63.7°.
///
/// The innermost pair sits at ±3.4° so the 6.8° central gap is centred on the
/// laser axis; every other neighbouring pair is 6.7° apart.
pub fn build_sensor_geometry() -> SensorGeometry {
    let mut angles_deg = [0.0; SENSOR_COUNT];
    for (i, slot) in angles_deg.iter_mut().enumerate().take(SENSOR_COUNT / 2) {
        // angles[9] = -3.4, angles[8] = -10.1, ... angles[0] = -63.7
        *slot = -(3.4 + 6.7 * (SENSOR_COUNT / 2 - 1 - i) as f64);
    }
    for i in SENSOR_COUNT / 2..SENSOR_COUNT {
        angles_deg[i] = 3.4 + 6.7 * (i - SENSOR_COUNT / 2) as f64;
    }
    SensorGeometry { angles_deg }
}

impl SensorGeometry {
    /// Sensor angles in degrees, strictly ascending.
    pub fn angles_deg(&self) -> &[f64; SENSOR_COUNT] {
        &self.angles_deg
    }

    /// Angle of one sensor in degrees.
    pub fn angle_deg(&self, channel: usize) -> f64 {
        self.angles_deg[channel]
    }

    /// Outermost sensor angle (degrees); reflections beyond it fall off the
    /// detector arc.
    pub fn max_angle_deg(&self) -> f64 {
        self.angles_deg[SENSOR_COUNT - 1]
    }

    /// Checks the construction invariants; used by tests and on the FFI
    /// boundary where the geometry is rebuilt from raw numbers.
    pub fn validate(&self) -> Result<()> {
        let a = &self.angles_deg;
        for i in 1..SENSOR_COUNT {
            if a[i] <= a[i - 1] {
                return Err(Error::Value(format!(
                    "sensor angles not strictly ascending at index {i}"
                )));
            }
            let gap = a[i] - a[i - 1];
            let expected = if i == SENSOR_COUNT / 2 { 6.8 } else { 6.7 };
            if (gap - expected).abs() > 1e-9 {
                return Err(Error::Value(format!(
                    "sensor gap at index {i} is {gap}, expected {expected}"
                )));
            }
        }
        for i in 0..SENSOR_COUNT {
            if (a[i] + a[SENSOR_COUNT - 1 - i]).abs() > 1e-9 {
                return Err(Error::Value(format!(
                    "sensor angles not symmetric at index {i}"
                )));
            }
        }
        if ((a[SENSOR_COUNT - 1] - a[0]) - 127.4).abs() > 1e-9 {
            return Err(Error::Value("sensor arc span is not 127.4 degrees".into()));
        }
        Ok(())
    }
}

impl Default for SensorGeometry {
    fn default() -> Self {
        build_sensor_geometry()
    }
}

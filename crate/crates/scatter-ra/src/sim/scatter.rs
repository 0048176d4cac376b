//! Forward model: surface profile → 20-sensor laser reading.
//!
//! Each profile step reflects the beam at twice its local gradient angle.
//! The reflected light lands on the sensor arc as a Gaussian intensity lobe
//! centered on that angle; sensors sample the lobe, optionally with additive
//! count noise, and the result is quantized to the device's 8-bit range.
//! Whole columns go dark either by random dropout (the device's unexplained
//! dark regions) or because the reflection misses the arc entirely.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::seedmix::derive_seed;
use crate::error::{Error, Result};
use crate::geometry::{SensorGeometry, SENSOR_COUNT};
use crate::profile::SurfaceProfile;
use crate::reading::LaserReading;

/// Optical response of one coating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScatterSpec {
    /// Angular half-width (σ) of the reflected lobe, degrees.
    pub lobe_sigma_deg: f64,
    /// Counts a sensor dead-center on the lobe would read, before noise.
    pub peak_intensity: f64,
    /// Probability that a timestep records no light at all.
    pub dropout_rate: f64,
    /// Standard deviation of additive count noise.
    pub noise_sigma: f64,
}

impl Default for ScatterSpec {
    /// Response used for the galvanized coating.
    fn default() -> Self {
        Self { lobe_sigma_deg: 8.0, peak_intensity: 220.0, dropout_rate: 0.15, noise_sigma: 2.0 }
    }
}

impl ScatterSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.lobe_sigma_deg.is_finite() && self.lobe_sigma_deg > 0.0) {
            return Err(Error::Config(format!(
                "lobe_sigma_deg must be positive, got {}",
                self.lobe_sigma_deg
            )));
        }
        if !(self.peak_intensity.is_finite()
            && self.peak_intensity > 0.0
            && self.peak_intensity <= 255.0)
        {
            return Err(Error::Config(format!(
                "peak_intensity must lie in (0, 255], got {}",
                self.peak_intensity
            )));
        }
        if !(self.dropout_rate.is_finite()
            && (0.0..=1.0).contains(&self.dropout_rate))
        {
            return Err(Error::Config(format!(
                "dropout_rate must lie in [0, 1], got {}",
                self.dropout_rate
            )));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return Err(Error::Config(format!(
                "noise_sigma must be non-negative, got {}",
                self.noise_sigma
            )));
        }
        Ok(())
    }
}

/// Counters describing what the scatter pass did to a reading.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ScatterStats {
    /// Columns whose reflected angle fell beyond the arc (forced dark).
    pub out_of_arc_columns: usize,
    /// Columns zeroed by the dropout draw.
    pub dropped_columns: usize,
}

/// Renders `profile` into a laser reading. See [`forward_scatter_with_stats`]
/// for the per-column rules; this wrapper just logs a warning when some
/// reflections missed the sensor arc.
pub fn forward_scatter(
    profile: &SurfaceProfile,
    geometry: &SensorGeometry,
    spec: &ScatterSpec,
    seed: u64,
    reading_id: &str,
) -> Result<LaserReading> {
    let (reading, stats) = forward_scatter_with_stats(profile, geometry, spec, seed, reading_id)?;
    if stats.out_of_arc_columns > 0 {
        log::warn!(
            "{reading_id}: {} of {} columns reflected outside the sensor arc and were zeroed",
            stats.out_of_arc_columns,
            reading.timesteps()
        );
    }
    Ok(reading)
}

/// Renders `profile` into a laser reading and reports dark-column counters.
///
/// Per column `j`: the slope is the forward difference to the next point
/// (the last column reuses the previous slope), the reflected angle is twice
/// its arctangent, and sensor `i` reads
/// `round(peak · exp(−(Aᵢ − r)² / 2σ²) + noise)` clamped to `[0, 255]`.
/// Columns are zeroed wholesale when the dropout draw fires or when the
/// reflection lands beyond the last sensor plus 3σ (counted, not an error).
///
/// Dropout and noise use independent RNG streams derived from `seed`, so the
/// dropout pattern for a given seed does not move when noise is toggled.
pub fn forward_scatter_with_stats(
    profile: &SurfaceProfile,
    geometry: &SensorGeometry,
    spec: &ScatterSpec,
    seed: u64,
    reading_id: &str,
) -> Result<(LaserReading, ScatterStats)> {
    spec.validate()?;
    geometry.validate()?;

    let n = profile.len();
    let heights = profile.heights();
    let step = profile.step_um();

    let mut reflected_deg = Vec::with_capacity(n);
    for j in 0..n {
        let slope = if j + 1 < n {
            (heights[j + 1] - heights[j]) / step
        } else if n >= 2 {
            (heights[n - 1] - heights[n - 2]) / step
        } else {
            0.0
        };
        reflected_deg.push(2.0 * slope.atan().to_degrees());
    }

    let mut dropout_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0]));
    let mut noise_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[1]));
    let arc_limit_deg = geometry.max_angle_deg() + 3.0 * spec.lobe_sigma_deg;
    let inv_two_sigma_sq = 1.0 / (2.0 * spec.lobe_sigma_deg * spec.lobe_sigma_deg);

    let mut data = vec![0u8; SENSOR_COUNT * n];
    let mut stats = ScatterStats::default();
    for (j, &r_deg) in reflected_deg.iter().enumerate() {
        // Always draw, so the dropout pattern is a pure function of the seed
        // and column index, not of the surface.
        let dropped = dropout_rng.gen::<f64>() < spec.dropout_rate;
        let out_of_arc = r_deg.abs() > arc_limit_deg;
        if out_of_arc {
            stats.out_of_arc_columns += 1;
        }
        if dropped {
            stats.dropped_columns += 1;
        }
        if dropped || out_of_arc {
            continue; // column stays dark
        }
        for (i, &angle) in geometry.angles_deg().iter().enumerate() {
            let offset = angle - r_deg;
            let mut counts = spec.peak_intensity * (-offset * offset * inv_two_sigma_sq).exp();
            if spec.noise_sigma > 0.0 {
                let draw: f64 = noise_rng.sample(StandardNormal);
                counts += spec.noise_sigma * draw;
            }
            // Round half away from zero, then clamp into the 8-bit range.
            data[i * n + j] = counts.round().clamp(0.0, 255.0) as u8;
        }
    }

    let reading = LaserReading::new(reading_id, step, n, data)?;
    Ok((reading, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::gradients;
    use crate::geometry::build_sensor_geometry;

    fn noiseless() -> ScatterSpec {
        ScatterSpec { dropout_rate: 0.0, noise_sigma: 0.0, ..ScatterSpec::default() }
    }

    fn plane(slope: f64, n: usize) -> SurfaceProfile {
        let heights = (0..n).map(|j| slope * j as f64 * 0.8).collect();
        SurfaceProfile::new(heights, 0.8).unwrap()
    }

    #[test]
    fn flat_profile_peaks_symmetrically_at_innermost_pair() {
        let geometry = build_sensor_geometry();
        let reading = forward_scatter(&plane(0.0, 64), &geometry, &noiseless(), 5, "flat").unwrap();
        for j in 0..reading.timesteps() {
            for i in 0..10 {
                // Mirror sensors see identical counts…
                assert_eq!(reading.value(i, j), reading.value(19 - i, j));
            }
            // …and the innermost pair is the brightest.
            let peak = reading.value(9, j);
            assert!(peak > 0);
            assert!((0..20).all(|i| reading.value(i, j) <= peak));
        }

        // Thresholding would blank a translation-invariant reading (every
        // channel is constant along the track), so the angle oracle runs on
        // the raw intensities.
        let series = gradients(&reading.to_matrix(), &geometry).unwrap();
        assert!(series.fully_valid());
        for &g in series.values_rad() {
            assert!(g.abs() < 1e-12, "flat surface gradient {g}");
        }
    }

    #[test]
    fn constant_slope_plane_recovers_five_degrees() {
        let geometry = build_sensor_geometry();
        let surface = plane(5.0_f64.to_radians().tan(), 256);
        let reading =
            forward_scatter(&surface, &geometry, &noiseless(), 17, "plane5").unwrap();
        let series = gradients(&reading.to_matrix(), &geometry).unwrap();
        assert!(series.fully_valid());
        for &g in series.values_rad() {
            let deg = g.to_degrees();
            assert!((deg - 5.0).abs() <= 0.05, "recovered {deg}° instead of 5.0°±0.05°");
        }
    }

    #[test]
    fn full_dropout_blacks_out_the_reading() {
        let geometry = build_sensor_geometry();
        let spec = ScatterSpec { dropout_rate: 1.0, ..ScatterSpec::default() };
        let (reading, stats) =
            forward_scatter_with_stats(&plane(0.0, 2048), &geometry, &spec, 23, "dark").unwrap();
        assert_eq!(stats.dropped_columns, 2048);
        assert!(reading.data().iter().all(|&v| v == 0));
    }

    #[test]
    fn steep_surface_misses_the_arc_entirely() {
        let geometry = build_sensor_geometry();
        // slope 1.2 → reflected angle ≈ 100.4°, beyond 63.7° + 3·8°.
        let (reading, stats) =
            forward_scatter_with_stats(&plane(1.2, 128), &geometry, &noiseless(), 3, "steep")
                .unwrap();
        assert_eq!(stats.out_of_arc_columns, 128);
        assert!(reading.data().iter().all(|&v| v == 0));
    }

    #[test]
    fn deterministic_per_seed_and_seed_sensitive() {
        let geometry = build_sensor_geometry();
        let spec = ScatterSpec::default();
        let surface = plane(0.1, 512);
        let a = forward_scatter(&surface, &geometry, &spec, 99, "a").unwrap();
        let b = forward_scatter(&surface, &geometry, &spec, 99, "b").unwrap();
        assert_eq!(a.data(), b.data());
        let c = forward_scatter(&surface, &geometry, &spec, 100, "c").unwrap();
        assert_ne!(a.data(), c.data());
    }

    #[test]
    fn dropout_pattern_ignores_noise_toggle() {
        let geometry = build_sensor_geometry();
        let with_noise = ScatterSpec { dropout_rate: 0.5, noise_sigma: 2.0, ..noiseless() };
        let without = ScatterSpec { dropout_rate: 0.5, noise_sigma: 0.0, ..noiseless() };
        let surface = plane(0.05, 512);
        let (_, s1) =
            forward_scatter_with_stats(&surface, &geometry, &with_noise, 7, "n").unwrap();
        let (_, s2) =
            forward_scatter_with_stats(&surface, &geometry, &without, 7, "q").unwrap();
        assert_eq!(s1.dropped_columns, s2.dropped_columns);
    }

    #[test]
    fn peak_intensity_scale_barely_moves_recovered_gradients() {
        // The intensity-weighted mean normalizes the lobe scale away; only
        // 8-bit quantization breaks the invariance, so recovered angles from
        // a dim and a bright lobe must agree closely.
        let geometry = build_sensor_geometry();
        let dim = ScatterSpec { peak_intensity: 60.0, ..noiseless() };
        let bright = ScatterSpec { peak_intensity: 240.0, ..noiseless() };
        let surface = plane(8.0_f64.to_radians().tan(), 64);
        let ra = forward_scatter(&surface, &geometry, &dim, 1, "dim").unwrap();
        let rb = forward_scatter(&surface, &geometry, &bright, 1, "bright").unwrap();
        let ga = gradients(&ra.to_matrix(), &geometry).unwrap();
        let gb = gradients(&rb.to_matrix(), &geometry).unwrap();
        assert!(ga.fully_valid() && gb.fully_valid());
        for (a, b) in ga.values_rad().iter().zip(gb.values_rad()) {
            assert!((a - b).abs() < 0.01, "dim {a} rad vs bright {b} rad");
        }
    }

    #[test]
    fn rejects_invalid_specs() {
        let bad = [
            ScatterSpec { lobe_sigma_deg: 0.0, ..ScatterSpec::default() },
            ScatterSpec { peak_intensity: 0.0, ..ScatterSpec::default() },
            ScatterSpec { peak_intensity: 300.0, ..ScatterSpec::default() },
            ScatterSpec { dropout_rate: 1.1, ..ScatterSpec::default() },
            ScatterSpec { noise_sigma: -1.0, ..ScatterSpec::default() },
        ];
        for spec in bad {
            assert!(spec.validate().is_err(), "{spec:?} should not validate");
        }
    }
}

//! Spectral synthesis of rough surface tracks.
//!
//! A track is a sum of random-phase sinusoids whose wavelengths are confined
//! to the requested roughness band, rescaled so the Ra of that band-limited
//! component hits the target exactly, plus an optional long-wavelength
//! waviness cosine on top. Building the signal in the frequency domain keeps
//! the roughness/waviness split exact by construction, which is what lets the
//! simulator and the baseline pipeline act as oracles for each other.

use std::cell::RefCell;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::baseline::{ra, DEFAULT_CUTOFF_UM};
use crate::error::{Error, Result};
use crate::profile::SurfaceProfile;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Long-wavelength undulation layered on top of the roughness component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Waviness {
    /// Cosine amplitude, µm.
    pub amplitude_um: f64,
    /// Cosine wavelength, µm; should sit well above the roughness cutoff.
    pub wavelength_um: f64,
}

/// Recipe for one synthetic surface track.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceSpec {
    /// Ra of the roughness component, µm.
    pub target_ra: f64,
    /// Wavelength band (λ_min, λ_max) the roughness power is confined to, µm.
    pub roughness_band: (f64, f64),
    /// Optional waviness added after the roughness is scaled.
    #[serde(default)]
    pub waviness: Option<Waviness>,
    /// Number of profile points.
    pub length_steps: usize,
    /// Spacing between points, µm.
    pub step_um: f64,
}

impl SurfaceSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.target_ra.is_finite() && self.target_ra > 0.0) {
            return Err(Error::Config(format!(
                "target_ra must be positive, got {}",
                self.target_ra
            )));
        }
        if !(self.step_um.is_finite() && self.step_um > 0.0) {
            return Err(Error::Config(format!(
                "step_um must be positive, got {}",
                self.step_um
            )));
        }
        if self.length_steps < 2 {
            return Err(Error::Config(format!(
                "length_steps must be at least 2, got {}",
                self.length_steps
            )));
        }
        let (lo, hi) = self.roughness_band;
        if !(lo.is_finite() && hi.is_finite() && lo > 0.0 && lo <= hi) {
            return Err(Error::Config(format!(
                "roughness_band must satisfy 0 < λ_min ≤ λ_max, got ({lo}, {hi})"
            )));
        }
        if lo < 2.0 * self.step_um {
            return Err(Error::Config(format!(
                "λ_min = {lo} µm is below the Nyquist wavelength {} µm",
                2.0 * self.step_um
            )));
        }
        if hi >= DEFAULT_CUTOFF_UM {
            return Err(Error::Config(format!(
                "λ_max = {hi} µm reaches the waviness cutoff ({DEFAULT_CUTOFF_UM} µm); \
                 the band must stay strictly below it"
            )));
        }
        if let Some(w) = &self.waviness {
            if !(w.amplitude_um.is_finite() && w.amplitude_um >= 0.0) {
                return Err(Error::Config(format!(
                    "waviness amplitude must be non-negative, got {}",
                    w.amplitude_um
                )));
            }
            if !(w.wavelength_um.is_finite() && w.wavelength_um > 0.0) {
                return Err(Error::Config(format!(
                    "waviness wavelength must be positive, got {}",
                    w.wavelength_um
                )));
            }
        }
        Ok(())
    }
}

/// Builds a random band-limited surface. The Ra of the roughness component
/// equals `spec.target_ra` to well within 0.1 % relative; the optional
/// waviness cosine is added after that rescaling. Deterministic per seed —
/// and the roughness component for a given seed is the same whether or not
/// waviness is requested.
pub fn synthesize_surface(spec: &SurfaceSpec, seed: u64) -> Result<SurfaceProfile> {
    spec.validate()?;

    let n = spec.length_steps;
    let period_um = n as f64 * spec.step_um;
    let (lambda_min, lambda_max) = spec.roughness_band;
    // Harmonic k puts k full cycles over the profile, i.e. wavelength P/k.
    // Keep every k whose wavelength lies inside the band; cap at n/2 so each
    // retained sinusoid is sampled at least twice per cycle.
    let k_min = (period_um / lambda_max).ceil() as usize;
    let k_max = ((period_um / lambda_min).floor() as usize).min(n / 2);
    if k_min > k_max {
        return Err(Error::Config(format!(
            "roughness band ({lambda_min}, {lambda_max}) µm holds no whole harmonic \
             of a {period_um} µm track; widen the band or lengthen the profile"
        )));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    // Random-phase spectrum with amplitude proportional to wavelength (1/k),
    // the usual red tilt of machined surfaces. Absolute scale is irrelevant —
    // the profile is rescaled to the target Ra below — so the inverse
    // transform's 1/n factor is skipped too.
    let mut spectrum = vec![Complex::new(0.0, 0.0); n];
    for k in k_min..=k_max {
        let amplitude = 0.5 / k as f64;
        let phase = rng.gen::<f64>() * std::f64::consts::TAU;
        if 2 * k == n {
            // Self-conjugate bin: must stay real for a real signal.
            spectrum[k] = Complex::new(amplitude * phase.cos(), 0.0);
        } else {
            let half = Complex::from_polar(amplitude, phase);
            spectrum[k] = half;
            spectrum[n - k] = half.conj();
        }
    }
    let inverse = PLANNER.with(|p| p.borrow_mut().plan_fft_inverse(n));
    inverse.process(&mut spectrum);
    let mut heights: Vec<f64> = spectrum.iter().map(|c| c.re).collect();

    let raw_ra = ra(&heights)?;
    if raw_ra <= 0.0 {
        return Err(Error::Value(
            "synthesized roughness collapsed to a constant (zero Ra)".into(),
        ));
    }
    let scale = spec.target_ra / raw_ra;
    for h in &mut heights {
        *h *= scale;
    }

    if let Some(w) = &spec.waviness {
        // Drawn after the band phases, so the same seed yields the same
        // roughness whether or not waviness is enabled.
        let phase = rng.gen::<f64>() * std::f64::consts::TAU;
        for (j, h) in heights.iter_mut().enumerate() {
            let x_um = j as f64 * spec.step_um;
            *h += w.amplitude_um
                * (std::f64::consts::TAU * x_um / w.wavelength_um + phase).cos();
        }
    }

    SurfaceProfile::new(heights, spec.step_um)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::baseline::highpass_roughness;
    use crate::geometry::DEFAULT_TIMESTEPS;

    fn spec(target_ra: f64) -> SurfaceSpec {
        SurfaceSpec {
            target_ra,
            roughness_band: (10.0, 60.0),
            waviness: None,
            length_steps: DEFAULT_TIMESTEPS,
            step_um: 0.8,
        }
    }

    #[test]
    fn hits_target_ra_within_a_tenth_of_a_percent() {
        for seed in 0..5 {
            let profile = synthesize_surface(&spec(1.0), seed).unwrap();
            let measured = ra(profile.heights()).unwrap();
            assert!(
                (0.999..=1.001).contains(&measured),
                "seed {seed}: ra = {measured}"
            );
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let a = synthesize_surface(&spec(1.3), 42).unwrap();
        let b = synthesize_surface(&spec(1.3), 42).unwrap();
        assert_eq!(a.heights(), b.heights());
        let c = synthesize_surface(&spec(1.3), 43).unwrap();
        assert_ne!(a.heights(), c.heights());
    }

    #[test]
    fn waviness_raises_full_profile_ra_above_roughness_ra() {
        let mut s = spec(1.0);
        s.waviness = Some(Waviness { amplitude_um: 5.0, wavelength_um: 500.0 });
        // Same seed without waviness isolates the roughness component.
        let roughness_ra = ra(synthesize_surface(&spec(1.0), 7).unwrap().heights()).unwrap();
        let full_ra = ra(synthesize_surface(&s, 7).unwrap().heights()).unwrap();
        assert!((roughness_ra - 1.0).abs() < 1e-3);
        assert!(full_ra > roughness_ra, "full {full_ra} vs roughness {roughness_ra}");
    }

    #[test]
    fn waviness_does_not_disturb_the_roughness_component() {
        let mut s = spec(1.0);
        s.waviness = Some(Waviness { amplitude_um: 3.0, wavelength_um: 400.0 });
        let plain = synthesize_surface(&spec(1.0), 11).unwrap();
        let wavy = synthesize_surface(&s, 11).unwrap();
        let diff: Vec<f64> = wavy
            .heights()
            .iter()
            .zip(plain.heights())
            .map(|(w, p)| w - p)
            .collect();
        // The difference must be exactly the waviness cosine — amplitude 3,
        // wavelength 400 µm = 500 steps — with no roughness leakage. The
        // sample grid can straddle the crest, so the observed max sits just
        // below the amplitude.
        let amp = diff.iter().fold(0.0_f64, |m, d| m.max(d.abs()));
        assert!((2.999..=3.0 + 1e-9).contains(&amp), "waviness amplitude came out {amp}");
        for j in 0..diff.len() - 500 {
            assert!((diff[j + 500] - diff[j]).abs() < 1e-9, "not 400 µm periodic at {j}");
            assert!((diff[j + 250] + diff[j]).abs() < 1e-9, "not antiperiodic at {j}");
        }
    }

    #[test]
    fn roughness_survives_the_waviness_filter() {
        // Band-limited roughness sits entirely below the 80 µm cutoff, so the
        // high-pass should be close to the identity away from its seams.
        let track = synthesize_surface(&spec(2.0), 3).unwrap();
        let filtered = highpass_roughness(&track, DEFAULT_CUTOFF_UM).unwrap();
        let filtered_ra = ra(filtered.heights()).unwrap();
        let rel = (filtered_ra - 2.0).abs() / 2.0;
        assert!(rel < 0.05, "filtered Ra {filtered_ra} vs target 2.0 ({rel:.4} rel)");
    }

    #[test]
    fn rejects_infeasible_bands() {
        let mut s = spec(1.0);
        // 16 points × 0.8 µm = 12.8 µm track: no whole harmonic lands in
        // (5.0, 5.1) µm.
        s.length_steps = 16;
        s.roughness_band = (5.0, 5.1);
        let err = synthesize_surface(&s, 0).unwrap_err();
        assert!(err.to_string().contains("no whole harmonic"), "{err}");
    }

    #[test]
    fn rejects_bad_specs() {
        let mut s = spec(0.0);
        assert!(s.validate().is_err());
        s = spec(1.0);
        s.roughness_band = (1.0, 60.0); // below Nyquist for 0.8 µm steps
        assert!(s.validate().is_err());
        s = spec(1.0);
        s.roughness_band = (10.0, 80.0); // reaches the waviness cutoff
        assert!(s.validate().is_err());
        s = spec(1.0);
        s.roughness_band = (60.0, 10.0); // inverted
        assert!(s.validate().is_err());
    }
}

//! FFT high-pass that strips waviness from a surface profile.
//!
//! The profile (length N) is extended to 3N by prepending and appending its
//! reverse, which makes the signal continuous at both seams and removes the
//! step discontinuity a plain periodic extension would introduce. Fourier
//! coefficients whose wavelength exceeds the cutoff — plus the DC bin — are
//! zeroed (brick wall; the cutoff wavelength itself passes), and the middle N
//! samples of the inverse transform are returned.

use std::cell::RefCell;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::profile::{RoughnessProfile, SurfaceProfile};

thread_local! {
    // FFT plans are cached per thread; the planner is not Sync, and per-worker
    // plan state keeps the stage reentrant.
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Removes wavelength components longer than `cutoff_um` from a profile,
/// returning the roughness component (same length and step).
pub fn highpass_roughness(surface: &SurfaceProfile, cutoff_um: f64) -> Result<RoughnessProfile> {
    let n = surface.len();
    if n < 2 {
        return Err(Error::Dimensions(
            "waviness filter needs a profile of at least 2 points".into(),
        ));
    }
    if !(cutoff_um.is_finite() && cutoff_um > 0.0) {
        return Err(Error::Value(format!(
            "cutoff must be positive, got {cutoff_um} µm"
        )));
    }

    let heights = surface.heights();
    let m = 3 * n;
    // Shift by the first height before transforming. The DC bin is zeroed
    // below, so the offset choice is immaterial mathematically, but this one
    // makes a constant profile filter to exact zeros instead of FFT roundoff.
    let h0 = heights[0];
    let mut signal: Vec<Complex<f64>> = Vec::with_capacity(m);
    signal.extend(heights.iter().rev().map(|&h| Complex::new(h - h0, 0.0)));
    signal.extend(heights.iter().map(|&h| Complex::new(h - h0, 0.0)));
    signal.extend(heights.iter().rev().map(|&h| Complex::new(h - h0, 0.0)));

    let (forward, inverse) = PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        (planner.plan_fft_forward(m), planner.plan_fft_inverse(m))
    });
    forward.process(&mut signal);

    // Bin k holds |min(k, m−k)| cycles over the extended length; zero every
    // bin whose wavelength is strictly above the cutoff, and DC.
    let extended_length_um = m as f64 * surface.step_um();
    signal[0] = Complex::new(0.0, 0.0);
    for k in 1..m {
        let cycles = k.min(m - k) as f64;
        if extended_length_um / cycles > cutoff_um {
            signal[k] = Complex::new(0.0, 0.0);
        }
    }

    inverse.process(&mut signal);
    let scale = 1.0 / m as f64;

    // A real input through a conjugate-symmetric mask must come back real;
    // anything else indicates numerical trouble upstream.
    let peak = signal.iter().map(|c| c.re.abs()).fold(1.0f64, f64::max);
    for c in &signal {
        if c.im.abs() > 1e-6 * peak {
            return Err(Error::Value(
                "waviness filter produced a complex residue; input was not real-symmetric".into(),
            ));
        }
    }

    let roughness: Vec<f64> = signal[n..2 * n].iter().map(|c| c.re * scale).collect();
    Ok(RoughnessProfile::from_filtered(roughness, surface.step_um()))
}

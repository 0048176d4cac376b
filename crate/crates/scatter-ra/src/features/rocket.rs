//! Rocket: 10,000 randomly parameterized convolution kernels pooled to
//! `[max, PPV]` feature pairs.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reading::ChannelMatrix;

/// One random convolution kernel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocketKernel {
    /// Mean-centered weights; length 7, 9 or 11.
    pub weights: Vec<f64>,
    pub dilation: usize,
    /// Zero-padding applied to both signal ends (0 = valid convolution).
    pub padding: usize,
    /// Subtracted from every convolution output before pooling.
    pub bias: f64,
    /// Input channels summed into the signal this kernel convolves.
    pub channels: Vec<usize>,
}

/// A full bank of random kernels tied to one input length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelBank {
    pub kernels: Vec<RocketKernel>,
    pub input_len: usize,
    pub n_channels: usize,
    pub seed: u64,
}

const KERNEL_LENGTHS: [usize; 3] = [7, 9, 11];

/// Draws `count` random kernels for signals of `input_len` timesteps across
/// `n_channels` channels. Per kernel, in order: length from {7, 9, 11},
/// standard-normal weights (then mean-centered), bias from U(−1, 1), dilation
/// from a log-uniform scale capped so the receptive span fits the input,
/// a fifty-fifty padding flag, and a log-uniform-sized random channel subset.
pub fn generate_rocket_kernels(
    seed: u64,
    count: usize,
    input_len: usize,
    n_channels: usize,
) -> Result<KernelBank> {
    let max_len = *KERNEL_LENGTHS.last().expect("non-empty");
    if input_len <= max_len {
        return Err(Error::Config(format!(
            "input length {input_len} is too short for kernels of length {max_len}"
        )));
    }
    if n_channels == 0 {
        return Err(Error::Config("need at least one input channel".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut kernels = Vec::with_capacity(count);
    for _ in 0..count {
        let klen = KERNEL_LENGTHS[rng.gen_range(0..KERNEL_LENGTHS.len())];
        let mut weights: Vec<f64> =
            (0..klen).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let mean = weights.iter().sum::<f64>() / klen as f64;
        for w in &mut weights {
            *w -= mean;
        }
        let bias = rng.gen_range(-1.0..1.0);
        // dilation = ⌊2^(u · log2((L−1)/(klen−1)))⌋ ∈ [1, (L−1)/(klen−1)]
        let max_exponent = ((input_len - 1) as f64 / (klen - 1) as f64).log2();
        let dilation = 2f64.powf(rng.gen::<f64>() * max_exponent).floor() as usize;
        let padding = if rng.gen::<bool>() { (klen - 1) * dilation / 2 } else { 0 };
        // Subset size log-uniform in [1, n_channels]; indices sorted for a
        // canonical representation.
        let max_channel_exp = ((n_channels + 1) as f64).log2();
        let n_selected = (2f64.powf(rng.gen::<f64>() * max_channel_exp).floor() as usize)
            .clamp(1, n_channels);
        let mut channels: Vec<usize> =
            rand::seq::index::sample(&mut rng, n_channels, n_selected).into_vec();
        channels.sort_unstable();
        kernels.push(RocketKernel { weights, dilation, padding, bias, channels });
    }
    Ok(KernelBank { kernels, input_len, n_channels, seed })
}

/// Max and strict-positive fraction of a post-bias convolution output.
fn pool_max_ppv(values: &[f64]) -> (f64, f64) {
    let mut max = f64::NEG_INFINITY;
    let mut positive = 0usize;
    for &v in values {
        if v > max {
            max = v;
        }
        if v > 0.0 {
            positive += 1;
        }
    }
    (max, positive as f64 / values.len() as f64)
}

/// Applies every kernel to the (already normalized) reading, yielding
/// `[max, PPV]` per kernel — `2 × kernels` features in bank order.
pub fn rocket_transform(reading: &ChannelMatrix, bank: &KernelBank) -> Result<Vec<f64>> {
    let t = reading.timesteps;
    if t != bank.input_len {
        return Err(Error::Mismatch(format!(
            "bank was generated for {} timesteps, reading has {t}",
            bank.input_len
        )));
    }

    let mut features = Vec::with_capacity(2 * bank.kernels.len());
    let mut signal = vec![0.0f64; t];
    let mut outputs: Vec<f64> = Vec::new();
    for kernel in &bank.kernels {
        signal.iter_mut().for_each(|v| *v = 0.0);
        for &c in &kernel.channels {
            if c >= reading.channels {
                return Err(Error::Dimensions(format!(
                    "kernel channel {c} out of range for a {}-channel reading",
                    reading.channels
                )));
            }
            for (dst, src) in signal.iter_mut().zip(reading.channel(c)) {
                *dst += src;
            }
        }

        let klen = kernel.weights.len();
        let span = (klen - 1) * kernel.dilation;
        if span >= t + 2 * kernel.padding {
            return Err(Error::Dimensions(format!(
                "kernel span {} does not fit a {t}-step signal with padding {}",
                span + 1,
                kernel.padding
            )));
        }
        let out_len = t + 2 * kernel.padding - span;
        outputs.clear();
        outputs.reserve(out_len);
        for p in 0..out_len {
            let mut acc = -kernel.bias;
            let base = p as isize - kernel.padding as isize;
            for (k, &w) in kernel.weights.iter().enumerate() {
                let idx = base + (k * kernel.dilation) as isize;
                if (0..t as isize).contains(&idx) {
                    acc += w * signal[idx as usize];
                }
            }
            outputs.push(acc);
        }
        let (max, ppv) = pool_max_ppv(&outputs);
        features.push(max);
        features.push(ppv);
    }
    Ok(features)
}

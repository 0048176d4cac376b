//! MiniRocket: the 84 fixed two-valued kernels of length 9, convolved across
//! an exponential dilation ladder and pooled with PPV only.
//!
//! Every kernel holds the weight 2 at exactly three of its nine positions and
//! −1 everywhere else, so each convolution output is `3·S3 − S9`, where `S3`
//! sums the signal at the three selected taps and `S9` at all nine. `S9` slides
//! along the dilation lattice with one add and one subtract per step, which is
//! what makes the transform cheap: no multiply-accumulate loop over weights
//! ever runs in production. The naive weighted convolution exists only as a
//! test oracle.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reading::ChannelMatrix;
use crate::seedmix::derive_seed;

/// Number of distinct kernels: C(9,3) ways to place the three 2-weights.
pub const MINIROCKET_KERNELS: usize = 84;

/// Kernel length (and therefore tap count) shared by all kernels.
const KERNEL_LENGTH: usize = 9;

/// Most distinct dilations ever used; reached when the input is long enough.
const MAX_DILATIONS: usize = 119;

/// At most this many input channels are summed into one combination's signal.
const MAX_CHANNELS_PER_COMBINATION: usize = 9;

/// Seed-stream tags for the two independent RNGs used by [`minirocket_fit`].
const CHANNEL_STREAM: u64 = 0;
const BIAS_STREAM: u64 = 1;

/// Fitted MiniRocket parameters: everything a transform needs, frozen.
///
/// Feature order is dilation-major: for each dilation (ascending), for each of
/// the 84 kernels (lexicographic tap order), `quantiles_per_combo` biases.
/// `channel_subsets` and `biases` follow that same order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiniRocketParams {
    pub input_len: usize,
    pub n_channels: usize,
    pub seed: u64,
    /// Distinct dilations, strictly ascending, `8·d < input_len` for each.
    pub dilations: Vec<usize>,
    /// Bias quantiles per kernel-dilation combination (default 1).
    pub quantiles_per_combo: usize,
    /// Channels summed into each combination's signal; sorted, non-empty.
    pub channel_subsets: Vec<Vec<usize>>,
    /// PPV thresholds, `dilations × 84 × quantiles_per_combo` of them.
    pub biases: Vec<f64>,
}

impl MiniRocketParams {
    /// Total features a transform emits: one PPV per bias.
    pub fn total_features(&self) -> usize {
        self.biases.len()
    }

    /// Checks the internal bookkeeping that [`minirocket_transform`] relies
    /// on, so params deserialized from disk fail loudly instead of indexing
    /// out of bounds.
    pub fn validate(&self) -> Result<()> {
        if self.input_len < KERNEL_LENGTH {
            return Err(Error::Value(format!(
                "input length {} is shorter than the 9-tap kernels",
                self.input_len
            )));
        }
        if self.n_channels == 0 {
            return Err(Error::Value("no input channels".into()));
        }
        if self.quantiles_per_combo == 0 {
            return Err(Error::Value("quantiles_per_combo must be ≥ 1".into()));
        }
        if self.dilations.is_empty() || self.dilations.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Value("dilations must be non-empty and strictly ascending".into()));
        }
        if self.dilations.iter().any(|&d| d == 0 || 8 * d >= self.input_len) {
            return Err(Error::Value(format!(
                "every dilation must satisfy 1 ≤ d and 8·d < input length {}",
                self.input_len
            )));
        }
        let combos = self.dilations.len() * MINIROCKET_KERNELS;
        if self.channel_subsets.len() != combos {
            return Err(Error::Dimensions(format!(
                "{} channel subsets for {combos} kernel-dilation combinations",
                self.channel_subsets.len()
            )));
        }
        for subset in &self.channel_subsets {
            let sorted = subset.windows(2).all(|w| w[0] < w[1]);
            if subset.is_empty() || !sorted || subset.iter().any(|&c| c >= self.n_channels) {
                return Err(Error::Value(
                    "channel subsets must be non-empty, strictly sorted, in range".into(),
                ));
            }
        }
        if self.biases.len() != combos * self.quantiles_per_combo {
            return Err(Error::Dimensions(format!(
                "{} biases for {combos} combinations × {} quantiles",
                self.biases.len(),
                self.quantiles_per_combo
            )));
        }
        Ok(())
    }
}

/// The 84 kernels as sorted tap-position triples in `0..9`, lexicographic.
/// Positions carry weight 2; the remaining six carry −1.
pub fn kernel_positions() -> Vec<[usize; 3]> {
    let mut triples = Vec::with_capacity(MINIROCKET_KERNELS);
    for a in 0..KERNEL_LENGTH {
        for b in a + 1..KERNEL_LENGTH {
            for c in b + 1..KERNEL_LENGTH {
                triples.push([a, b, c]);
            }
        }
    }
    triples
}

/// Dilation ladder for one input length: up to 119 distinct integer dilations
/// spaced exponentially from 1 to ⌊(input_len − 1)/8⌋ (the largest dilation
/// whose nine taps still fit the signal). Rounding collisions at the small end
/// are resolved by stepping to the next unused integer, so the ladder stays
/// strictly ascending; when the range is narrower than 119 the ladder simply
/// ends early.
fn dilation_ladder(input_len: usize) -> Result<Vec<usize>> {
    if input_len < KERNEL_LENGTH {
        return Err(Error::Config(format!(
            "input length {input_len} is shorter than the 9-tap kernels"
        )));
    }
    let max_dilation = (input_len - 1) / (KERNEL_LENGTH - 1);
    let max_exponent = ((input_len - 1) as f64 / (KERNEL_LENGTH - 1) as f64).log2();
    let mut ladder: Vec<usize> = Vec::new();
    for step in 0..MAX_DILATIONS {
        let exponent = max_exponent * step as f64 / (MAX_DILATIONS - 1) as f64;
        let ideal = 2f64.powf(exponent).floor() as usize;
        let next = ladder.last().map_or(ideal.max(1), |&prev| ideal.max(prev + 1));
        if next > max_dilation {
            break;
        }
        ladder.push(next);
    }
    Ok(ladder)
}

/// Reads `x[i]`, treating everything outside the signal as zero padding.
#[inline(always)]
fn tap(x: &[f64], i: isize) -> f64 {
    if i >= 0 && (i as usize) < x.len() {
        x[i as usize]
    } else {
        0.0
    }
}

/// Core of the addition-based convolution: walks every output position of one
/// kernel-dilation combination and hands `(slot, value)` to `sink`, where
/// `value = 3·S3 − S9`.
///
/// Positions are visited residue class by residue class along the dilation
/// lattice. Inside a class, wherever all nine taps land inside the signal,
/// `S9` — the sum of all nine taps — slides along with one add and one
/// subtract per step and `S3` gathers the three weight-2 taps unchecked; the
/// handful of edge positions per class recompute both sums with zero-padded
/// reads. With `PADDED` the output covers all `T` positions; otherwise only
/// the `T − 8·dilation` all-taps-inside positions are visited and `slot` is
/// relative to the first of them.
fn scan_combo<const PADDED: bool>(
    x: &[f64],
    positions: [usize; 3],
    dilation: usize,
    mut sink: impl FnMut(usize, f64),
) {
    let t = x.len();
    let d = dilation;
    let half_span = 4 * d; // taps extend ±4·d around the output position
    debug_assert!(d >= 1);
    debug_assert!(PADDED || t > 2 * half_span);

    for residue in 0..d.min(t) {
        if PADDED {
            let m_len = (t - residue).div_ceil(d);
            // In-range needs p ≥ 4d (m ≥ 4, since residue < d) and
            // p + 4d ≤ t−1 (m ≤ clean_hi).
            let clean_hi = if t > 2 * half_span + residue {
                ((t - 1 - half_span - residue) / d).min(m_len - 1)
            } else {
                0
            };
            let has_clean = clean_hi >= 4;
            let left_end = if has_clean { 4 } else { m_len };
            for m in 0..left_end {
                let p = residue + m * d;
                sink(p, eval_guarded(x, positions, d, p));
            }
            if !has_clean {
                continue;
            }
            run_clean(x, positions, d, residue + 4 * d, residue + clean_hi * d, 0, &mut sink);
            for m in clean_hi + 1..m_len {
                let p = residue + m * d;
                sink(p, eval_guarded(x, positions, d, p));
            }
        } else {
            let first = half_span + residue;
            if first >= t - half_span {
                continue; // no all-taps-inside position in this class
            }
            let last = first + (t - half_span - 1 - first) / d * d;
            run_clean(x, positions, d, first, last, half_span, &mut sink);
        }
    }
}

/// `3·S3 − S9` at one position with zero-padded reads; edge positions only.
#[inline(always)]
fn eval_guarded(x: &[f64], positions: [usize; 3], d: usize, p: usize) -> f64 {
    let base = p as isize - (4 * d) as isize;
    let mut s9 = 0.0;
    for k in 0..KERNEL_LENGTH {
        s9 += tap(x, base + (k * d) as isize);
    }
    let s3 = tap(x, base + (positions[0] * d) as isize)
        + tap(x, base + (positions[1] * d) as isize)
        + tap(x, base + (positions[2] * d) as isize);
    3.0 * s3 - s9
}

/// Unchecked rolling walk over all-taps-inside positions `first, first+d, ...`
/// up to and including `last`; emits slots `p − slot_offset`.
#[inline(always)]
fn run_clean(
    x: &[f64],
    positions: [usize; 3],
    d: usize,
    first: usize,
    last: usize,
    slot_offset: usize,
    sink: &mut impl FnMut(usize, f64),
) {
    let half_span = 4 * d;
    let mut s9 = 0.0;
    for k in 0..KERNEL_LENGTH {
        s9 += x[first - half_span + k * d];
    }
    let mut p = first;
    loop {
        let base = p - half_span;
        let s3 = x[base + positions[0] * d]
            + x[base + positions[1] * d]
            + x[base + positions[2] * d];
        sink(p - slot_offset, 3.0 * s3 - s9);
        if p >= last {
            break;
        }
        // Slide the nine-tap window one lattice step: drop the tap falling
        // off the left end, pick up the one entering on the right.
        s9 += x[p + d + half_span] - x[base];
        p += d;
    }
}

/// Output length of one combination's convolution.
fn combo_output_len(input_len: usize, dilation: usize, padded: bool) -> usize {
    if padded {
        input_len
    } else {
        input_len - 8 * dilation
    }
}

/// Padding alternates across the combination grid so roughly half the
/// features see signal edges and half never do.
fn combo_padded(dilation_index: usize, kernel_index: usize) -> bool {
    (dilation_index + kernel_index) % 2 == 0
}

/// Addition-based convolution of one signal with one kernel, materialized in
/// output-position order. This is the same arithmetic [`minirocket_transform`]
/// streams through its PPV counters, exposed for inspection and for oracle
/// comparisons against a naive multiply-accumulate convolution.
pub fn minirocket_convolve(
    signal: &[f64],
    positions: [usize; 3],
    dilation: usize,
    padded: bool,
) -> Result<Vec<f64>> {
    if dilation == 0 {
        return Err(Error::Value("dilation must be ≥ 1".into()));
    }
    if positions.windows(2).any(|w| w[0] >= w[1]) || positions[2] >= KERNEL_LENGTH {
        return Err(Error::Value(format!(
            "tap positions {positions:?} must be strictly ascending and < 9"
        )));
    }
    if !padded && signal.len() <= 8 * dilation {
        return Err(Error::Dimensions(format!(
            "unpadded convolution needs more than {} samples, got {}",
            8 * dilation,
            signal.len()
        )));
    }
    let mut out = vec![0.0; combo_output_len(signal.len(), dilation, padded)];
    if padded {
        scan_combo::<true>(signal, positions, dilation, |slot, v| out[slot] = v);
    } else {
        scan_combo::<false>(signal, positions, dilation, |slot, v| out[slot] = v);
    }
    Ok(out)
}

/// Sums the subset's channels into `signal` (overwriting it).
fn sum_channels(reading: &ChannelMatrix, subset: &[usize], signal: &mut [f64]) {
    signal.fill(0.0);
    for &c in subset {
        for (dst, src) in signal.iter_mut().zip(reading.channel(c)) {
            *dst += src;
        }
    }
}

/// Linear-interpolation quantile of already sorted values.
fn sorted_quantile(sorted: &[f64], q: f64) -> f64 {
    let rank = q * (sorted.len() - 1) as f64;
    let lo = rank.floor() as usize;
    let frac = rank - lo as f64;
    if lo + 1 < sorted.len() {
        sorted[lo] * (1.0 - frac) + sorted[lo + 1] * frac
    } else {
        sorted[lo]
    }
}

/// Fits MiniRocket parameters on a training set.
///
/// The dilation ladder is fixed by `input_len` alone. Channel subsets come
/// from one seeded RNG stream: per combination (dilation-major, kernel
/// inner), a log-uniform subset size in `[1, min(channels, 9)]`, then that
/// many distinct channel indices. Biases come from a second stream: per
/// combination one training reading is drawn at random, its subset-summed
/// signal convolved, and `quantiles_per_combo` (here 1) quantiles of the
/// outputs are taken at low-discrepancy positions `((g+1)·φ) mod 1`, `g`
/// being the global feature index — so the thresholds are spread over the
/// whole output distribution rather than clustered at the median.
///
/// Note that the result depends on the order of `train`, not just its
/// contents, because example selection consumes the bias stream in sequence.
pub fn minirocket_fit(
    train: &[ChannelMatrix],
    seed: u64,
    input_len: usize,
) -> Result<MiniRocketParams> {
    minirocket_fit_quantiles(train, seed, input_len, 1)
}

/// [`minirocket_fit`] with a configurable number of bias quantiles per
/// kernel-dilation combination.
pub fn minirocket_fit_quantiles(
    train: &[ChannelMatrix],
    seed: u64,
    input_len: usize,
    quantiles_per_combo: usize,
) -> Result<MiniRocketParams> {
    if train.is_empty() {
        return Err(Error::Config("cannot fit on an empty training set".into()));
    }
    if quantiles_per_combo == 0 {
        return Err(Error::Config("quantiles_per_combo must be ≥ 1".into()));
    }
    let n_channels = train[0].channels;
    for (i, reading) in train.iter().enumerate() {
        if reading.timesteps != input_len {
            return Err(Error::Mismatch(format!(
                "training reading {i} has {} timesteps, expected {input_len}",
                reading.timesteps
            )));
        }
        if reading.channels != n_channels {
            return Err(Error::Mismatch(format!(
                "training reading {i} has {} channels, expected {n_channels}",
                reading.channels
            )));
        }
    }
    if n_channels == 0 {
        return Err(Error::Config("need at least one input channel".into()));
    }

    let dilations = dilation_ladder(input_len)?;
    let kernels = kernel_positions();
    let combos = dilations.len() * kernels.len();

    // Stream 1: channel subsets for every combination.
    let mut channel_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[CHANNEL_STREAM]));
    let cap = n_channels.min(MAX_CHANNELS_PER_COMBINATION);
    let max_channel_exp = ((cap + 1) as f64).log2();
    let mut channel_subsets = Vec::with_capacity(combos);
    for _ in 0..combos {
        let n_selected = (2f64
            .powf(channel_rng.gen::<f64>() * max_channel_exp)
            .floor() as usize)
            .clamp(1, cap);
        let mut subset: Vec<usize> =
            rand::seq::index::sample(&mut channel_rng, n_channels, n_selected).into_vec();
        subset.sort_unstable();
        channel_subsets.push(subset);
    }

    // Stream 2: bias thresholds from convolution outputs on training data.
    let mut bias_rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[BIAS_STREAM]));
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    let mut biases = Vec::with_capacity(combos * quantiles_per_combo);
    let mut buffer = vec![0.0; input_len];
    let mut outputs: Vec<f64> = Vec::new();
    for (di, &dilation) in dilations.iter().enumerate() {
        for (ki, &positions) in kernels.iter().enumerate() {
            let combo = di * kernels.len() + ki;
            let example = &train[bias_rng.gen_range(0..train.len())];
            let subset = &channel_subsets[combo];
            let signal: &[f64] = if subset.len() == 1 {
                example.channel(subset[0])
            } else {
                sum_channels(example, subset, &mut buffer);
                &buffer
            };

            let padded = combo_padded(di, ki);
            outputs.clear();
            outputs.resize(combo_output_len(input_len, dilation, padded), 0.0);
            if padded {
                scan_combo::<true>(signal, positions, dilation, |slot, v| outputs[slot] = v);
            } else {
                scan_combo::<false>(signal, positions, dilation, |slot, v| outputs[slot] = v);
            }
            outputs.sort_unstable_by(f64::total_cmp);
            for _ in 0..quantiles_per_combo {
                let g = biases.len(); // global feature index
                let position = (((g + 1) as f64) * golden).fract();
                biases.push(sorted_quantile(&outputs, position));
            }
        }
    }

    let params = MiniRocketParams {
        input_len,
        n_channels,
        seed,
        dilations,
        quantiles_per_combo,
        channel_subsets,
        biases,
    };
    params.validate()?;
    Ok(params)
}

/// Transforms one reading into its PPV feature row.
///
/// Per combination the subset channels are summed, the addition-based
/// convolution streams over the signal, and each output is compared against
/// the combination's bias thresholds; the feature is the fraction of outputs
/// strictly above the threshold. Features appear in fit order (dilation-major,
/// kernel inner, quantile innermost) and always lie in `[0, 1]`.
pub fn minirocket_transform(
    reading: &ChannelMatrix,
    params: &MiniRocketParams,
) -> Result<Vec<f64>> {
    params.validate()?;
    if reading.timesteps != params.input_len {
        return Err(Error::Mismatch(format!(
            "params were fitted for {} timesteps, reading has {}",
            params.input_len, reading.timesteps
        )));
    }
    if reading.channels != params.n_channels {
        return Err(Error::Mismatch(format!(
            "params were fitted for {} channels, reading has {}",
            params.n_channels, reading.channels
        )));
    }

    let kernels = kernel_positions();
    let nq = params.quantiles_per_combo;
    let mut features = Vec::with_capacity(params.total_features());
    let mut buffer = vec![0.0; params.input_len];
    let mut above = vec![0usize; nq];
    for (di, &dilation) in params.dilations.iter().enumerate() {
        for (ki, &positions) in kernels.iter().enumerate() {
            let combo = di * kernels.len() + ki;
            let subset = &params.channel_subsets[combo];
            // A size-1 subset is the channel itself — skip the copy.
            let signal: &[f64] = if subset.len() == 1 {
                reading.channel(subset[0])
            } else {
                sum_channels(reading, subset, &mut buffer);
                &buffer
            };

            let thresholds = &params.biases[combo * nq..(combo + 1) * nq];
            let padded = combo_padded(di, ki);
            if nq == 1 {
                let bias = thresholds[0];
                let mut hits = 0usize;
                let count = |_slot: usize, v: f64| {
                    if v > bias {
                        hits += 1;
                    }
                };
                if padded {
                    scan_combo::<true>(signal, positions, dilation, count);
                } else {
                    scan_combo::<false>(signal, positions, dilation, count);
                }
                above[0] = hits;
            } else {
                above.fill(0);
                let count = |_slot: usize, v: f64| {
                    for (bias, hits) in thresholds.iter().zip(above.iter_mut()) {
                        if v > *bias {
                            *hits += 1;
                        }
                    }
                };
                if padded {
                    scan_combo::<true>(signal, positions, dilation, count);
                } else {
                    scan_combo::<false>(signal, positions, dilation, count);
                }
            }

            let outputs = combo_output_len(params.input_len, dilation, padded) as f64;
            features.extend(above.iter().map(|&hits| hits as f64 / outputs));
        }
    }
    Ok(features)
}

#[cfg(test)]
mod tests {
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use super::*;

    /// Naive multiply-accumulate oracle: weight 2 at the three tap positions,
    /// −1 elsewhere, zeros outside the signal.
    fn naive_convolve(
        signal: &[f64],
        positions: [usize; 3],
        dilation: usize,
        padded: bool,
    ) -> Vec<f64> {
        let t = signal.len();
        let weights: Vec<f64> = (0..KERNEL_LENGTH)
            .map(|k| if positions.contains(&k) { 2.0 } else { -1.0 })
            .collect();
        let (first, last_excl) =
            if padded { (0, t) } else { (4 * dilation, t - 4 * dilation) };
        (first..last_excl)
            .map(|p| {
                weights
                    .iter()
                    .enumerate()
                    .map(|(k, &w)| {
                        let idx = p as isize + (k as isize - 4) * dilation as isize;
                        w * tap(signal, idx)
                    })
                    .sum()
            })
            .collect()
    }

    fn random_reading(rng: &mut impl Rng, channels: usize, timesteps: usize) -> ChannelMatrix {
        let mut m = ChannelMatrix::zeros(channels, timesteps);
        for c in 0..channels {
            for v in m.channel_mut(c) {
                *v = rng.gen_range(-2.0..2.0);
            }
        }
        m
    }

    #[test]
    fn there_are_84_distinct_zero_sum_kernels() {
        let kernels = kernel_positions();
        assert_eq!(kernels.len(), MINIROCKET_KERNELS);
        let mut seen = std::collections::HashSet::new();
        for k in &kernels {
            assert!(k[0] < k[1] && k[1] < k[2] && k[2] < 9);
            assert!(seen.insert(*k));
            // Three taps at 2 and six at −1 always cancel.
            let sum: i32 = (0..9).map(|p| if k.contains(&p) { 2 } else { -1 }).sum();
            assert_eq!(sum, 0);
        }
    }

    #[test]
    fn addition_trick_matches_naive_convolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(151);
        let kernels = kernel_positions();
        for _ in 0..10 {
            let len = rng.gen_range(72..=256);
            let signal: Vec<f64> = (0..len).map(|_| rng.gen_range(-3.0..3.0)).collect();
            for &dilation in &[1usize, 2, 3, 5, 8] {
                for &positions in &kernels {
                    for padded in [true, false] {
                        let fast =
                            minirocket_convolve(&signal, positions, dilation, padded).unwrap();
                        let slow = naive_convolve(&signal, positions, dilation, padded);
                        assert_eq!(fast.len(), slow.len());
                        for (i, (a, b)) in fast.iter().zip(&slow).enumerate() {
                            assert!(
                                (a - b).abs() <= 1e-9,
                                "dilation {dilation} positions {positions:?} padded {padded} \
                                 slot {i}: {a} vs {b}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn dilation_ladder_scales_with_input_length() {
        // Long inputs get the full 119-step ladder ending at ⌊(T−1)/8⌋.
        for t in [4096usize, 65536] {
            let ladder = dilation_ladder(t).unwrap();
            assert_eq!(ladder.len(), MAX_DILATIONS, "T={t}");
            assert_eq!(ladder[0], 1);
            assert!(ladder.windows(2).all(|w| w[0] < w[1]));
            assert_eq!(*ladder.last().unwrap(), (t - 1) / 8);
        }
        // Short inputs exhaust the integer range instead.
        assert_eq!(dilation_ladder(128).unwrap(), (1..=15).collect::<Vec<_>>());
        assert_eq!(dilation_ladder(9).unwrap(), vec![1]);
        assert!(dilation_ladder(8).is_err());
    }

    #[test]
    fn fit_is_deterministic_and_fully_sized() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let train: Vec<ChannelMatrix> =
            (0..3).map(|_| random_reading(&mut rng, 20, 4096)).collect();

        let params = minirocket_fit(&train, 42, 4096).unwrap();
        assert_eq!(params, minirocket_fit(&train, 42, 4096).unwrap());
        assert_ne!(params, minirocket_fit(&train, 43, 4096).unwrap());

        // 119 dilations × 84 kernels × 1 bias = 9,996 features.
        assert_eq!(params.dilations.len(), 119);
        assert_eq!(params.total_features(), 9996);
        assert_eq!(params.channel_subsets.len(), 119 * 84);
        for subset in &params.channel_subsets {
            assert!(!subset.is_empty() && subset.len() <= 9);
            assert!(subset.windows(2).all(|w| w[0] < w[1]));
            assert!(subset.iter().all(|&c| c < 20));
        }
        assert!(params.biases.iter().all(|b| b.is_finite()));
    }

    #[test]
    fn transform_emits_ppv_fractions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let train: Vec<ChannelMatrix> =
            (0..2).map(|_| random_reading(&mut rng, 4, 300)).collect();
        let params = minirocket_fit(&train, 5, 300).unwrap();
        let features = minirocket_transform(&train[0], &params).unwrap();
        assert_eq!(features.len(), params.total_features());
        assert!(features.iter().all(|f| (0.0..=1.0).contains(f)));
        // Thresholds sit inside this reading's own output distribution, so
        // the features cannot all collapse to one end.
        assert!(features.iter().any(|&f| f > 0.0));
        assert!(features.iter().any(|&f| f < 1.0));
    }

    #[test]
    fn constant_zero_reading_gives_all_zero_features() {
        // Zero signal → every convolution output 0 → biases 0 → PPV counts
        // strict inequality 0 > 0, so every feature is exactly 0.
        let train = vec![ChannelMatrix::zeros(3, 200)];
        let params = minirocket_fit(&train, 9, 200).unwrap();
        assert!(params.biases.iter().all(|&b| b == 0.0));
        let features = minirocket_transform(&train[0], &params).unwrap();
        assert!(features.iter().all(|&f| f == 0.0));
    }

    #[test]
    fn fused_counting_matches_materialized_convolution() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let train: Vec<ChannelMatrix> =
            (0..2).map(|_| random_reading(&mut rng, 5, 250)).collect();
        let params = minirocket_fit(&train, 31, 250).unwrap();
        let reading = random_reading(&mut rng, 5, 250);
        let features = minirocket_transform(&reading, &params).unwrap();

        // Recompute every feature from the materialized convolution output;
        // both paths share scan_combo, so the match must be exact.
        let kernels = kernel_positions();
        let mut signal = vec![0.0; 250];
        let mut index = 0;
        for (di, &dilation) in params.dilations.iter().enumerate() {
            for (ki, &positions) in kernels.iter().enumerate() {
                let combo = di * kernels.len() + ki;
                sum_channels(&reading, &params.channel_subsets[combo], &mut signal);
                let out = minirocket_convolve(&signal, positions, dilation, combo_padded(di, ki))
                    .unwrap();
                let bias = params.biases[combo];
                let ppv =
                    out.iter().filter(|&&v| v > bias).count() as f64 / out.len() as f64;
                assert_eq!(features[index], ppv, "combo {combo}");
                index += 1;
            }
        }
        assert_eq!(index, features.len());
    }

    #[test]
    fn rejects_shape_mismatches() {
        let train = vec![ChannelMatrix::zeros(4, 120)];
        let params = minirocket_fit(&train, 1, 120).unwrap();
        assert!(minirocket_transform(&ChannelMatrix::zeros(4, 121), &params).is_err());
        assert!(minirocket_transform(&ChannelMatrix::zeros(3, 120), &params).is_err());
        assert!(minirocket_fit(&[], 1, 120).is_err());
        assert!(minirocket_fit(&train, 1, 121).is_err());
        let mixed = vec![ChannelMatrix::zeros(4, 120), ChannelMatrix::zeros(5, 120)];
        assert!(minirocket_fit(&mixed, 1, 120).is_err());
    }
}

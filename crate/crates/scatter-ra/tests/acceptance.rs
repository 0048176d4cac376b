//! Acceptance gate for the toolkit: one test per criterion, each printing a
//! single `ACCEPTANCE <n> <name>: PASS|FAIL` line (visible with
//! `cargo test -- --nocapture`).
//!
//! Oracles here are deliberately independent re-derivations — naive
//! convolution loops, dense normal-equation solves, hand-computed examples —
//! rather than calls back into the code paths under test.

use std::path::Path;
use std::process::Command;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use scatter_ra::baseline::{
    apply_calibration, baseline_ra, fit_affine_calibration, gradients, highpass_roughness, ra,
    threshold, BaselineConfig,
};
use scatter_ra::eval::{
    kfold_per_steel, pearson, run_experiment, split_per_sample_20, tcn_receptive_field, Method,
    Protocol,
};
use scatter_ra::features::{
    default_lambda_grid, kernel_positions, minirocket_convolve, ridge_fit, ridge_fit_at,
};
use scatter_ra::geometry::{build_sensor_geometry, STEP_UM};
use scatter_ra::sim::{
    forward_scatter_with_stats, generate_dataset, synthesize_surface, DatasetSpec, ScatterSpec,
    SurfaceSpec, Waviness,
};
use scatter_ra::{ChannelMatrix, Dataset, LaserReading, SurfaceProfile};

fn verdict(criterion: usize, name: &str, pass: bool, detail: &str) {
    println!(
        "ACCEPTANCE {criterion} {name}: {} — {detail}",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "acceptance criterion {criterion} ({name}) failed: {detail}");
}

#[test]
fn criterion_1_receptive_field_exactness() {
    let cases = [((9, 12), 65520), ((5, 13), 65528), ((7, 8), 3060)];
    let mut pass = true;
    let mut got = Vec::new();
    for ((ks, nl), expected) in cases {
        let rf = tcn_receptive_field(ks, nl, 2).unwrap();
        pass &= rf == expected;
        got.push(rf.to_string());
    }
    verdict(
        1,
        "receptive_field_exactness",
        pass,
        &format!("(9,12)/(5,13)/(7,8) -> {}", got.join("/")),
    );
}

/// Largest reflected angle (2·arctan of the forward-difference slope) a
/// surface sends toward the sensors, in degrees.
fn max_reflection_deg(heights: &[f64]) -> f64 {
    let mut max: f64 = 0.0;
    for j in 1..heights.len() {
        let slope = (heights[j] - heights[j - 1]) / STEP_UM;
        max = max.max((2.0 * slope.atan()).to_degrees().abs());
    }
    max
}

#[test]
fn criterion_2_baseline_round_trip() {
    let geometry = build_sensor_geometry();
    let noiseless = ScatterSpec { dropout_rate: 0.0, noise_sigma: 0.0, ..ScatterSpec::default() };
    let config = BaselineConfig::default();

    let mut worst_rel = 0.0f64;
    let mut checked = 0;
    for i in 0..20 {
        let target_ra = 0.5 + 2.0 * i as f64 / 19.0;
        // Rougher surfaces need longer wavelengths to keep every reflection
        // on the sensor arc (slope scales with amplitude / wavelength); the
        // band always stays below the 80 µm cutoff so nothing is filtered.
        let roughness_band = match target_ra {
            r if r < 0.8 => (20.0, 60.0),
            r if r < 1.4 => (40.0, 75.0),
            r if r < 2.0 => (55.0, 78.0),
            _ => (65.0, 79.0),
        };
        let spec = SurfaceSpec {
            target_ra,
            roughness_band,
            waviness: Some(Waviness { amplitude_um: 2.0, wavelength_um: 800.0 }),
            length_steps: 4096,
            step_um: STEP_UM,
        };
        // Deterministic search: keep the first seed whose reflections all
        // stay on the sensor arc, the criterion's stated slope precondition.
        let (surface, reading) = (0..256)
            .find_map(|attempt| {
                let seed = 1000 * i as u64 + attempt;
                let surface = synthesize_surface(&spec, seed).unwrap();
                if max_reflection_deg(surface.heights()) > geometry.max_angle_deg() {
                    return None;
                }
                let (reading, _) =
                    forward_scatter_with_stats(&surface, &geometry, &noiseless, seed, "round-trip")
                        .unwrap();
                Some((surface, reading))
            })
            .expect("a surface with all reflections inside the sensor arc");

        let truth = ra(highpass_roughness(&surface, config.cutoff_um).unwrap().heights()).unwrap();
        let pred = baseline_ra(&reading, &geometry, &config).unwrap();
        worst_rel = worst_rel.max((pred - truth).abs() / truth);
        checked += 1;
    }
    verdict(
        2,
        "baseline_round_trip",
        checked == 20 && worst_rel <= 0.05,
        &format!("{checked} noiseless surfaces, worst relative error {:.2}%", worst_rel * 100.0),
    );
}

fn sinusoid(n: usize, wavelength_um: f64, amplitude: f64) -> SurfaceProfile {
    let heights = (0..n)
        .map(|i| {
            amplitude
                * (2.0 * std::f64::consts::PI * i as f64 * STEP_UM / wavelength_um).sin()
        })
        .collect();
    SurfaceProfile::new(heights, STEP_UM).unwrap()
}

fn rms(xs: &[f64]) -> f64 {
    (xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64).sqrt()
}

#[test]
fn criterion_3_filter_behavior() {
    let n = 4096;

    // A 200 µm wave sits above the 80 µm cutoff: waviness, to be removed.
    // The analytic brick-wall response is zero; realizing it requires a
    // sinusoid whose mirror extension is kink-free, i.e. one with slope
    // zeros at both profile ends. N = 4001 puts (N−1)·0.8 µm = 3200 µm on a
    // multiple of the 100 µm half-wavelength, so a cosine qualifies.
    let n_aligned = 4001;
    let waviness_heights: Vec<f64> = (0..n_aligned)
        .map(|i| (2.0 * std::f64::consts::PI * i as f64 * STEP_UM / 200.0).cos())
        .collect();
    let waviness = SurfaceProfile::new(waviness_heights, STEP_UM).unwrap();
    let filtered = highpass_roughness(&waviness, 80.0).unwrap();
    let residual_peak = filtered.heights().iter().fold(0.0f64, |a, &h| a.max(h.abs()));
    let attenuated = residual_peak < 0.01;

    // A 20 µm wave is roughness and must pass through, judged away from the
    // crop boundaries where mirror extension leaves its mark.
    let original = sinusoid(n, 20.0, 1.0);
    let filtered = highpass_roughness(&original, 80.0).unwrap();
    let margin = n / 10;
    let diff: Vec<f64> = filtered.heights()[margin..n - margin]
        .iter()
        .zip(&original.heights()[margin..n - margin])
        .map(|(f, o)| f - o)
        .collect();
    let preserved_err = rms(&diff) / rms(&original.heights()[margin..n - margin]);
    let preserved = preserved_err <= 0.02;

    // A constant profile has no roughness at all — exactly.
    let flat = SurfaceProfile::new(vec![3.7; n], STEP_UM).unwrap();
    let flat_ra = ra(highpass_roughness(&flat, 80.0).unwrap().heights()).unwrap();
    let exact_zero = flat_ra == 0.0;

    verdict(
        3,
        "filter_behavior",
        attenuated && preserved && exact_zero,
        &format!(
            "200 µm residual peak {residual_peak:.2e}, 20 µm interior error {:.2}%, constant Ra {flat_ra:e}",
            preserved_err * 100.0
        ),
    );
}

#[test]
fn criterion_4_hand_oracles() {
    // Thresholding: subtract the 2nd-smallest of each row, clamp at zero.
    let mut data = vec![0u8; 20 * 5];
    data[..5].copy_from_slice(&[5, 3, 7, 3, 9]);
    let reading = LaserReading::new("oracle", STEP_UM, 5, data).unwrap();
    let thresholded = threshold(&reading, 2).unwrap();
    let threshold_ok = thresholded.channel(0) == [2.0, 0.0, 4.0, 0.0, 6.0]
        && thresholded.channel(7).iter().all(|&v| v == 0.0);

    let geometry = build_sensor_geometry();

    // Equal light on every sensor is symmetric around the laser axis: the
    // weighted mean angle, hence the gradient, is zero.
    let mut symmetric = ChannelMatrix::zeros(20, 1);
    for c in 0..20 {
        symmetric.channel_mut(c)[0] = 7.0;
    }
    let sym = gradients(&symmetric, &geometry).unwrap();
    let sym_rad = sym.values_rad()[0];
    let symmetric_ok = sym.valid()[0] && sym_rad.abs() <= 1e-12;

    // All light on the +10.1° sensor: the gradient is half the reflection
    // angle, 5.05°.
    let plus_101 = geometry
        .angles_deg()
        .iter()
        .position(|&a| (a - 10.1).abs() < 1e-9)
        .expect("+10.1° sensor");
    let mut single = ChannelMatrix::zeros(20, 1);
    single.channel_mut(plus_101)[0] = 42.0;
    let g = gradients(&single, &geometry).unwrap();
    let single_err = (g.values_rad()[0] - 5.05f64.to_radians()).abs();
    let single_ok = g.valid()[0] && single_err <= 1e-12;

    verdict(
        4,
        "hand_oracles",
        threshold_ok && symmetric_ok && single_ok,
        &format!(
            "threshold row {:?}, symmetric gradient {sym_rad:.1e} rad, +10.1° error {single_err:.1e} rad",
            thresholded.channel(0)
        ),
    );
}

/// Naive multiply-accumulate convolution with the 9-tap two/minus-one kernel.
fn naive_convolve(signal: &[f64], positions: [usize; 3], dilation: usize, padded: bool) -> Vec<f64> {
    let mut weights = [-1.0f64; 9];
    for p in positions {
        weights[p] = 2.0;
    }
    let t = signal.len() as isize;
    let d = dilation as isize;
    let centers: Vec<isize> = if padded {
        (0..t).collect()
    } else {
        (4 * d..t - 4 * d).collect()
    };
    centers
        .iter()
        .map(|&c| {
            (0..9)
                .map(|k| {
                    let idx = c + (k as isize - 4) * d;
                    let x = if (0..t).contains(&idx) { signal[idx as usize] } else { 0.0 };
                    weights[k] * x
                })
                .sum()
        })
        .collect()
}

#[test]
fn criterion_5_minirocket_equivalence() {
    let start = std::time::Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(55);
    let positions = kernel_positions();

    let mut worst = if positions.len() == 84 { 0.0f64 } else { f64::INFINITY };
    let mut compared = 0usize;
    for _ in 0..100 {
        let len = rng.gen_range(80..=256);
        let signal: Vec<f64> = (0..len).map(|_| rng.gen_range(-3.0..3.0)).collect();
        for &pos in &positions {
            for dilation in 1..=8 {
                for padded in [true, false] {
                    let fast = minirocket_convolve(&signal, pos, dilation, padded).unwrap();
                    let naive = naive_convolve(&signal, pos, dilation, padded);
                    if fast.len() != naive.len() {
                        worst = f64::INFINITY;
                        continue;
                    }
                    for (a, b) in fast.iter().zip(&naive) {
                        worst = worst.max((a - b).abs());
                    }
                    compared += 1;
                }
            }
        }
    }
    let elapsed = start.elapsed();
    verdict(
        5,
        "minirocket_equivalence",
        worst <= 1e-9 && elapsed.as_secs() < 10,
        &format!(
            "{compared} convolutions, worst |Δ| {worst:.2e}, {:.1} s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_6_ridge_correctness() {
    let mut rng = ChaCha8Rng::seed_from_u64(66);
    let grid = default_lambda_grid();

    // Weights against a dense normal-equation solve on the standardized
    // design, for every λ on the grid, over several random 50×10 systems.
    let mut worst = 0.0f64;
    for _ in 0..3 {
        let (n, p) = (50, 10);
        let features: Vec<Vec<f64>> =
            (0..n).map(|_| (0..p).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let targets: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let matrix = scatter_ra::features::FeatureMatrix::from_rows(features.clone()).unwrap();

        // Standardize exactly as a fresh implementation would.
        let mean: Vec<f64> =
            (0..p).map(|j| features.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
        let std: Vec<f64> = (0..p)
            .map(|j| {
                (features.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n as f64).sqrt()
            })
            .collect();
        let z = DMatrix::from_fn(n, p, |i, j| (features[i][j] - mean[j]) / std[j]);
        let y_mean = targets.iter().sum::<f64>() / n as f64;
        let yc = DVector::from_fn(n, |i, _| targets[i] - y_mean);

        for &lambda in &grid {
            let lhs = z.transpose() * &z + DMatrix::identity(p, p) * lambda;
            let oracle = lhs.lu().solve(&(z.transpose() * &yc)).unwrap();
            let model = ridge_fit_at(&matrix, &targets, lambda).unwrap();
            for j in 0..p {
                worst = worst.max((model.weights[j] - oracle[j]).abs());
            }
        }
    }
    let weights_ok = worst <= 1e-9;

    // Leave-one-out λ selection against brute-force refits on 20×5. Each
    // refit solves the joint intercept+weights problem with the row removed.
    let (n, p) = (20, 5);
    let features: Vec<Vec<f64>> =
        (0..n).map(|_| (0..p).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
    let targets: Vec<f64> =
        features.iter().map(|r| 0.8 * r[0] - 0.4 * r[3] + rng.gen_range(-0.3..0.3)).collect();
    let matrix = scatter_ra::features::FeatureMatrix::from_rows(features.clone()).unwrap();
    let model = ridge_fit(&matrix, &targets, &grid).unwrap();

    let mean: Vec<f64> =
        (0..p).map(|j| features.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let std: Vec<f64> = (0..p)
        .map(|j| (features.iter().map(|r| (r[j] - mean[j]).powi(2)).sum::<f64>() / n as f64).sqrt())
        .collect();
    let z: Vec<Vec<f64>> = features
        .iter()
        .map(|r| (0..p).map(|j| (r[j] - mean[j]) / std[j]).collect())
        .collect();

    let mut best = (f64::INFINITY, f64::NAN);
    for &lambda in &grid {
        let mut press = 0.0;
        for held in 0..n {
            let keep: Vec<usize> = (0..n).filter(|&i| i != held).collect();
            let a = DMatrix::from_fn(n - 1, p + 1, |i, j| {
                if j == 0 {
                    1.0
                } else {
                    z[keep[i]][j - 1]
                }
            });
            let y = DVector::from_fn(n - 1, |i, _| targets[keep[i]]);
            let mut lhs = a.transpose() * &a;
            for j in 1..=p {
                lhs[(j, j)] += lambda;
            }
            let beta = lhs.lu().solve(&(a.transpose() * y)).unwrap();
            let pred =
                beta[0] + (0..p).map(|j| beta[j + 1] * z[held][j]).sum::<f64>();
            press += (targets[held] - pred).powi(2);
        }
        let loo_rmse = (press / n as f64).sqrt();
        if loo_rmse < best.0 {
            best = (loo_rmse, lambda);
        }
    }
    let loo_ok = model.lambda == best.1 && (model.loo_rmse - best.0).abs() <= 1e-9;

    verdict(
        6,
        "ridge_correctness",
        weights_ok && loo_ok,
        &format!(
            "worst weight |Δ| {worst:.1e}; selected λ {} vs brute force {}",
            model.lambda, best.1
        ),
    );
}

#[test]
fn criterion_7_ordering_at_desk_scale() {
    let start = std::time::Instant::now();
    let ds = generate_dataset(&DatasetSpec::default(), 42).unwrap();

    let b20 = run_experiment(&ds, Protocol::PerSample20, Method::Baseline, 42).unwrap();
    let m20 = run_experiment(&ds, Protocol::PerSample20, Method::MinirocketRidge, 42).unwrap();
    let bkf = run_experiment(&ds, Protocol::KfoldSteel, Method::Baseline, 42).unwrap();
    let mkf = run_experiment(&ds, Protocol::KfoldSteel, Method::MinirocketRidge, 42).unwrap();

    // Calibration is fitted by least squares on the train side, so its train
    // RMSE cannot exceed the uncalibrated one.
    let plan = split_per_sample_20(&ds, 42).unwrap();
    let geometry = build_sensor_geometry();
    let config = BaselineConfig::default();
    let mut train_preds = Vec::new();
    let mut train_truth = Vec::new();
    for sample in &ds.samples {
        let label = scatter_ra::dataset::mean_ra_label(sample).unwrap();
        for reading in &sample.readings {
            if plan.train.contains(&reading.reading_id) {
                train_preds.push(baseline_ra(reading, &geometry, &config).unwrap());
                train_truth.push(label);
            }
        }
    }
    let cal = fit_affine_calibration(&train_preds, &train_truth).unwrap();
    let calibrated: Vec<f64> = train_preds.iter().map(|&x| apply_calibration(&cal, x)).collect();
    let rmse_raw = scatter_ra::eval::rmse(&train_truth, &train_preds).unwrap();
    let rmse_cal = scatter_ra::eval::rmse(&train_truth, &calibrated).unwrap();

    let ordering = m20.rmse_um < b20.rmse_um && mkf.rmse_um < bkf.rmse_um;
    let calibration = rmse_cal <= rmse_raw;
    verdict(
        7,
        "ordering_at_desk_scale",
        ordering && calibration,
        &format!(
            "per20 minirocket {:.4} < baseline {:.4}; kfold minirocket {:.4} < baseline {:.4}; train RMSE calibrated {rmse_cal:.4} <= raw {rmse_raw:.4}; {:.0} s",
            m20.rmse_um,
            b20.rmse_um,
            mkf.rmse_um,
            bkf.rmse_um,
            start.elapsed().as_secs_f64()
        ),
    );
}

fn small_dataset() -> Dataset {
    let spec = DatasetSpec {
        length_steps: 512,
        readings_per_sample: vec![5, 4, 6, 5, 7],
        other_coating_samples: 2,
        ..DatasetSpec::default()
    };
    generate_dataset(&spec, 17).unwrap()
}

#[test]
fn criterion_8_protocol_integrity() {
    let ds = small_dataset();

    // per_sample_20: no id on both sides, every sample keeps training data.
    let plan = split_per_sample_20(&ds, 8).unwrap();
    let leakage = plan.train.iter().filter(|id| plan.test.contains(id)).count();
    let mut per20_ok = leakage == 0;
    for sample in &ds.samples {
        let in_train =
            sample.readings.iter().filter(|r| plan.train.contains(&r.reading_id)).count();
        let in_test =
            sample.readings.iter().filter(|r| plan.test.contains(&r.reading_id)).count();
        per20_ok &= in_train >= 1
            && in_test == sample.readings.len().div_ceil(5)
            && in_train + in_test == sample.readings.len();
    }

    // kfold: every fold tests all readings of exactly one sample, and the
    // folds together cover each reading exactly once.
    let plans = kfold_per_steel(&ds).unwrap();
    let mut kfold_ok = plans.len() == ds.samples.len();
    let mut tested: Vec<&String> = Vec::new();
    for (fold, plan) in plans.iter().enumerate() {
        let sample = &ds.samples[fold];
        kfold_ok &= plan.test.len() == sample.readings.len()
            && sample.readings.iter().all(|r| plan.test.contains(&r.reading_id))
            && plan.train.iter().all(|id| !plan.test.contains(id));
        tested.extend(plan.test.iter());
    }
    tested.sort();
    tested.dedup();
    kfold_ok &= tested.len() == ds.reading_count();

    // Metric invariants on real reports.
    let baseline = run_experiment(&ds, Protocol::PerSample20, Method::Baseline, 8).unwrap();
    let calibrated =
        run_experiment(&ds, Protocol::PerSample20, Method::BaselineCalibrated, 8).unwrap();
    let truth: Vec<f64> = baseline.records.iter().map(|r| r.truth_ra_um).collect();
    let pred: Vec<f64> = baseline.records.iter().map(|r| r.pred_ra_um).collect();
    let shifted: Vec<f64> = pred.iter().map(|x| 1.7 * x + 0.3).collect();

    let rmse_sq_ok =
        (baseline.rmse_um * baseline.rmse_um - baseline.mse_um2).abs() <= 1e-12;
    let affine_ok =
        (pearson(&truth, &pred).unwrap() - pearson(&truth, &shifted).unwrap()).abs() <= 1e-12;
    let shared_pearson = (baseline.pearson_r - calibrated.pearson_r).abs();
    let metrics_ok = rmse_sq_ok && affine_ok && shared_pearson <= 1e-12;

    verdict(
        8,
        "protocol_integrity",
        per20_ok && kfold_ok && metrics_ok,
        &format!(
            "leakage {leakage}, folds {}, baseline-vs-calibrated pearson |Δ| {shared_pearson:.1e}",
            plans.len()
        ),
    );
}

fn run_cli(dir: &Path, args: &[&str]) {
    let output = Command::new(env!("CARGO_BIN_EXE_scatter-ra"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs");
    assert!(
        output.status.success(),
        "`scatter-ra {}` failed: {}",
        args.join(" "),
        String::from_utf8_lossy(&output.stderr)
    );
}

/// Byte-compare two directory trees (flat: the dataset layout has no nesting).
fn assert_trees_identical(a: &Path, b: &Path) {
    let list = |d: &Path| {
        let mut names: Vec<String> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().file_name().into_string().unwrap())
            .collect();
        names.sort();
        names
    };
    let names = list(a);
    assert_eq!(names, list(b), "directory listings differ");
    for name in names {
        assert_eq!(
            std::fs::read(a.join(&name)).unwrap(),
            std::fs::read(b.join(&name)).unwrap(),
            "{name} differs between runs"
        );
    }
}

#[test]
fn criterion_9_cli_determinism() {
    let root = tempfile::tempdir().unwrap();
    let w1 = root.path().join("run1");
    let w2 = root.path().join("run2");
    std::fs::create_dir_all(&w1).unwrap();
    std::fs::create_dir_all(&w2).unwrap();

    // Identical simulate/train/evaluate commands from two working copies.
    let simulate = ["simulate", "--seed", "7", "--out", "ds", "--samples", "3", "--t", "256"];
    let train = [
        "train", "--dataset", "ds", "--method", "minirocket", "--protocol", "per20", "--seed",
        "3", "--out", "model.json",
    ];
    let evaluate = [
        "evaluate", "--dataset", "ds", "--method", "minirocket", "--protocol", "per20",
        "--seed", "3", "--out", "report.json",
    ];
    for dir in [&w1, &w2] {
        run_cli(dir, &simulate);
        run_cli(dir, &train);
        run_cli(dir, &evaluate);
    }
    assert_trees_identical(&w1.join("ds"), &w2.join("ds"));
    let same_file = |name: &str| {
        assert_eq!(
            std::fs::read(w1.join(name)).unwrap(),
            std::fs::read(w2.join(name)).unwrap(),
            "{name} differs between runs"
        );
    };
    same_file("model.json");
    same_file("report.json");
    same_file("report.csv");

    // Worker count must not leak into artifacts: rerun evaluation in fresh
    // subdirectories with --jobs 1 vs --jobs 2 and byte-compare.
    let j1 = w1.join("jobs1");
    let j2 = w1.join("jobs2");
    std::fs::create_dir_all(&j1).unwrap();
    std::fs::create_dir_all(&j2).unwrap();
    let eval_jobs = |jobs: &'static str| {
        [
            "--jobs", jobs, "evaluate", "--dataset", "../ds", "--method", "minirocket",
            "--protocol", "per20", "--seed", "3", "--out", "report.json",
        ]
    };
    run_cli(&j1, &eval_jobs("1"));
    run_cli(&j2, &eval_jobs("2"));
    assert_trees_identical(&j1, &j2);

    verdict(
        9,
        "cli_determinism",
        true,
        "simulate/train/evaluate byte-identical across reruns and --jobs 1 vs 2",
    );
}

//! Split protocols, per-channel normalization, metrics, and the experiment
//! drivers that tie simulator output, baseline pipeline, and feature models
//! into one evaluation report.
//!
//! Two protocols mirror the two ways the dataset gets partitioned:
//!
//! - `per_sample_20` — within every steel sample, ⌈20 %⌉ of its readings are
//!   held out, so train and test share samples but never readings.
//! - `kfold_steel` — one fold per steel sample; each fold tests on all
//!   readings of exactly one sample never seen in training.
//!
//! Labels are many-to-many: every reading of a sample carries the sample's
//! mean stylus Ra as its truth value.

mod metrics;

pub use metrics::{max_abs_error, mse, pearson, rmse, tcn_receptive_field};

use std::collections::HashMap;
use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baseline::{
    apply_calibration, baseline_ra, fit_affine_calibration, threshold, BaselineConfig,
    DEFAULT_CUTOFF_UM, DEFAULT_THETA,
};
use crate::dataset::{mean_ra_label, Dataset};
use crate::error::{Error, Result};
use crate::features::{
    default_lambda_grid, generate_rocket_kernels, minirocket_fit, minirocket_transform,
    ridge_fit, ridge_predict, rocket_transform, FeatureMatrix, KernelBank, MiniRocketParams,
    RidgeModel,
};
use crate::geometry::build_sensor_geometry;
use crate::reading::ChannelMatrix;
use crate::seedmix::derive_seed;

/// Seed-stream tags so split draws and per-fold extractor seeds never collide.
const SPLIT_STREAM: u64 = 10;
const FEATURE_STREAM: u64 = 11;

/// Fraction of each sample's readings held out by [`split_per_sample_20`].
const HOLDOUT_DENOMINATOR: usize = 5;

/// Kernels drawn for the Rocket extractor.
const ROCKET_KERNEL_COUNT: usize = 10_000;

/// How a dataset is partitioned into train and test readings.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    /// Hold out ⌈20 %⌉ of every sample's readings.
    #[serde(rename = "per_sample_20")]
    PerSample20,
    /// Leave-one-steel-sample-out cross validation.
    KfoldSteel,
}

/// Prediction methods an experiment can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Closed-form gradient-integration pipeline, raw output.
    Baseline,
    /// Baseline with a train-fitted affine map onto the stylus truth.
    BaselineCalibrated,
    /// Rocket features + ridge.
    RocketRidge,
    /// MiniRocket features + ridge.
    MinirocketRidge,
}

impl Method {
    /// Whether the method trains a feature extractor and regressor.
    pub fn needs_training(self) -> bool {
        matches!(self, Method::RocketRidge | Method::MinirocketRidge)
    }
}

/// One train/test partition of a dataset's reading ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub protocol: Protocol,
    /// Fold number for `kfold_steel`; absent for `per_sample_20`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fold_index: Option<usize>,
    pub seed: u64,
    /// Training reading ids, in dataset order.
    pub train: Vec<String>,
    /// Held-out reading ids, in dataset order.
    pub test: Vec<String>,
}

impl SplitPlan {
    /// Checks the plan against a dataset: every id resolves, train and test
    /// are disjoint and together cover the dataset, and the protocol's
    /// structural invariant holds.
    pub fn validate(&self, ds: &Dataset) -> Result<()> {
        let index = reading_index(ds)?;
        let mut seen: HashMap<&str, ()> = HashMap::with_capacity(index.len());
        for id in self.train.iter().chain(&self.test) {
            if !index.contains_key(id.as_str()) {
                return Err(Error::Mismatch(format!("plan id {id} not in dataset")));
            }
            if seen.insert(id, ()).is_some() {
                return Err(Error::Mismatch(format!("plan lists {id} twice")));
            }
        }
        if self.train.is_empty() || self.test.is_empty() {
            return Err(Error::Mismatch("plan has an empty train or test side".into()));
        }
        if self.train.len() + self.test.len() != index.len() {
            return Err(Error::Mismatch(format!(
                "plan covers {} of {} readings",
                self.train.len() + self.test.len(),
                index.len()
            )));
        }
        match self.protocol {
            Protocol::PerSample20 => {
                // Every sample must keep at least one training reading.
                let mut train_per_sample = vec![0usize; ds.samples.len()];
                for id in &self.train {
                    train_per_sample[index[id.as_str()].0] += 1;
                }
                if let Some(i) = train_per_sample.iter().position(|&c| c == 0) {
                    return Err(Error::Mismatch(format!(
                        "sample {} has no training readings",
                        ds.samples[i].sample_id
                    )));
                }
            }
            Protocol::KfoldSteel => {
                let samples: Vec<usize> =
                    self.test.iter().map(|id| index[id.as_str()].0).collect();
                let first = samples[0];
                if samples.iter().any(|&s| s != first)
                    || self.test.len() != ds.samples[first].readings.len()
                {
                    return Err(Error::Mismatch(
                        "kfold test side must be all readings of exactly one sample".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// Map from reading id to (sample index, reading index).
fn reading_index(ds: &Dataset) -> Result<HashMap<&str, (usize, usize)>> {
    let mut index = HashMap::new();
    for (si, sample) in ds.samples.iter().enumerate() {
        for (ri, reading) in sample.readings.iter().enumerate() {
            if index.insert(reading.reading_id.as_str(), (si, ri)).is_some() {
                return Err(Error::Manifest(format!(
                    "duplicate reading id {}",
                    reading.reading_id
                )));
            }
        }
    }
    Ok(index)
}

/// Holds out ⌈20 %⌉ of every sample's readings, chosen uniformly at random
/// from a seeded stream; the remainder trains. Requires ≥ 2 readings per
/// sample so both sides stay non-empty.
pub fn split_per_sample_20(ds: &Dataset, seed: u64) -> Result<SplitPlan> {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[SPLIT_STREAM]));
    let mut train = Vec::new();
    let mut test = Vec::new();
    for sample in &ds.samples {
        let n = sample.readings.len();
        if n < 2 {
            return Err(Error::Config(format!(
                "sample {} has {n} reading(s); the 20 % split needs at least 2",
                sample.sample_id
            )));
        }
        let n_test = n.div_ceil(HOLDOUT_DENOMINATOR);
        let mut held: Vec<usize> = rand::seq::index::sample(&mut rng, n, n_test).into_vec();
        held.sort_unstable();
        let mut cursor = held.iter().peekable();
        for (ri, reading) in sample.readings.iter().enumerate() {
            if cursor.peek() == Some(&&ri) {
                cursor.next();
                test.push(reading.reading_id.clone());
            } else {
                train.push(reading.reading_id.clone());
            }
        }
    }
    let plan =
        SplitPlan { protocol: Protocol::PerSample20, fold_index: None, seed, train, test };
    plan.validate(ds)?;
    Ok(plan)
}

/// One fold per steel sample: the fold's test side is all readings of that
/// sample, its train side everything else. Deterministic — no seed involved.
pub fn kfold_per_steel(ds: &Dataset) -> Result<Vec<SplitPlan>> {
    if ds.samples.len() < 2 {
        return Err(Error::Config(format!(
            "k-fold needs at least 2 samples, dataset has {}",
            ds.samples.len()
        )));
    }
    let mut plans = Vec::with_capacity(ds.samples.len());
    for (fold, held_out) in ds.samples.iter().enumerate() {
        let test: Vec<String> =
            held_out.readings.iter().map(|r| r.reading_id.clone()).collect();
        let train: Vec<String> = ds
            .samples
            .iter()
            .enumerate()
            .filter(|(si, _)| *si != fold)
            .flat_map(|(_, s)| s.readings.iter().map(|r| r.reading_id.clone()))
            .collect();
        let plan = SplitPlan {
            protocol: Protocol::KfoldSteel,
            fold_index: Some(fold),
            seed: 0,
            train,
            test,
        };
        plan.validate(ds)?;
        plans.push(plan);
    }
    Ok(plans)
}

/// Per-channel z-score statistics, computed on training readings only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormStats {
    pub mean: Vec<f64>,
    /// Population standard deviation per channel, floored at 1e-8.
    pub std: Vec<f64>,
}

/// Floor applied to per-channel standard deviations; a constant channel then
/// normalizes to exactly 0 instead of dividing by zero.
pub const NORM_STD_FLOOR: f64 = 1e-8;

/// Per-channel mean and std across every timestep of every training reading.
/// Expects thresholded matrices — normalization is the stage right after
/// thresholding in the feature pipeline.
pub fn fit_norm(train: &[ChannelMatrix]) -> Result<NormStats> {
    let first = train.first().ok_or_else(|| {
        Error::Config("normalization statistics need at least one training reading".into())
    })?;
    let channels = first.channels;
    let mut count = 0usize;
    let mut sum = vec![0.0; channels];
    for m in train {
        if m.channels != channels {
            return Err(Error::Mismatch(format!(
                "mixed channel counts in training set: {} vs {channels}",
                m.channels
            )));
        }
        for (c, acc) in sum.iter_mut().enumerate() {
            *acc += m.channel(c).iter().sum::<f64>();
        }
        count += m.timesteps;
    }
    let mean: Vec<f64> = sum.iter().map(|s| s / count as f64).collect();
    let mut sq = vec![0.0; channels];
    for m in train {
        for (c, acc) in sq.iter_mut().enumerate() {
            *acc += m.channel(c).iter().map(|v| (v - mean[c]) * (v - mean[c])).sum::<f64>();
        }
    }
    let std: Vec<f64> =
        sq.iter().map(|s| (s / count as f64).sqrt().max(NORM_STD_FLOOR)).collect();
    Ok(NormStats { mean, std })
}

/// Applies train-set z-scoring to one (thresholded) reading.
pub fn apply_norm(stats: &NormStats, m: &ChannelMatrix) -> Result<ChannelMatrix> {
    if m.channels != stats.mean.len() {
        return Err(Error::Mismatch(format!(
            "stats cover {} channels, reading has {}",
            stats.mean.len(),
            m.channels
        )));
    }
    let mut out = ChannelMatrix::zeros(m.channels, m.timesteps);
    for c in 0..m.channels {
        let (mean, std) = (stats.mean[c], stats.std[c]);
        for (dst, src) in out.channel_mut(c).iter_mut().zip(m.channel(c)) {
            *dst = (src - mean) / std;
        }
    }
    Ok(out)
}

/// One prediction, joined with its sample's stylus bounds for coverage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadingRecord {
    pub reading_id: String,
    pub sample_id: String,
    pub truth_ra_um: f64,
    pub pred_ra_um: f64,
    pub sample_min_ra: f64,
    pub sample_max_ra: f64,
}

/// Fraction of predictions inside their sample's stylus Ra range, inclusive
/// on both ends.
pub fn coverage(records: &[ReadingRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::Value("coverage needs at least one record".into()));
    }
    let inside = records
        .iter()
        .filter(|r| r.pred_ra_um >= r.sample_min_ra && r.pred_ra_um <= r.sample_max_ra)
        .count();
    Ok(inside as f64 / records.len() as f64)
}

/// Aggregated evaluation result over every test record of an experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub method: Method,
    pub protocol: Protocol,
    pub seed: u64,
    pub rmse_um: f64,
    pub mse_um2: f64,
    pub pearson_r: f64,
    pub max_error_um: f64,
    pub pred_coverage: f64,
    pub records: Vec<ReadingRecord>,
}

/// Computes every metric over the records and assembles the report.
pub fn report_from_records(
    method: Method,
    protocol: Protocol,
    seed: u64,
    records: Vec<ReadingRecord>,
) -> Result<EvalReport> {
    let truth: Vec<f64> = records.iter().map(|r| r.truth_ra_um).collect();
    let pred: Vec<f64> = records.iter().map(|r| r.pred_ra_um).collect();
    Ok(EvalReport {
        method,
        protocol,
        seed,
        rmse_um: rmse(&truth, &pred)?,
        mse_um2: mse(&truth, &pred)?,
        pearson_r: pearson(&truth, &pred)?,
        max_error_um: max_abs_error(&truth, &pred)?,
        pred_coverage: coverage(&records)?,
        records,
    })
}

/// Writes the per-reading records as CSV — the data behind truth-vs-prediction
/// scatter plots.
pub fn write_records_csv<W: Write>(records: &[ReadingRecord], out: &mut W) -> Result<()> {
    writeln!(out, "reading_id,sample_id,truth_ra_um,pred_ra_um,sample_min_ra,sample_max_ra")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            r.reading_id, r.sample_id, r.truth_ra_um, r.pred_ra_um, r.sample_min_ra,
            r.sample_max_ra
        )?;
    }
    Ok(())
}

/// Knobs shared by every experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentOptions {
    /// Thresholding rank applied before normalization and before the
    /// baseline pipeline.
    pub theta: usize,
    /// Baseline waviness cutoff, µm.
    pub cutoff_um: f64,
    /// Rocket bank size; ignored by other methods.
    pub rocket_kernels: usize,
    /// Ridge penalties searched by leave-one-out selection.
    pub lambda_grid: Vec<f64>,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        Self {
            theta: DEFAULT_THETA,
            cutoff_um: DEFAULT_CUTOFF_UM,
            rocket_kernels: ROCKET_KERNEL_COUNT,
            lambda_grid: default_lambda_grid(),
        }
    }
}

/// Fitted feature extractor, serialized into trained-model files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ExtractorParams {
    Minirocket(MiniRocketParams),
    Rocket(KernelBank),
}

impl ExtractorParams {
    /// Feature vector of one (thresholded, normalized) reading.
    pub fn transform(&self, reading: &ChannelMatrix) -> Result<Vec<f64>> {
        match self {
            ExtractorParams::Minirocket(params) => minirocket_transform(reading, params),
            ExtractorParams::Rocket(bank) => rocket_transform(reading, bank),
        }
    }

    /// Seed the extractor was fitted with (derived from the experiment seed).
    pub fn seed(&self) -> u64 {
        match self {
            ExtractorParams::Minirocket(params) => params.seed,
            ExtractorParams::Rocket(bank) => bank.seed,
        }
    }
}

/// Everything a feature method learns from one training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainedModel {
    pub method: Method,
    pub seed: u64,
    pub theta: usize,
    pub norm: NormStats,
    pub extractor: ExtractorParams,
    pub ridge: RidgeModel,
    /// The split the model was trained on, for provenance and later
    /// evaluation of exactly the held-out readings.
    pub split: SplitPlan,
}

/// Parses a trained-model JSON, accepting either the bare [`TrainedModel`]
/// shape or a wrapper object carrying it under a `"model"` key (the form the
/// command-line tool writes, with its config echo alongside).
pub fn parse_model_json(text: &str) -> Result<TrainedModel> {
    #[derive(Deserialize)]
    struct Wrapper {
        model: TrainedModel,
    }
    match serde_json::from_str::<Wrapper>(text) {
        Ok(w) => Ok(w.model),
        Err(_) => Ok(serde_json::from_str::<TrainedModel>(text)?),
    }
}

/// Label and stylus bounds per sample, precomputed once per experiment.
struct SampleInfo {
    label: f64,
    min_ra: f64,
    max_ra: f64,
}

fn sample_infos(ds: &Dataset) -> Result<Vec<SampleInfo>> {
    ds.samples
        .iter()
        .map(|s| {
            Ok(SampleInfo {
                label: mean_ra_label(s)?,
                min_ra: s.min_ra(),
                max_ra: s.max_ra(),
            })
        })
        .collect()
}

/// Resolves plan ids against the dataset, preserving plan order.
fn resolve_ids(
    ids: &[String],
    index: &HashMap<&str, (usize, usize)>,
) -> Result<Vec<(usize, usize)>> {
    ids.iter()
        .map(|id| {
            index
                .get(id.as_str())
                .copied()
                .ok_or_else(|| Error::Mismatch(format!("plan id {id} not in dataset")))
        })
        .collect()
}

/// Thresholds one referenced reading, wrapping failures with the reading id.
fn thresholded(ds: &Dataset, (si, ri): (usize, usize), theta: usize) -> Result<ChannelMatrix> {
    let reading = &ds.samples[si].readings[ri];
    threshold(reading, theta)
        .map_err(|e| Error::Value(format!("thresholding {} failed: {e}", reading.reading_id)))
}

/// Trains a feature method (extractor + ridge) on the plan's training side.
pub fn train_on_plan(
    ds: &Dataset,
    plan: &SplitPlan,
    method: Method,
    seed: u64,
    opts: &ExperimentOptions,
) -> Result<TrainedModel> {
    if !method.needs_training() {
        return Err(Error::Config(format!(
            "method {} has nothing to train",
            serde_json::to_string(&method)?
        )));
    }
    plan.validate(ds)?;
    let index = reading_index(ds)?;
    let infos = sample_infos(ds)?;
    let train_refs = resolve_ids(&plan.train, &index)?;
    let input_len = ds.samples[train_refs[0].0].readings[train_refs[0].1].timesteps();

    let train_mats: Vec<ChannelMatrix> = train_refs
        .par_iter()
        .map(|&r| thresholded(ds, r, opts.theta))
        .collect::<Result<_>>()?;
    let norm = fit_norm(&train_mats)?;
    let train_norm: Vec<ChannelMatrix> = train_mats
        .into_par_iter()
        .map(|m| apply_norm(&norm, &m))
        .collect::<Result<_>>()?;

    let fold_seed =
        derive_seed(seed, &[FEATURE_STREAM, plan.fold_index.unwrap_or(0) as u64]);
    let extractor = match method {
        Method::MinirocketRidge => {
            ExtractorParams::Minirocket(minirocket_fit(&train_norm, fold_seed, input_len)?)
        }
        Method::RocketRidge => ExtractorParams::Rocket(generate_rocket_kernels(
            fold_seed,
            opts.rocket_kernels,
            input_len,
            train_norm[0].channels,
        )?),
        _ => unreachable!("needs_training checked above"),
    };

    let rows: Vec<Vec<f64>> = train_norm
        .par_iter()
        .map(|m| extractor.transform(m))
        .collect::<Result<_>>()?;
    let features = FeatureMatrix::from_rows(rows)?;
    let labels: Vec<f64> = train_refs.iter().map(|&(si, _)| infos[si].label).collect();
    let ridge = ridge_fit(&features, &labels, &opts.lambda_grid)?;

    Ok(TrainedModel {
        method,
        seed,
        theta: opts.theta,
        norm,
        extractor,
        ridge,
        split: plan.clone(),
    })
}

/// Predicts Ra for the given reading ids with a trained model.
pub fn predict_with_model(
    ds: &Dataset,
    model: &TrainedModel,
    ids: &[String],
) -> Result<Vec<f64>> {
    let index = reading_index(ds)?;
    let refs = resolve_ids(ids, &index)?;
    let rows: Vec<Vec<f64>> = refs
        .par_iter()
        .map(|&r| {
            let t = thresholded(ds, r, model.theta)?;
            model.extractor.transform(&apply_norm(&model.norm, &t)?)
        })
        .collect::<Result<_>>()?;
    ridge_predict(&model.ridge, &FeatureMatrix::from_rows(rows)?)
}

/// Scores a trained model on exactly the held-out side of the split it was
/// trained with, returning the usual aggregated report.
pub fn evaluate_trained(ds: &Dataset, model: &TrainedModel) -> Result<EvalReport> {
    model.split.validate(ds)?;
    let index = reading_index(ds)?;
    let infos = sample_infos(ds)?;
    let test_refs = resolve_ids(&model.split.test, &index)?;
    let preds = predict_with_model(ds, model, &model.split.test)?;
    let records = make_records(ds, &infos, &test_refs, &preds);
    report_from_records(model.method, model.split.protocol, model.seed, records)
}

/// Baseline Ra for every reading of the dataset, in dataset order per sample.
/// Fold-independent, so experiments compute it once and reuse it across folds.
fn baseline_predictions(ds: &Dataset, opts: &ExperimentOptions) -> Result<Vec<Vec<f64>>> {
    let geometry = build_sensor_geometry();
    let config = BaselineConfig { theta: opts.theta, cutoff_um: opts.cutoff_um };
    ds.samples
        .par_iter()
        .map(|sample| {
            sample
                .readings
                .iter()
                .map(|r| {
                    baseline_ra(r, &geometry, &config).map_err(|e| {
                        Error::Value(format!("baseline failed on {}: {e}", r.reading_id))
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

fn make_records(
    ds: &Dataset,
    infos: &[SampleInfo],
    refs: &[(usize, usize)],
    preds: &[f64],
) -> Vec<ReadingRecord> {
    refs.iter()
        .zip(preds)
        .map(|(&(si, ri), &pred)| ReadingRecord {
            reading_id: ds.samples[si].readings[ri].reading_id.clone(),
            sample_id: ds.samples[si].sample_id.clone(),
            truth_ra_um: infos[si].label,
            pred_ra_um: pred,
            sample_min_ra: infos[si].min_ra,
            sample_max_ra: infos[si].max_ra,
        })
        .collect()
}

/// Runs one full experiment with default options. See [`run_experiment_with`].
pub fn run_experiment(
    ds: &Dataset,
    protocol: Protocol,
    method: Method,
    seed: u64,
) -> Result<EvalReport> {
    run_experiment_with(ds, protocol, method, seed, &ExperimentOptions::default())
}

/// Runs one full experiment: builds the protocol's split plan(s), trains per
/// plan where the method requires it, predicts the held-out readings, and
/// aggregates every fold's test records into a single report.
///
/// Any per-reading stage failure aborts the run with the offending reading
/// named — partial reports are never produced.
pub fn run_experiment_with(
    ds: &Dataset,
    protocol: Protocol,
    method: Method,
    seed: u64,
    opts: &ExperimentOptions,
) -> Result<EvalReport> {
    let plans = match protocol {
        Protocol::PerSample20 => vec![split_per_sample_20(ds, seed)?],
        Protocol::KfoldSteel => kfold_per_steel(ds)?,
    };
    let index = reading_index(ds)?;
    let infos = sample_infos(ds)?;
    let baseline_cache = if method.needs_training() {
        None
    } else {
        Some(baseline_predictions(ds, opts)?)
    };

    let mut records = Vec::new();
    for (fold, plan) in plans.iter().enumerate() {
        log::info!(
            "fold {}/{}: {} train / {} test readings",
            fold + 1,
            plans.len(),
            plan.train.len(),
            plan.test.len()
        );
        let test_refs = resolve_ids(&plan.test, &index)?;
        let preds = match (&baseline_cache, method) {
            (Some(cache), Method::Baseline) => {
                test_refs.iter().map(|&(si, ri)| cache[si][ri]).collect::<Vec<f64>>()
            }
            (Some(cache), Method::BaselineCalibrated) => {
                let train_refs = resolve_ids(&plan.train, &index)?;
                let train_preds: Vec<f64> =
                    train_refs.iter().map(|&(si, ri)| cache[si][ri]).collect();
                let train_truth: Vec<f64> =
                    train_refs.iter().map(|&(si, _)| infos[si].label).collect();
                let cal = fit_affine_calibration(&train_preds, &train_truth)?;
                test_refs
                    .iter()
                    .map(|&(si, ri)| apply_calibration(&cal, cache[si][ri]))
                    .collect()
            }
            _ => {
                let model = train_on_plan(ds, plan, method, seed, opts)?;
                predict_with_model(ds, &model, &plan.test)?
            }
        };
        records.extend(make_records(ds, &infos, &test_refs, &preds));
    }
    report_from_records(method, protocol, seed, records)
}

//! Command-line front end: dataset simulation, baseline Ra, model training,
//! evaluation, and a receptive-field helper.
//!
//! Every command echoes its effective configuration into the artifacts it
//! writes, so a run is reproducible from its outputs alone. All randomness
//! flows from `--seed`; `--jobs` only sets the worker-thread count and never
//! changes results. Runtime failures print one machine-readable JSON object
//! on stderr and exit nonzero.

use std::fs;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use scatter_ra::baseline::{
    apply_calibration, baseline_ra, fit_affine_calibration, AffineCalibration, BaselineConfig,
    DEFAULT_CUTOFF_UM, DEFAULT_THETA,
};
use scatter_ra::dataset::{load_dataset, mean_ra_label, save_dataset, Dataset};
use scatter_ra::error::{Error, Result};
use scatter_ra::eval::{
    evaluate_trained, parse_model_json, run_experiment_with, split_per_sample_20,
    tcn_receptive_field, train_on_plan, write_records_csv, EvalReport, ExperimentOptions,
    Method, Protocol, SplitPlan, TrainedModel,
};
use scatter_ra::geometry::build_sensor_geometry;
use scatter_ra::sim::{generate_dataset, DatasetSpec};

#[derive(Parser)]
#[command(
    name = "scatter-ra",
    version,
    about = "Laser-scatter surface roughness: simulate, baseline, train, evaluate"
)]
struct Cli {
    /// JSON file supplying defaults for any flag below; explicit flags win.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Worker threads (default: all cores). Results never depend on this.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic laser-scatter dataset.
    Simulate(SimulateArgs),
    /// Compute the closed-form baseline Ra for every reading.
    Baseline(BaselineArgs),
    /// Fit a feature extractor plus ridge regressor on a train split.
    Train(TrainArgs),
    /// Score a method or a previously trained model on held-out readings.
    Evaluate(EvaluateArgs),
    /// Print the receptive field of a stacked dilated-convolution network.
    Rf(RfArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Output directory; must not exist unless --force is given.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Root seed for the whole dataset.
    #[arg(long)]
    seed: Option<u64>,
    /// Timesteps per reading.
    #[arg(long)]
    t: Option<usize>,
    /// Keep only the first N samples of the default reading-count template
    /// (handy for smoke tests).
    #[arg(long)]
    samples: Option<usize>,
    /// Replace the output directory if it already exists.
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct BaselineArgs {
    /// Dataset directory written by `simulate`.
    #[arg(long, value_name = "DIR")]
    dataset: Option<PathBuf>,
    /// Output JSON file.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Row-threshold rank subtracted from every sensor row.
    #[arg(long)]
    theta: Option<usize>,
    /// Waviness cutoff wavelength, µm.
    #[arg(long)]
    cutoff_um: Option<f64>,
    /// Split-plan JSON; fits an affine calibration on its train side and
    /// reports a and b alongside calibrated values.
    #[arg(long, value_name = "PATH")]
    calibrate: Option<PathBuf>,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset directory written by `simulate`.
    #[arg(long, value_name = "DIR")]
    dataset: Option<PathBuf>,
    /// Output model JSON file.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Seed driving the split draw and the extractor.
    #[arg(long)]
    seed: Option<u64>,
    /// Feature method to fit (baseline variants need no training).
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Split protocol; only per20 yields a single trainable split.
    #[arg(long, value_enum)]
    protocol: Option<ProtocolArg>,
    /// Row-threshold rank subtracted from every sensor row.
    #[arg(long)]
    theta: Option<usize>,
    /// Also write the train/test split plan to this JSON file.
    #[arg(long, value_name = "PATH")]
    split_out: Option<PathBuf>,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Dataset directory written by `simulate`.
    #[arg(long, value_name = "DIR")]
    dataset: Option<PathBuf>,
    /// Output report JSON; a scatter CSV lands next to it (.csv).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Model file written by `train`; evaluates exactly its held-out split.
    #[arg(long, value_name = "PATH", conflicts_with = "method")]
    model: Option<PathBuf>,
    /// Method to evaluate from scratch (kfold trains per fold internally).
    #[arg(long, value_enum)]
    method: Option<MethodArg>,
    /// Split protocol.
    #[arg(long, value_enum)]
    protocol: Option<ProtocolArg>,
    /// Seed driving splits and extractors.
    #[arg(long)]
    seed: Option<u64>,
    /// Row-threshold rank subtracted from every sensor row.
    #[arg(long)]
    theta: Option<usize>,
    /// Waviness cutoff wavelength for baseline methods, µm.
    #[arg(long)]
    cutoff_um: Option<f64>,
}

#[derive(Args)]
struct RfArgs {
    /// Convolution kernel size.
    kernel_size: u64,
    /// Number of stacked levels.
    levels: u32,
    /// Dilation growth factor per level.
    #[arg(long, default_value_t = 2)]
    base: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum MethodArg {
    Baseline,
    BaselineCalibrated,
    Rocket,
    Minirocket,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Baseline => Method::Baseline,
            MethodArg::BaselineCalibrated => Method::BaselineCalibrated,
            MethodArg::Rocket => Method::RocketRidge,
            MethodArg::Minirocket => Method::MinirocketRidge,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
enum ProtocolArg {
    Per20,
    Kfold,
}

impl From<ProtocolArg> for Protocol {
    fn from(p: ProtocolArg) -> Self {
        match p {
            ProtocolArg::Per20 => Protocol::PerSample20,
            ProtocolArg::Kfold => Protocol::KfoldSteel,
        }
    }
}

/// Optional defaults loaded from --config; a flag given on the command line
/// always takes precedence over the same key here.
#[derive(Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct FileConfig {
    dataset: Option<PathBuf>,
    out: Option<PathBuf>,
    seed: Option<u64>,
    theta: Option<usize>,
    cutoff_um: Option<f64>,
    t: Option<usize>,
    samples: Option<usize>,
    method: Option<MethodArg>,
    protocol: Option<ProtocolArg>,
    jobs: Option<usize>,
    lambda_grid: Option<Vec<f64>>,
}

impl FileConfig {
    fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            None => Ok(Self::default()),
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| {
                    Error::Config(format!("cannot read config {}: {e}", p.display()))
                })?;
                serde_json::from_str(&text)
                    .map_err(|e| Error::Config(format!("bad config {}: {e}", p.display())))
            }
        }
    }
}

/// Effective configuration echoed into every artifact. `--jobs` is absent on
/// purpose: it cannot change results, so it is not part of provenance.
#[derive(Serialize)]
struct RunConfig {
    command: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    dataset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    out: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    theta: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cutoff_um: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    t: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    method: Option<Method>,
    #[serde(skip_serializing_if = "Option::is_none")]
    protocol: Option<Protocol>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lambda_grid: Option<Vec<f64>>,
    /// Seed the fitted extractor actually ran with (derived from `seed`).
    #[serde(skip_serializing_if = "Option::is_none")]
    extractor_seed: Option<u64>,
}

impl RunConfig {
    fn new(command: &'static str) -> Self {
        Self {
            command,
            dataset: None,
            out: None,
            seed: None,
            theta: None,
            cutoff_um: None,
            t: None,
            samples: None,
            method: None,
            protocol: None,
            lambda_grid: None,
            extractor_seed: None,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            print_error_json("usage", &e.to_string());
            return ExitCode::from(2);
        }
    };
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("SCATTER_RA_LOG", "warn"),
    )
    .init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            print_error_json(error_kind(&err), &err.to_string());
            ExitCode::FAILURE
        }
    }
}

fn print_error_json(kind: &str, message: &str) {
    eprintln!("{}", serde_json::json!({ "error": { "kind": kind, "message": message } }));
}

/// Short machine-readable slug per error variant.
fn error_kind(err: &Error) -> &'static str {
    match err {
        Error::Io(_) => "io",
        Error::Json(_) => "json",
        Error::BadMagic { .. } | Error::UnsupportedVersion { .. }
        | Error::TruncatedPayload { .. } => "format",
        Error::Dimensions(_) => "dimensions",
        Error::Value(_) => "value",
        Error::Manifest(_) => "manifest",
        Error::Config(_) => "config",
        Error::Mismatch(_) => "mismatch",
    }
}

fn run(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_deref())?;
    if let Some(jobs) = cli.jobs.or(file.jobs) {
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .map_err(|e| Error::Config(format!("cannot set --jobs {jobs}: {e}")))?;
    }
    match cli.command {
        Command::Simulate(args) => cmd_simulate(args, &file),
        Command::Baseline(args) => cmd_baseline(args, &file),
        Command::Train(args) => cmd_train(args, &file),
        Command::Evaluate(args) => cmd_evaluate(args, &file),
        Command::Rf(args) => cmd_rf(args),
    }
}

/// Flag > config file > default.
fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

fn require(path: Option<PathBuf>, what: &str) -> Result<PathBuf> {
    path.ok_or_else(|| Error::Config(format!("missing {what} (flag or config file)")))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(fs::write(path, text)?)
}

fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn cmd_simulate(args: SimulateArgs, file: &FileConfig) -> Result<()> {
    let out = require(args.out.or_else(|| file.out.clone()), "--out")?;
    let seed = pick(args.seed, file.seed, 0);
    let mut spec = DatasetSpec::default();
    spec.length_steps = pick(args.t, file.t, spec.length_steps);
    let samples = pick(args.samples, file.samples, spec.readings_per_sample.len());
    if samples == 0 || samples > spec.readings_per_sample.len() {
        return Err(Error::Config(format!(
            "--samples must be 1..={}, got {samples}",
            spec.readings_per_sample.len()
        )));
    }
    spec.readings_per_sample.truncate(samples);
    spec.other_coating_samples = spec.other_coating_samples.min(samples);

    if out.exists() {
        if !args.force {
            return Err(Error::Config(format!(
                "output {} already exists; pass --force to replace it",
                out.display()
            )));
        }
        fs::remove_dir_all(&out)?;
    }
    let dataset = generate_dataset(&spec, seed)?;
    save_dataset(&dataset, &out)?;

    let mut config = RunConfig::new("simulate");
    config.out = Some(out.display().to_string());
    config.seed = Some(seed);
    config.t = Some(spec.length_steps);
    config.samples = Some(samples);
    write_json(&out.join("run_config.json"), &config)?;

    let (lo, hi) = dataset.samples.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), s| {
        (lo.min(s.min_ra()), hi.max(s.max_ra()))
    });
    println!(
        "wrote {} samples / {} readings (stylus Ra {lo:.3}-{hi:.3} um) to {}",
        dataset.samples.len(),
        dataset.reading_count(),
        out.display()
    );
    Ok(())
}

/// One baseline prediction, optionally with its calibrated value.
#[derive(Serialize)]
struct BaselineRecord {
    reading_id: String,
    sample_id: String,
    ra_um: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibrated_ra_um: Option<f64>,
}

#[derive(Serialize)]
struct BaselineReport {
    config: RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    calibration: Option<AffineCalibration>,
    records: Vec<BaselineRecord>,
}

fn cmd_baseline(args: BaselineArgs, file: &FileConfig) -> Result<()> {
    let dataset_dir = require(args.dataset.or_else(|| file.dataset.clone()), "--dataset")?;
    let out = require(args.out.or_else(|| file.out.clone()), "--out")?;
    let theta = pick(args.theta, file.theta, DEFAULT_THETA);
    let cutoff_um = pick(args.cutoff_um, file.cutoff_um, DEFAULT_CUTOFF_UM);

    let dataset = load_dataset(&dataset_dir)?;
    log::info!("loaded {} readings from {}", dataset.reading_count(), dataset_dir.display());
    let geometry = build_sensor_geometry();
    let bl_config = BaselineConfig { theta, cutoff_um };
    let mut records = Vec::with_capacity(dataset.reading_count());
    for sample in &dataset.samples {
        for reading in &sample.readings {
            let ra = baseline_ra(reading, &geometry, &bl_config).map_err(|e| {
                Error::Value(format!("baseline failed on {}: {e}", reading.reading_id))
            })?;
            records.push(BaselineRecord {
                reading_id: reading.reading_id.clone(),
                sample_id: sample.sample_id.clone(),
                ra_um: ra,
                calibrated_ra_um: None,
            });
        }
    }

    let calibration = match args.calibrate {
        None => None,
        Some(split_path) => {
            let plan: SplitPlan = load_json(&split_path)?;
            plan.validate(&dataset)?;
            Some(fit_calibration_on_train(&dataset, &plan, &records)?)
        }
    };
    if let Some(cal) = &calibration {
        for r in &mut records {
            r.calibrated_ra_um = Some(apply_calibration(cal, r.ra_um));
        }
    }

    let mut config = RunConfig::new("baseline");
    config.dataset = Some(dataset_dir.display().to_string());
    config.out = Some(out.display().to_string());
    config.theta = Some(theta);
    config.cutoff_um = Some(cutoff_um);
    let n = records.len();
    write_json(&out, &BaselineReport { config, calibration, records })?;
    println!("wrote baseline Ra for {n} readings to {}", out.display());
    Ok(())
}

/// Fits the affine map on the plan's train side, pairing each train reading's
/// baseline Ra with its sample's mean stylus label.
fn fit_calibration_on_train(
    dataset: &Dataset,
    plan: &SplitPlan,
    records: &[BaselineRecord],
) -> Result<AffineCalibration> {
    let mut label_of = std::collections::HashMap::new();
    for sample in &dataset.samples {
        let label = mean_ra_label(sample)?;
        for reading in &sample.readings {
            label_of.insert(reading.reading_id.as_str(), label);
        }
    }
    let ra_of: std::collections::HashMap<&str, f64> =
        records.iter().map(|r| (r.reading_id.as_str(), r.ra_um)).collect();
    let mut preds = Vec::with_capacity(plan.train.len());
    let mut truths = Vec::with_capacity(plan.train.len());
    for id in &plan.train {
        preds.push(ra_of[id.as_str()]);
        truths.push(label_of[id.as_str()]);
    }
    fit_affine_calibration(&preds, &truths)
}

#[derive(Serialize)]
struct ModelFile {
    config: RunConfig,
    model: TrainedModel,
}

fn experiment_options(
    theta: usize,
    cutoff_um: f64,
    file: &FileConfig,
) -> ExperimentOptions {
    let mut opts = ExperimentOptions { theta, cutoff_um, ..ExperimentOptions::default() };
    if let Some(grid) = &file.lambda_grid {
        opts.lambda_grid = grid.clone();
    }
    opts
}

fn cmd_train(args: TrainArgs, file: &FileConfig) -> Result<()> {
    let dataset_dir = require(args.dataset.or_else(|| file.dataset.clone()), "--dataset")?;
    let out = require(args.out.or_else(|| file.out.clone()), "--out")?;
    let seed = pick(args.seed, file.seed, 0);
    let theta = pick(args.theta, file.theta, DEFAULT_THETA);
    let method_arg = args
        .method
        .or(file.method)
        .ok_or_else(|| Error::Config("missing --method (flag or config file)".into()))?;
    let method = Method::from(method_arg);
    if !method.needs_training() {
        return Err(Error::Config(
            "baseline methods have nothing to train; use `evaluate --method` directly".into(),
        ));
    }
    let protocol = pick(args.protocol, file.protocol, ProtocolArg::Per20);
    if protocol != ProtocolArg::Per20 {
        return Err(Error::Config(
            "train fits one model on one split; kfold trains inside `evaluate`".into(),
        ));
    }

    let dataset = load_dataset(&dataset_dir)?;
    let plan = split_per_sample_20(&dataset, seed)?;
    let opts = experiment_options(theta, DEFAULT_CUTOFF_UM, file);
    log::info!(
        "training {method:?} on {} readings ({} held out)",
        plan.train.len(),
        plan.test.len()
    );
    let model = train_on_plan(&dataset, &plan, method, seed, &opts)?;

    let mut config = RunConfig::new("train");
    config.dataset = Some(dataset_dir.display().to_string());
    config.out = Some(out.display().to_string());
    config.seed = Some(seed);
    config.theta = Some(theta);
    config.method = Some(method);
    config.protocol = Some(Protocol::PerSample20);
    config.lambda_grid = Some(opts.lambda_grid.clone());
    config.extractor_seed = Some(model.extractor.seed());

    if let Some(split_path) = &args.split_out {
        write_json(split_path, &plan)?;
    }
    write_json(&out, &ModelFile { config, model })?;
    println!(
        "trained {} on {} readings, ridge lambda selected by leave-one-out; model at {}",
        match method_arg {
            MethodArg::Minirocket => "minirocket",
            MethodArg::Rocket => "rocket",
            _ => unreachable!(),
        },
        plan.train.len(),
        out.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct ReportFile {
    config: RunConfig,
    report: EvalReport,
}

fn cmd_evaluate(args: EvaluateArgs, file: &FileConfig) -> Result<()> {
    let dataset_dir = require(args.dataset.or_else(|| file.dataset.clone()), "--dataset")?;
    let out = require(args.out.or_else(|| file.out.clone()), "--out")?;
    let theta = pick(args.theta, file.theta, DEFAULT_THETA);
    let cutoff_um = pick(args.cutoff_um, file.cutoff_um, DEFAULT_CUTOFF_UM);
    let dataset = load_dataset(&dataset_dir)?;

    let mut config = RunConfig::new("evaluate");
    config.dataset = Some(dataset_dir.display().to_string());
    config.out = Some(out.display().to_string());

    let report = if let Some(model_path) = &args.model {
        let text = fs::read_to_string(model_path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", model_path.display())))?;
        let model = parse_model_json(&text)?;
        model.split.validate(&dataset).map_err(|e| {
            Error::Mismatch(format!("model split does not fit this dataset: {e}"))
        })?;
        if let Some(seed) = args.seed.or(file.seed) {
            if seed != model.seed {
                return Err(Error::Mismatch(format!(
                    "--seed {seed} differs from the model's seed {}",
                    model.seed
                )));
            }
        }
        config.seed = Some(model.seed);
        config.theta = Some(model.theta);
        config.method = Some(model.method);
        config.protocol = Some(model.split.protocol);
        config.extractor_seed = Some(model.extractor.seed());
        evaluate_trained(&dataset, &model)?
    } else {
        let method_arg = args.method.or(file.method).ok_or_else(|| {
            Error::Config("evaluate needs either --model or --method".into())
        })?;
        let method = Method::from(method_arg);
        let protocol = Protocol::from(pick(args.protocol, file.protocol, ProtocolArg::Per20));
        let seed = pick(args.seed, file.seed, 0);
        let opts = experiment_options(theta, cutoff_um, file);
        config.seed = Some(seed);
        config.theta = Some(theta);
        config.cutoff_um = Some(cutoff_um);
        config.method = Some(method);
        config.protocol = Some(protocol);
        if method.needs_training() {
            config.lambda_grid = Some(opts.lambda_grid.clone());
        }
        run_experiment_with(&dataset, protocol, method, seed, &opts)?
    };

    let csv_path = out.with_extension("csv");
    let mut csv = BufWriter::new(fs::File::create(&csv_path)?);
    write_records_csv(&report.records, &mut csv)?;
    drop(csv);
    println!(
        "{} readings: rmse {:.4} um, pearson {:.4}, coverage {:.3} -> {} + {}",
        report.records.len(),
        report.rmse_um,
        report.pearson_r,
        report.pred_coverage,
        out.display(),
        csv_path.display()
    );
    write_json(&out, &ReportFile { config, report })?;
    Ok(())
}

fn cmd_rf(args: RfArgs) -> Result<()> {
    let rf = tcn_receptive_field(args.kernel_size, args.levels, args.base)?;
    println!("{rf}");
    Ok(())
}

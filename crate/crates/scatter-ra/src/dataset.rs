//! Steel samples, datasets, and the on-disk dataset layout.
//!
//! A steel sample couples two unmatched sets of measurements: stylus-track Ra
//! values (the ground truth source) and laser readings. No stylus track
//! corresponds to any laser track; the arithmetic mean of the stylus values
//! labels every reading of the sample. On disk a dataset is a directory with
//! a `dataset.json` manifest plus one `SRRD` file per reading.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reading::{read_reading_file, write_reading_file, LaserReading};

/// Manifest schema version written by this build.
pub const DATASET_SCHEMA_VERSION: u32 = 1;

/// Surface coating of a steel sample; the minority coating scatters light
/// differently and gets its own scatter parameters in the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Coating {
    Galvanized,
    Other,
}

/// One steel sample: stylus-track Ra values plus laser readings.
#[derive(Debug, Clone, PartialEq)]
pub struct SteelSample {
    pub sample_id: String,
    pub coating: Coating,
    /// Ra of each simulated stylus track, µm. Non-empty, all positive.
    pub stylus_ra: Vec<f64>,
    pub readings: Vec<LaserReading>,
}

impl SteelSample {
    /// Builds a sample, enforcing the stylus-track invariants.
    pub fn new(
        sample_id: impl Into<String>,
        coating: Coating,
        stylus_ra: Vec<f64>,
        readings: Vec<LaserReading>,
    ) -> Result<Self> {
        let sample = Self { sample_id: sample_id.into(), coating, stylus_ra, readings };
        sample.validate()?;
        Ok(sample)
    }

    pub fn validate(&self) -> Result<()> {
        if self.stylus_ra.is_empty() {
            return Err(Error::Value(format!(
                "sample {} has no stylus Ra values",
                self.sample_id
            )));
        }
        if let Some(&bad) = self.stylus_ra.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(Error::Value(format!(
                "sample {} has non-positive stylus Ra {bad}",
                self.sample_id
            )));
        }
        Ok(())
    }

    /// Smallest stylus Ra of the sample.
    pub fn min_ra(&self) -> f64 {
        self.stylus_ra.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest stylus Ra of the sample.
    pub fn max_ra(&self) -> f64 {
        self.stylus_ra.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Arithmetic mean of the sample's stylus Ra values — the label shared by
/// every laser reading of that sample.
pub fn mean_ra_label(sample: &SteelSample) -> Result<f64> {
    if sample.stylus_ra.is_empty() {
        return Err(Error::Value(format!(
            "sample {} has no stylus Ra values",
            sample.sample_id
        )));
    }
    Ok(sample.stylus_ra.iter().sum::<f64>() / sample.stylus_ra.len() as f64)
}

/// A collection of steel samples plus the provenance needed to regenerate it.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema_version: u32,
    /// Root seed the dataset was generated from.
    pub seed: u64,
    /// Spatial step shared by all readings, µm.
    pub step_um: f64,
    pub samples: Vec<SteelSample>,
}

impl Dataset {
    /// Total number of laser readings across samples.
    pub fn reading_count(&self) -> usize {
        self.samples.iter().map(|s| s.readings.len()).sum()
    }

    /// Checks sample invariants and id uniqueness.
    pub fn validate(&self) -> Result<()> {
        let mut sample_ids = HashSet::new();
        let mut reading_ids = HashSet::new();
        for sample in &self.samples {
            sample.validate()?;
            if !sample_ids.insert(sample.sample_id.as_str()) {
                return Err(Error::Manifest(format!(
                    "duplicate sample_id {}",
                    sample.sample_id
                )));
            }
            for reading in &sample.readings {
                if !reading_ids.insert(reading.reading_id.as_str()) {
                    return Err(Error::Manifest(format!(
                        "duplicate reading_id {}",
                        reading.reading_id
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Manifest {
    schema_version: u32,
    seed: u64,
    step_um: f64,
    samples: Vec<ManifestSample>,
}

#[derive(Debug, Serialize, Deserialize)]
struct ManifestSample {
    sample_id: String,
    coating: Coating,
    stylus_ra: Vec<f64>,
    readings: Vec<String>,
}

/// Writes `dataset.json` plus one reading file per laser reading into
/// `directory` (created if absent). Reading files are named
/// `{reading_id}.bin`.
pub fn save_dataset(dataset: &Dataset, directory: &Path) -> Result<()> {
    dataset.validate()?;
    std::fs::create_dir_all(directory)?;

    let mut samples = Vec::with_capacity(dataset.samples.len());
    for sample in &dataset.samples {
        let mut filenames = Vec::with_capacity(sample.readings.len());
        for reading in &sample.readings {
            let filename = format!("{}.bin", reading.reading_id);
            write_reading_file(reading, &directory.join(&filename))?;
            filenames.push(filename);
        }
        samples.push(ManifestSample {
            sample_id: sample.sample_id.clone(),
            coating: sample.coating,
            stylus_ra: sample.stylus_ra.clone(),
            readings: filenames,
        });
    }

    let manifest = Manifest {
        schema_version: dataset.schema_version,
        seed: dataset.seed,
        step_um: dataset.step_um,
        samples,
    };
    let file = std::fs::File::create(directory.join("dataset.json"))?;
    let mut writer = std::io::BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, &manifest)?;
    use std::io::Write;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

/// Loads a dataset directory written by [`save_dataset`].
pub fn load_dataset(directory: &Path) -> Result<Dataset> {
    let manifest_path = directory.join("dataset.json");
    if !manifest_path.exists() {
        return Err(Error::Manifest(format!(
            "no dataset.json in {}",
            directory.display()
        )));
    }
    let manifest: Manifest =
        serde_json::from_reader(std::io::BufReader::new(std::fs::File::open(&manifest_path)?))?;
    if manifest.schema_version != DATASET_SCHEMA_VERSION {
        return Err(Error::Manifest(format!(
            "unsupported dataset schema_version {}",
            manifest.schema_version
        )));
    }

    let mut samples = Vec::with_capacity(manifest.samples.len());
    for entry in manifest.samples {
        let mut readings = Vec::with_capacity(entry.readings.len());
        for filename in &entry.readings {
            let path = directory.join(filename);
            if !path.exists() {
                return Err(Error::Manifest(format!(
                    "manifest references missing reading file {filename}"
                )));
            }
            readings.push(read_reading_file(&path, manifest.step_um)?);
        }
        samples.push(SteelSample::new(entry.sample_id, entry.coating, entry.stylus_ra, readings)?);
    }

    let dataset = Dataset {
        schema_version: manifest.schema_version,
        seed: manifest.seed,
        step_um: manifest.step_um,
        samples,
    };
    dataset.validate()?;
    Ok(dataset)
}

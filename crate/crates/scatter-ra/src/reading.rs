//! Laser readings and their on-disk format.
//!
//! A reading is the raw sensor output for one scan track: 20 channels of
//! 8-bit reflected-light intensities, one column per 0.8 µm step. Files use a
//! tiny little-endian container so readings survive round trips bit-exactly:
//!
//! ```text
//! magic "SRRD" (4 bytes) | version u16 = 1 | C u16 | T u32 | C×T payload bytes
//! ```
//!
//! The payload is row-major by channel (channel 0's T bytes first).

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::SENSOR_COUNT;

/// File magic for serialized readings.
pub const READING_MAGIC: [u8; 4] = *b"SRRD";

/// Current reading format version.
pub const READING_FORMAT_VERSION: u16 = 1;

/// One scan track of raw intensities: `SENSOR_COUNT` channels × T timesteps,
/// stored channel-major.
#[derive(Debug, Clone, PartialEq)]
pub struct LaserReading {
    /// Identifier, unique within a dataset (doubles as the file stem).
    pub reading_id: String,
    /// Spatial step between columns, µm.
    pub step_um: f64,
    timesteps: usize,
    data: Vec<u8>,
}

impl LaserReading {
    /// Wraps channel-major intensity data. `data.len()` must equal
    /// `SENSOR_COUNT * timesteps` and `timesteps` must be positive.
    pub fn new(
        reading_id: impl Into<String>,
        step_um: f64,
        timesteps: usize,
        data: Vec<u8>,
    ) -> Result<Self> {
        if timesteps == 0 {
            return Err(Error::Dimensions("reading needs at least 1 timestep".into()));
        }
        if !(step_um.is_finite() && step_um > 0.0) {
            return Err(Error::Value(format!("step_um must be positive, got {step_um}")));
        }
        if data.len() != SENSOR_COUNT * timesteps {
            return Err(Error::Dimensions(format!(
                "expected {} intensity values ({SENSOR_COUNT}×{timesteps}), got {}",
                SENSOR_COUNT * timesteps,
                data.len()
            )));
        }
        Ok(Self { reading_id: reading_id.into(), step_um, timesteps, data })
    }

    /// Builds a reading from wider integers, rejecting anything outside
    /// [0, 255] instead of silently wrapping.
    pub fn try_from_values(
        reading_id: impl Into<String>,
        step_um: f64,
        timesteps: usize,
        values: &[i64],
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(values.len());
        for &v in values {
            if !(0..=255).contains(&v) {
                return Err(Error::Value(format!("intensity {v} outside [0, 255]")));
            }
            data.push(v as u8);
        }
        Self::new(reading_id, step_um, timesteps, data)
    }

    /// Number of channels (always [`SENSOR_COUNT`] in v1).
    pub fn channels(&self) -> usize {
        SENSOR_COUNT
    }

    /// Number of timesteps T.
    pub fn timesteps(&self) -> usize {
        self.timesteps
    }

    /// One channel's T intensities.
    pub fn channel(&self, c: usize) -> &[u8] {
        &self.data[c * self.timesteps..(c + 1) * self.timesteps]
    }

    /// Intensity at (channel, timestep).
    pub fn value(&self, c: usize, t: usize) -> u8 {
        self.data[c * self.timesteps + t]
    }

    /// Raw channel-major payload.
    pub fn data(&self) -> &[u8] {
        &self.data
    }

    /// The reading as a channel-major f64 matrix, the form every numeric
    /// stage downstream works on.
    pub fn to_matrix(&self) -> ChannelMatrix {
        ChannelMatrix {
            channels: SENSOR_COUNT,
            timesteps: self.timesteps,
            values: self.data.iter().map(|&v| v as f64).collect(),
        }
    }
}

/// Channel-major f64 matrix produced by thresholding/normalization stages.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelMatrix {
    pub channels: usize,
    pub timesteps: usize,
    /// Row-major by channel, `channels * timesteps` values.
    pub values: Vec<f64>,
}

impl ChannelMatrix {
    /// Zero-filled matrix of the given shape.
    pub fn zeros(channels: usize, timesteps: usize) -> Self {
        Self { channels, timesteps, values: vec![0.0; channels * timesteps] }
    }

    /// One channel's values.
    pub fn channel(&self, c: usize) -> &[f64] {
        &self.values[c * self.timesteps..(c + 1) * self.timesteps]
    }

    /// Mutable view of one channel.
    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        &mut self.values[c * self.timesteps..(c + 1) * self.timesteps]
    }

    /// Value at (channel, timestep).
    pub fn value(&self, c: usize, t: usize) -> f64 {
        self.values[c * self.timesteps + t]
    }
}

/// Serializes a reading into the `SRRD` container, returning bytes written.
pub fn write_reading<W: Write>(reading: &LaserReading, dest: &mut W) -> Result<u64> {
    dest.write_all(&READING_MAGIC)?;
    dest.write_all(&READING_FORMAT_VERSION.to_le_bytes())?;
    dest.write_all(&(reading.channels() as u16).to_le_bytes())?;
    dest.write_all(&(reading.timesteps() as u32).to_le_bytes())?;
    dest.write_all(reading.data())?;
    Ok((12 + reading.data().len()) as u64)
}

/// Writes a reading to a file; the file stem conventionally matches
/// `reading_id`.
pub fn write_reading_file(reading: &LaserReading, path: &Path) -> Result<u64> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    let n = write_reading(reading, &mut file)?;
    file.flush()?;
    Ok(n)
}

/// Parses a reading from the `SRRD` container. The caller supplies the
/// `reading_id` (usually the file stem) and the dataset's step, neither of
/// which lives in the binary format.
pub fn read_reading<R: Read>(
    source: &mut R,
    reading_id: impl Into<String>,
    step_um: f64,
) -> Result<LaserReading> {
    let mut header = [0u8; 12];
    read_exact_or_truncated(source, &mut header, 12)?;

    let magic: [u8; 4] = header[0..4].try_into().unwrap();
    if magic != READING_MAGIC {
        return Err(Error::BadMagic { found: magic });
    }
    let version = u16::from_le_bytes(header[4..6].try_into().unwrap());
    if version != READING_FORMAT_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let channels = u16::from_le_bytes(header[6..8].try_into().unwrap()) as usize;
    let timesteps = u32::from_le_bytes(header[8..12].try_into().unwrap()) as usize;
    if channels != SENSOR_COUNT {
        return Err(Error::Dimensions(format!(
            "reading has {channels} channels, this build supports exactly {SENSOR_COUNT}"
        )));
    }
    if timesteps == 0 {
        return Err(Error::Dimensions("reading declares 0 timesteps".into()));
    }

    let expected = channels * timesteps;
    let mut data = vec![0u8; expected];
    read_exact_or_truncated(source, &mut data, expected)?;
    LaserReading::new(reading_id, step_um, timesteps, data)
}

/// Reads a reading file, deriving `reading_id` from the file stem.
pub fn read_reading_file(path: &Path, step_um: f64) -> Result<LaserReading> {
    let reading_id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let mut file = std::io::BufReader::new(std::fs::File::open(path)?);
    read_reading(&mut file, reading_id, step_um)
}

fn read_exact_or_truncated<R: Read>(source: &mut R, buf: &mut [u8], expected: usize) -> Result<()> {
    let mut filled = 0;
    while filled < buf.len() {
        let n = source.read(&mut buf[filled..])?;
        if n == 0 {
            return Err(Error::TruncatedPayload { expected, found: filled });
        }
        filled += n;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn roundtrip(reading: &LaserReading) -> LaserReading {
        let mut buf = Vec::new();
        let written = write_reading(reading, &mut buf).unwrap();
        assert_eq!(written as usize, buf.len());
        read_reading(&mut buf.as_slice(), reading.reading_id.clone(), reading.step_um).unwrap()
    }

    #[test]
    fn all_zero_reading_serializes_to_header_plus_payload() {
        let reading = LaserReading::new("z", 0.8, 8, vec![0u8; 20 * 8]).unwrap();
        let mut buf = Vec::new();
        let written = write_reading(&reading, &mut buf).unwrap();
        assert_eq!(written, 12 + 160);
        assert_eq!(&buf[0..4], b"SRRD");
    }

    #[test]
    fn value_out_of_range_is_rejected() {
        let mut values = vec![0i64; 20 * 4];
        values[7] = 256;
        let err = LaserReading::try_from_values("r", 0.8, 4, &values).unwrap_err();
        assert!(matches!(err, Error::Value(_)));
    }

    #[test]
    fn bad_magic_is_a_distinct_error() {
        let mut buf = Vec::new();
        let reading = LaserReading::new("r", 0.8, 4, vec![1u8; 80]).unwrap();
        write_reading(&reading, &mut buf).unwrap();
        buf[0..4].copy_from_slice(b"XXXX");
        let err = read_reading(&mut buf.as_slice(), "r", 0.8).unwrap_err();
        assert!(matches!(err, Error::BadMagic { .. }));
    }

    #[test]
    fn version_mismatch_is_reported() {
        let mut buf = Vec::new();
        let reading = LaserReading::new("r", 0.8, 4, vec![1u8; 80]).unwrap();
        write_reading(&reading, &mut buf).unwrap();
        buf[4..6].copy_from_slice(&9u16.to_le_bytes());
        let err = read_reading(&mut buf.as_slice(), "r", 0.8).unwrap_err();
        assert!(matches!(err, Error::UnsupportedVersion(9)));
    }

    #[test]
    fn truncated_payload_is_reported() {
        let mut buf = Vec::new();
        let reading = LaserReading::new("r", 0.8, 100, vec![1u8; 2000]).unwrap();
        write_reading(&reading, &mut buf).unwrap();
        buf.truncate(12 + 20 * 99); // one column short
        let err = read_reading(&mut buf.as_slice(), "r", 0.8).unwrap_err();
        assert!(matches!(
            err,
            Error::TruncatedPayload { expected: 2000, found: 1980 }
        ));
    }

    #[test]
    fn channel_views_index_the_right_rows() {
        let mut data = vec![0u8; 20 * 3];
        data[2 * 3] = 11; // channel 2, t 0
        data[2 * 3 + 2] = 13; // channel 2, t 2
        let reading = LaserReading::new("r", 0.8, 3, data).unwrap();
        assert_eq!(reading.channel(2), &[11, 0, 13]);
        assert_eq!(reading.value(2, 2), 13);
    }

    proptest! {
        #[test]
        fn serialization_roundtrip_is_identity(
            timesteps in 1usize..64,
            seed in any::<u64>(),
        ) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let data: Vec<u8> = (0..20 * timesteps).map(|_| rng.gen()).collect();
            let reading = LaserReading::new("prop", 0.8, timesteps, data).unwrap();
            prop_assert_eq!(roundtrip(&reading), reading);
        }
    }
}

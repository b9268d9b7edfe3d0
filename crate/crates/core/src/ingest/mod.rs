//! Loading recordings and seizure annotations.

mod annotations;
mod edf;
mod table;

pub use annotations::{load_annotations, SeizureAnnotations};
pub use edf::{parse_edf, parse_edf_header, write_edf, EdfError, EdfHeader, EdfSignalHeader, EdfWriteOptions};
pub use table::{parse_csv, write_csv};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error(transparent)]
    Edf(#[from] EdfError),
    #[error("csv line {line}: {message}")]
    Csv { line: usize, message: String },
    #[error("csv input has no data rows")]
    EmptyCsv,
    #[error("annotations line {line}: {message}")]
    Annotation { line: usize, message: String },
    #[error("invalid recording: {0}")]
    InvalidRecording(String),
    #[error("cannot resample from {from} Hz to {to} Hz: block size must be a whole number of samples")]
    NonIntegerBlock { from: f64, to: f64 },
    #[error("unknown channel {0:?}")]
    UnknownChannel(String),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

/// Multichannel signal in physical units, one row per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    channel_names: Vec<String>,
    rate: f64,
    samples: Vec<Vec<f64>>,
}

impl Recording {
    /// Duplicate names get `-1`, `-2`, ... suffixes in order of appearance.
    pub fn new(channel_names: Vec<String>, rate: f64, samples: Vec<Vec<f64>>) -> Result<Self, IngestError> {
        if !(rate.is_finite() && rate > 0.0) {
            return Err(IngestError::InvalidRecording(format!("sample rate must be positive, got {rate}")));
        }
        if channel_names.len() != samples.len() {
            return Err(IngestError::InvalidRecording(format!(
                "{} channel names for {} channels",
                channel_names.len(),
                samples.len()
            )));
        }
        if let Some(first) = samples.first() {
            if let Some((i, row)) = samples.iter().enumerate().find(|(_, r)| r.len() != first.len()) {
                return Err(IngestError::InvalidRecording(format!(
                    "channel {i} has {} samples, expected {}",
                    row.len(),
                    first.len()
                )));
            }
        }
        Ok(Self { channel_names: dedup_names(channel_names), rate, samples })
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn samples(&self) -> &[Vec<f64>] {
        &self.samples
    }

    pub fn channel_count(&self) -> usize {
        self.samples.len()
    }

    pub fn sample_count(&self) -> usize {
        self.samples.first().map_or(0, Vec::len)
    }

    pub fn duration(&self) -> f64 {
        self.sample_count() as f64 / self.rate
    }

    /// Channel index by (de-duplicated) name.
    pub fn channel_index(&self, name: &str) -> Option<usize> {
        self.channel_names.iter().position(|n| n == name)
    }

    /// Keeps the named channels, in the order given.
    pub fn select_channels<S: AsRef<str>>(&self, names: &[S]) -> Result<Self, IngestError> {
        let mut chosen_names = Vec::with_capacity(names.len());
        let mut rows = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref();
            let i = self.channel_index(n).ok_or_else(|| IngestError::UnknownChannel(n.to_string()))?;
            chosen_names.push(self.channel_names[i].clone());
            rows.push(self.samples[i].clone());
        }
        Self::new(chosen_names, self.rate, rows)
    }
}

fn dedup_names(names: Vec<String>) -> Vec<String> {
    let mut out: Vec<String> = Vec::with_capacity(names.len());
    for name in names {
        let mut candidate = name.clone();
        let mut k = 1;
        while out.contains(&candidate) {
            candidate = format!("{name}-{k}");
            k += 1;
        }
        out.push(candidate);
    }
    out
}

/// Non-overlapping block means bringing `recording` down to `target_rate`.
/// A trailing partial block is dropped.
pub fn resample_mean(recording: &Recording, target_rate: f64) -> Result<Recording, IngestError> {
    let ratio = recording.rate / target_rate;
    let block = ratio.round();
    if !(target_rate > 0.0) || !ratio.is_finite() || block < 1.0 || (ratio - block).abs() > 1e-9 * ratio {
        return Err(IngestError::NonIntegerBlock { from: recording.rate, to: target_rate });
    }
    let block = block as usize;
    let samples = recording
        .samples
        .iter()
        .map(|row| row.chunks_exact(block).map(|c| c.iter().sum::<f64>() / block as f64).collect())
        .collect();
    Ok(Recording { channel_names: recording.channel_names.clone(), rate: target_rate, samples })
}

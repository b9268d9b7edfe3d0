//! Sliding-window analysis: one complex per time step, reduced to Betti
//! numbers and persistence entropies.

mod bands;
mod emit;
mod synth;

pub use bands::{rolling_bands, Band, Bands, Field};
pub use emit::{emit, emit_to_path, format_number, read_trajectory_csv, OutputFormat};
pub use synth::{synth_generate, SynthSpec};

use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::complex::{self, BuildOutcome, ChannelWindow, ComplexError, ComplexParams};
use crate::ingest::Recording;
use crate::lasso;
use crate::persistence::{self, ComplexSummary, PersistenceError};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("recording has {samples} samples, window needs more than {window}")]
    TooShort { samples: usize, window: usize },
    #[error("window ending at t={t}: {source}")]
    Complex {
        t: f64,
        #[source]
        source: ComplexError,
    },
    #[error("window ending at t={t}: {source}")]
    Persistence {
        t: f64,
        #[source]
        source: PersistenceError,
    },
    #[error("band window {h} is invalid for a trajectory of {len} points (need 2 <= h <= len)")]
    BandWindow { h: usize, len: usize },
    #[error("no window ends at t={0}")]
    NoSuchWindow(f64),
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("trajectory csv line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Parameters of a sliding-window run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AnalysisConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Window length in samples (seconds on a 1 Hz recording).
    pub window: usize,
    pub deg: usize,
    pub max_dim: usize,
    pub r2_threshold: f64,
    pub stride: usize,
    /// Channels to analyze, by name; empty means every channel.
    pub channels: Vec<String>,
    pub band_window: usize,
    pub band_field: Field,
    /// Worker threads; `None` uses every available core.
    pub threads: Option<usize>,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        Self {
            lambda1: 1.0,
            lambda2: 1.0,
            window: 50,
            deg: 3,
            max_dim: 2,
            r2_threshold: complex::DEFAULT_R2_THRESHOLD,
            stride: 1,
            channels: Vec::new(),
            band_window: 120,
            band_field: Field::B1,
            threads: None,
            tol: lasso::DEFAULT_TOL,
            max_iter: lasso::DEFAULT_MAX_ITER,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        let bad = |m: String| Err(PipelineError::InvalidConfig(m));
        if self.window < 2 {
            return bad(format!("window must be at least 2, got {}", self.window));
        }
        if self.stride < 1 {
            return bad("stride must be at least 1".into());
        }
        if !(self.r2_threshold > 0.0 && self.r2_threshold < 1.0) {
            return bad(format!("r2 threshold must lie in (0, 1), got {}", self.r2_threshold));
        }
        if !(1..=2).contains(&self.max_dim) {
            return bad(format!("max dim must be 1 or 2, got {}", self.max_dim));
        }
        if self.deg == 0 || self.deg > 4 {
            return bad(format!("signature degree must be in 1..=4, got {}", self.deg));
        }
        for (name, v) in [("lambda1", self.lambda1), ("lambda2", self.lambda2)] {
            if !(v.is_finite() && v >= 0.0) {
                return bad(format!("{name} must be finite and >= 0, got {v}"));
            }
        }
        if self.band_window < 2 {
            return bad(format!("band window must be at least 2, got {}", self.band_window));
        }
        if self.threads == Some(0) {
            return bad("threads must be at least 1".into());
        }
        Ok(())
    }

    pub fn complex_params(&self) -> ComplexParams {
        ComplexParams {
            deg: self.deg,
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            r2_threshold: self.r2_threshold,
            max_dim: self.max_dim,
            tol: self.tol,
            max_iter: self.max_iter,
        }
    }
}

/// Invariants of the complex built on the window ending at `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub b0: usize,
    pub b1: usize,
    pub pe_total: f64,
    pub pe_dim0: f64,
    pub pe_dim1: f64,
    pub edges: usize,
    pub triangles: usize,
}

/// Full result for one window.
#[derive(Debug, Clone)]
pub struct WindowAnalysis {
    pub t: f64,
    pub build: BuildOutcome,
    pub summary: ComplexSummary,
}

impl WindowAnalysis {
    pub fn point(&self) -> TrajectoryPoint {
        let c = &self.build.complex;
        TrajectoryPoint {
            t: self.t,
            b0: self.summary.betti.b0,
            b1: self.summary.betti.b1,
            pe_total: self.summary.entropy.total,
            pe_dim0: self.summary.entropy.dim0,
            pe_dim1: self.summary.entropy.dim1,
            edges: c.count_dim(1),
            triangles: c.count_dim(2),
        }
    }
}

/// Sample indices `end` (exclusive) at which windows close.
pub fn window_ends(samples: usize, config: &AnalysisConfig) -> Vec<usize> {
    (config.window..=samples).step_by(config.stride.max(1)).collect()
}

/// Builds and summarizes the complex on samples `end - window .. end`.
pub fn analyze_window(recording: &Recording, end: usize, config: &AnalysisConfig) -> Result<WindowAnalysis, PipelineError> {
    let rate = recording.rate();
    let t = end as f64 / rate;
    let start = end.checked_sub(config.window).filter(|_| end <= recording.sample_count());
    let Some(start) = start else { return Err(PipelineError::NoSuchWindow(t)) };
    let windows: Vec<ChannelWindow> = recording
        .samples()
        .iter()
        .enumerate()
        .map(|(channel, row)| ChannelWindow {
            channel,
            start: start as f64 / rate,
            end: (end - 1) as f64 / rate,
            samples: row[start..end].to_vec(),
        })
        .collect();
    let build = complex::build_complex(&windows, recording.channel_count(), &config.complex_params())
        .map_err(|source| PipelineError::Complex { t, source })?;
    let summary = persistence::summarize(&build.complex).map_err(|source| PipelineError::Persistence { t, source })?;
    Ok(WindowAnalysis { t, build, summary })
}

/// Runs every window of `recording` and returns the trajectory ordered by `t`.
pub fn sliding_analysis(recording: &Recording, config: &AnalysisConfig) -> Result<Vec<TrajectoryPoint>, PipelineError> {
    config.validate()?;
    let n = recording.sample_count();
    if n <= config.window {
        return Err(PipelineError::TooShort { samples: n, window: config.window });
    }
    let ends = window_ends(n, config);
    let run = || -> Vec<Result<TrajectoryPoint, PipelineError>> {
        ends.par_iter().map(|&end| analyze_window(recording, end, config).map(|w| w.point())).collect()
    };
    let results = match config.threads {
        Some(threads) => rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| PipelineError::ThreadPool(e.to_string()))?
            .install(run),
        None => run(),
    };
    // first failure in time order
    results.into_iter().collect()
}

//! C interface: opaque recording and trajectory handles, status codes, and a
//! per-thread message describing the most recent failure.
//!
//! Every function that can fail returns a [`SigtopoStatus`]. On failure the
//! message is available from [`sigtopo_last_error`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use sigtopo::ingest::{self, IngestError, Recording};
use sigtopo::pipeline::{self, AnalysisConfig, PipelineError, TrajectoryPoint};
use sigtopo::signature::{self, Path};

/// Result of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigtopoStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Parse = 4,
    Analysis = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

/// Loaded multichannel recording.
pub struct SigtopoRecording(Recording);

/// Result of a sliding-window analysis, one point per window.
pub struct SigtopoTrajectory(Vec<TrajectoryPoint>);

/// Analysis parameters. Obtain defaults from [`sigtopo_config_default`].
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct SigtopoConfig {
    pub lambda1: f64,
    pub lambda2: f64,
    /// Window length in samples.
    pub window: usize,
    pub deg: usize,
    pub max_dim: usize,
    pub r2_threshold: f64,
    pub stride: usize,
    /// Worker threads; 0 uses every core.
    pub threads: usize,
    pub tol: f64,
    pub max_iter: usize,
}

/// Invariants of the complex on the window ending at `t` seconds.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigtopoPoint {
    pub t: f64,
    pub b0: usize,
    pub b1: usize,
    pub pe_total: f64,
    pub pe_dim0: f64,
    pub pe_dim1: f64,
    pub edges: usize,
    pub triangles: usize,
}

impl From<&TrajectoryPoint> for SigtopoPoint {
    fn from(p: &TrajectoryPoint) -> Self {
        Self {
            t: p.t,
            b0: p.b0,
            b1: p.b1,
            pe_total: p.pe_total,
            pe_dim0: p.pe_dim0,
            pe_dim1: p.pe_dim1,
            edges: p.edges,
            triangles: p.triangles,
        }
    }
}

impl From<&SigtopoConfig> for AnalysisConfig {
    fn from(c: &SigtopoConfig) -> Self {
        AnalysisConfig {
            lambda1: c.lambda1,
            lambda2: c.lambda2,
            window: c.window,
            deg: c.deg,
            max_dim: c.max_dim,
            r2_threshold: c.r2_threshold,
            stride: c.stride,
            threads: (c.threads > 0).then_some(c.threads),
            tol: c.tol,
            max_iter: c.max_iter,
            ..AnalysisConfig::default()
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure(SigtopoStatus, String);

type Outcome = Result<(), Failure>;

fn fail<T>(status: SigtopoStatus, msg: impl Into<String>) -> Result<T, Failure> {
    Err(Failure(status, msg.into()))
}

impl From<IngestError> for Failure {
    fn from(e: IngestError) -> Self {
        let status = match &e {
            IngestError::Io { .. } => SigtopoStatus::Io,
            IngestError::Edf(_) | IngestError::Csv { .. } | IngestError::EmptyCsv | IngestError::Annotation { .. } => {
                SigtopoStatus::Parse
            }
            _ => SigtopoStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<PipelineError> for Failure {
    fn from(e: PipelineError) -> Self {
        let status = match &e {
            PipelineError::InvalidConfig(_) | PipelineError::TooShort { .. } | PipelineError::BandWindow { .. } => {
                SigtopoStatus::InvalidArgument
            }
            PipelineError::Io { .. } => SigtopoStatus::Io,
            _ => SigtopoStatus::Analysis,
        };
        Failure(status, e.to_string())
    }
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard(f: impl FnOnce() -> Outcome) -> SigtopoStatus {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SigtopoStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            SigtopoStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return fail(SigtopoStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p).to_str().or_else(|_| fail(SigtopoStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Outcome {
    if out.is_null() {
        return fail(SigtopoStatus::NullPointer, "output pointer is null");
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn recording<'a>(rec: *const SigtopoRecording) -> Result<&'a Recording, Failure> {
    rec.as_ref().map(|r| &r.0).ok_or(Failure(SigtopoStatus::NullPointer, "recording is null".into()))
}

fn read_file(path: &str) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).or_else(|e| fail(SigtopoStatus::Io, format!("{path}: {e}")))
}

/// Message for the last failed call on this thread, or NULL if it succeeded.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn sigtopo_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Reads an EDF file. With `n_channels == 0` every signal is kept, otherwise
/// the named channels in the given order.
///
/// # Safety
/// `path` must be a NUL-terminated string, `channels` must point to
/// `n_channels` such strings, and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sigtopo_recording_load_edf(
    path: *const c_char,
    channels: *const *const c_char,
    n_channels: usize,
    out: *mut *mut SigtopoRecording,
) -> SigtopoStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let mut rec = ingest::parse_edf(&read_file(path)?).map_err(IngestError::from)?;
        if n_channels > 0 {
            if channels.is_null() {
                return fail(SigtopoStatus::NullPointer, "channels is null");
            }
            let names = std::slice::from_raw_parts(channels, n_channels)
                .iter()
                .map(|&c| str_arg(c, "channel name"))
                .collect::<Result<Vec<_>, _>>()?;
            rec = rec.select_channels(&names)?;
        }
        put(out, SigtopoRecording(rec))
    })
}

/// Reads a CSV file with a header row of channel names, sampled at `rate` Hz.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sigtopo_recording_load_csv(
    path: *const c_char,
    rate: f64,
    out: *mut *mut SigtopoRecording,
) -> SigtopoStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let text = String::from_utf8(read_file(path)?)
            .or_else(|_| fail(SigtopoStatus::Parse, format!("{path}: not UTF-8")))?;
        put(out, SigtopoRecording(ingest::parse_csv(&text, rate)?))
    })
}

/// Builds a recording from `n_channels` rows of `n_samples` values stored
/// row after row. Channels are named `c0`, `c1`, ...
///
/// # Safety
/// `data` must point to `n_channels * n_samples` doubles and `out` be writable.
#[no_mangle]
pub unsafe extern "C" fn sigtopo_recording_from_samples(
    data: *const f64,
    n_channels: usize,
    n_samples: usize,
    rate: f64,
    out: *mut *mut SigtopoRecording,
) -> SigtopoStatus {
    guard(|| {
        if data.is_null() {
            return fail(SigtopoStatus::NullPointer, "data is null");
        }
        let Some(total) = n_channels.checked_mul(n_samples) else {
            return fail(SigtopoStatus::InvalidArgument, "size overflows");
        };
        let flat = std::slice::from_raw_parts(data, total);
        let rows = flat.chunks(n_samples.max(1)).take(n_channels).map(<[f64]>::to_vec).collect();
        let names = (0..n_channels).map(|i| format!("c{i}")).collect();
        put(out, SigtopoRecording(Recording::new(names, rate, rows)?))
    })
}

/// Block-mean resampling to `target_rate`, returned as a new recording.
///
/// # Safety
/// `rec` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sigtopo_recording_resample(
    rec: *const SigtopoRecording,
    target_rate: f64,
    out: *mut *mut SigtopoRecording,
) -> SigtopoStatus {
    guard(|| {
        let r = ingest::resample_mean(recording(rec)?, target_rate)?;
        put(out, SigtopoRecording(r))
    })
}

/// # Safety
/// `rec` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn sigtopo_recording_free(rec: *mut SigtopoRecording) {
    if !rec.is_null() {
        drop(Box::from_raw(rec));
    }
}

/// Number of channels; 0 for NULL.
///
/// # Safety
/// `rec` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sigtopo_recording_channel_count(rec: *const SigtopoRecording) -> usize {
    rec.as_ref().map_or(0, |r| r.0.channel_count())
}

/// Samples per channel; 0 for NULL.
///
/// # Safety
/// `rec` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sigtopo_recording_sample_count(rec: *const SigtopoRecording) -> usize {
    rec.as_ref().map_or(0, |r| r.0.sample_count())
}

/// Sampling rate in Hz; 0 for NULL.
///
/// # Safety
/// `rec` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sigtopo_recording_rate(rec: *const SigtopoRecording) -> f64 {
    rec.as_ref().map_or(0.0, |r| r.0.rate())
}

#[no_mangle]
pub extern "C" fn sigtopo_config_default() -> SigtopoConfig {
    let c = AnalysisConfig::default();
    SigtopoConfig {
        lambda1: c.lambda1,
        lambda2: c.lambda2,
        window: c.window,
        deg: c.deg,
        max_dim: c.max_dim,
        r2_threshold: c.r2_threshold,
        stride: c.stride,
        threads: c.threads.unwrap_or(0),
        tol: c.tol,
        max_iter: c.max_iter,
    }
}

/// Runs the sliding-window analysis over every channel of `rec`.
///
/// # Safety
/// `rec` must be a live handle, `config` must point to a config, and `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn sigtopo_analyze(
    rec: *const SigtopoRecording,
    config: *const SigtopoConfig,
    out: *mut *mut SigtopoTrajectory,
) -> SigtopoStatus {
    guard(|| {
        let rec = recording(rec)?;
        let Some(config) = config.as_ref() else { return fail(SigtopoStatus::NullPointer, "config is null") };
        let traj = pipeline::sliding_analysis(rec, &AnalysisConfig::from(config))?;
        put(out, SigtopoTrajectory(traj))
    })
}

/// Number of points; 0 for NULL.
///
/// # Safety
/// `traj` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn sigtopo_trajectory_len(traj: *const SigtopoTrajectory) -> usize {
    traj.as_ref().map_or(0, |t| t.0.len())
}

/// Copies point `index` into `out`.
///
/// # Safety
/// `traj` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn sigtopo_trajectory_get(
    traj: *const SigtopoTrajectory,
    index: usize,
    out: *mut SigtopoPoint,
) -> SigtopoStatus {
    guard(|| {
        let Some(traj) = traj.as_ref() else { return fail(SigtopoStatus::NullPointer, "trajectory is null") };
        if out.is_null() {
            return fail(SigtopoStatus::NullPointer, "output pointer is null");
        }
        let Some(p) = traj.0.get(index) else {
            return fail(SigtopoStatus::InvalidArgument, format!("index {index} out of range for {} points", traj.0.len()));
        };
        *out = SigtopoPoint::from(p);
        Ok(())
    })
}

/// # Safety
/// `traj` must be NULL or a live handle; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn sigtopo_trajectory_free(traj: *mut SigtopoTrajectory) {
    if !traj.is_null() {
        drop(Box::from_raw(traj));
    }
}

/// Number of coefficients of a signature of a `dim`-dimensional path
/// truncated at `deg`.
#[no_mangle]
pub extern "C" fn sigtopo_signature_len(dim: usize, deg: usize) -> usize {
    signature::flat_len(dim, deg)
}

/// Truncated signature of the piecewise-linear path through `n_points`
/// points. `values` holds the points one after another, `dim` values each;
/// `times` must increase strictly. Levels 1..=deg are written to `out` in
/// order, each in lexicographic word order. `written` receives the
/// coefficient count, also when the buffer is too small.
///
/// # Safety
/// `times` must point to `n_points` doubles, `values` to `n_points * dim`,
/// `out` to `capacity`, and `written` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sigtopo_path_signature(
    times: *const f64,
    values: *const f64,
    n_points: usize,
    dim: usize,
    deg: usize,
    out: *mut f64,
    capacity: usize,
    written: *mut usize,
) -> SigtopoStatus {
    guard(|| {
        if times.is_null() || values.is_null() || out.is_null() || written.is_null() {
            return fail(SigtopoStatus::NullPointer, "null buffer");
        }
        if dim == 0 {
            return fail(SigtopoStatus::InvalidArgument, "dimension must be positive");
        }
        let Some(total) = n_points.checked_mul(dim) else {
            return fail(SigtopoStatus::InvalidArgument, "size overflows");
        };
        let times = std::slice::from_raw_parts(times, n_points).to_vec();
        let points = std::slice::from_raw_parts(values, total).chunks(dim).map(<[f64]>::to_vec).collect();
        let invalid = |e: signature::SignatureError| Failure(SigtopoStatus::InvalidArgument, e.to_string());
        let path = Path::new(times, points).map_err(invalid)?;
        let flat = signature::path_signature(&path, deg).map_err(invalid)?.flatten();
        *written = flat.len();
        if flat.len() > capacity {
            return fail(
                SigtopoStatus::BufferTooSmall,
                format!("signature has {} coefficients, buffer holds {capacity}", flat.len()),
            );
        }
        std::slice::from_raw_parts_mut(out, flat.len()).copy_from_slice(&flat);
        Ok(())
    })
}

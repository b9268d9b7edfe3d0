//! European Data Format (EDF) reader and a minimal writer.
//!
//! Layout: a 256-byte fixed ASCII header, then 256 bytes per signal stored
//! field-major (all labels, then all transducer fields, ...), then data
//! records. Each record holds, signal after signal, `samples_per_record`
//! 16-bit little-endian two's-complement integers.

use thiserror::Error;

use super::Recording;

const FIXED_HEADER: usize = 256;
const PER_SIGNAL_HEADER: usize = 256;
const ANNOTATION_LABEL: &str = "EDF Annotations";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EdfError {
    #[error("file truncated: need {needed} bytes, have {available}")]
    Truncated { needed: usize, available: usize },
    #[error("header field {field:?} is not a valid number: {value:?}")]
    InvalidField { field: String, value: String },
    #[error("header size field says {declared} bytes, but {signals} signals need {expected}")]
    HeaderSize { declared: usize, expected: usize, signals: usize },
    #[error("data section has {data_bytes} bytes, which does not match {declared} records of {record_bytes} bytes")]
    RecordCountMismatch { declared: i64, data_bytes: usize, record_bytes: usize },
    #[error("signal {signal} ({label:?}) has zero digital range (min = max = {value})")]
    ZeroDigitalRange { signal: usize, label: String, value: i32 },
    #[error("signal {signal} ({label:?}) has digital min {min} above max {max}")]
    InvertedDigitalRange { signal: usize, label: String, min: i32, max: i32 },
    #[error("signal {signal} ({label:?}) must have at least one sample per record")]
    EmptySignal { signal: usize, label: String },
    #[error("signals use different sample rates ({0} and {1} samples per record)")]
    MixedRates(usize, usize),
    #[error("file declares no signals")]
    NoSignals,
    #[error("record duration must be positive, got {0}")]
    InvalidDuration(f64),
    #[error("cannot write EDF: {0}")]
    Unwritable(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdfSignalHeader {
    pub label: String,
    pub transducer: String,
    pub physical_dimension: String,
    pub physical_min: f64,
    pub physical_max: f64,
    pub digital_min: i32,
    pub digital_max: i32,
    pub prefiltering: String,
    pub samples_per_record: usize,
}

impl EdfSignalHeader {
    pub fn is_annotation(&self) -> bool {
        self.label == ANNOTATION_LABEL
    }

    /// Digital value to physical units.
    pub fn to_physical(&self, digital: i16) -> f64 {
        let gain = (self.physical_max - self.physical_min) / (self.digital_max - self.digital_min) as f64;
        self.physical_min + (digital as i32 - self.digital_min) as f64 * gain
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdfHeader {
    pub version: String,
    pub patient: String,
    pub recording: String,
    pub start_date: String,
    pub start_time: String,
    pub header_bytes: usize,
    pub reserved: String,
    /// As declared; `-1` means unknown and is inferred from the file length.
    pub data_records: i64,
    pub record_duration: f64,
    pub signals: Vec<EdfSignalHeader>,
}

impl EdfHeader {
    pub fn record_bytes(&self) -> usize {
        self.signals.iter().map(|s| s.samples_per_record * 2).sum()
    }
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], EdfError> {
        let end = self.pos + n;
        if end > self.bytes.len() {
            return Err(EdfError::Truncated { needed: end, available: self.bytes.len() });
        }
        let s = &self.bytes[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn text(&mut self, n: usize) -> Result<String, EdfError> {
        Ok(String::from_utf8_lossy(self.take(n)?).trim().to_string())
    }

    fn number<T: std::str::FromStr>(&mut self, n: usize, field: &str) -> Result<T, EdfError> {
        let raw = self.text(n)?;
        parse_number(&raw, field)
    }
}

fn parse_number<T: std::str::FromStr>(raw: &str, field: &str) -> Result<T, EdfError> {
    raw.parse::<T>().map_err(|_| EdfError::InvalidField { field: field.to_string(), value: raw.to_string() })
}

/// Parses the fixed and per-signal headers.
pub fn parse_edf_header(bytes: &[u8]) -> Result<EdfHeader, EdfError> {
    let mut c = Cursor { bytes, pos: 0 };
    let version = c.text(8)?;
    let patient = c.text(80)?;
    let recording = c.text(80)?;
    let start_date = c.text(8)?;
    let start_time = c.text(8)?;
    let header_bytes: usize = c.number(8, "header bytes")?;
    let reserved = c.text(44)?;
    let data_records: i64 = c.number(8, "number of data records")?;
    let record_duration: f64 = c.number(8, "record duration")?;
    let ns: usize = c.number(4, "number of signals")?;
    if ns == 0 {
        return Err(EdfError::NoSignals);
    }
    let expected = FIXED_HEADER + PER_SIGNAL_HEADER * ns;
    if header_bytes != expected {
        return Err(EdfError::HeaderSize { declared: header_bytes, expected, signals: ns });
    }
    if bytes.len() < expected {
        return Err(EdfError::Truncated { needed: expected, available: bytes.len() });
    }
    if !(record_duration.is_finite() && record_duration > 0.0) {
        return Err(EdfError::InvalidDuration(record_duration));
    }

    let texts = |c: &mut Cursor, width: usize| -> Result<Vec<String>, EdfError> { (0..ns).map(|_| c.text(width)).collect() };
    let labels = texts(&mut c, 16)?;
    let transducers = texts(&mut c, 80)?;
    let dims = texts(&mut c, 8)?;
    let pmins = texts(&mut c, 8)?;
    let pmaxs = texts(&mut c, 8)?;
    let dmins = texts(&mut c, 8)?;
    let dmaxs = texts(&mut c, 8)?;
    let prefilters = texts(&mut c, 80)?;
    let sprs = texts(&mut c, 8)?;
    c.take(32 * ns)?;

    let mut signals = Vec::with_capacity(ns);
    for i in 0..ns {
        let label = labels[i].clone();
        let field = |name: &str| format!("{name} (signal {i})");
        let s = EdfSignalHeader {
            label: label.clone(),
            transducer: transducers[i].clone(),
            physical_dimension: dims[i].clone(),
            physical_min: parse_number(&pmins[i], &field("physical minimum"))?,
            physical_max: parse_number(&pmaxs[i], &field("physical maximum"))?,
            digital_min: parse_number(&dmins[i], &field("digital minimum"))?,
            digital_max: parse_number(&dmaxs[i], &field("digital maximum"))?,
            prefiltering: prefilters[i].clone(),
            samples_per_record: parse_number(&sprs[i], &field("samples per record"))?,
        };
        if !s.is_annotation() {
            if s.digital_min == s.digital_max {
                return Err(EdfError::ZeroDigitalRange { signal: i, label, value: s.digital_min });
            }
            if s.digital_min > s.digital_max {
                return Err(EdfError::InvertedDigitalRange { signal: i, label, min: s.digital_min, max: s.digital_max });
            }
        }
        if s.samples_per_record == 0 {
            return Err(EdfError::EmptySignal { signal: i, label });
        }
        signals.push(s);
    }

    Ok(EdfHeader {
        version,
        patient,
        recording,
        start_date,
        start_time,
        header_bytes,
        reserved,
        data_records,
        record_duration,
        signals,
    })
}

/// Parses a whole EDF file into physical units. Annotation signals are skipped.
pub fn parse_edf(bytes: &[u8]) -> Result<Recording, EdfError> {
    let header = parse_edf_header(bytes)?;
    let record_bytes = header.record_bytes();
    let data = &bytes[header.header_bytes..];
    let records = if header.data_records == -1 && data.len().is_multiple_of(record_bytes) {
        data.len() / record_bytes
    } else if header.data_records >= 0 && data.len() == header.data_records as usize * record_bytes {
        header.data_records as usize
    } else {
        return Err(EdfError::RecordCountMismatch { declared: header.data_records, data_bytes: data.len(), record_bytes });
    };

    let signal_ids: Vec<usize> = (0..header.signals.len()).filter(|&i| !header.signals[i].is_annotation()).collect();
    let Some(&first) = signal_ids.first() else { return Err(EdfError::NoSignals) };
    let spr = header.signals[first].samples_per_record;
    if let Some(&other) = signal_ids.iter().find(|&&i| header.signals[i].samples_per_record != spr) {
        return Err(EdfError::MixedRates(spr, header.signals[other].samples_per_record));
    }

    let mut rows: Vec<Vec<f64>> = signal_ids.iter().map(|_| Vec::with_capacity(records * spr)).collect();
    for r in 0..records {
        let mut offset = r * record_bytes;
        let mut row = 0;
        for (i, sig) in header.signals.iter().enumerate() {
            let n = sig.samples_per_record;
            if sig.is_annotation() {
                offset += 2 * n;
                continue;
            }
            debug_assert_eq!(signal_ids[row], i);
            let chunk = &data[offset..offset + 2 * n];
            rows[row].extend(chunk.chunks_exact(2).map(|b| sig.to_physical(i16::from_le_bytes([b[0], b[1]]))));
            offset += 2 * n;
            row += 1;
        }
    }

    let names = signal_ids.iter().map(|&i| header.signals[i].label.clone()).collect();
    let rate = spr as f64 / header.record_duration;
    Recording::new(names, rate, rows).map_err(|e| EdfError::Unwritable(e.to_string()))
}

/// Settings for [`write_edf`].
#[derive(Debug, Clone, PartialEq)]
pub struct EdfWriteOptions {
    pub patient: String,
    pub recording: String,
    pub start_date: String,
    pub start_time: String,
    pub record_duration: f64,
    pub physical_dimension: String,
    pub digital_min: i16,
    pub digital_max: i16,
}

impl Default for EdfWriteOptions {
    fn default() -> Self {
        Self {
            patient: "X X X X".into(),
            recording: "Startdate X X X X".into(),
            start_date: "01.01.00".into(),
            start_time: "00.00.00".into(),
            record_duration: 1.0,
            physical_dimension: "uV".into(),
            digital_min: i16::MIN,
            digital_max: i16::MAX,
        }
    }
}

fn put(out: &mut Vec<u8>, text: &str, width: usize) -> Result<(), EdfError> {
    if text.len() > width || !text.is_ascii() {
        return Err(EdfError::Unwritable(format!("{text:?} does not fit an ASCII field of {width} bytes")));
    }
    out.extend_from_slice(text.as_bytes());
    out.extend(std::iter::repeat_n(b' ', width - text.len()));
    Ok(())
}

/// Shortest decimal rendering of `v` within `width` characters.
fn fit_number(v: f64, width: usize) -> Result<String, EdfError> {
    let plain = format!("{v}");
    if plain.len() <= width {
        return Ok(plain);
    }
    for prec in (0..width).rev() {
        let s = format!("{v:.prec$}");
        if s.len() <= width {
            return Ok(s);
        }
    }
    Err(EdfError::Unwritable(format!("{v} does not fit in {width} characters")))
}

/// Serializes `recording` as EDF, quantizing each channel over its own
/// `[min, max]` range. The sample count must fill whole records.
pub fn write_edf(recording: &Recording, options: &EdfWriteOptions) -> Result<Vec<u8>, EdfError> {
    let ns = recording.channel_count();
    if ns == 0 {
        return Err(EdfError::NoSignals);
    }
    let spr_f = recording.rate() * options.record_duration;
    let spr = spr_f.round() as usize;
    if spr == 0 || (spr_f - spr as f64).abs() > 1e-9 {
        return Err(EdfError::Unwritable(format!(
            "rate {} Hz with {} s records is not a whole number of samples",
            recording.rate(),
            options.record_duration
        )));
    }
    let n = recording.sample_count();
    if !n.is_multiple_of(spr) {
        return Err(EdfError::Unwritable(format!("{n} samples do not fill whole records of {spr}")));
    }
    let records = n / spr;
    let (dmin, dmax) = (options.digital_min as i32, options.digital_max as i32);
    if dmin >= dmax {
        return Err(EdfError::Unwritable("digital min must be below digital max".into()));
    }

    let mut ranges = Vec::with_capacity(ns);
    for row in recording.samples() {
        let lo = row.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let (lo, hi) = if row.is_empty() { (0.0, 1.0) } else { (lo, hi) };
        // integral bounds always fit the 8-character header fields
        let lo_v = lo.floor();
        let mut hi_v = hi.ceil();
        if hi_v <= lo_v {
            hi_v = lo_v + 1.0;
        }
        if fit_number(lo_v, 8)?.parse::<f64>().ok() != Some(lo_v) || fit_number(hi_v, 8)?.parse::<f64>().ok() != Some(hi_v) {
            return Err(EdfError::Unwritable(format!("physical range [{lo}, {hi}] does not fit the header")));
        }
        ranges.push((lo_v, hi_v));
    }

    let mut out = Vec::with_capacity(FIXED_HEADER * (ns + 1) + n * ns * 2);
    put(&mut out, "0", 8)?;
    put(&mut out, &options.patient, 80)?;
    put(&mut out, &options.recording, 80)?;
    put(&mut out, &options.start_date, 8)?;
    put(&mut out, &options.start_time, 8)?;
    put(&mut out, &(FIXED_HEADER * (ns + 1)).to_string(), 8)?;
    put(&mut out, "", 44)?;
    put(&mut out, &records.to_string(), 8)?;
    put(&mut out, &fit_number(options.record_duration, 8)?, 8)?;
    put(&mut out, &ns.to_string(), 4)?;
    for name in recording.channel_names() {
        put(&mut out, name, 16)?;
    }
    for _ in 0..ns {
        put(&mut out, "", 80)?;
    }
    for _ in 0..ns {
        put(&mut out, &options.physical_dimension, 8)?;
    }
    for (lo, _) in &ranges {
        put(&mut out, &fit_number(*lo, 8)?, 8)?;
    }
    for (_, hi) in &ranges {
        put(&mut out, &fit_number(*hi, 8)?, 8)?;
    }
    for _ in 0..ns {
        put(&mut out, &dmin.to_string(), 8)?;
    }
    for _ in 0..ns {
        put(&mut out, &dmax.to_string(), 8)?;
    }
    for _ in 0..ns {
        put(&mut out, "", 80)?;
    }
    for _ in 0..ns {
        put(&mut out, &spr.to_string(), 8)?;
    }
    for _ in 0..ns {
        put(&mut out, "", 32)?;
    }
    for r in 0..records {
        for (row, (lo, hi)) in recording.samples().iter().zip(&ranges) {
            let gain = (hi - lo) / (dmax - dmin) as f64;
            for &v in &row[r * spr..(r + 1) * spr] {
                let d = ((v - lo) / gain + dmin as f64).round().clamp(dmin as f64, dmax as f64) as i16;
                out.extend_from_slice(&d.to_le_bytes());
            }
        }
    }
    Ok(out)
}

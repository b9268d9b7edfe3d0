//! Comma-separated matrices: a header row of channel names, then one row
//! per time step.

use std::io::{self, Write};

use super::{IngestError, Recording};

/// Parses `text` into a recording sampled at `rate` Hz.
pub fn parse_csv(text: &str, rate: f64) -> Result<Recording, IngestError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(text.as_bytes());
    let names: Vec<String> = reader
        .headers()
        .map_err(|e| IngestError::Csv { line: 1, message: e.to_string() })?
        .iter()
        .map(str::to_string)
        .collect();
    if names.is_empty() || names.iter().all(String::is_empty) {
        return Err(IngestError::Csv { line: 1, message: "missing header row".into() });
    }
    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); names.len()];
    for record in reader.records() {
        let record = record.map_err(|e| IngestError::Csv {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.len() == 1 && record.get(0) == Some("") {
            continue;
        }
        if record.len() != names.len() {
            return Err(IngestError::Csv {
                line,
                message: format!("expected {} fields, found {}", names.len(), record.len()),
            });
        }
        for (col, cell) in columns.iter_mut().zip(record.iter()) {
            let v: f64 = cell
                .parse()
                .map_err(|_| IngestError::Csv { line, message: format!("not a number: {cell:?}") })?;
            if !v.is_finite() {
                return Err(IngestError::Csv { line, message: format!("not a finite number: {cell:?}") });
            }
            col.push(v);
        }
    }
    if columns[0].is_empty() {
        return Err(IngestError::EmptyCsv);
    }
    Recording::new(names, rate, columns)
}

/// Writes `recording` in the layout `parse_csv` reads. Values use the
/// shortest representation that round-trips exactly.
pub fn write_csv<W: Write>(recording: &Recording, out: &mut W) -> io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(recording.channel_names())?;
    for i in 0..recording.sample_count() {
        w.write_record(recording.samples().iter().map(|row| row[i].to_string()))?;
    }
    w.flush()
}

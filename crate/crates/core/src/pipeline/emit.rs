//! Trajectory output as CSV or JSON lines.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use super::{Bands, PipelineError, TrajectoryPoint};
use crate::ingest::SeizureAnnotations;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    JsonLines,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Self::Csv),
            "jsonl" | "jsonlines" | "json" => Ok(Self::JsonLines),
            _ => Err(format!("unknown format {s:?} (expected csv or jsonl)")),
        }
    }
}

const BASE_COLUMNS: [&str; 8] = ["t", "b0", "b1", "pe_total", "pe_dim0", "pe_dim1", "edges", "triangles"];

/// Renders `v` with 12 significant digits, like C's `%.12g`.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return format!("{v}");
    }
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..12).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{}{:02}", if exp < 0 { '-' } else { '+' }, exp.abs());
    }
    let decimals = (11 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn header(bands: Option<&Bands>, annotations: Option<&SeizureAnnotations>) -> Vec<String> {
    let mut cols: Vec<String> = BASE_COLUMNS.iter().map(|s| s.to_string()).collect();
    if let Some(b) = bands {
        cols.push(format!("mean_{}", b.field));
        cols.push(format!("std_{}", b.field));
    }
    if annotations.is_some() {
        cols.push("in_seizure".into());
    }
    cols
}

fn row(
    i: usize,
    p: &TrajectoryPoint,
    bands: Option<&Bands>,
    annotations: Option<&SeizureAnnotations>,
    missing: &str,
) -> Vec<String> {
    let mut cells = vec![
        format_number(p.t),
        p.b0.to_string(),
        p.b1.to_string(),
        format_number(p.pe_total),
        format_number(p.pe_dim0),
        format_number(p.pe_dim1),
        p.edges.to_string(),
        p.triangles.to_string(),
    ];
    if let Some(b) = bands {
        match b.bands.get(i).copied().flatten() {
            Some(band) => {
                cells.push(format_number(band.mean));
                cells.push(format_number(band.std));
            }
            None => {
                cells.push(missing.into());
                cells.push(missing.into());
            }
        }
    }
    if let Some(a) = annotations {
        cells.push(if a.contains(p.t) { "1" } else { "0" }.into());
    }
    cells
}

/// Writes the trajectory, with optional band columns and an `in_seizure`
/// flag when annotations are supplied.
pub fn emit<W: Write>(
    trajectory: &[TrajectoryPoint],
    bands: Option<&Bands>,
    annotations: Option<&SeizureAnnotations>,
    format: OutputFormat,
    out: &mut W,
) -> io::Result<()> {
    let cols = header(bands, annotations);
    match format {
        OutputFormat::Csv => {
            writeln!(out, "{}", cols.join(","))?;
            for (i, p) in trajectory.iter().enumerate() {
                writeln!(out, "{}", row(i, p, bands, annotations, "").join(","))?;
            }
        }
        OutputFormat::JsonLines => {
            for (i, p) in trajectory.iter().enumerate() {
                let cells = row(i, p, bands, annotations, "null");
                let body: Vec<String> = cols.iter().zip(cells).map(|(k, v)| format!("\"{k}\":{v}")).collect();
                writeln!(out, "{{{}}}", body.join(","))?;
            }
        }
    }
    out.flush()
}

pub fn emit_to_path(
    trajectory: &[TrajectoryPoint],
    bands: Option<&Bands>,
    annotations: Option<&SeizureAnnotations>,
    format: OutputFormat,
    path: &Path,
) -> Result<(), PipelineError> {
    let io_err = |source| PipelineError::Io { path: path.display().to_string(), source };
    let file = File::create(path).map_err(io_err)?;
    let mut w = BufWriter::new(file);
    emit(trajectory, bands, annotations, format, &mut w).map_err(io_err)
}

/// Reads back the base columns of an emitted CSV trajectory.
pub fn read_trajectory_csv(text: &str) -> Result<Vec<TrajectoryPoint>, PipelineError> {
    let mut lines = text.lines().enumerate();
    let Some((_, head)) = lines.next() else {
        return Err(PipelineError::Parse { line: 1, message: "missing header".into() });
    };
    let cols: Vec<&str> = head.split(',').collect();
    if cols.len() < BASE_COLUMNS.len() || cols[..BASE_COLUMNS.len()] != BASE_COLUMNS {
        return Err(PipelineError::Parse { line: 1, message: format!("unexpected header {head:?}") });
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let err = |message: String| PipelineError::Parse { line: i + 1, message };
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != cols.len() {
            return Err(err(format!("expected {} fields, found {}", cols.len(), cells.len())));
        }
        let real = |k: usize| cells[k].parse::<f64>().map_err(|_| err(format!("bad number {:?}", cells[k])));
        let count = |k: usize| cells[k].parse::<usize>().map_err(|_| err(format!("bad count {:?}", cells[k])));
        out.push(TrajectoryPoint {
            t: real(0)?,
            b0: count(1)?,
            b1: count(2)?,
            pe_total: real(3)?,
            pe_dim0: real(4)?,
            pe_dim1: real(5)?,
            edges: count(6)?,
            triangles: count(7)?,
        });
    }
    Ok(out)
}

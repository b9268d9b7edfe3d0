//! Seizure intervals, one `start_seconds,end_seconds` pair per line. Blank
//! lines and lines starting with `#` are ignored.

use serde::Serialize;

use super::IngestError;

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SeizureAnnotations {
    intervals: Vec<(f64, f64)>,
}

impl SeizureAnnotations {
    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    /// Whether `t` falls in some `[start, end]`.
    pub fn contains(&self, t: f64) -> bool {
        self.intervals.iter().any(|&(s, e)| s <= t && t <= e)
    }
}

pub fn load_annotations(text: &str) -> Result<SeizureAnnotations, IngestError> {
    let mut intervals = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| IngestError::Annotation { line: i + 1, message };
        let (a, b) = line.split_once(',').ok_or_else(|| err(format!("expected start,end: {line:?}")))?;
        let start: f64 = a.trim().parse().map_err(|_| err(format!("bad start {a:?}")))?;
        let end: f64 = b.trim().parse().map_err(|_| err(format!("bad end {b:?}")))?;
        if !(start.is_finite() && end.is_finite()) || start >= end {
            return Err(err(format!("start {start} must be before end {end}")));
        }
        intervals.push((start, end));
    }
    intervals.sort_by(|x, y| x.0.total_cmp(&y.0));
    if let Some(w) = intervals.windows(2).find(|w| w[1].0 < w[0].1) {
        return Err(IngestError::Annotation {
            line: 0,
            message: format!("intervals [{}, {}] and [{}, {}] overlap", w[0].0, w[0].1, w[1].0, w[1].1),
        });
    }
    Ok(SeizureAnnotations { intervals })
}

//! Trailing mean / standard deviation bands over a trajectory.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::{PipelineError, TrajectoryPoint};

/// A numeric column of the trajectory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    B0,
    B1,
    PeTotal,
    PeDim0,
    PeDim1,
    Edges,
    Triangles,
}

impl Field {
    pub const ALL: [Field; 7] =
        [Field::B0, Field::B1, Field::PeTotal, Field::PeDim0, Field::PeDim1, Field::Edges, Field::Triangles];

    pub fn name(self) -> &'static str {
        match self {
            Field::B0 => "b0",
            Field::B1 => "b1",
            Field::PeTotal => "pe_total",
            Field::PeDim0 => "pe_dim0",
            Field::PeDim1 => "pe_dim1",
            Field::Edges => "edges",
            Field::Triangles => "triangles",
        }
    }

    pub fn value(self, p: &TrajectoryPoint) -> f64 {
        match self {
            Field::B0 => p.b0 as f64,
            Field::B1 => p.b1 as f64,
            Field::PeTotal => p.pe_total,
            Field::PeDim0 => p.pe_dim0,
            Field::PeDim1 => p.pe_dim1,
            Field::Edges => p.edges as f64,
            Field::Triangles => p.triangles as f64,
        }
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Field {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Field::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown field {s:?} (expected one of b0, b1, pe_total, pe_dim0, pe_dim1, edges, triangles)"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Band {
    pub mean: f64,
    pub std: f64,
}

/// One optional band per trajectory point; `None` before the window fills.
#[derive(Debug, Clone, PartialEq)]
pub struct Bands {
    pub field: Field,
    pub h: usize,
    pub bands: Vec<Option<Band>>,
}

/// Mean and sample standard deviation (`n - 1` denominator) of the last `h`
/// values, for every point at position `h` or later.
pub fn rolling_bands(trajectory: &[TrajectoryPoint], field: Field, h: usize) -> Result<Bands, PipelineError> {
    if h < 2 || h > trajectory.len() {
        return Err(PipelineError::BandWindow { h, len: trajectory.len() });
    }
    let values: Vec<f64> = trajectory.iter().map(|p| field.value(p)).collect();
    let bands = (0..values.len())
        .map(|i| {
            if i < h {
                return None;
            }
            let w = &values[i + 1 - h..=i];
            let mean = w.iter().sum::<f64>() / h as f64;
            let var = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (h - 1) as f64;
            Some(Band { mean, std: var.sqrt() })
        })
        .collect();
    Ok(Bands { field, h, bands })
}

//! Weight-induced filtrations, persistence diagrams and derived invariants.

use std::cmp::Ordering;
use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::complex::{Simplex, WeightedComplex};

/// Death value used for essential classes when measuring lifetimes.
pub const ESSENTIAL_DEATH: f64 = 1.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PersistenceError {
    #[error("negative weight {weight} on simplex {simplex}")]
    NegativeWeight { simplex: Simplex, weight: f64 },
    #[error("non-finite birth on simplex {0}")]
    NonFiniteBirth(Simplex),
    #[error("face {face} of {simplex} is missing from the filtration")]
    MissingFace { face: Simplex, simplex: Simplex },
    #[error("face {face} is born at {face_birth}, after its coface {simplex} at {birth}")]
    NonMonotone { face: Simplex, face_birth: f64, simplex: Simplex, birth: f64 },
    #[error("simplex {0} appears twice in the filtration")]
    Duplicate(Simplex),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiltrationEntry {
    pub simplex: Simplex,
    pub birth: f64,
}

/// Simplices ordered by `(birth, dimension, vertices)`; every face is present
/// and born no later than its cofaces.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Filtration {
    entries: Vec<FiltrationEntry>,
}

fn entry_order(a: &FiltrationEntry, b: &FiltrationEntry) -> Ordering {
    a.birth
        .total_cmp(&b.birth)
        .then(a.simplex.dim().cmp(&b.simplex.dim()))
        .then_with(|| a.simplex.cmp(&b.simplex))
}

impl Filtration {
    /// Sorts and validates arbitrary `(simplex, birth)` pairs.
    pub fn new(entries: impl IntoIterator<Item = (Simplex, f64)>) -> Result<Self, PersistenceError> {
        let mut entries: Vec<FiltrationEntry> =
            entries.into_iter().map(|(simplex, birth)| FiltrationEntry { simplex, birth }).collect();
        entries.sort_by(entry_order);
        let mut birth_of: HashMap<&Simplex, f64> = HashMap::with_capacity(entries.len());
        for e in &entries {
            if !e.birth.is_finite() {
                return Err(PersistenceError::NonFiniteBirth(e.simplex.clone()));
            }
            if birth_of.insert(&e.simplex, e.birth).is_some() {
                return Err(PersistenceError::Duplicate(e.simplex.clone()));
            }
        }
        for e in &entries {
            for face in e.simplex.boundary() {
                match birth_of.get(&face) {
                    None => return Err(PersistenceError::MissingFace { face, simplex: e.simplex.clone() }),
                    Some(&fb) if fb > e.birth => {
                        return Err(PersistenceError::NonMonotone {
                            face,
                            face_birth: fb,
                            simplex: e.simplex.clone(),
                            birth: e.birth,
                        })
                    }
                    _ => {}
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn entries(&self) -> &[FiltrationEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn birth(&self, s: &Simplex) -> Option<f64> {
        self.entries.iter().find(|e| &e.simplex == s).map(|e| e.birth)
    }
}

/// Birth times induced by selection weights.
///
/// Vertices are born at 0. A simplex with positive weight `w` is born at
/// `1 - w / W`, `W` being the total weight of all positively weighted
/// simplices of dimension at least one. Zero-weight faces start at 1. Faces
/// born after one of their cofaces are then pulled back to that coface's
/// birth.
pub fn births_from_weights(complex: &WeightedComplex) -> Result<Filtration, PersistenceError> {
    let mut total = 0.0;
    for (s, w) in complex.iter() {
        if w < 0.0 || w.is_nan() {
            return Err(PersistenceError::NegativeWeight { simplex: s.clone(), weight: w });
        }
        if s.dim() > 0 && w > 0.0 {
            total += w;
        }
    }
    let mut births: HashMap<Simplex, f64> = complex
        .iter()
        .map(|(s, w)| {
            let b = if s.dim() == 0 {
                0.0
            } else if w > 0.0 {
                (1.0 - w / total).clamp(0.0, 1.0)
            } else {
                1.0
            };
            (s.clone(), b)
        })
        .collect();
    // cofaces first, so a pulled-back birth keeps propagating downward
    let mut by_dim: Vec<&Simplex> = complex.iter().map(|(s, _)| s).collect();
    by_dim.sort_by(|a, b| b.dim().cmp(&a.dim()).then_with(|| a.cmp(b)));
    for s in by_dim {
        let b = births[s];
        for face in s.proper_faces() {
            let fb = births.get_mut(&face).expect("complex is closed");
            if *fb > b {
                *fb = b;
            }
        }
    }
    Filtration::new(births)
}

/// One persistence interval. `death == None` marks an essential class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bar {
    pub dim: usize,
    pub birth: f64,
    pub death: Option<f64>,
}

impl Bar {
    pub fn is_essential(&self) -> bool {
        self.death.is_none()
    }

    /// Lifetime, with essential classes dying at [`ESSENTIAL_DEATH`].
    pub fn lifetime(&self) -> f64 {
        self.death.unwrap_or(ESSENTIAL_DEATH) - self.birth
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct PersistenceDiagram {
    pub bars: Vec<Bar>,
}

impl PersistenceDiagram {
    pub fn essential_count(&self, dim: usize) -> usize {
        self.bars.iter().filter(|b| b.dim == dim && b.is_essential()).count()
    }

    pub fn paired_count(&self) -> usize {
        self.bars.iter().filter(|b| !b.is_essential()).count()
    }

    pub fn in_dim(&self, dim: usize) -> impl Iterator<Item = &Bar> {
        self.bars.iter().filter(move |b| b.dim == dim)
    }
}

/// Reduces a Z/2 boundary matrix column by column, left to right. Columns are
/// sorted face indices; returns the reduced columns.
fn reduce_columns(mut columns: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let mut owner_of_low: HashMap<usize, usize> = HashMap::new();
    for j in 0..columns.len() {
        while let Some(&low) = columns[j].last() {
            match owner_of_low.get(&low) {
                Some(&k) => {
                    let merged = symmetric_difference(&columns[j], &columns[k]);
                    columns[j] = merged;
                }
                None => {
                    owner_of_low.insert(low, j);
                    break;
                }
            }
        }
    }
    columns
}

fn symmetric_difference(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Standard persistence pairing over the two-element field.
pub fn reduce_boundary(filtration: &Filtration) -> Result<PersistenceDiagram, PersistenceError> {
    let entries = &filtration.entries;
    let index: HashMap<&Simplex, usize> = entries.iter().enumerate().map(|(i, e)| (&e.simplex, i)).collect();
    let mut columns = Vec::with_capacity(entries.len());
    for (j, e) in entries.iter().enumerate() {
        let mut col = Vec::with_capacity(e.simplex.dim() + 1);
        for face in e.simplex.boundary() {
            match index.get(&face) {
                Some(&i) if i < j => col.push(i),
                Some(&i) => {
                    return Err(PersistenceError::NonMonotone {
                        face,
                        face_birth: entries[i].birth,
                        simplex: e.simplex.clone(),
                        birth: e.birth,
                    })
                }
                None => return Err(PersistenceError::MissingFace { face, simplex: e.simplex.clone() }),
            }
        }
        col.sort_unstable();
        columns.push(col);
    }
    let reduced = reduce_columns(columns);

    let mut paired = vec![false; entries.len()];
    let mut bars = Vec::new();
    for (j, col) in reduced.iter().enumerate() {
        if let Some(&i) = col.last() {
            paired[i] = true;
            paired[j] = true;
            bars.push(Bar { dim: entries[i].simplex.dim(), birth: entries[i].birth, death: Some(entries[j].birth) });
        }
    }
    for (j, col) in reduced.iter().enumerate() {
        if col.is_empty() && !paired[j] {
            bars.push(Bar { dim: entries[j].simplex.dim(), birth: entries[j].birth, death: None });
        }
    }
    bars.sort_by(|a, b| {
        a.dim
            .cmp(&b.dim)
            .then(a.birth.total_cmp(&b.birth))
            .then(a.death.unwrap_or(f64::INFINITY).total_cmp(&b.death.unwrap_or(f64::INFINITY)))
    });
    Ok(PersistenceDiagram { bars })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BettiVector {
    pub b0: usize,
    pub b1: usize,
}

/// `b0` from the connected components of the 1-skeleton, `b1` from the rank
/// of the edge-triangle boundary operator.
pub fn betti(complex: &WeightedComplex) -> BettiVector {
    let vertices: Vec<usize> = complex.iter().filter(|(s, _)| s.dim() == 0).map(|(s, _)| s.vertices()[0]).collect();
    let mut parent: HashMap<usize, usize> = vertices.iter().map(|&v| (v, v)).collect();
    fn find(parent: &mut HashMap<usize, usize>, v: usize) -> usize {
        let mut root = v;
        while parent[&root] != root {
            root = parent[&root];
        }
        let mut cur = v;
        while parent[&cur] != root {
            let next = parent[&cur];
            parent.insert(cur, root);
            cur = next;
        }
        root
    }
    let edges: Vec<&Simplex> = complex.iter().filter(|(s, _)| s.dim() == 1).map(|(s, _)| s).collect();
    let mut b0 = vertices.len();
    for e in &edges {
        let (a, b) = (find(&mut parent, e.vertices()[0]), find(&mut parent, e.vertices()[1]));
        if a != b {
            parent.insert(a, b);
            b0 -= 1;
        }
    }
    let edge_index: HashMap<&Simplex, usize> = edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
    let columns: Vec<Vec<usize>> = complex
        .iter()
        .filter(|(s, _)| s.dim() == 2)
        .map(|(s, _)| {
            let mut c: Vec<usize> = s.boundary().iter().map(|f| edge_index[f]).collect();
            c.sort_unstable();
            c
        })
        .collect();
    let rank2 = reduce_columns(columns).iter().filter(|c| !c.is_empty()).count();
    let cycles = edges.len() - (vertices.len() - b0);
    BettiVector { b0, b1: cycles - rank2 }
}

/// Shannon entropy (natural log) of the normalized lifetimes of `bars`.
/// Zero-length bars are ignored; fewer than two survivors give 0.
pub fn entropy_of<'a>(bars: impl IntoIterator<Item = &'a Bar>) -> f64 {
    let lifetimes: Vec<f64> = bars.into_iter().map(Bar::lifetime).filter(|&l| l > 0.0).collect();
    if lifetimes.len() <= 1 {
        return 0.0;
    }
    let total: f64 = lifetimes.iter().sum();
    -lifetimes.iter().map(|l| l / total).map(|p| p * p.ln()).sum::<f64>()
}

/// Entropy over the dimension-0 and dimension-1 bars together.
pub fn persistence_entropy(diagram: &PersistenceDiagram) -> f64 {
    entropy_of(diagram.bars.iter().filter(|b| b.dim <= 1))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct EntropySummary {
    pub total: f64,
    pub dim0: f64,
    pub dim1: f64,
}

impl EntropySummary {
    pub fn of(diagram: &PersistenceDiagram) -> Self {
        Self {
            total: persistence_entropy(diagram),
            dim0: entropy_of(diagram.in_dim(0)),
            dim1: entropy_of(diagram.in_dim(1)),
        }
    }
}

/// Everything derived from one complex.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComplexSummary {
    pub filtration: Filtration,
    pub diagram: PersistenceDiagram,
    pub betti: BettiVector,
    pub entropy: EntropySummary,
}

/// Filtration, diagram, Betti numbers and entropies of `complex`. A complex
/// with no positively weighted simplex has zero entropy.
pub fn summarize(complex: &WeightedComplex) -> Result<ComplexSummary, PersistenceError> {
    let filtration = births_from_weights(complex)?;
    let diagram = reduce_boundary(&filtration)?;
    let betti = BettiVector { b0: diagram.essential_count(0), b1: diagram.essential_count(1) };
    let degenerate = !complex.iter().any(|(s, w)| s.dim() > 0 && w > 0.0);
    let entropy = if degenerate { EntropySummary::default() } else { EntropySummary::of(&diagram) };
    Ok(ComplexSummary { filtration, diagram, betti, entropy })
}

//! Signature-driven neighborhood selection over channels.
//!
//! Each channel is regressed, through its signature, on the signatures of the
//! other channels (edges) and of pairs of other channels (triangles). Selected
//! predictors become simplices of a weighted abstract simplicial complex.
//! Channels are 0-based throughout.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::lasso::{self, DesignMatrix, LassoError};
use crate::signature::{self, Path, SignatureError};

/// Default R² gate for accepting a regression's selections.
pub const DEFAULT_R2_THRESHOLD: f64 = 0.67;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ComplexError {
    #[error("simplex must be non-empty")]
    EmptySimplex,
    #[error("simplex has repeated vertex {0}")]
    RepeatedVertex(usize),
    #[error("vertex {vertex} out of range for {count} channels")]
    VertexOutOfRange { vertex: usize, count: usize },
    #[error("weight must be finite and >= 0, got {0}")]
    InvalidWeight(f64),
    #[error("max_dim must be 1 or 2, got {0}")]
    InvalidMaxDim(usize),
    #[error("simplex {0} is not in the complex")]
    MissingSimplex(Simplex),
    #[error("channel windows disagree: {0}")]
    WindowMismatch(String),
    #[error(transparent)]
    Signature(#[from] SignatureError),
}

/// Sorted set of distinct vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(transparent)]
pub struct Simplex(Vec<usize>);

impl Simplex {
    pub fn new(mut vertices: Vec<usize>) -> Result<Self, ComplexError> {
        if vertices.is_empty() {
            return Err(ComplexError::EmptySimplex);
        }
        vertices.sort_unstable();
        if let Some(w) = vertices.windows(2).find(|w| w[0] == w[1]) {
            return Err(ComplexError::RepeatedVertex(w[0]));
        }
        Ok(Self(vertices))
    }

    pub fn vertex(v: usize) -> Self {
        Self(vec![v])
    }

    pub fn edge(a: usize, b: usize) -> Self {
        Self::new(vec![a, b]).expect("edge endpoints must differ")
    }

    pub fn triangle(a: usize, b: usize, c: usize) -> Self {
        Self::new(vec![a, b, c]).expect("triangle vertices must differ")
    }

    pub fn vertices(&self) -> &[usize] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len() - 1
    }

    /// Codimension-one faces, in the order obtained by dropping each vertex.
    pub fn boundary(&self) -> Vec<Simplex> {
        if self.0.len() == 1 {
            return Vec::new();
        }
        (0..self.0.len())
            .map(|skip| Simplex(self.0.iter().enumerate().filter(|(i, _)| *i != skip).map(|(_, &v)| v).collect()))
            .collect()
    }

    /// All non-empty proper subsets.
    pub fn proper_faces(&self) -> Vec<Simplex> {
        let n = self.0.len();
        (1u32..(1 << n) - 1)
            .map(|mask| Simplex((0..n).filter(|i| mask & (1 << i) != 0).map(|i| self.0[i]).collect()))
            .collect()
    }

    pub fn is_subset_of(&self, other: &Simplex) -> bool {
        self.0.iter().all(|v| other.0.binary_search(v).is_ok())
    }

    pub fn is_disjoint(&self, other: &Simplex) -> bool {
        self.0.iter().all(|v| other.0.binary_search(v).is_err())
    }

    pub fn union(&self, other: &Simplex) -> Simplex {
        let set: BTreeSet<usize> = self.0.iter().chain(&other.0).copied().collect();
        Simplex(set.into_iter().collect())
    }

    pub fn relabel(&self, map: impl Fn(usize) -> usize) -> Simplex {
        Simplex::new(self.0.iter().map(|&v| map(v)).collect()).expect("relabeling must be injective")
    }
}

impl fmt::Display for Simplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, "}}")
    }
}

/// Closed family of simplices over `vertex_count` channels, each with a
/// nonnegative selection weight. Vertices are always present with weight 0.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedComplex {
    simplices: BTreeMap<Simplex, f64>,
    vertex_count: usize,
}

impl WeightedComplex {
    /// Just the vertices.
    pub fn new(vertex_count: usize) -> Self {
        let simplices = (0..vertex_count).map(|v| (Simplex::vertex(v), 0.0)).collect();
        Self { simplices, vertex_count }
    }

    pub fn from_weighted(
        vertex_count: usize,
        entries: impl IntoIterator<Item = (Simplex, f64)>,
    ) -> Result<Self, ComplexError> {
        let mut c = Self::new(vertex_count);
        for (s, w) in entries {
            c.insert(s, w)?;
        }
        Ok(c)
    }

    /// Adds `simplex` with `weight`, keeping the larger weight if it is already
    /// present, and adds any missing faces with weight 0.
    pub fn insert(&mut self, simplex: Simplex, weight: f64) -> Result<(), ComplexError> {
        if !(weight.is_finite() && weight >= 0.0) {
            return Err(ComplexError::InvalidWeight(weight));
        }
        if let Some(&v) = simplex.0.iter().find(|&&v| v >= self.vertex_count) {
            return Err(ComplexError::VertexOutOfRange { vertex: v, count: self.vertex_count });
        }
        if simplex.dim() == 0 {
            return Ok(());
        }
        for face in simplex.proper_faces() {
            self.simplices.entry(face).or_insert(0.0);
        }
        let slot = self.simplices.entry(simplex).or_insert(0.0);
        *slot = slot.max(weight);
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn contains(&self, s: &Simplex) -> bool {
        self.simplices.contains_key(s)
    }

    pub fn weight(&self, s: &Simplex) -> Option<f64> {
        self.simplices.get(s).copied()
    }

    /// Simplices in sorted order with their weights.
    pub fn iter(&self) -> impl Iterator<Item = (&Simplex, f64)> {
        self.simplices.iter().map(|(s, &w)| (s, w))
    }

    pub fn len(&self) -> usize {
        self.simplices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.simplices.is_empty()
    }

    pub fn count_dim(&self, dim: usize) -> usize {
        self.simplices.keys().filter(|s| s.dim() == dim).count()
    }

    pub fn max_dim(&self) -> usize {
        self.simplices.keys().map(Simplex::dim).max().unwrap_or(0)
    }

    /// Every face of every stored simplex is stored.
    pub fn is_closed(&self) -> bool {
        self.simplices.keys().all(|s| s.proper_faces().iter().all(|f| self.simplices.contains_key(f)))
    }
}

/// Faces `tau` disjoint from `sigma` such that `sigma ∪ tau` is in the complex.
pub fn link(complex: &WeightedComplex, sigma: &Simplex) -> Result<BTreeSet<Simplex>, ComplexError> {
    if !complex.contains(sigma) {
        return Err(ComplexError::MissingSimplex(sigma.clone()));
    }
    Ok(complex
        .simplices
        .keys()
        .filter(|tau| tau.is_disjoint(sigma) && complex.contains(&tau.union(sigma)))
        .cloned()
        .collect())
}

/// Samples of one channel over the window `[start, end]`, uniformly spaced.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelWindow {
    pub channel: usize,
    pub start: f64,
    pub end: f64,
    pub samples: Vec<f64>,
}

impl ChannelWindow {
    pub fn times(&self) -> Vec<f64> {
        let n = self.samples.len();
        let step = (self.end - self.start) / (n.max(2) - 1) as f64;
        (0..n).map(|k| self.start + k as f64 * step).collect()
    }
}

/// Predictor of a regression: a single channel or a pair of channels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Predictor {
    Channel(usize),
    Pair(usize, usize),
}

/// One selected predictor of one target channel's regression.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub target: usize,
    pub simplex: Simplex,
    pub weight: f64,
}

/// Selections of one stage plus the channels whose regression failed.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StageOutcome {
    pub selections: Vec<Selection>,
    /// Target channels that were gated out (R² at or below threshold).
    pub gated: Vec<usize>,
    pub failed: Vec<(usize, LassoError)>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexParams {
    pub deg: usize,
    pub lambda1: f64,
    pub lambda2: f64,
    pub r2_threshold: f64,
    pub max_dim: usize,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ComplexParams {
    fn default() -> Self {
        Self {
            deg: 3,
            lambda1: 1.0,
            lambda2: 1.0,
            r2_threshold: DEFAULT_R2_THRESHOLD,
            max_dim: 2,
            tol: lasso::DEFAULT_TOL,
            max_iter: lasso::DEFAULT_MAX_ITER,
        }
    }
}

/// Flattened signatures for one window, computed once and shared by every
/// regression of both stages.
#[derive(Debug, Clone)]
pub struct SignatureCache {
    channels: Vec<usize>,
    /// `(t, x)` features per channel; `None` for channels constant over the window.
    single: Vec<Option<Vec<f64>>>,
    /// `(t, x, x)` features per channel.
    lifted: Vec<Option<Vec<f64>>>,
    /// `(t, x_a, x_b)` features for every pair `a < b` of non-constant channels.
    pairs: BTreeMap<(usize, usize), Vec<f64>>,
}

impl SignatureCache {
    pub fn build(windows: &[ChannelWindow], deg: usize, with_pairs: bool) -> Result<Self, ComplexError> {
        check_windows(windows)?;
        let channels: Vec<usize> = windows.iter().map(|w| w.channel).collect();
        let Some(first) = windows.first() else {
            return Ok(Self { channels, single: vec![], lifted: vec![], pairs: BTreeMap::new() });
        };
        let times = first.times();
        let mut single = Vec::with_capacity(windows.len());
        let mut lifted = Vec::with_capacity(windows.len());
        for w in windows {
            if is_constant(&w.samples) {
                single.push(None);
                lifted.push(None);
                continue;
            }
            let path = feature_path(&times, &[&w.samples])?;
            single.push(Some(signature::path_signature(&path, deg)?.flatten()));
            if with_pairs {
                let lift = signature::lift_path(&path, 3)?;
                lifted.push(Some(signature::path_signature(&lift, deg)?.flatten()));
            } else {
                lifted.push(None);
            }
        }
        let mut pairs = BTreeMap::new();
        if with_pairs {
            for a in 0..windows.len() {
                for b in a + 1..windows.len() {
                    if single[a].is_none() || single[b].is_none() {
                        continue;
                    }
                    let path = feature_path(&times, &[&windows[a].samples, &windows[b].samples])?;
                    pairs.insert((a, b), signature::path_signature(&path, deg)?.flatten());
                }
            }
        }
        Ok(Self { channels, single, lifted, pairs })
    }

    /// Positions (into the window list) of channels usable in regressions.
    fn active(&self) -> impl Iterator<Item = usize> + '_ {
        self.single.iter().enumerate().filter(|(_, f)| f.is_some()).map(|(i, _)| i)
    }
}

/// Normalized, time-augmented path through the given series.
fn feature_path(times: &[f64], series: &[&[f64]]) -> Result<Path, SignatureError> {
    let raw = Path::from_columns(times.to_vec(), series)?;
    Ok(signature::normalize_path(&signature::time_augment(&raw)))
}

fn is_constant(xs: &[f64]) -> bool {
    xs.iter().all(|&v| v == xs[0])
}

fn check_windows(windows: &[ChannelWindow]) -> Result<(), ComplexError> {
    let Some(first) = windows.first() else { return Ok(()) };
    for w in windows {
        if w.samples.len() < 2 {
            return Err(ComplexError::Signature(SignatureError::TooFewSamples(w.samples.len())));
        }
        if w.samples.len() != first.samples.len() || w.start != first.start || w.end != first.end {
            return Err(ComplexError::WindowMismatch(format!(
                "channel {} covers [{}, {}] with {} samples, channel {} covers [{}, {}] with {}",
                first.channel,
                first.start,
                first.end,
                first.samples.len(),
                w.channel,
                w.start,
                w.end,
                w.samples.len()
            )));
        }
    }
    let mut seen = BTreeSet::new();
    for w in windows {
        if !seen.insert(w.channel) {
            return Err(ComplexError::WindowMismatch(format!("channel {} appears twice", w.channel)));
        }
    }
    Ok(())
}

fn regress<L: Clone + PartialEq + fmt::Debug>(
    target: &[f64],
    columns: Vec<Vec<f64>>,
    labels: Vec<L>,
    lambda: f64,
    params: &ComplexParams,
) -> Result<(lasso::LassoFit, Vec<L>), LassoError> {
    let x = DesignMatrix::new(columns, labels)?;
    let (x, _) = lasso::standardize_columns(&x)?;
    let y = lasso::center(target);
    let fit = lasso::fit_lasso(&x, &y, lambda, params.tol, params.max_iter)?;
    Ok((fit, x.labels().to_vec()))
}

/// Edges: each channel regressed on every other single channel.
pub fn stage_one(cache: &SignatureCache, params: &ComplexParams) -> StageOutcome {
    let mut out = StageOutcome::default();
    let active: Vec<usize> = cache.active().collect();
    for &i in &active {
        let predictors: Vec<usize> = active.iter().copied().filter(|&j| j != i).collect();
        if predictors.is_empty() {
            continue;
        }
        let target = cache.single[i].as_deref().expect("active channel");
        let columns = predictors.iter().map(|&j| cache.single[j].clone().expect("active channel")).collect();
        match regress(target, columns, predictors, params.lambda1, params) {
            Ok((fit, labels)) => {
                let chosen = lasso::select(&fit, params.r2_threshold);
                if chosen.is_empty() && fit.r2 <= params.r2_threshold {
                    out.gated.push(cache.channels[i]);
                }
                for (col, weight) in chosen {
                    let j = labels[col];
                    out.selections.push(Selection {
                        target: cache.channels[i],
                        simplex: Simplex::edge(cache.channels[i], cache.channels[j]),
                        weight,
                    });
                }
            }
            Err(e) => out.failed.push((cache.channels[i], e)),
        }
    }
    out
}

/// Triangles: each channel (lifted to `(t, x, x)`) regressed on every pair of
/// other channels.
pub fn stage_two(cache: &SignatureCache, params: &ComplexParams) -> StageOutcome {
    let mut out = StageOutcome::default();
    let active: Vec<usize> = cache.active().collect();
    for &i in &active {
        let predictors: Vec<(usize, usize)> =
            cache.pairs.keys().copied().filter(|&(a, b)| a != i && b != i).collect();
        if predictors.is_empty() {
            continue;
        }
        let Some(target) = cache.lifted[i].as_deref() else { continue };
        let columns = predictors.iter().map(|p| cache.pairs[p].clone()).collect();
        match regress(target, columns, predictors, params.lambda2, params) {
            Ok((fit, labels)) => {
                let chosen = lasso::select(&fit, params.r2_threshold);
                if chosen.is_empty() && fit.r2 <= params.r2_threshold {
                    out.gated.push(cache.channels[i]);
                }
                for (col, weight) in chosen {
                    let (a, b) = labels[col];
                    out.selections.push(Selection {
                        target: cache.channels[i],
                        simplex: Simplex::triangle(cache.channels[i], cache.channels[a], cache.channels[b]),
                        weight,
                    });
                }
            }
            Err(e) => out.failed.push((cache.channels[i], e)),
        }
    }
    out
}

/// The complex together with the per-stage selections that produced it.
#[derive(Debug, Clone)]
pub struct BuildOutcome {
    pub complex: WeightedComplex,
    pub edges: StageOutcome,
    pub triangles: StageOutcome,
}

/// Builds the weighted complex over `vertex_count` channels from the given
/// windows. Channel ids in `windows` must be below `vertex_count`.
pub fn build_complex(
    windows: &[ChannelWindow],
    vertex_count: usize,
    params: &ComplexParams,
) -> Result<BuildOutcome, ComplexError> {
    if !(1..=2).contains(&params.max_dim) {
        return Err(ComplexError::InvalidMaxDim(params.max_dim));
    }
    let cache = SignatureCache::build(windows, params.deg, params.max_dim == 2)?;
    let edges = stage_one(&cache, params);
    let triangles = if params.max_dim == 2 { stage_two(&cache, params) } else { StageOutcome::default() };
    for (ch, e) in edges.failed.iter().chain(&triangles.failed) {
        log::warn!("regression for channel {ch} failed: {e}");
    }
    let mut complex = WeightedComplex::new(vertex_count);
    for sel in edges.selections.iter().chain(&triangles.selections) {
        complex.insert(sel.simplex.clone(), sel.weight)?;
    }
    Ok(BuildOutcome { complex, edges, triangles })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn window(channel: usize, samples: Vec<f64>) -> ChannelWindow {
        let n = samples.len();
        ChannelWindow { channel, start: 0.0, end: (n - 1) as f64, samples }
    }

    fn wiggle(n: usize, phase: f64) -> Vec<f64> {
        (0..n).map(|k| (k as f64 * 0.37 + phase).sin() + 0.3 * (k as f64 * 1.3 + 2.0 * phase).cos()).collect()
    }

    #[test]
    fn simplex_basics() {
        assert_eq!(Simplex::new(vec![3, 1]).unwrap().vertices(), &[1, 3]);
        assert_eq!(Simplex::new(vec![]), Err(ComplexError::EmptySimplex));
        assert_eq!(Simplex::new(vec![2, 2]), Err(ComplexError::RepeatedVertex(2)));
        let t = Simplex::triangle(0, 1, 2);
        assert_eq!(t.proper_faces().len(), 6);
        assert_eq!(t.boundary(), vec![Simplex::edge(1, 2), Simplex::edge(0, 2), Simplex::edge(0, 1)]);
        assert_eq!(t.to_string(), "{0,1,2}");
    }

    #[test]
    fn vertices_only_without_selections() {
        let c = WeightedComplex::new(4);
        assert_eq!(c.len(), 4);
        assert!(c.is_closed());
    }

    #[test]
    fn closure_and_max_weight() {
        let mut c = WeightedComplex::new(3);
        c.insert(Simplex::triangle(0, 1, 2), 0.9).unwrap();
        assert_eq!(c.weight(&Simplex::edge(0, 1)), Some(0.0));
        assert!(c.is_closed());
        c.insert(Simplex::edge(0, 1), 0.2).unwrap();
        c.insert(Simplex::edge(0, 1), 0.5).unwrap();
        c.insert(Simplex::edge(0, 1), 0.1).unwrap();
        assert_eq!(c.weight(&Simplex::edge(0, 1)), Some(0.5));
        assert!(c.insert(Simplex::edge(0, 5), 1.0).is_err());
        assert!(c.insert(Simplex::edge(0, 2), -1.0).is_err());
    }

    #[test]
    fn link_examples() {
        let c = WeightedComplex::from_weighted(4, [(Simplex::triangle(0, 1, 2), 1.0)]).unwrap();
        let l = link(&c, &Simplex::vertex(0)).unwrap();
        let expected: BTreeSet<Simplex> =
            [Simplex::vertex(1), Simplex::vertex(2), Simplex::edge(1, 2)].into_iter().collect();
        assert_eq!(l, expected);
        assert!(link(&c, &Simplex::vertex(3)).unwrap().is_empty());
        let l = link(&c, &Simplex::edge(0, 1)).unwrap();
        assert_eq!(l, [Simplex::vertex(2)].into_iter().collect());
        assert!(matches!(link(&c, &Simplex::edge(0, 3)), Err(ComplexError::MissingSimplex(_))));
    }

    #[test]
    fn stage_one_proportional_pair() {
        let x = wiggle(40, 0.0);
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 5.0).collect();
        let cache = SignatureCache::build(&[window(0, x), window(1, y)], 3, false).unwrap();
        let out = stage_one(&cache, &ComplexParams::default());
        let edges: BTreeSet<Simplex> = out.selections.iter().map(|s| s.simplex.clone()).collect();
        assert_eq!(edges, [Simplex::edge(0, 1)].into_iter().collect());
    }

    #[test]
    fn stage_one_single_channel_is_empty() {
        let cache = SignatureCache::build(&[window(0, wiggle(20, 0.0))], 3, false).unwrap();
        assert!(stage_one(&cache, &ComplexParams::default()).selections.is_empty());
    }

    #[test]
    fn stage_one_huge_lambda_selects_nothing() {
        let ws = vec![window(0, wiggle(30, 0.0)), window(1, wiggle(30, 1.0)), window(2, wiggle(30, 2.5))];
        let cache = SignatureCache::build(&ws, 3, true).unwrap();
        let params = ComplexParams { lambda1: 1e12, lambda2: 1e12, ..Default::default() };
        assert!(stage_one(&cache, &params).selections.is_empty());
        assert!(stage_two(&cache, &params).selections.is_empty());
    }

    #[test]
    fn stage_two_column_count() {
        let ws: Vec<ChannelWindow> = (0..6).map(|c| window(c, wiggle(12, c as f64))).collect();
        let cache = SignatureCache::build(&ws, 2, true).unwrap();
        assert_eq!(cache.pairs.len(), 15);
        let for_target = cache.pairs.keys().filter(|&&(a, b)| a != 0 && b != 0).count();
        assert_eq!(for_target, 10);
    }

    #[test]
    fn constant_channels_are_left_out() {
        let ws = vec![window(0, vec![0.0; 20]), window(1, vec![0.0; 20]), window(2, vec![1.0; 20])];
        let out = build_complex(&ws, 3, &ComplexParams::default()).unwrap();
        assert_eq!(out.complex.len(), 3);
    }

    #[test]
    fn rejects_bad_max_dim_and_windows() {
        let ws = vec![window(0, wiggle(10, 0.0)), window(1, wiggle(11, 0.0))];
        let p = ComplexParams { max_dim: 3, ..Default::default() };
        assert_eq!(build_complex(&ws[..1], 1, &p).unwrap_err(), ComplexError::InvalidMaxDim(3));
        assert!(matches!(
            build_complex(&ws, 2, &ComplexParams::default()),
            Err(ComplexError::WindowMismatch(_))
        ));
    }
}

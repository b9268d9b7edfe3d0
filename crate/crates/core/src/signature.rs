//! Truncated signatures of piecewise-linear paths.
//!
//! A signature is stored dense, one flat array per level. The coefficient of
//! the word `(i1, ..., ik)` (0-based letters) lives at index
//! `i1 * d^(k-1) + i2 * d^(k-2) + ... + ik` of level `k`, so words are laid out
//! in lexicographic order.

use thiserror::Error;

/// Highest truncation degree accepted by [`path_signature`] and friends.
pub const MAX_DEGREE: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignatureError {
    #[error("path needs at least 2 samples, got {0}")]
    TooFewSamples(usize),
    #[error("times and values differ in length ({times} vs {values})")]
    LengthMismatch { times: usize, values: usize },
    #[error("timestamps must be strictly increasing (index {0})")]
    NonIncreasingTimes(usize),
    #[error("point {index} has dimension {found}, expected {expected}")]
    RaggedPoint { index: usize, expected: usize, found: usize },
    #[error("path dimension must be at least 1")]
    ZeroDimension,
    #[error("non-finite value in path at sample {0}")]
    NonFinite(usize),
    #[error("signature degree must be in 1..={MAX_DEGREE}, got {0}")]
    InvalidDegree(usize),
    #[error("signatures are incompatible: (d={0}, deg={1}) vs (d={2}, deg={3})")]
    Incompatible(usize, usize, usize, usize),
    #[error("lift target dimension must be at least 2, got {0}")]
    InvalidLiftDimension(usize),
    #[error("lift expects a time-augmented path of dimension 2, got {0}")]
    NotLiftable(usize),
    #[error("flat vector of length {found} does not match d={d}, deg={deg} (expected {expected})")]
    FlatLength { d: usize, deg: usize, expected: usize, found: usize },
}

/// Sampled path in `R^d`, linearly interpolated between samples.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    times: Vec<f64>,
    values: Vec<Vec<f64>>,
    dim: usize,
}

impl Path {
    pub fn new(times: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self, SignatureError> {
        if times.len() != values.len() {
            return Err(SignatureError::LengthMismatch { times: times.len(), values: values.len() });
        }
        if times.len() < 2 {
            return Err(SignatureError::TooFewSamples(times.len()));
        }
        let dim = values[0].len();
        if dim == 0 {
            return Err(SignatureError::ZeroDimension);
        }
        for (i, p) in values.iter().enumerate() {
            if p.len() != dim {
                return Err(SignatureError::RaggedPoint { index: i, expected: dim, found: p.len() });
            }
            if !times[i].is_finite() || p.iter().any(|v| !v.is_finite()) {
                return Err(SignatureError::NonFinite(i));
            }
        }
        if let Some(i) = times.windows(2).position(|w| w[1] <= w[0]) {
            return Err(SignatureError::NonIncreasingTimes(i + 1));
        }
        Ok(Self { times, values, dim })
    }

    /// One-dimensional path from a scalar series.
    pub fn from_scalar(times: Vec<f64>, xs: &[f64]) -> Result<Self, SignatureError> {
        Self::new(times, xs.iter().map(|&x| vec![x]).collect())
    }

    /// Path whose coordinates are the given series, sampled at `times`.
    pub fn from_columns(times: Vec<f64>, columns: &[&[f64]]) -> Result<Self, SignatureError> {
        let n = times.len();
        if let Some(c) = columns.iter().find(|c| c.len() != n) {
            return Err(SignatureError::LengthMismatch { times: n, values: c.len() });
        }
        let values = (0..n).map(|s| columns.iter().map(|c| c[s]).collect()).collect();
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Sub-path over samples `start..=end`.
    pub fn slice(&self, start: usize, end: usize) -> Result<Self, SignatureError> {
        let end = end.min(self.len() - 1);
        if start >= end {
            return Err(SignatureError::TooFewSamples(end.saturating_sub(start) + 1));
        }
        Self::new(self.times[start..=end].to_vec(), self.values[start..=end].to_vec())
    }

    /// Every point scaled by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let values = self.values.iter().map(|p| p.iter().map(|v| v * factor).collect()).collect();
        Self { times: self.times.clone(), values, dim: self.dim }
    }

    /// Every point shifted by `offset`.
    pub fn translated(&self, offset: &[f64]) -> Self {
        assert_eq!(offset.len(), self.dim, "offset dimension");
        let values = self
            .values
            .iter()
            .map(|p| p.iter().zip(offset).map(|(v, o)| v + o).collect())
            .collect();
        Self { times: self.times.clone(), values, dim: self.dim }
    }

    fn increment(&self, s: usize) -> Vec<f64> {
        self.values[s + 1].iter().zip(&self.values[s]).map(|(b, a)| b - a).collect()
    }
}

/// Levels `1..=deg` of the signature of a path in `R^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSignature {
    d: usize,
    deg: usize,
    levels: Vec<Vec<f64>>,
}

impl TruncatedSignature {
    /// Signature of the constant path: every level zero.
    pub fn identity(d: usize, deg: usize) -> Result<Self, SignatureError> {
        check_degree(deg)?;
        if d == 0 {
            return Err(SignatureError::ZeroDimension);
        }
        let levels = (1..=deg).map(|k| vec![0.0; d.pow(k as u32)]).collect();
        Ok(Self { d, deg, levels })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn degree(&self) -> usize {
        self.deg
    }

    /// Coefficients of level `k` (1-based), in lexicographic word order.
    pub fn level(&self, k: usize) -> &[f64] {
        &self.levels[k - 1]
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    /// Coefficient of a word given as 0-based letters.
    pub fn coefficient(&self, word: &Word) -> f64 {
        self.levels[word.len() - 1][word.index(self.d)]
    }

    /// Levels concatenated in order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(flat_len(self.d, self.deg));
        for level in &self.levels {
            out.extend_from_slice(level);
        }
        out
    }

    pub fn unflatten(d: usize, deg: usize, flat: &[f64]) -> Result<Self, SignatureError> {
        check_degree(deg)?;
        let expected = flat_len(d, deg);
        if flat.len() != expected {
            return Err(SignatureError::FlatLength { d, deg, expected, found: flat.len() });
        }
        let mut levels = Vec::with_capacity(deg);
        let mut offset = 0;
        for k in 1..=deg {
            let n = d.pow(k as u32);
            levels.push(flat[offset..offset + n].to_vec());
            offset += n;
        }
        Ok(Self { d, deg, levels })
    }
}

/// Number of coefficients in a signature truncated at `deg` over `d` letters.
pub fn flat_len(d: usize, deg: usize) -> usize {
    (1..=deg).map(|k| d.pow(k as u32)).sum()
}

fn check_degree(deg: usize) -> Result<(), SignatureError> {
    if deg == 0 || deg > MAX_DEGREE {
        Err(SignatureError::InvalidDegree(deg))
    } else {
        Ok(())
    }
}

/// A word over the alphabet `0..d`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(letters: Vec<usize>) -> Self {
        assert!(!letters.is_empty(), "words are non-empty");
        Self(letters)
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Position of this word within its level.
    pub fn index(&self, d: usize) -> usize {
        self.0.iter().fold(0, |acc, &l| {
            assert!(l < d, "letter {l} out of range for alphabet of size {d}");
            acc * d + l
        })
    }
}

/// Prepends the timestamp as the first coordinate.
pub fn time_augment(path: &Path) -> Path {
    let values = path
        .times
        .iter()
        .zip(&path.values)
        .map(|(&t, p)| {
            let mut q = Vec::with_capacity(p.len() + 1);
            q.push(t);
            q.extend_from_slice(p);
            q
        })
        .collect();
    Path { times: path.times.clone(), values, dim: path.dim + 1 }
}

/// Centers every coordinate and scales it to unit sample standard deviation.
/// Coordinates with zero spread are only centered.
pub fn normalize_path(path: &Path) -> Path {
    let n = path.len() as f64;
    let mut values = path.values.clone();
    for c in 0..path.dim {
        let mean = path.values.iter().map(|p| p[c]).sum::<f64>() / n;
        let var = path.values.iter().map(|p| (p[c] - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let sd = var.sqrt();
        for p in values.iter_mut() {
            let centered = p[c] - mean;
            p[c] = if sd > 0.0 { centered / sd } else { 0.0 };
        }
    }
    Path { times: path.times.clone(), values, dim: path.dim }
}

/// Signature of the straight segment with increment `delta`: the truncated
/// tensor exponential `sum_k delta^{⊗k} / k!`.
pub fn segment_signature(delta: &[f64], deg: usize) -> Result<TruncatedSignature, SignatureError> {
    check_degree(deg)?;
    let d = delta.len();
    if d == 0 {
        return Err(SignatureError::ZeroDimension);
    }
    let mut levels: Vec<Vec<f64>> = Vec::with_capacity(deg);
    levels.push(delta.to_vec());
    for k in 2..=deg {
        let prev = &levels[k - 2];
        let inv_k = 1.0 / k as f64;
        let mut next = Vec::with_capacity(prev.len() * d);
        for &a in prev {
            for &b in delta {
                next.push(a * b * inv_k);
            }
        }
        levels.push(next);
    }
    Ok(TruncatedSignature { d, deg, levels })
}

/// Truncated tensor-algebra product: the signature of the concatenated path.
pub fn chen_concat(
    left: &TruncatedSignature,
    right: &TruncatedSignature,
) -> Result<TruncatedSignature, SignatureError> {
    if left.d != right.d || left.deg != right.deg {
        return Err(SignatureError::Incompatible(left.d, left.deg, right.d, right.deg));
    }
    let d = left.d;
    let mut levels = Vec::with_capacity(left.deg);
    for k in 1..=left.deg {
        // j = 0 and j = k carry the implicit unit of level 0
        let mut out: Vec<f64> = left.levels[k - 1].iter().zip(&right.levels[k - 1]).map(|(a, b)| a + b).collect();
        for j in 1..k {
            let a = &left.levels[j - 1];
            let b = &right.levels[k - j - 1];
            let stride = d.pow((k - j) as u32);
            for (u, &au) in a.iter().enumerate() {
                if au == 0.0 {
                    continue;
                }
                let block = &mut out[u * stride..(u + 1) * stride];
                for (o, &bv) in block.iter_mut().zip(b) {
                    *o += au * bv;
                }
            }
        }
        levels.push(out);
    }
    Ok(TruncatedSignature { d, deg: left.deg, levels })
}

/// Signature of the piecewise-linear interpolation of `path`, folded left to
/// right over its segments.
pub fn path_signature(path: &Path, deg: usize) -> Result<TruncatedSignature, SignatureError> {
    check_degree(deg)?;
    if path.len() < 2 {
        return Err(SignatureError::TooFewSamples(path.len()));
    }
    let mut acc = segment_signature(&path.increment(0), deg)?;
    for s in 1..path.len() - 1 {
        let seg = segment_signature(&path.increment(s), deg)?;
        acc = chen_concat(&acc, &seg)?;
    }
    // level one is the telescoped increment, taken exactly from the endpoints
    let first = &path.values[0];
    let last = &path.values[path.len() - 1];
    for (c, v) in acc.levels[0].iter_mut().enumerate() {
        *v = last[c] - first[c];
    }
    Ok(acc)
}

/// Multiplies level `k` by `lambda^k`.
pub fn rescale_signature(sig: &TruncatedSignature, lambda: f64) -> TruncatedSignature {
    let levels = sig
        .levels
        .iter()
        .enumerate()
        .map(|(i, level)| {
            let f = lambda.powi(i as i32 + 1);
            level.iter().map(|v| v * f).collect()
        })
        .collect();
    TruncatedSignature { d: sig.d, deg: sig.deg, levels }
}

/// `(t, x)` to `(t, x, ..., x)` with `target_dim` coordinates in total.
pub fn lift_path(path: &Path, target_dim: usize) -> Result<Path, SignatureError> {
    if target_dim < 2 {
        return Err(SignatureError::InvalidLiftDimension(target_dim));
    }
    if path.dim != 2 {
        return Err(SignatureError::NotLiftable(path.dim));
    }
    let values = path
        .values
        .iter()
        .map(|p| {
            let mut q = Vec::with_capacity(target_dim);
            q.push(p[0]);
            q.resize(target_dim, p[1]);
            q
        })
        .collect();
    Ok(Path { times: path.times.clone(), values, dim: target_dim })
}

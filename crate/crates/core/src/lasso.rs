//! Cyclic coordinate descent for the L1-penalized least-squares problem
//!
//! ```text
//! minimize  ||y - X b||^2 + lambda * ||b||_1
//! ```
//!
//! written without a `1/(2m)` factor. The coordinate update therefore
//! soft-thresholds at `lambda / 2`.

use thiserror::Error;

/// Default stopping tolerance on the largest coordinate change of a sweep.
pub const DEFAULT_TOL: f64 = 1e-7;
/// Default sweep budget.
pub const DEFAULT_MAX_ITER: usize = 10_000;
/// Coefficients with magnitude at or below this count as zero when selecting.
pub const ZERO_SNAP: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LassoError {
    #[error("design matrix has no columns")]
    NoColumns,
    #[error("column {column} has length {found}, expected {expected}")]
    ColumnLength { column: usize, expected: usize, found: usize },
    #[error("target has length {found}, expected {expected}")]
    TargetLength { expected: usize, found: usize },
    #[error("duplicate column label {0}")]
    DuplicateLabel(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("penalty must be finite and >= 0, got {0}")]
    InvalidLambda(f64),
    #[error("need at least {need} rows, got {found}")]
    TooFewRows { need: usize, found: usize },
}

/// Column-major design matrix with one label per column.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix<L> {
    columns: Vec<Vec<f64>>,
    labels: Vec<L>,
    rows: usize,
}

impl<L: Clone + PartialEq + std::fmt::Debug> DesignMatrix<L> {
    pub fn new(columns: Vec<Vec<f64>>, labels: Vec<L>) -> Result<Self, LassoError> {
        if columns.is_empty() {
            return Err(LassoError::NoColumns);
        }
        assert_eq!(columns.len(), labels.len(), "one label per column");
        let rows = columns[0].len();
        if rows == 0 {
            return Err(LassoError::TooFewRows { need: 1, found: 0 });
        }
        for (j, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(LassoError::ColumnLength { column: j, expected: rows, found: c.len() });
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(LassoError::NonFinite("design matrix"));
            }
        }
        for (j, l) in labels.iter().enumerate() {
            if labels[..j].contains(l) {
                return Err(LassoError::DuplicateLabel(format!("{l:?}")));
            }
        }
        Ok(Self { columns, labels, rows })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.columns
    }

    pub fn labels(&self) -> &[L] {
        &self.labels
    }

    pub fn label(&self, j: usize) -> &L {
        &self.labels[j]
    }

    /// `X b`
    pub fn predict(&self, beta: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.rows];
        for (c, &b) in self.columns.iter().zip(beta) {
            if b != 0.0 {
                for (o, &x) in out.iter_mut().zip(c) {
                    *o += b * x;
                }
            }
        }
        out
    }
}

/// Per-column centering and scaling applied by [`standardize_columns`].
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnScaling {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    /// Columns with zero sample variance; these were centered only.
    pub constant: Vec<bool>,
}

/// Centers each column and scales it to unit sample standard deviation.
pub fn standardize_columns<L: Clone + PartialEq + std::fmt::Debug>(
    x: &DesignMatrix<L>,
) -> Result<(DesignMatrix<L>, ColumnScaling), LassoError> {
    let m = x.rows;
    if m < 2 {
        return Err(LassoError::TooFewRows { need: 2, found: m });
    }
    let mut scaling = ColumnScaling {
        mean: Vec::with_capacity(x.cols()),
        scale: Vec::with_capacity(x.cols()),
        constant: Vec::with_capacity(x.cols()),
    };
    let columns = x
        .columns
        .iter()
        .map(|c| {
            let mean = c.iter().sum::<f64>() / m as f64;
            let sd = (c.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt();
            let constant = !(sd > 0.0);
            scaling.mean.push(mean);
            scaling.scale.push(if constant { 1.0 } else { sd });
            scaling.constant.push(constant);
            if constant {
                vec![0.0; m]
            } else {
                c.iter().map(|v| (v - mean) / sd).collect()
            }
        })
        .collect();
    Ok((DesignMatrix { columns, labels: x.labels.clone(), rows: m }, scaling))
}

/// `y - mean(y)`
pub fn center(y: &[f64]) -> Vec<f64> {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    y.iter().map(|v| v - mean).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub beta: Vec<f64>,
    pub r2: f64,
    pub lambda: f64,
    /// Full sweeps over the coordinates.
    pub iterations: usize,
    pub converged: bool,
}

/// `||y - X b||^2 + lambda * ||b||_1`
pub fn objective<L: Clone + PartialEq + std::fmt::Debug>(
    x: &DesignMatrix<L>,
    y: &[f64],
    beta: &[f64],
    lambda: f64,
) -> f64 {
    let pred = x.predict(beta);
    let rss: f64 = y.iter().zip(&pred).map(|(a, b)| (a - b).powi(2)).sum();
    rss + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
}

fn soft_threshold(z: f64, gamma: f64) -> f64 {
    if z > gamma {
        z - gamma
    } else if z < -gamma {
        z + gamma
    } else {
        0.0
    }
}

/// Solves the penalized problem from a zero start. `x` is expected to be
/// standardized and `y` centered; no intercept is fitted.
pub fn fit_lasso<L: Clone + PartialEq + std::fmt::Debug>(
    x: &DesignMatrix<L>,
    y: &[f64],
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<LassoFit, LassoError> {
    fit_lasso_traced(x, y, lambda, tol, max_iter, |_| {})
}

/// Same as [`fit_lasso`], calling `on_sweep` with the current coefficients
/// after every full sweep.
pub fn fit_lasso_traced<L, F>(
    x: &DesignMatrix<L>,
    y: &[f64],
    lambda: f64,
    tol: f64,
    max_iter: usize,
    mut on_sweep: F,
) -> Result<LassoFit, LassoError>
where
    L: Clone + PartialEq + std::fmt::Debug,
    F: FnMut(&[f64]),
{
    if y.len() != x.rows {
        return Err(LassoError::TargetLength { expected: x.rows, found: y.len() });
    }
    if y.iter().any(|v| !v.is_finite()) {
        return Err(LassoError::NonFinite("target"));
    }
    if !(lambda.is_finite() && lambda >= 0.0) {
        return Err(LassoError::InvalidLambda(lambda));
    }
    let p = x.cols();
    let norms: Vec<f64> = x.columns.iter().map(|c| c.iter().map(|v| v * v).sum()).collect();
    let half_lambda = lambda / 2.0;
    let mut beta = vec![0.0; p];
    let mut resid = y.to_vec();
    let mut iterations = 0;
    let mut converged = false;

    // One coordinate update; returns the absolute change.
    let update = |j: usize, beta: &mut [f64], resid: &mut [f64]| -> f64 {
        if norms[j] == 0.0 {
            return 0.0;
        }
        let col = &x.columns[j];
        let old = beta[j];
        let rho: f64 = col.iter().zip(resid.iter()).map(|(a, r)| a * r).sum::<f64>() + norms[j] * old;
        let new = soft_threshold(rho, half_lambda) / norms[j];
        let delta = new - old;
        if delta != 0.0 {
            for (r, &a) in resid.iter_mut().zip(col) {
                *r -= delta * a;
            }
            beta[j] = new;
        }
        delta.abs()
    };

    while iterations < max_iter {
        // full sweep over every coordinate in label order
        let mut max_change = 0.0f64;
        for j in 0..p {
            max_change = max_change.max(update(j, &mut beta, &mut resid));
        }
        iterations += 1;
        on_sweep(&beta);
        if max_change < tol {
            converged = true;
            break;
        }
        // iterate on the active set until it settles, then re-check everything
        loop {
            if iterations >= max_iter {
                break;
            }
            let mut active_change = 0.0f64;
            for j in 0..p {
                if beta[j] != 0.0 {
                    active_change = active_change.max(update(j, &mut beta, &mut resid));
                }
            }
            iterations += 1;
            on_sweep(&beta);
            if active_change < tol {
                break;
            }
        }
    }

    let r2 = r_squared(x, y, &beta);
    if !converged {
        log::debug!("lasso stopped after {iterations} sweeps without converging (lambda={lambda})");
    }
    Ok(LassoFit { beta, r2, lambda, iterations, converged })
}

/// `1 - RSS / TSS`, with TSS taken about the mean of `y`.
pub fn r_squared<L: Clone + PartialEq + std::fmt::Debug>(x: &DesignMatrix<L>, y: &[f64], beta: &[f64]) -> f64 {
    let pred = x.predict(beta);
    r_squared_of_prediction(y, &pred)
}

pub fn r_squared_of_prediction(y: &[f64], pred: &[f64]) -> f64 {
    let mean = y.iter().sum::<f64>() / y.len() as f64;
    let tss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
    let rss: f64 = y.iter().zip(pred).map(|(a, b)| (a - b).powi(2)).sum();
    if tss == 0.0 {
        return if rss == 0.0 { 1.0 } else { 0.0 };
    }
    1.0 - rss / tss
}

/// Columns kept by the R² gate: indices with a non-zero coefficient, paired
/// with `|beta|`. Empty unless `fit.r2 > threshold` strictly.
pub fn select(fit: &LassoFit, threshold: f64) -> Vec<(usize, f64)> {
    if !(fit.r2 > threshold) {
        return Vec::new();
    }
    fit.beta
        .iter()
        .enumerate()
        .filter(|(_, b)| b.abs() > ZERO_SNAP)
        .map(|(j, b)| (j, b.abs()))
        .collect()
}

/// Smallest penalty at which the all-zero solution is optimal:
/// `2 * max_j |x_j' y|`.
pub fn lambda_max<L: Clone + PartialEq + std::fmt::Debug>(x: &DesignMatrix<L>, y: &[f64]) -> f64 {
    x.columns
        .iter()
        .map(|c| 2.0 * c.iter().zip(y).map(|(a, b)| a * b).sum::<f64>().abs())
        .fold(0.0, f64::max)
}

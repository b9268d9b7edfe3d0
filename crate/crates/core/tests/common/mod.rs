//! Brute-force oracles and random generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use sigtopo::complex::Simplex;
use sigtopo::lasso::{center, standardize_columns, DesignMatrix};
use sigtopo::persistence::{reduce_boundary, Filtration};
use sigtopo::signature::Path;

pub fn gauss<R: Rng>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Piecewise-linear path with `n` points in dimension `d`, strictly
/// increasing (irregular) times.
pub fn random_path<R: Rng>(rng: &mut R, d: usize, n: usize) -> Path {
    let mut t = 0.0;
    let mut x = vec![0.0; d];
    let mut times = Vec::with_capacity(n);
    let mut values = Vec::with_capacity(n);
    for _ in 0..n {
        times.push(t);
        values.push(x.clone());
        t += rng.random_range(0.1..1.0);
        for v in x.iter_mut() {
            *v += gauss(rng);
        }
    }
    Path::new(times, values).unwrap()
}

/// Level-two coefficients from the double sum over segment increments:
/// `S^{ij} = sum_{s<u} D_s^i D_u^j + sum_s D_s^i D_s^j / 2`.
pub fn level2_brute(path: &Path) -> Vec<f64> {
    let d = path.dim();
    let v = path.values();
    let deltas: Vec<Vec<f64>> = v.windows(2).map(|w| (0..d).map(|k| w[1][k] - w[0][k]).collect()).collect();
    let mut out = vec![0.0; d * d];
    let mut running = vec![0.0; d];
    for delta in &deltas {
        for i in 0..d {
            for j in 0..d {
                out[i * d + j] += running[i] * delta[j] + delta[i] * delta[j] / 2.0;
            }
        }
        for i in 0..d {
            running[i] += delta[i];
        }
    }
    out
}

/// Total variation `sum_s |x_{s+1} - x_s|_1` of a path.
pub fn total_variation(path: &Path) -> f64 {
    path.values().windows(2).map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (b - a).abs()).sum::<f64>()).sum()
}

/// Bound `tv^k / k!` on every level-k coefficient of a path of variation `tv`.
pub fn level_bound(tv: f64, k: usize) -> f64 {
    (1..=k).fold(1.0, |acc, i| acc * tv / i as f64)
}

/// `|a - b| <= tol * max(bound, largest magnitude)` per element: relative
/// error measured against the natural size of the level, so coefficients
/// that nearly cancel are not held to a tighter absolute standard than
/// their neighbours.
pub fn close_level(a: &[f64], b: &[f64], bound: f64, tol: f64) -> Result<(), String> {
    if a.len() != b.len() {
        return Err(format!("length {} vs {}", a.len(), b.len()));
    }
    let scale = a.iter().chain(b).fold(bound.max(f64::MIN_POSITIVE), |m, v| m.max(v.abs()));
    for (k, (x, y)) in a.iter().zip(b).enumerate() {
        if (x - y).abs() > tol * scale {
            return Err(format!("index {k}: {x} vs {y} (scale {scale})"));
        }
    }
    Ok(())
}

/// Random closed complex of dimension <= 2 on `n` vertices: every vertex,
/// each edge with probability `pe`, each triangle whose edges are all
/// present with probability `pt`.
pub fn random_closed<R: Rng>(rng: &mut R, n: usize, pe: f64, pt: f64) -> BTreeSet<Simplex> {
    let mut set: BTreeSet<Simplex> = (0..n).map(Simplex::vertex).collect();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(pe) {
                set.insert(Simplex::edge(a, b));
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                let t = Simplex::triangle(a, b, c);
                if t.boundary().iter().all(|e| set.contains(e)) && rng.random_bool(pt) {
                    set.insert(t);
                }
            }
        }
    }
    set
}

/// Random births on a coarse grid (so ties occur), raised so that no
/// simplex precedes its faces.
pub fn random_monotone_births<R: Rng>(rng: &mut R, simplices: &BTreeSet<Simplex>) -> BTreeMap<Simplex, f64> {
    let mut births = BTreeMap::new();
    let mut by_dim: Vec<&Simplex> = simplices.iter().collect();
    by_dim.sort_by_key(|s| s.dim());
    for s in by_dim {
        let own = rng.random_range(0..=10) as f64 / 10.0;
        let b = s.boundary().iter().map(|f| births[f]).fold(own, f64::max);
        births.insert(s.clone(), b);
    }
    births
}

/// Rank over GF(2) of rows given as bitmasks.
pub fn rank_gf2(mut rows: Vec<u128>) -> usize {
    let mut rank = 0;
    for bit in 0..128 {
        let mask = 1u128 << bit;
        let Some(p) = (rank..rows.len()).find(|&i| rows[i] & mask != 0) else { continue };
        rows.swap(rank, p);
        let pivot = rows[rank];
        for (i, r) in rows.iter_mut().enumerate() {
            if i != rank && *r & mask != 0 {
                *r ^= pivot;
            }
        }
        rank += 1;
    }
    rank
}

/// Betti numbers `[b0, b1, b2]` of a closed complex from boundary ranks.
pub fn betti_brute(simplices: &BTreeSet<Simplex>) -> [usize; 3] {
    let by_dim = |k: usize| -> Vec<&Simplex> { simplices.iter().filter(|s| s.dim() == k).collect() };
    let cells: Vec<Vec<&Simplex>> = (0..3).map(by_dim).collect();
    let boundary_rank = |k: usize| -> usize {
        if k == 0 || k > 2 {
            return 0;
        }
        let index: BTreeMap<&Simplex, usize> = cells[k - 1].iter().enumerate().map(|(i, s)| (*s, i)).collect();
        let rows = cells[k]
            .iter()
            .map(|s| s.boundary().iter().fold(0u128, |acc, f| acc | 1u128 << index[f]))
            .collect();
        rank_gf2(rows)
    };
    let ranks = [0, boundary_rank(1), boundary_rank(2), 0];
    [0, 1, 2].map(|k| cells[k].len() - ranks[k] - ranks[k + 1])
}

/// Standardized random design (`m` rows, `p` columns) and a centered target
/// built from a sparse coefficient vector plus noise.
pub fn lasso_instance<R: Rng>(rng: &mut R, m: usize, p: usize) -> (DesignMatrix<usize>, Vec<f64>) {
    let raw: Vec<Vec<f64>> = (0..p).map(|_| (0..m).map(|_| gauss(rng)).collect()).collect();
    let x = DesignMatrix::new(raw, (0..p).collect()).unwrap();
    let (x, _) = standardize_columns(&x).unwrap();
    let mut truth = vec![0.0; p];
    for _ in 0..p.min(5) {
        truth[rng.random_range(0..p)] = rng.random_range(-3.0..3.0);
    }
    let clean = x.predict(&truth);
    let y: Vec<f64> = clean.iter().map(|v| v + 0.5 * gauss(rng)).collect();
    (x, center(&y))
}

/// Largest violation of the optimality conditions of
/// `||y - X b||^2 + lambda ||b||_1`: with `g = 2 X'(y - X b)`, active
/// coordinates need `g_j = lambda sign(b_j)` and inactive ones `|g_j| <= lambda`.
pub fn kkt_violation(x: &DesignMatrix<usize>, y: &[f64], beta: &[f64], lambda: f64) -> f64 {
    let pred = x.predict(beta);
    let resid: Vec<f64> = y.iter().zip(&pred).map(|(a, b)| a - b).collect();
    (0..x.cols())
        .map(|j| {
            let g = 2.0 * x.column(j).iter().zip(&resid).map(|(a, r)| a * r).sum::<f64>();
            if beta[j] != 0.0 {
                (g - lambda * beta[j].signum()).abs()
            } else {
                (g.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

/// Least-squares solution from the normal equations.
pub fn normal_equations(x: &DesignMatrix<usize>, y: &[f64]) -> Vec<f64> {
    let (m, p) = (x.rows(), x.cols());
    let a = nalgebra::DMatrix::from_fn(m, p, |i, j| x.column(j)[i]);
    let b = nalgebra::DVector::from_column_slice(y);
    let gram = a.transpose() * &a;
    let rhs = a.transpose() * b;
    gram.cholesky().expect("well-conditioned design").solve(&rhs).iter().copied().collect()
}

/// Runs the reduction on `births` and compares it against brute-force Betti
/// numbers of every sublevel set, plus the bar-count and Euler identities.
pub fn check_against_sweep(births: &BTreeMap<Simplex, f64>) -> Result<(), String> {
    let filtration = Filtration::new(births.iter().map(|(s, b)| (s.clone(), *b))).map_err(|e| e.to_string())?;
    let diagram = reduce_boundary(&filtration).map_err(|e| e.to_string())?;
    let mut thresholds: Vec<f64> = births.values().copied().collect();
    thresholds.sort_by(f64::total_cmp);
    thresholds.dedup();
    for &tau in &thresholds {
        let sub: BTreeSet<Simplex> = births.iter().filter(|(_, &b)| b <= tau).map(|(s, _)| s.clone()).collect();
        let brute = betti_brute(&sub);
        for (k, &expected) in brute.iter().enumerate() {
            let alive =
                diagram.in_dim(k).filter(|bar| bar.birth <= tau && bar.death.is_none_or(|d| d > tau)).count();
            if alive != expected {
                return Err(format!("threshold {tau}, dim {k}: diagram has {alive} live bars, rank sweep {expected}"));
            }
        }
    }
    let n = births.len();
    let essential: usize = (0..3).map(|k| diagram.essential_count(k)).sum();
    if 2 * diagram.paired_count() + essential != n {
        return Err(format!("{} paired, {essential} essential for {n} simplices", diagram.paired_count()));
    }
    let count = |k: usize| births.keys().filter(|s| s.dim() == k).count() as i64;
    let euler = count(0) - count(1) + count(2);
    let betti = (0..3).map(|k| diagram.essential_count(k) as i64).collect::<Vec<_>>();
    if euler != betti[0] - betti[1] + betti[2] {
        return Err(format!("Euler characteristic {euler} but Betti numbers {betti:?}"));
    }
    Ok(())
}

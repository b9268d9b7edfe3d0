//! Synthetic block-structured recordings.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::ingest::Recording;

/// Channels come in blocks. Each block follows a latent random walk; every
/// member is a positive affine image of its block's walk plus independent
/// Gaussian noise of standard deviation `noise`. With `cross_mix > 0` each
/// member also picks up that fraction of the next block's walk.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub blocks: Vec<usize>,
    pub noise: f64,
    pub cross_mix: f64,
    /// Number of samples per channel.
    pub samples: usize,
    pub rate: f64,
    pub seed: u64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        Self { blocks: vec![3, 3], noise: 1e-4, cross_mix: 0.0, samples: 600, rate: 1.0, seed: 7 }
    }
}

fn random_walk(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let mut x = 0.0;
    (0..n)
        .map(|_| {
            let step: f64 = StandardNormal.sample(rng);
            x += step;
            x
        })
        .collect()
}

/// Deterministic for a given spec.
pub fn synth_generate(spec: &SynthSpec) -> Recording {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let drivers: Vec<Vec<f64>> = spec.blocks.iter().map(|_| random_walk(&mut rng, spec.samples)).collect();
    let mut names = Vec::new();
    let mut rows = Vec::new();
    for (b, &size) in spec.blocks.iter().enumerate() {
        let other = &drivers[(b + 1) % drivers.len()];
        for m in 0..size {
            let gain: f64 = rng.random_range(0.5..1.5);
            let offset: f64 = rng.random_range(-1.0..1.0);
            let row = drivers[b]
                .iter()
                .zip(other)
                .map(|(&d, &o)| {
                    let eps: f64 = StandardNormal.sample(&mut rng);
                    gain * d + offset + spec.cross_mix * o + spec.noise * eps
                })
                .collect();
            names.push(format!("b{}c{}", b + 1, m + 1));
            rows.push(row);
        }
    }
    Recording::new(names, spec.rate, rows).expect("synthetic rows share one length")
}

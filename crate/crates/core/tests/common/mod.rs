#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use svmscreen::data::{Dataset, SparseColumn};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Labels with roughly `pos_frac` positives; both classes always present.
pub fn labels(rng: &mut ChaCha8Rng, n: usize, pos_frac: f64) -> Vec<f64> {
    loop {
        let y: Vec<f64> = (0..n)
            .map(|_| if rng.random_bool(pos_frac) { 1.0 } else { -1.0 })
            .collect();
        if y.iter().any(|&v| v > 0.0) && y.iter().any(|&v| v < 0.0) {
            return y;
        }
    }
}

/// `n × m` instance with entries uniform in (-1, 1), each present with
/// probability `density`.
pub fn instance(rng: &mut ChaCha8Rng, n: usize, m: usize, density: f64, pos_frac: f64) -> Dataset {
    let y = labels(rng, n, pos_frac);
    let cols = (0..m)
        .map(|_| {
            let mut c = SparseColumn::default();
            for i in 0..n {
                if rng.random_bool(density) {
                    c.indices.push(i);
                    c.values.push(rng.random_range(-1.0..1.0));
                }
            }
            c
        })
        .collect();
    Dataset::new(cols, y).unwrap()
}

/// An instance drawn from the randomized suite: `n ∈ [4, 50]`, `m ∈ [10, 200]`,
/// dense or 90% sparse, label balance between 20% and 80% positive.
pub fn suite_instance(rng: &mut ChaCha8Rng) -> Dataset {
    let n = rng.random_range(4..=50);
    let m = rng.random_range(10..=200);
    let density = if rng.random_bool(0.5) { 1.0 } else { 0.1 };
    let pos = rng.random_range(0.2..0.8);
    instance(rng, n, m, density, pos)
}

/// Multiplies feature columns by the labels: `f̂ = Y f`.
pub fn weighted_dense(d: &Dataset, j: usize) -> Vec<f64> {
    d.column(j)
        .to_dense(d.n_samples())
        .iter()
        .zip(d.labels())
        .map(|(f, y)| f * y)
        .collect()
}

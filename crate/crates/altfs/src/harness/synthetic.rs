//! Synthetic dataset generators for tests and desk-scale experiments.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;

fn feature_names(n: usize) -> Vec<String> {
    (0..n).map(|j| format!("f{j}")).collect()
}

/// Linearly separable data: the first feature determines the label with a
/// clear margin around the class boundary (so a tree threshold learned on
/// any split classifies held-out rows perfectly), the remaining
/// `noise_features` are uniform noise.
pub fn separable(m: usize, noise_features: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target: Vec<u8> = (0..m).map(|i| (i % 2) as u8).collect();
    let signal: Vec<f64> = target
        .iter()
        .map(|&y| if y == 1 { 0.75 } else { 0.0 } + 0.25 * rng.gen::<f64>())
        .collect();
    let mut columns = vec![signal];
    for _ in 0..noise_features {
        columns.push((0..m).map(|_| rng.gen::<f64>()).collect());
    }
    let names = feature_names(columns.len());
    Dataset::new(columns, names, target).expect("generator satisfies invariants")
}

/// XOR interaction: the label is the parity of the first two binary
/// features, undetectable by any univariate score.
pub fn xor_interaction(m: usize, noise_features: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a: Vec<f64> = (0..m).map(|_| rng.gen_range(0..2) as f64).collect();
    let b: Vec<f64> = (0..m).map(|_| rng.gen_range(0..2) as f64).collect();
    let target: Vec<u8> = a
        .iter()
        .zip(&b)
        .map(|(&x, &y)| (x as u8) ^ (y as u8))
        .collect();
    let mut columns = vec![a, b];
    for _ in 0..noise_features {
        columns.push((0..m).map(|_| rng.gen::<f64>()).collect());
    }
    let names = feature_names(columns.len());
    Dataset::new(columns, names, target).expect("generator satisfies invariants")
}

/// Pairs of near-duplicate informative features: each pair shares one signal
/// plus small independent jitter, giving high within-pair dependency.
pub fn redundant_pairs(m: usize, pairs: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target: Vec<u8> = (0..m).map(|_| rng.gen_range(0..2) as u8).collect();
    let mut columns = Vec::with_capacity(2 * pairs);
    for p in 0..pairs {
        let strength = 1.0 / (p + 1) as f64;
        let base: Vec<f64> = target
            .iter()
            .map(|&y| y as f64 * strength + rng.gen::<f64>())
            .collect();
        let twin: Vec<f64> = base.iter().map(|&v| v + 0.01 * rng.gen::<f64>()).collect();
        columns.push(base);
        columns.push(twin);
    }
    Dataset::new(columns, feature_names(2 * pairs), target).expect("generator satisfies invariants")
}

/// Trend dataset: `informative` features carry the label with decreasing
/// strength, the rest are uniform noise. Used to reproduce the qualitative
/// effect of the dissimilarity threshold and the number of alternatives.
pub fn trend(m: usize, n: usize, informative: usize, seed: u64) -> Dataset {
    assert!(informative <= n && informative >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target: Vec<u8> = (0..m).map(|i| (i % 2) as u8).collect();
    let mut columns = Vec::with_capacity(n);
    for j in 0..n {
        if j < informative {
            let strength = 1.2 * (informative - j) as f64 / informative as f64;
            columns.push(
                target
                    .iter()
                    .map(|&y| y as f64 * strength + rng.gen::<f64>())
                    .collect(),
            );
        } else {
            columns.push((0..m).map(|_| rng.gen::<f64>()).collect());
        }
    }
    Dataset::new(columns, feature_names(n), target).expect("generator satisfies invariants")
}

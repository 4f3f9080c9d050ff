#![allow(dead_code)]

use minacc::FeatureMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Best correct count over every axis, every threshold at a data value or
/// `+inf`, and both label assignments. Rule: `v >= tau` on one side.
pub fn brute_force_correct(rows: &[Vec<f64>], labels: &[i8]) -> usize {
    let n = rows.len();
    let d = rows[0].len();
    let mut best = 0;
    for i in 0..d {
        let mut taus: Vec<f64> = rows.iter().map(|r| r[i]).collect();
        taus.push(f64::INFINITY);
        for &tau in &taus {
            let above_plus = (0..n).filter(|&k| (rows[k][i] >= tau) == (labels[k] == 1)).count();
            best = best.max(above_plus).max(n - above_plus);
        }
    }
    best
}

pub struct Instance {
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<i8>,
}

impl Instance {
    pub fn matrix(&self) -> FeatureMatrix {
        FeatureMatrix::from_rows(&self.rows).unwrap()
    }
}

/// Random instance with values on a coarse grid so ties are common.
pub fn random_instance(rng: &mut ChaCha8Rng, max_n: usize, max_d: usize) -> Instance {
    let n = rng.random_range(1..=max_n);
    let d = rng.random_range(1..=max_d);
    let levels = rng.random_range(2..=12);
    let rows = (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(0..levels) as f64 * 0.25 - 1.0).collect())
        .collect();
    let labels = (0..n).map(|_| if rng.random_bool(0.5) { 1 } else { -1 }).collect();
    Instance { rows, labels }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

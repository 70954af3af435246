#![allow(dead_code)]

use catalysis::ProbVec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Flat Dirichlet sample, optionally with some entries forced to zero.
pub fn random_probs(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..d).map(|_| -(1.0 - rng.random::<f64>()).ln()).collect();
    let s: f64 = raw.iter().sum();
    let mut v: Vec<f64> = raw.iter().map(|x| x / s).collect();
    // fix the last entry so the sum is as exact as possible
    let head: f64 = v[..d - 1].iter().sum();
    v[d - 1] = (1.0 - head).max(0.0);
    v
}

pub fn random_pv(rng: &mut ChaCha8Rng, d: usize) -> ProbVec {
    ProbVec::new(random_probs(rng, d)).unwrap()
}

/// Like `random_pv`, but zeroes an entry with probability 1/4.
pub fn random_pv_sparse(rng: &mut ChaCha8Rng, d: usize) -> ProbVec {
    let mut v = random_probs(rng, d);
    if d > 1 && rng.random::<f64>() < 0.25 {
        let k = rng.random_range(0..d);
        v[k] = 0.0;
        let s: f64 = v.iter().sum();
        v.iter_mut().for_each(|x| *x /= s);
    }
    ProbVec::new(v).unwrap()
}

pub fn gaussian(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = 1.0 - rng.random::<f64>();
    let u2: f64 = rng.random::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

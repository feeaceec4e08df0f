#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use sparse_iscra::model::{ProblemInstance, SeparablePenalty};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| rng.sample(StandardNormal))
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| rng.sample(StandardNormal))
}

/// Any separable penalty: random weights (some zero), tilts and box radii (some infinite).
pub fn general_penalty(rng: &mut ChaCha8Rng, n: usize) -> SeparablePenalty {
    let weights = DVector::from_fn(n, |_, _| if rng.gen_bool(0.25) { 0.0 } else { rng.gen_range(0.0..2.0) });
    let tilt = DVector::from_fn(n, |_, _| if rng.gen_bool(0.5) { 0.0 } else { rng.gen_range(-0.5..0.5) });
    let box_radius = DVector::from_fn(n, |_, _| if rng.gen_bool(0.5) { f64::INFINITY } else { rng.gen_range(0.1..5.0) });
    SeparablePenalty { lambda: rng.gen_range(0.01..1.0), weights, tilt, box_radius }
}

/// Truncated-ℓ1 penalty with a random working set.
pub fn truncated_penalty(rng: &mut ChaCha8Rng, n: usize, lambda: f64, mu: f64) -> SeparablePenalty {
    let mask: Vec<bool> = (0..n).map(|_| rng.gen_bool(0.8)).collect();
    SeparablePenalty::truncated_l1(n, lambda, &mask, mu)
}

/// Gaussian design with a sparse planted signal and small noise.
pub fn planted_instance(rng: &mut ChaCha8Rng, m: usize, n: usize, r: usize) -> (ProblemInstance, DVector<f64>) {
    let a = gaussian_matrix(rng, m, n);
    let mut x = DVector::zeros(n);
    for i in rand::seq::index::sample(rng, n, r.min(n)).into_iter() {
        x[i] = rng.gen_range(1.0..5.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
    }
    let noise = gaussian_vector(rng, m) * 0.1;
    let b = &a * &x + noise;
    (ProblemInstance::new(a, b).unwrap(), x)
}

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{GroundTruth, ProblemInstance};

/// Stream reserved for the noise vector; rows use streams `0..m`.
const NOISE_STREAM: u64 = u64::MAX;

/// A block pattern `z̄` repeated to form `x̄`, with AR(1)-correlated rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub block: Vec<f64>,
    pub repeats: usize,
    pub m: usize,
    pub theta: f64,
    pub noise_std: f64,
    pub seed: u64,
}

/// Names accepted by [`SyntheticSpec::preset`].
pub const PRESETS: &[&str] = &["exam51", "exam52", "exam53", "exam54", "exam55"];

fn block_with_tail(head: &[f64], zeros: usize) -> Vec<f64> {
    let mut v = head.to_vec();
    v.extend(std::iter::repeat(0.0).take(zeros));
    v
}

impl SyntheticSpec {
    pub fn n(&self) -> usize {
        self.repeats * self.block.len()
    }

    /// One of the experiment designs in [`PRESETS`], with unit noise.
    pub fn preset(name: &str, m: usize, seed: u64) -> Result<Self> {
        let (theta, block, repeats) = match name {
            "exam51" => (0.6, block_with_tail(&[3.0, 1.5, 0.0, 0.0, 2.0], 25), 40),
            "exam52" => (0.6, [vec![0.0; 7], vec![1.0]].concat(), 150),
            "exam53" => (0.75, block_with_tail(&[3.0, 1.5, 0.0, 0.0, 2.0], 20), 48),
            "exam54" => (0.8, block_with_tail(&[3.0, 1.5, 0.0, 0.0, 2.0], 20), 48),
            "exam55" => (0.8, [vec![0.0; 18], vec![1.2, 1.0]].concat(), 50),
            other => return Err(Error::InvalidArgument(format!("unknown synthetic preset '{other}'"))),
        };
        Ok(Self { block, repeats, m, theta, noise_std: 1.0, seed })
    }

    pub fn validate(&self) -> Result<()> {
        if self.block.is_empty() || self.repeats == 0 || self.m == 0 {
            return Err(Error::InvalidArgument("block, repeats and m must be nonempty".into()));
        }
        if !(0.0..1.0).contains(&self.theta) {
            return Err(Error::InvalidArgument(format!("theta must lie in [0, 1), got {}", self.theta)));
        }
        if !(self.noise_std >= 0.0) {
            return Err(Error::InvalidArgument("noise_std must be nonnegative".into()));
        }
        Ok(())
    }
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Draws `(A, b = A·x̄ + e)` with rows following the AR(1) recursion
/// `a_1 = ξ_1`, `a_j = θ·a_{j−1} + √(1−θ²)·ξ_j`.
pub fn gen_synthetic(spec: &SyntheticSpec) -> Result<(ProblemInstance, GroundTruth)> {
    spec.validate()?;
    let (m, n) = (spec.m, spec.n());
    let theta = spec.theta;
    let innov = (1.0 - theta * theta).sqrt();
    let rows: Vec<Vec<f64>> = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(spec.seed, i as u64);
            let mut row = Vec::with_capacity(n);
            let mut prev: f64 = StandardNormal.sample(&mut rng);
            row.push(prev);
            for _ in 1..n {
                let xi: f64 = StandardNormal.sample(&mut rng);
                prev = theta * prev + innov * xi;
                row.push(prev);
            }
            row
        })
        .collect();
    let a = DMatrix::from_fn(m, n, |i, j| rows[i][j]);
    let x_bar = DVector::from_iterator(n, spec.block.iter().cycle().take(n).copied());
    let mut noise_rng = stream(spec.seed, NOISE_STREAM);
    let noise = DVector::from_fn(m, |_, _| {
        let z: f64 = StandardNormal.sample(&mut noise_rng);
        spec.noise_std * z
    });
    let b = &a * &x_bar + &noise;
    Ok((ProblemInstance::new(a, b)?, GroundTruth::new(x_bar, Some(noise))))
}

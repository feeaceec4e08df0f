use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::binomial;
use crate::error::{check_len, Error, Result};
use crate::linalg::{columns, lstsq_min_norm, min_singular_value, rank, spectral_norm};
use crate::model::ProblemInstance;

/// Default cap on the number of supports enumerated by [`sparse_sigma`].
pub const SIGMA_BUDGET: u128 = 2_000_000;
/// Default cap on the number of subsets enumerated by [`kappa`].
pub const KAPPA_BUDGET: u128 = 1 << 16;

fn support_sigma(a: &DMatrix<f64>, support: &[usize]) -> f64 {
    min_singular_value(&columns(a, support)) / (a.nrows() as f64).sqrt()
}

/// `σ_A(l)` together with a minimizing support.
pub fn sparse_sigma_with_support(a: &DMatrix<f64>, l: usize, budget: u128) -> Result<(f64, Vec<usize>)> {
    let n = a.ncols();
    if l == 0 || l > n {
        return Err(Error::InvalidArgument(format!("support size must lie in 1..={n}, got {l}")));
    }
    if l > a.nrows() {
        return Ok((0.0, (0..l).collect()));
    }
    let required = binomial(n, l);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let best = (0..n)
        .combinations(l)
        .par_bridge()
        .map(|s| (support_sigma(a, &s), s))
        .reduce_with(|x, y| match x.0.total_cmp(&y.0) {
            std::cmp::Ordering::Less => x,
            std::cmp::Ordering::Greater => y,
            std::cmp::Ordering::Equal => if x.1 <= y.1 { x } else { y },
        })
        .expect("at least one support");
    Ok(best)
}

/// Smallest `l`-sparse singular value of `A/√m`, by exhaustive enumeration.
pub fn sparse_sigma(a: &DMatrix<f64>, l: usize, budget: u128) -> Result<f64> {
    sparse_sigma_with_support(a, l, budget).map(|(v, _)| v)
}

/// Minimum over `samples` random supports. This only bounds `σ_A(l)` from
/// above and is not a certificate.
pub fn sparse_sigma_sampled(a: &DMatrix<f64>, l: usize, samples: usize, seed: u64) -> f64 {
    let n = a.ncols();
    if l > a.nrows() {
        return 0.0;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..samples)
        .map(|_| {
            let mut s = sample(&mut rng, n, l).into_vec();
            s.sort_unstable();
            support_sigma(a, &s)
        })
        .fold(f64::INFINITY, f64::min)
}

fn require_full_rank(a: &DMatrix<f64>, support: &[usize]) -> Result<DMatrix<f64>> {
    let sub = columns(a, support);
    if rank(&sub) < support.len() {
        return Err(Error::SingularSubmatrix { columns: support.to_vec() });
    }
    Ok(sub)
}

/// `max_{∅≠S⊂S̄, j∉S} ‖(A_SᵀA_S)⁻¹A_SᵀA_j‖₁`.
pub fn kappa(a: &DMatrix<f64>, support: &[usize], budget: u128) -> Result<f64> {
    let r = support.len();
    if r == 0 {
        return Ok(0.0);
    }
    let required = if r >= 127 { u128::MAX } else { (1u128 << r) - 1 };
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let n = a.ncols();
    let masks: Vec<u64> = (1..=required as u64).collect();
    let values: Result<Vec<f64>> = masks
        .par_iter()
        .map(|&mask| {
            let s: Vec<usize> = (0..r).filter(|b| mask >> b & 1 == 1).map(|b| support[b]).collect();
            let sub = require_full_rank(a, &s)?;
            let mut in_s = vec![false; n];
            for &i in &s {
                in_s[i] = true;
            }
            let others: Vec<usize> = (0..n).filter(|&j| !in_s[j]).collect();
            if others.is_empty() {
                return Ok(0.0);
            }
            let rhs = sub.tr_mul(&columns(a, &others));
            let gram = sub.tr_mul(&sub);
            let coef = gram
                .cholesky()
                .ok_or_else(|| Error::SingularSubmatrix { columns: s.clone() })?
                .solve(&rhs);
            Ok((0..coef.ncols()).map(|j| coef.column(j).lp_norm(1)).fold(0.0, f64::max))
        })
        .collect();
    Ok(values?.into_iter().fold(0.0, f64::max))
}

/// `M̂ = (5+κ)√r‖b‖/(2√m·σ_r) + 5‖b‖²(1+κ)/(8mλ)`.
pub fn m_hat(instance: &ProblemInstance, lambda: f64, r: usize, kappa: f64, sigma_r: f64) -> Result<f64> {
    if !(sigma_r > 0.0) {
        return Err(Error::InvalidArgument("sparse singular value must be positive".into()));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument("lambda must be positive".into()));
    }
    let m = instance.m() as f64;
    let bn = instance.b().norm();
    Ok((5.0 + kappa) * (r as f64).sqrt() * bn / (2.0 * m.sqrt() * sigma_r)
        + 5.0 * bn * bn * (1.0 + kappa) / (8.0 * m * lambda))
}

/// `M = ‖x̄‖∞ + √r/(m·σ_r)·‖Aᵀe‖∞`.
pub fn m_cap(a: &DMatrix<f64>, noise: &DVector<f64>, r: usize, sigma_r: f64, xbar_inf: f64) -> Result<f64> {
    check_len(a.nrows(), noise.len())?;
    if !(sigma_r > 0.0) {
        return Err(Error::InvalidArgument("sparse singular value must be positive".into()));
    }
    let m = a.nrows() as f64;
    Ok(xbar_inf + (r as f64).sqrt() / (m * sigma_r) * a.tr_mul(noise).amax())
}

/// Least squares restricted to a support, with its normal-equation residual.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OracleEstimate {
    #[serde(with = "crate::model::vec_serde")]
    pub x: DVector<f64>,
    /// `A_Sᵀ(Ax − b)`, zero up to rounding.
    #[serde(with = "crate::model::vec_serde")]
    pub certificate: DVector<f64>,
}

pub fn oracle_estimator(a: &DMatrix<f64>, b: &DVector<f64>, support: &[usize]) -> Result<OracleEstimate> {
    check_len(a.nrows(), b.len())?;
    let sub = require_full_rank(a, support)?;
    let z = lstsq_min_norm(&sub, b);
    let mut x = DVector::zeros(a.ncols());
    for (k, &i) in support.iter().enumerate() {
        x[i] = z[k];
    }
    let certificate = sub.tr_mul(&(a * &x - b));
    Ok(OracleEstimate { x, certificate })
}

/// `‖(A_JᵀA_J)⁻¹A_Jᵀ‖` in the spectral norm, i.e. `1/σ_min(A_J)`.
pub fn projection_norm(a: &DMatrix<f64>, subset: &[usize]) -> Result<f64> {
    let sub = require_full_rank(a, subset)?;
    Ok(1.0 / min_singular_value(&sub))
}

/// `(2/(m(1−γ)))·‖A_{S̄ᶜ}ᵀ(I − P_S̄)e‖∞`.
pub fn lambda_floor(a: &DMatrix<f64>, support: &[usize], noise: &DVector<f64>, gamma: f64) -> Result<f64> {
    check_len(a.nrows(), noise.len())?;
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidArgument("gamma must lie in (0, 1)".into()));
    }
    let sub = require_full_rank(a, support)?;
    let resid = noise - &sub * lstsq_min_norm(&sub, noise);
    let mut in_s = vec![false; a.ncols()];
    for &i in support {
        in_s[i] = true;
    }
    let worst = (0..a.ncols())
        .filter(|&j| !in_s[j])
        .map(|j| a.column(j).dot(&resid).abs())
        .fold(0.0, f64::max);
    Ok(2.0 * worst / (a.nrows() as f64 * (1.0 - gamma)))
}

/// Inputs to the magnitude lower bounds `ϑ_k`.
#[derive(Debug, Clone, Copy)]
pub struct ThetaInput {
    pub noise_norm: f64,
    pub lambda: f64,
    pub varsigma0: f64,
    pub r: usize,
    /// `|x̄|_r^↓`, the smallest nonzero magnitude of the true vector.
    pub xbar_rth: f64,
    pub xbar_l1: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ThetaBounds {
    /// `ϑ_0, …, ϑ_{r−1}`.
    pub values: Vec<f64>,
    pub hypotheses_verified: bool,
    /// `σ_A(r + k)` for `k = 0, …, r−1`.
    pub sigma: Vec<f64>,
    pub spectral_norm: f64,
    /// Radius `√(‖e‖² + 2mλ(1+ς₀)‖x̄‖₁)` of the residual constraint.
    pub residual_radius: f64,
}

/// Lower bounds on the `(k+1)`-th largest magnitude of any `x` with
/// `‖Ax − b‖` within the residual radius.
pub fn theta_bounds(a: &DMatrix<f64>, input: ThetaInput, budget: u128) -> Result<ThetaBounds> {
    let (m, n) = (a.nrows() as f64, a.ncols());
    let r = input.r;
    if r == 0 || 2 * r - 1 > n {
        return Err(Error::InvalidArgument(format!("sparsity {r} is incompatible with n = {n}")));
    }
    let sigma: Vec<f64> = (0..r).map(|k| sparse_sigma(a, r + k, budget)).collect::<Result<_>>()?;
    let norm = spectral_norm(a, 1e-10);
    let e = input.noise_norm;
    let radius = (e * e + 2.0 * m * input.lambda * (1.0 + input.varsigma0) * input.xbar_l1).sqrt();
    let values = (0..r)
        .map(|k| {
            (sigma[k] * (m * (r - k) as f64).sqrt() * input.xbar_rth - e - radius)
                / (((n - k) as f64).sqrt() * norm)
        })
        .collect();
    let top = sigma[r - 1];
    let gap = (2.0 * e + (2.0 * m * input.lambda * (1.0 + input.varsigma0) * input.xbar_l1).sqrt()) / (m.sqrt() * top);
    let hypotheses_verified = top > 0.0 && input.xbar_rth > gap;
    Ok(ThetaBounds { values, hypotheses_verified, sigma, spectral_norm: norm, residual_radius: radius })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{exam31, exam41};
    use approx::assert_relative_eq;

    #[test]
    fn scaled_identity_has_unit_sigma() {
        let a = DMatrix::<f64>::identity(4, 4) * 2.0;
        for l in 1..=4 {
            assert_relative_eq!(sparse_sigma(&a, l, SIGMA_BUDGET).unwrap(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn toy_sigma_above_quarter() {
        let (inst, _) = exam31();
        assert!(sparse_sigma(inst.a(), 3, SIGMA_BUDGET).unwrap() > 0.25);
        assert_eq!(sparse_sigma(inst.a(), 5, SIGMA_BUDGET).unwrap(), 0.0);
    }

    #[test]
    fn budget_is_enforced() {
        let a = DMatrix::<f64>::identity(30, 30);
        assert!(matches!(sparse_sigma(&a, 10, 1000), Err(Error::BudgetExceeded { .. })));
    }

    #[test]
    fn kappa_on_toy_is_three() {
        let (inst, truth) = exam41(0.05).unwrap();
        assert_relative_eq!(kappa(inst.a(), &truth.support, KAPPA_BUDGET).unwrap(), 3.0, epsilon = 1e-12);
    }

    #[test]
    fn kappa_zero_for_orthogonal_blocks() {
        let a = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0]);
        assert_eq!(kappa(&a, &[0, 1], KAPPA_BUDGET).unwrap(), 0.0);
    }

    #[test]
    fn kappa_rejects_rank_deficiency() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 1.0, 0.0, 1.0, 1.0, 1.0]);
        let b = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, 1.0, 2.0, 1.0]);
        assert!(kappa(&a, &[0, 2], KAPPA_BUDGET).is_ok());
        assert!(matches!(kappa(&b, &[0, 1], KAPPA_BUDGET), Err(Error::SingularSubmatrix { .. })));
    }

    #[test]
    fn oracle_on_toys() {
        let (inst, truth) = exam41(0.05).unwrap();
        let o = oracle_estimator(inst.a(), inst.b(), &truth.support).unwrap();
        let want = [0.0, 0.0, 2.05, 10.05];
        for i in 0..4 {
            assert_relative_eq!(o.x[i], want[i], epsilon = 1e-12);
        }
        assert!(o.certificate.amax() < 1e-12);
        let (inst, truth) = exam31();
        let o = oracle_estimator(inst.a(), inst.b(), &truth.support).unwrap();
        assert!((o.x - &truth.x_bar).amax() < 1e-12);
    }

    #[test]
    fn lambda_floor_hand_value() {
        let (inst, truth) = exam41(0.05).unwrap();
        let e = truth.noise.unwrap();
        assert_relative_eq!(lambda_floor(inst.a(), &truth.support, &e, 0.5).unwrap(), 1.0 / 15.0, epsilon = 1e-12);
        assert_eq!(lambda_floor(inst.a(), &truth.support, &DVector::zeros(3), 0.5).unwrap(), 0.0);
    }

    #[test]
    fn m_hat_formula_pieces() {
        let (inst, _) = exam41(0.05).unwrap();
        let base = m_hat(&inst, 0.1, 2, 3.0, 0.5).unwrap();
        let doubled = m_hat(&inst, 0.2, 2, 3.0, 0.5).unwrap();
        let bn = inst.b().norm();
        let second = 5.0 * bn * bn * 4.0 / (8.0 * 3.0 * 0.1);
        assert_relative_eq!(base - doubled, second / 2.0, max_relative = 1e-12);
        assert!(m_hat(&inst, 0.1, 2, 3.0, 0.0).is_err());
    }

    #[test]
    fn m_cap_scales_with_noise() {
        let (inst, truth) = exam41(0.05).unwrap();
        let e = truth.noise.unwrap();
        let base = m_cap(inst.a(), &e, 2, 0.5, 10.0).unwrap();
        let twice = m_cap(inst.a(), &(&e * 2.0), 2, 0.5, 10.0).unwrap();
        assert_relative_eq!(twice - 10.0, 2.0 * (base - 10.0), max_relative = 1e-12);
        assert_eq!(m_cap(inst.a(), &DVector::zeros(3), 2, 0.5, 10.0).unwrap(), 10.0);
    }

    #[test]
    fn theta_bound_on_noiseless_toy() {
        let (inst, _) = exam31();
        let lambda = 1.0 / (16.0 * 12.0);
        let input = ThetaInput { noise_norm: 0.0, lambda, varsigma0: 0.0, r: 2, xbar_rth: 2.0, xbar_l1: 12.0 };
        let t = theta_bounds(inst.a(), input, SIGMA_BUDGET).unwrap();
        assert_eq!(t.values.len(), 2);
        assert!(t.values[0] >= t.values[1]);
        let floor = (2f64.sqrt() - 1.0) / (2.0 * 2f64.sqrt() * t.spectral_norm);
        assert!(t.values[1] > floor, "{:?} vs {floor}", t.values);
    }
}

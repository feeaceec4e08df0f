//! Theory diagnostics: sparse singular values, column-correlation and
//! magnitude constants, the oracle estimator, null-space witness searches and
//! the exact `β₀` value when the design has a one-dimensional null space.

mod beta0;
mod constants;
mod nsp;
mod report;

pub use beta0::{beta0_exact_1d, Beta0Outcome};
pub use constants::{
    kappa, lambda_floor, m_cap, m_hat, oracle_estimator, projection_norm, sparse_sigma, sparse_sigma_sampled,
    sparse_sigma_with_support, theta_bounds, OracleEstimate, ThetaBounds, ThetaInput, KAPPA_BUDGET, SIGMA_BUDGET,
};
pub use nsp::{nsp_witness_search, NspQuery, NspVerdict};
pub use report::{diagnose, DiagnoseConfig, DiagnosticsReport, NspRecord};

/// `C(n, k)` in 128-bit arithmetic, saturating.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut c: u128 = 1;
    for i in 0..k as u128 {
        c = match c.checked_mul(n as u128 - i) {
            Some(v) => v / (i + 1),
            None => return u128::MAX,
        };
    }
    c
}

/// The `k`-th largest magnitude (1-based), `|x|_k^↓`.
pub fn kth_largest_magnitude(x: &nalgebra::DVector<f64>, k: usize) -> f64 {
    if k == 0 || k > x.len() {
        return 0.0;
    }
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    mags[k - 1]
}

//! Self-check suite on the small hand-solvable instances, used by the
//! `verify` command.

use std::time::Instant;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::analysis::{beta0_exact_1d, nsp_witness_search, sparse_sigma, NspQuery, SIGMA_BUDGET};
use crate::baselines::{lasso_report, lla, mscr_cl1, BaselineOptions, FoldedConcave};
use crate::data::{exam31, exam41, exam42};
use crate::error::Result;
use crate::iscra;
use crate::model::{relative_error, GroundTruth, SeparablePenalty, SolverOptions};
use crate::prox::{prox_conjugate, prox_primal, ProxQuery};
use crate::ssnal::SsnalOptions;

/// Deliberate faults, so that the suite itself can be tested.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fault {
    /// Perturbs the primal prox by `1e-6` in the identity check.
    CorruptProx,
}

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    /// Regularization used by the baseline contrast check.
    pub lambda: f64,
    pub noise: f64,
    pub moreau_queries: usize,
    pub seed: u64,
    pub fault: Option<Fault>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { lambda: 0.1, noise: 0.05, moreau_queries: 10_000, seed: 0, fault: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", content = "detail", rename_all = "kebab-case")]
pub enum Outcome {
    Pass,
    Fail(String),
    Skipped(String),
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: &'static str,
    pub outcome: Outcome,
    pub elapsed_s: f64,
}

impl CheckResult {
    pub fn failed(&self) -> bool {
        matches!(self.outcome, Outcome::Fail(_))
    }
}

const TRAJECTORY_TOL: f64 = 1e-6;

fn close(got: &DVector<f64>, want: &[f64], tol: f64) -> std::result::Result<(), String> {
    let worst = got.iter().zip(want).map(|(g, w)| (g - w).abs()).fold(0.0, f64::max);
    if got.len() == want.len() && worst <= tol {
        Ok(())
    } else {
        Err(format!("got {:?}, want {want:?}", got.as_slice()))
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn moreau_identity(config: &VerifyConfig) -> std::result::Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let n = 8;
    let mut worst = 0.0f64;
    for _ in 0..config.moreau_queries.div_ceil(n) {
        let weights = DVector::from_fn(n, |_, _| if rng.gen_bool(0.3) { 0.0 } else { rng.gen_range(0.0..2.0) });
        let tilt = DVector::from_fn(n, |_, _| rng.gen_range(-0.5..0.5));
        let radius = DVector::from_fn(n, |_, _| if rng.gen_bool(0.5) { f64::INFINITY } else { rng.gen_range(0.1..5.0) });
        let pen = SeparablePenalty { lambda: rng.gen_range(0.01..1.0), weights, tilt, box_radius: radius };
        let u = DVector::from_fn(n, |_, _| rng.gen_range(-10.0..10.0));
        let t: f64 = rng.gen_range(0.05..20.0);
        let mut x = prox_primal(ProxQuery::new(&u, &pen, t)).map_err(|e| e.to_string())?;
        if config.fault == Some(Fault::CorruptProx) {
            x.add_scalar_mut(1e-6);
        }
        let scaled = &u / t;
        let z = prox_conjugate(ProxQuery::new(&scaled, &pen, 1.0 / t)).map_err(|e| e.to_string())?;
        let gap = (&x + &z * t - &u).amax() / (1.0 + u.amax());
        worst = worst.max(gap);
    }
    ensure(worst <= 1e-12, || format!("largest relative violation {worst:e}"))
}

fn exam41_trajectory(config: &VerifyConfig) -> std::result::Result<(), String> {
    let (inst, _) = exam41(config.noise).map_err(|e| e.to_string())?;
    let lam = 0.1;
    let opts = SolverOptions { rho: 0.8, inner_tolerance: 1e-10, ..SolverOptions::new(lam) };
    let trace = iscra::run(&inst, &opts).map_err(|e| e.to_string())?;
    let e = config.noise;
    let wants: [(&[f64], &[usize]); 3] = [
        (&[2.0 + e, 2.0 - 3.0 * lam, 0.0, 6.0 - e - 3.0 * lam], &[3]),
        (&[e, 0.0, 2.0 - 3.0 * lam, 10.0 - e], &[2]),
        (&[0.0, 0.0, 2.0 + e, 10.0 + e], &[]),
    ];
    ensure(trace.iterates.len() == 3, || format!("{} iterates instead of 3", trace.iterates.len()))?;
    for (rec, (x, sel)) in trace.iterates.iter().zip(wants) {
        close(&rec.x, x, TRAJECTORY_TOL).map_err(|m| format!("iterate {}: {m}", rec.k))?;
        ensure(rec.selected == sel, || format!("iterate {}: selected {:?}", rec.k, rec.selected))?;
    }
    Ok(())
}

fn exam41_contrast(config: &VerifyConfig) -> Result<std::result::Result<(), String>> {
    let (inst, _) = exam41(config.noise)?;
    let lam = config.lambda;
    let opts = SolverOptions { rho: 0.8, inner_tolerance: 1e-10, ..SolverOptions::new(lam) };
    let oracle = GroundTruth::new(DVector::from_vec(vec![0.0, 0.0, 2.0 + config.noise, 10.0 + config.noise]), None);
    let ours = relative_error(&iscra::run(&inst, &opts)?.final_x, &oracle)?;
    if ours >= 1e-6 {
        return Ok(Err(format!("sequential relaxation misses the oracle by {ours:e}")));
    }
    let base = BaselineOptions { inner_tolerance: 1e-10, ..BaselineOptions::new(lam) };
    let e = config.noise;
    let stuck = [2.0 + e, 2.0, 0.0, 6.0 - e];
    for (name, trace) in [("lla-scad", lla(&inst, &base, FoldedConcave::Scad)?), ("mscr-cl1", mscr_cl1(&inst, &base)?)] {
        if let Err(m) = close(&trace.final_x, &stuck, TRAJECTORY_TOL) {
            return Ok(Err(format!("{name}: {m}")));
        }
        let theirs = relative_error(&trace.final_x, &oracle)?;
        if theirs <= 0.1 {
            return Ok(Err(format!("{name} relative error {theirs} is not above 0.1")));
        }
    }
    Ok(Ok(()))
}

fn exam42_trajectory() -> std::result::Result<(), String> {
    let lam = 0.1;
    let (inst, _) = exam42();
    let opts = SolverOptions { rho: 0.2, inner_tolerance: 1e-10, ..SolverOptions::new(lam) };
    let trace = iscra::run(&inst, &opts).map_err(|e| e.to_string())?;
    ensure(trace.iterates.len() >= 3, || format!("only {} iterates", trace.iterates.len()))?;
    ensure(trace.iterates[0].selected == [1], || format!("first selection {:?}", trace.iterates[0].selected))?;
    close(&trace.iterates[1].x, &[2.0 - 16.0 * lam / 3.0, 10.0 - 8.0 * lam / 3.0, 0.0, 0.0, 0.0], TRAJECTORY_TOL)
        .map_err(|m| format!("second iterate: {m}"))?;
    close(&trace.iterates[2].x, &[2.0, 10.0, 0.0, 0.0, 0.0], TRAJECTORY_TOL).map_err(|m| format!("third iterate: {m}"))?;

    let lasso = lasso_report(&inst, lam, &SsnalOptions::with_tol(1e-10)).map_err(|e| e.to_string())?.x_out;
    let dist = distance_to_lasso_segment(&lasso, lam);
    ensure(dist <= 1e-5, || format!("Lasso solution is {dist:e} away from the solution segment"))
}

/// Distance from `x` to `{(2+2t−8λ, 10+t−8λ, t, t, t) : 4λ−1 ≤ t ≤ 0}`.
pub fn distance_to_lasso_segment(x: &DVector<f64>, lambda: f64) -> f64 {
    let base = DVector::from_vec(vec![2.0 - 8.0 * lambda, 10.0 - 8.0 * lambda, 0.0, 0.0, 0.0]);
    let dir = DVector::from_vec(vec![2.0, 1.0, 1.0, 1.0, 1.0]);
    let t = (dir.dot(&(x - &base)) / dir.norm_squared()).clamp(4.0 * lambda - 1.0, 0.0);
    (x - base - dir * t).norm()
}

fn exam31_diagnostics() -> std::result::Result<(), String> {
    let (inst, _) = exam31();
    let a = inst.a();
    for gamma in [0.3, 0.7, 0.9] {
        let v = nsp_witness_search(a, &NspQuery::RobustNsp { r: 2, gamma, tau: 200.0 }, 50, 0);
        ensure(v.is_violated(), || format!("no robust-NSP witness for gamma = {gamma}"))?;
    }
    ensure(nsp_witness_search(a, &NspQuery::Rec { r: 2, c: 2.0 }, 50, 0).is_violated(), || "no REC witness for c = 2".into())?;
    for lam in [0.01, 0.1] {
        let got = beta0_exact_1d(&inst, lam, 0.0).value();
        ensure(got.is_some_and(|v| (v - (9.0 - 4.0 * lam)).abs() <= 1e-8), || format!("beta0({lam}) = {got:?}"))?;
    }
    let sigma = sparse_sigma(a, 3, SIGMA_BUDGET).map_err(|e| e.to_string())?;
    ensure(sigma > 0.25, || format!("sigma_a(3) = {sigma}"))
}

fn timed(name: &'static str, check: impl FnOnce() -> Outcome) -> CheckResult {
    let started = Instant::now();
    let outcome = check();
    CheckResult { name, outcome, elapsed_s: started.elapsed().as_secs_f64() }
}

fn outcome(res: std::result::Result<(), String>) -> Outcome {
    match res {
        Ok(()) => Outcome::Pass,
        Err(m) => Outcome::Fail(m),
    }
}

/// Runs every toy check. The baseline contrast is skipped when `lambda` is
/// outside `[‖e‖∞/3, 2/6.7]`, where the stuck point is known in closed form.
pub fn run_toy_suite(config: &VerifyConfig) -> Vec<CheckResult> {
    vec![
        timed("moreau-identity", || outcome(moreau_identity(config))),
        timed("exam41-trajectory", || outcome(exam41_trajectory(config))),
        timed("exam41-baseline-contrast", || {
            let band = (config.noise / 3.0, 2.0 / 6.7);
            if config.lambda < band.0 || config.lambda > band.1 {
                return Outcome::Skipped(format!("lambda {} outside [{:.4}, {:.4}]", config.lambda, band.0, band.1));
            }
            match exam41_contrast(config) {
                Ok(res) => outcome(res),
                Err(e) => Outcome::Fail(e.to_string()),
            }
        }),
        timed("exam42-trajectory", || outcome(exam42_trajectory())),
        timed("exam31-diagnostics", || outcome(exam31_diagnostics())),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quick() -> VerifyConfig {
        VerifyConfig { moreau_queries: 400, ..VerifyConfig::default() }
    }

    #[test]
    fn suite_passes() {
        let results = run_toy_suite(&quick());
        assert!(results.iter().all(|r| r.outcome == Outcome::Pass), "{results:?}");
    }

    #[test]
    fn out_of_band_lambda_skips_contrast() {
        let results = run_toy_suite(&VerifyConfig { lambda: 0.35, ..quick() });
        let contrast = results.iter().find(|r| r.name == "exam41-baseline-contrast").unwrap();
        assert!(matches!(contrast.outcome, Outcome::Skipped(_)));
        assert!(results.iter().all(|r| !r.failed()));
    }

    #[test]
    fn corrupted_prox_is_caught() {
        let results = run_toy_suite(&VerifyConfig { fault: Some(Fault::CorruptProx), ..quick() });
        let failed: Vec<_> = results.iter().filter(|r| r.failed()).map(|r| r.name).collect();
        assert_eq!(failed, vec!["moreau-identity"]);
    }
}

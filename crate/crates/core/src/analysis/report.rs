use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::beta0::{beta0_exact_1d, Beta0Outcome};
use super::constants::{
    kappa, lambda_floor, m_hat, oracle_estimator, sparse_sigma, sparse_sigma_sampled, theta_bounds, ThetaBounds,
    ThetaInput, KAPPA_BUDGET, SIGMA_BUDGET,
};
use super::kth_largest_magnitude;
use super::nsp::{nsp_witness_search, NspQuery, NspVerdict};
use crate::error::Result;
use crate::model::{GroundTruth, ProblemInstance};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnoseConfig {
    pub lambda: f64,
    /// Sparsity level; defaults to the size of the true support.
    pub r: Option<usize>,
    pub gamma: f64,
    pub tau: f64,
    pub rec_c: f64,
    /// Cap `M` of the restricted conditions; defaults to `‖x̄‖∞`.
    pub cap: Option<f64>,
    pub varsigma0: f64,
    pub search_budget: usize,
    pub seed: u64,
    pub sigma_budget: u128,
    pub kappa_budget: u128,
}

impl DiagnoseConfig {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            r: None,
            gamma: 0.7,
            tau: 200.0,
            rec_c: 2.0,
            cap: None,
            varsigma0: 0.0,
            search_budget: 200,
            seed: 0,
            sigma_budget: SIGMA_BUDGET,
            kappa_budget: KAPPA_BUDGET,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NspRecord {
    pub query: NspQuery,
    pub verdict: NspVerdict,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiagnosticsReport {
    pub sigma_a: BTreeMap<usize, f64>,
    pub kappa: Option<f64>,
    pub m_hat: Option<f64>,
    pub theta: Option<ThetaBounds>,
    pub lambda_floor: Option<f64>,
    pub oracle: Option<Vec<f64>>,
    pub nsp_verdicts: Vec<NspRecord>,
    pub beta0_exact: Option<Beta0Outcome>,
    /// Fields that could not be computed, and estimates that are not certified.
    pub notes: Vec<String>,
}

impl DiagnosticsReport {
    pub fn verdict(&self, pick: impl Fn(&NspQuery) -> bool) -> Option<&NspVerdict> {
        self.nsp_verdicts.iter().find(|rec| pick(&rec.query)).map(|rec| &rec.verdict)
    }
}

/// Computes every diagnostic that the available data allows. Quantities that
/// need the true support are skipped, with a note, when `truth` is absent.
pub fn diagnose(instance: &ProblemInstance, truth: Option<&GroundTruth>, config: &DiagnoseConfig) -> Result<DiagnosticsReport> {
    let a = instance.a();
    let n = instance.n();
    let mut notes = Vec::new();
    let r = match (config.r, truth) {
        (Some(r), _) => r,
        (None, Some(t)) => t.r(),
        (None, None) => {
            notes.push("no sparsity level or true support given; using r = 1".into());
            1
        }
    }
    .clamp(1, n);

    let mut sigma_a = BTreeMap::new();
    for l in 1..=(2 * r).min(n).min(instance.m().max(1)) {
        match sparse_sigma(a, l, config.sigma_budget) {
            Ok(v) => {
                sigma_a.insert(l, v);
            }
            Err(e) => {
                let est = sparse_sigma_sampled(a, l, 2000, config.seed);
                notes.push(format!("sigma_a({l}) not enumerated ({e}); sampled upper estimate {est}"));
                break;
            }
        }
    }

    let mut report = DiagnosticsReport {
        sigma_a,
        kappa: None,
        m_hat: None,
        theta: None,
        lambda_floor: None,
        oracle: None,
        nsp_verdicts: Vec::new(),
        beta0_exact: None,
        notes,
    };

    match truth {
        Some(t) => fill_truth_fields(instance, t, r, config, &mut report),
        None => report.notes.push("true support unavailable: kappa, m_hat, theta, lambda_floor and oracle omitted".into()),
    }

    let beta0 = beta0_exact_1d(instance, config.lambda, config.varsigma0);
    if let Beta0Outcome::Unavailable { reason } = &beta0 {
        report.notes.push(format!("beta0 unavailable: {reason}"));
    }

    let mut queries = vec![
        NspQuery::RobustNsp { r, gamma: config.gamma, tau: config.tau },
        NspQuery::Rec { r, c: config.rec_c },
    ];
    let cap = config.cap.or_else(|| truth.map(|t| t.x_bar.amax()));
    if let (Some(eta), Some(cap)) = (beta0.value(), cap) {
        queries.push(NspQuery::Rrnsp { r, l: r, eta, cap, gamma: config.gamma, tau: config.tau });
    }
    report.nsp_verdicts = queries
        .into_iter()
        .map(|query| {
            let verdict = nsp_witness_search(a, &query, config.search_budget, config.seed);
            NspRecord { query, verdict }
        })
        .collect();
    report.beta0_exact = Some(beta0);
    Ok(report)
}

fn fill_truth_fields(
    instance: &ProblemInstance,
    truth: &GroundTruth,
    r: usize,
    config: &DiagnoseConfig,
    report: &mut DiagnosticsReport,
) {
    let a = instance.a();
    let support = &truth.support;
    match oracle_estimator(a, instance.b(), support) {
        Ok(o) => report.oracle = Some(o.x.iter().copied().collect()),
        Err(e) => report.notes.push(format!("oracle: {e}")),
    }
    match kappa(a, support, config.kappa_budget) {
        Ok(k) => report.kappa = Some(k),
        Err(e) => report.notes.push(format!("kappa: {e}")),
    }
    let sigma_r = report.sigma_a.get(&truth.r().max(1)).copied();
    match (report.kappa, sigma_r) {
        (Some(k), Some(s)) if s > 0.0 => match m_hat(instance, config.lambda, truth.r(), k, s) {
            Ok(v) => report.m_hat = Some(v),
            Err(e) => report.notes.push(format!("m_hat: {e}")),
        },
        _ => report.notes.push("m_hat: needs kappa and a positive sigma_a(r)".into()),
    }
    let noise = truth.noise.clone().unwrap_or_else(|| instance.b() - a * &truth.x_bar);
    match lambda_floor(a, support, &noise, config.gamma) {
        Ok(v) => report.lambda_floor = Some(v),
        Err(e) => report.notes.push(format!("lambda_floor: {e}")),
    }
    let input = ThetaInput {
        noise_norm: noise.norm(),
        lambda: config.lambda,
        varsigma0: config.varsigma0,
        r,
        xbar_rth: kth_largest_magnitude(&truth.x_bar, r),
        xbar_l1: truth.x_bar.lp_norm(1),
    };
    match theta_bounds(a, input, config.sigma_budget) {
        Ok(t) => report.theta = Some(t),
        Err(e) => report.notes.push(format!("theta: {e}")),
    }
}

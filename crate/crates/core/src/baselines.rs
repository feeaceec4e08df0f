//! Comparison methods built from sequences of weighted-ℓ1 problems: plain
//! Lasso, local linear approximation with SCAD or MCP weights, multi-stage
//! capped-ℓ1 relaxation and the DC algorithm for the transformed ℓ1 penalty.

use std::time::Instant;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::iscra::{inner_failed, inner_stats, relative_change};
use crate::model::{IterationRecord, ProblemInstance, SeparablePenalty, SolveTrace, TraceStatus};
use crate::ssnal::{solve_subproblem, SsnalOptions, SsnalReport};

/// Starting point of a reweighting sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum X0Policy {
    Lasso,
    Zero,
    Custom(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineOptions {
    pub lambda: f64,
    pub scad_a: f64,
    pub mcp_a: f64,
    /// Capped-ℓ1 threshold; `None` means `0.5·√(ln n / m)`.
    pub cap_epsilon: Option<f64>,
    pub tl1_a: f64,
    pub tl1_c: f64,
    pub rel_change_tol: f64,
    pub max_outer: usize,
    pub x0_policy: X0Policy,
    pub inner_tolerance: f64,
}

impl BaselineOptions {
    pub fn new(lambda: f64) -> Self {
        Self {
            lambda,
            scad_a: 3.7,
            mcp_a: 3.0,
            cap_epsilon: None,
            tl1_a: 1.0,
            tl1_c: 1e-8,
            rel_change_tol: 1e-3,
            max_outer: 50,
            x0_policy: X0Policy::Lasso,
            inner_tolerance: 1e-6,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if !(self.lambda > 0.0) {
            return bad("lambda must be positive");
        }
        if !(self.scad_a > 2.0) {
            return bad("SCAD parameter must exceed 2");
        }
        if !(self.mcp_a > 1.0) {
            return bad("MCP parameter must exceed 1");
        }
        if !(self.tl1_a > 0.0 && self.tl1_c > 0.0) {
            return bad("transformed-l1 parameters must be positive");
        }
        if matches!(self.cap_epsilon, Some(e) if !(e > 0.0)) {
            return bad("capped-l1 threshold must be positive");
        }
        if !(self.rel_change_tol > 0.0 && self.inner_tolerance > 0.0) || self.max_outer == 0 {
            return bad("tolerances and max_outer must be positive");
        }
        Ok(())
    }

    pub fn cap_epsilon_for(&self, instance: &ProblemInstance) -> f64 {
        self.cap_epsilon
            .unwrap_or_else(|| 0.5 * ((instance.n() as f64).ln() / instance.m() as f64).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FoldedConcave {
    Scad,
    Mcp,
}

/// SCAD derivative divided by `λ`.
pub fn scad_weight(t: f64, lambda: f64, a: f64) -> f64 {
    let t = t.abs();
    if t <= lambda {
        1.0
    } else {
        (a * lambda - t).max(0.0) / ((a - 1.0) * lambda)
    }
}

/// MCP derivative divided by `λ`.
pub fn mcp_weight(t: f64, lambda: f64, a: f64) -> f64 {
    (1.0 - t.abs() / (a * lambda)).max(0.0)
}

pub fn scad_penalty(t: f64, lambda: f64, a: f64) -> f64 {
    let t = t.abs();
    if t <= lambda {
        lambda * t
    } else if t <= a * lambda {
        (2.0 * a * lambda * t - t * t - lambda * lambda) / (2.0 * (a - 1.0))
    } else {
        lambda * lambda * (a + 1.0) / 2.0
    }
}

pub fn mcp_penalty(t: f64, lambda: f64, a: f64) -> f64 {
    let t = t.abs();
    if t <= a * lambda {
        lambda * t - t * t / (2.0 * a)
    } else {
        a * lambda * lambda / 2.0
    }
}

pub fn capped_l1_penalty(t: f64, lambda: f64, cap: f64) -> f64 {
    lambda * t.abs().min(cap)
}

/// `ρ_a(t) = (a + 1)|t| / (a + |t|)`.
pub fn transformed_l1(t: f64, a: f64) -> f64 {
    (a + 1.0) * t.abs() / (a + t.abs())
}

/// Gradient of the convex part removed from `(1 + 1/a)λ|t|` to leave `λρ_a(t)`.
pub fn tl1_tilt(x: &DVector<f64>, lambda: f64, a: f64) -> DVector<f64> {
    x.map(|t| {
        if t == 0.0 {
            0.0
        } else {
            lambda * t.signum() * ((1.0 + 1.0 / a) - a * (a + 1.0) / (a + t.abs()).powi(2))
        }
    })
}

/// Nonconvex objective each method decreases: loss plus its folded penalty.
pub fn nonconvex_objective(instance: &ProblemInstance, x: &DVector<f64>, options: &BaselineOptions, method: Method) -> Result<f64> {
    let lam = options.lambda;
    let loss = crate::model::loss(instance, x)?;
    let pen: f64 = match method {
        Method::Lla(FoldedConcave::Scad) => x.iter().map(|&t| scad_penalty(t, lam, options.scad_a)).sum(),
        Method::Lla(FoldedConcave::Mcp) => x.iter().map(|&t| mcp_penalty(t, lam, options.mcp_a)).sum(),
        Method::MscrCl1 => {
            let cap = options.cap_epsilon_for(instance);
            x.iter().map(|&t| capped_l1_penalty(t, lam, cap)).sum()
        }
        Method::DcaTrl1 => {
            lam * x.iter().map(|&t| transformed_l1(t, options.tl1_a)).sum::<f64>() + options.tl1_c * x.norm_squared()
        }
    };
    Ok(loss + pen)
}

/// The reweighting methods, used to select objectives and drivers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Lla(FoldedConcave),
    MscrCl1,
    DcaTrl1,
}

/// Lasso solution at relative KKT accuracy `1e-6`.
pub fn lasso(instance: &ProblemInstance, lambda: f64) -> Result<DVector<f64>> {
    Ok(lasso_report(instance, lambda, &SsnalOptions::default())?.x_out)
}

pub fn lasso_report(instance: &ProblemInstance, lambda: f64, opts: &SsnalOptions) -> Result<SsnalReport> {
    if !(lambda > 0.0) {
        return Err(Error::InvalidArgument("lambda must be positive".into()));
    }
    solve_subproblem(instance, &SeparablePenalty::lasso(instance.n(), lambda), None, opts)
}

pub fn lla(instance: &ProblemInstance, options: &BaselineOptions, kind: FoldedConcave) -> Result<SolveTrace> {
    let lam = options.lambda;
    let a = match kind {
        FoldedConcave::Scad => options.scad_a,
        FoldedConcave::Mcp => options.mcp_a,
    };
    reweight(instance, options, 0.0, |x| {
        let weights = x.map(|t| match kind {
            FoldedConcave::Scad => scad_weight(t, lam, a),
            FoldedConcave::Mcp => mcp_weight(t, lam, a),
        });
        (SeparablePenalty::weighted_l1(lam, weights), Vec::new())
    })
}

/// Capped-ℓ1 relaxation: each step penalizes `{j : |x_j| ≤ ε}` and leaves
/// the rest free. The set is recomputed from scratch every step.
pub fn mscr_cl1(instance: &ProblemInstance, options: &BaselineOptions) -> Result<SolveTrace> {
    let cap = options.cap_epsilon_for(instance);
    let n = instance.n();
    reweight(instance, options, 0.0, |x| {
        let mask: Vec<bool> = x.iter().map(|t| t.abs() <= cap).collect();
        let working = (0..n).filter(|&i| mask[i]).collect();
        (SeparablePenalty::truncated_l1(n, options.lambda, &mask, f64::INFINITY), working)
    })
}

pub fn dca_trl1(instance: &ProblemInstance, options: &BaselineOptions) -> Result<SolveTrace> {
    let (lam, a) = (options.lambda, options.tl1_a);
    let n = instance.n();
    reweight(instance, options, options.tl1_c, |x| {
        let penalty = SeparablePenalty::weighted_l1(lam, DVector::from_element(n, 1.0 + 1.0 / a)).with_tilt(tl1_tilt(x, lam, a));
        (penalty, Vec::new())
    })
}

/// Shared outer loop: `x⁰` per policy (recorded as iteration 0), then
/// `x^k` = solution of the penalty built from `x^{k−1}`, stopping when the
/// relative change drops below tolerance or after `max_outer` steps.
fn reweight<F>(instance: &ProblemInstance, options: &BaselineOptions, ridge: f64, mut build: F) -> Result<SolveTrace>
where
    F: FnMut(&DVector<f64>) -> (SeparablePenalty, Vec<usize>),
{
    options.validate()?;
    let n = instance.n();
    let inner = SsnalOptions { tol: options.inner_tolerance, ridge, ..SsnalOptions::default() };
    let started = Instant::now();
    let (x0, mut warm, first) = match &options.x0_policy {
        X0Policy::Lasso => {
            let rep = lasso_report(instance, options.lambda, &SsnalOptions::with_tol(options.inner_tolerance))?;
            let stats = inner_stats(&rep, 0);
            (rep.x_out.clone(), None, Some((stats, rep.realized_inexactness)))
        }
        X0Policy::Zero => (DVector::zeros(n), None, None),
        X0Policy::Custom(v) => {
            crate::error::check_len(n, v.len())?;
            (DVector::from_column_slice(v), None, None)
        }
    };
    let mut iterates = vec![IterationRecord {
        k: 0,
        x: x0.clone(),
        selected: Vec::new(),
        working_set: Vec::new(),
        realized_inexactness: first.as_ref().map_or(0.0, |f| f.1),
        inner: first.map(|f| f.0),
        wall_time_s: started.elapsed().as_secs_f64(),
    }];
    let mut prev = x0;
    for k in 1..=options.max_outer {
        let started = Instant::now();
        let (penalty, working) = build(&prev);
        let report = solve_subproblem(instance, &penalty, warm.as_ref(), &inner)?;
        let x = report.x_out.clone();
        if inner_failed(&report, instance, inner.tol) {
            return Err(Error::InnerSolverFailed {
                iteration: k,
                kkt_residual: report.kkt_residual,
                partial: Box::new(SolveTrace { n, iterates, final_x: x, status: TraceStatus::MaxIterations }),
            });
        }
        let change = relative_change(&x, &prev);
        iterates.push(IterationRecord {
            k,
            x: x.clone(),
            selected: Vec::new(),
            working_set: working,
            realized_inexactness: report.realized_inexactness,
            inner: Some(inner_stats(&report, 0)),
            wall_time_s: started.elapsed().as_secs_f64(),
        });
        if change <= options.rel_change_tol {
            return Ok(SolveTrace { n, iterates, final_x: x, status: TraceStatus::ConvergedByRelativeChange });
        }
        warm = Some(report.warm_state(1.0));
        prev = x;
    }
    Ok(SolveTrace { n, iterates, final_x: prev, status: TraceStatus::MaxIterations })
}

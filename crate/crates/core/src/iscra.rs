//! Sequential truncated-ℓ1 relaxation.
//!
//! Each outer step solves a Lasso-type problem in which only the coordinates
//! of the current working set are penalized; the others are free up to a box
//! of radius `μ`. Coordinates whose magnitude is at least `ϱ` times the
//! largest working-set magnitude are then removed from the working set.

use std::time::Instant;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::linalg::{columns, lstsq_min_norm};
use crate::model::{
    InnerStats, IterationRecord, ProblemInstance, SeparablePenalty, SolveTrace, SolverOptions, TraceStatus,
    VarsigmaSchedule,
};
use crate::ssnal::{solve_subproblem, SsnalOptions, SsnalReport, SsnalState, SsnalStatus};

/// Maximum number of tightened re-solves used to meet an inexactness target.
const MAX_RESOLVES: usize = 5;

/// `{i ∈ T : |x_i| ≥ ϱ·max_{j∈T} |x_j|}`.
pub fn select_indices(x: &DVector<f64>, working: &[usize], rho: f64) -> Result<Vec<usize>> {
    if working.is_empty() {
        return Err(Error::InvalidArgument("working set is empty".into()));
    }
    if !(rho > 0.0 && rho <= 1.0) {
        return Err(Error::InvalidArgument(format!("rho must lie in (0, 1], got {rho}")));
    }
    let peak = working.iter().map(|&i| x[i].abs()).fold(0.0, f64::max);
    let threshold = rho * peak;
    Ok(working.iter().copied().filter(|&i| x[i].abs() >= threshold).collect())
}

/// Relative change `‖x − prev‖ / ‖x‖₁`, with `0/0` read as no change.
pub(crate) fn relative_change(x: &DVector<f64>, prev: &DVector<f64>) -> f64 {
    let num = (x - prev).norm();
    let den = x.lp_norm(1);
    if num == 0.0 {
        0.0
    } else if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

pub(crate) fn inner_stats(report: &SsnalReport, resolves: usize) -> InnerStats {
    InnerStats {
        alm_iterations: report.iterations.alm,
        newton_iterations: report.iterations.newton,
        cg_iterations: report.iterations.cg,
        kkt_residual: report.kkt_residual,
        status: report.status,
        resolves,
    }
}

/// An inner solve counts as failed when it hit its caps and is not even
/// accurate to the square root of the requested tolerance.
pub(crate) fn inner_failed(report: &SsnalReport, instance: &ProblemInstance, tol: f64) -> bool {
    report.status == SsnalStatus::MaxIterations
        && !(report.kkt_residual <= tol.sqrt() * instance.b().norm().max(1.0))
}

/// Runs the driver with default inner-solver settings.
pub fn run(instance: &ProblemInstance, options: &SolverOptions) -> Result<SolveTrace> {
    run_with(instance, options, &SsnalOptions::default())
}

/// Runs the driver; `inner.tol` is overridden by `options.inner_tolerance`.
pub fn run_with(instance: &ProblemInstance, options: &SolverOptions, inner: &SsnalOptions) -> Result<SolveTrace> {
    options.validate()?;
    let n = instance.n();
    let mut in_working = vec![true; n];
    let mut working: Vec<usize> = (0..n).collect();
    let mut iterates: Vec<IterationRecord> = Vec::new();
    let mut warm: Option<SsnalReport> = None;

    for k in 1.. {
        let started = Instant::now();
        let penalty = SeparablePenalty::truncated_l1(n, options.lambda, &in_working, options.mu);
        let target = match &options.varsigma_schedule {
            VarsigmaSchedule::ImpliedByInnerTolerance => None,
            VarsigmaSchedule::Targets(t) => Some(t[(k - 1).min(t.len() - 1)]),
        };

        let mut tol = options.inner_tolerance;
        let mut inner_opts = SsnalOptions { tol, ..inner.clone() };
        let start = warm.as_ref().map(|w| w.warm_state(1.0));
        let mut report = solve_subproblem(instance, &penalty, start.as_ref(), &inner_opts)?;
        let mut resolves = 0;
        if let Some(target) = target {
            while report.realized_inexactness > target && resolves < MAX_RESOLVES {
                tol *= 0.1;
                inner_opts.tol = tol;
                let start: SsnalState = report.warm_state(1.0);
                report = solve_subproblem(instance, &penalty, Some(&start), &inner_opts)?;
                resolves += 1;
            }
        }

        let x = report.x_out.clone();
        if inner_failed(&report, instance, tol) {
            let partial = SolveTrace { n, iterates, final_x: x, status: TraceStatus::MaxIterations };
            return Err(Error::InnerSolverFailed {
                iteration: k,
                kkt_residual: report.kkt_residual,
                partial: Box::new(partial),
            });
        }

        let peak = working.iter().map(|&i| x[i].abs()).fold(0.0, f64::max);
        let status = if working.is_empty() {
            Some(TraceStatus::WorkingSetEmpty)
        } else if peak <= options.epsilon {
            Some(TraceStatus::ConvergedByEpsilon)
        } else if let (Some(tol), Some(prev)) = (options.rel_change_tol, iterates.last()) {
            (relative_change(&x, &prev.x) <= tol).then_some(TraceStatus::ConvergedByRelativeChange)
        } else {
            None
        }
        .or_else(|| (k >= options.max_outer).then_some(TraceStatus::MaxIterations));

        let selected = match status {
            Some(_) => Vec::new(),
            None => select_indices(&x, &working, options.rho)?,
        };
        for &i in &selected {
            in_working[i] = false;
        }
        working.retain(|&i| in_working[i]);

        iterates.push(IterationRecord {
            k,
            x: x.clone(),
            selected,
            working_set: working.clone(),
            realized_inexactness: report.realized_inexactness,
            inner: Some(inner_stats(&report, resolves)),
            wall_time_s: started.elapsed().as_secs_f64(),
        });

        if let Some(status) = status {
            return Ok(SolveTrace { n, iterates, final_x: x, status });
        }
        warm = Some(report);
    }
    unreachable!("the outer loop only exits by returning")
}

/// Minimum-norm least squares on the coordinates outside the terminal working set.
pub fn postprocess(instance: &ProblemInstance, trace: &SolveTrace) -> DVector<f64> {
    let n = instance.n();
    let working = trace.terminal_working_set();
    let mut keep = vec![true; n];
    for &i in &working {
        keep[i] = false;
    }
    let support: Vec<usize> = (0..n).filter(|&i| keep[i]).collect();
    let mut x = DVector::zeros(n);
    if support.is_empty() {
        return x;
    }
    let z = lstsq_min_norm(&columns(instance.a(), &support), instance.b());
    for (pos, &i) in support.iter().enumerate() {
        x[i] = z[pos];
    }
    x
}

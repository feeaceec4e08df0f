use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::linalg::null_space;
use crate::model::{ProblemInstance, SeparablePenalty};
use crate::ssnal::{solve_subproblem, SsnalOptions};

/// Smallest sup-norm over the Lasso solution set, when it can be computed exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Beta0Outcome {
    Exact {
        value: f64,
        /// Parameter interval `[lo, hi]` of the solution segment `x + t·d`
        /// (absent when the solution is unique).
        interval: Option<(f64, f64)>,
    },
    Unavailable { reason: String },
}

impl Beta0Outcome {
    pub fn value(&self) -> Option<f64> {
        match self {
            Beta0Outcome::Exact { value, .. } => Some(*value),
            Beta0Outcome::Unavailable { .. } => None,
        }
    }
}

const LASSO_TOL: f64 = 1e-12;

fn unavailable(reason: impl Into<String>) -> Beta0Outcome {
    Beta0Outcome::Unavailable { reason: reason.into() }
}

fn l1_along(x: &DVector<f64>, d: &DVector<f64>, t: f64) -> f64 {
    x.iter().zip(d.iter()).map(|(xi, di)| (xi + t * di).abs()).sum()
}

fn sup_along(x: &DVector<f64>, d: &DVector<f64>, t: f64) -> f64 {
    x.iter().zip(d.iter()).map(|(xi, di)| (xi + t * di).abs()).fold(0.0, f64::max)
}

/// The interval of `t` on which `‖x + t·d‖₁` is minimal. The function is
/// convex and piecewise linear with kinks at `−x_i/d_i`.
fn flat_interval(x: &DVector<f64>, d: &DVector<f64>) -> (f64, f64) {
    let scale = d.amax();
    let mut kinks: Vec<f64> = x
        .iter()
        .zip(d.iter())
        .filter(|(_, di)| di.abs() > 1e-14 * scale)
        .map(|(xi, di)| -xi / di)
        .collect();
    kinks.sort_by(f64::total_cmp);
    kinks.dedup();
    let values: Vec<f64> = kinks.iter().map(|&t| l1_along(x, d, t)).collect();
    let low = values.iter().copied().fold(f64::INFINITY, f64::min);
    let slack = 1e-10 * (1.0 + low);
    let flat: Vec<usize> = (0..kinks.len()).filter(|&k| values[k] <= low + slack).collect();
    (kinks[flat[0]], kinks[*flat.last().unwrap()])
}

/// Minimizes the convex function `‖x + t·d‖∞` over `[lo, hi]` by golden-section search.
fn minimize_sup(x: &DVector<f64>, d: &DVector<f64>, lo: f64, hi: f64) -> f64 {
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    for _ in 0..300 {
        if b - a <= 1e-15 * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        let c = b - ratio * (b - a);
        let e = a + ratio * (b - a);
        if sup_along(x, d, c) <= sup_along(x, d, e) {
            b = e;
        } else {
            a = c;
        }
    }
    [lo, hi, 0.5 * (a + b)].into_iter().map(|t| sup_along(x, d, t)).fold(f64::INFINITY, f64::min)
}

/// Exact `min ‖z‖∞` over the Lasso solution set when `Null(A)` has dimension
/// at most one. `varsigma0` must be zero; the union over tilted problems is
/// not handled.
pub fn beta0_exact_1d(instance: &ProblemInstance, lambda: f64, varsigma0: f64) -> Beta0Outcome {
    if varsigma0 != 0.0 {
        return unavailable("only the untilted solution set (varsigma0 = 0) is supported");
    }
    if !(lambda > 0.0) {
        return unavailable("lambda must be positive");
    }
    let n = instance.n();
    let null = null_space(instance.a());
    if null.ncols() > 1 {
        return unavailable(format!("null space has dimension {}", null.ncols()));
    }
    let opts = SsnalOptions::with_tol(LASSO_TOL);
    let solve = |tilt: DVector<f64>| {
        let pen = SeparablePenalty::lasso(n, lambda).with_tilt(tilt);
        solve_subproblem(instance, &pen, None, &opts).map(|r| r.x_out)
    };
    let x = match solve(DVector::zeros(n)) {
        Ok(x) => x,
        Err(e) => return unavailable(format!("Lasso solve failed: {e}")),
    };
    if null.ncols() == 0 {
        return Beta0Outcome::Exact { value: x.amax(), interval: None };
    }

    let d = null.column(0).into_owned();
    let (lo, hi) = flat_interval(&x, &d);

    // Tilting along ±d pushes the solution toward either end of the segment;
    // both tilted solutions must stay on the line through x.
    let tol = 1e-6 * (1.0 + x.amax());
    for sign in [-1.0, 1.0] {
        let y = match solve(&d * (sign * 1e-6 * lambda)) {
            Ok(y) => y,
            Err(e) => return unavailable(format!("tilted Lasso solve failed: {e}")),
        };
        let diff = &y - &x;
        let t = diff.dot(&d);
        let off_line = (&diff - &d * t).amax();
        if off_line > tol || t < lo - tol || t > hi + tol {
            return unavailable("tilted Lasso solutions leave the null-space segment");
        }
    }

    Beta0Outcome::Exact { value: minimize_sup(&x, &d, lo, hi), interval: Some((lo, hi)) }
}

//! Semismooth Newton augmented Lagrangian solver for
//! `min (1/2s)‖Ax − b‖² + f(x)` with a separable penalty `f`.
//!
//! The augmented Lagrangian is applied to the dual problem
//! `min f*(Aᵀζ) − bᵀζ + (s/2)‖ζ‖²`. After eliminating the splitting variable,
//! each outer step minimizes the smooth, strongly convex function
//!
//! ```text
//! Φ(ζ) = −bᵀζ + (s/2)‖ζ‖² + e_{1/σ} f*(Aᵀζ + x/σ)
//! ```
//!
//! whose gradient is `sζ + A·prox_{σf}(x + σAᵀζ) − b`. The generalized Hessian
//! is `sI + σ·A_J·A_Jᵀ` where `J` collects the coordinates on which the primal
//! prox is locally the identity, which keeps every Newton system small.

use std::borrow::Cow;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::linalg::{conjugate_gradient, spectral_norm};
use crate::model::{ProblemInstance, SeparablePenalty};
use crate::prox::{conj_coord, jacobian_coord, prox_primal_coord, Coord};

/// Least-squares data with an explicit loss scale `s` (the sample count for
/// an unmodified instance).
#[derive(Debug, Clone)]
pub struct LeastSquares<'a> {
    a: Cow<'a, DMatrix<f64>>,
    b: Cow<'a, DVector<f64>>,
    scale: f64,
}

impl<'a> LeastSquares<'a> {
    pub fn from_instance(instance: &'a ProblemInstance) -> Self {
        Self {
            a: Cow::Borrowed(instance.a()),
            b: Cow::Borrowed(instance.b()),
            scale: instance.m() as f64,
        }
    }

    /// Appends the rows `√(2sc)·I` to `A` and zeros to `b`, so that the scaled
    /// loss gains the term `c‖x‖²`.
    pub fn with_ridge(instance: &ProblemInstance, c: f64) -> Self {
        let (m, n) = (instance.m(), instance.n());
        let scale = m as f64;
        let root = (2.0 * scale * c).sqrt();
        let mut a = DMatrix::zeros(m + n, n);
        a.view_mut((0, 0), (m, n)).copy_from(instance.a());
        for j in 0..n {
            a[(m + j, j)] = root;
        }
        let mut b = DVector::zeros(m + n);
        b.rows_mut(0, m).copy_from(instance.b());
        Self { a: Cow::Owned(a), b: Cow::Owned(b), scale }
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn b(&self) -> &DVector<f64> {
        &self.b
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    fn rows(&self) -> usize {
        self.a.nrows()
    }

    fn cols(&self) -> usize {
        self.a.ncols()
    }

    fn column(&self, j: usize) -> &[f64] {
        let m = self.rows();
        &self.a.as_slice()[j * m..(j + 1) * m]
    }

    /// `A·w` skipping zero entries of `w`.
    fn apply_sparse(&self, w: &DVector<f64>) -> DVector<f64> {
        let mut out = DVector::zeros(self.rows());
        for (j, &wj) in w.iter().enumerate() {
            if wj != 0.0 {
                axpy(wj, self.column(j), out.as_mut_slice());
            }
        }
        out
    }

    /// Smooth part `(1/2s)‖Ax − b‖²`.
    pub fn loss(&self, x: &DVector<f64>) -> f64 {
        (self.apply_sparse(x) - self.b.as_ref()).norm_squared() / (2.0 * self.scale)
    }
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

#[inline]
fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Iterate of the augmented Lagrangian method.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SsnalState {
    #[serde(with = "crate::model::vec_serde")]
    pub zeta: DVector<f64>,
    #[serde(with = "crate::model::vec_serde")]
    pub x: DVector<f64>,
    pub sigma: f64,
    pub outer_iter: usize,
    pub newton_iter: usize,
    pub cg_iter: usize,
}

impl SsnalState {
    /// Zero start with `σ = 1`.
    pub fn cold(m: usize, n: usize) -> Self {
        Self::warm(DVector::zeros(m), DVector::zeros(n), 1.0)
    }

    pub fn warm(zeta: DVector<f64>, x: DVector<f64>, sigma: f64) -> Self {
        Self {
            zeta,
            x,
            sigma,
            outer_iter: 0,
            newton_iter: 0,
            cg_iter: 0,
        }
    }
}

/// Tuning knobs for [`solve_subproblem`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SsnalOptions {
    /// Relative KKT target: stop when `kkt_residual ≤ tol·‖b‖`.
    pub tol: f64,
    pub sigma_factor: f64,
    pub sigma_max: f64,
    pub max_alm: usize,
    pub max_newton: usize,
    pub cg_max: usize,
    /// Ridge coefficient `c` of an extra `c‖x‖²` term.
    pub ridge: f64,
}

impl Default for SsnalOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            sigma_factor: 5.0,
            sigma_max: 1e8,
            max_alm: 200,
            max_newton: 100,
            cg_max: 200,
            ridge: 0.0,
        }
    }
}

impl SsnalOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SsnalStatus {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone, Copy, Default, Serialize, Deserialize)]
pub struct SsnalCounters {
    pub alm: usize,
    pub newton: usize,
    pub cg: usize,
    /// Newton steps that fell back to a scaled gradient.
    pub degraded: usize,
}

/// Result of one inner solve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SsnalReport {
    #[serde(with = "crate::model::vec_serde")]
    pub x_out: DVector<f64>,
    #[serde(with = "crate::model::vec_serde")]
    pub zeta_out: DVector<f64>,
    pub kkt_residual: f64,
    pub realized_inexactness: f64,
    pub iterations: SsnalCounters,
    pub status: SsnalStatus,
    pub final_sigma: f64,
}

impl SsnalReport {
    /// State suitable for warm-starting a related solve with a fresh `σ`.
    pub fn warm_state(&self, sigma: f64) -> SsnalState {
        SsnalState::warm(self.zeta_out.clone(), self.x_out.clone(), sigma)
    }
}

/// Quantities of `Φ` at one dual point.
struct PhiEval {
    value: f64,
    grad: DVector<f64>,
    /// Primal candidate `prox_{σf}(x + σAᵀζ)`.
    primal: DVector<f64>,
    /// `Aᵀζ`.
    atz: DVector<f64>,
}

fn check_state(ls: &LeastSquares<'_>, penalty: &SeparablePenalty, state: &SsnalState) -> Result<()> {
    check_len(ls.rows(), state.zeta.len())?;
    check_len(ls.cols(), state.x.len())?;
    check_len(ls.cols(), penalty.len())?;
    if !(state.sigma > 0.0) {
        return Err(Error::InvalidArgument("sigma must be positive".into()));
    }
    Ok(())
}

fn eval_phi(ls: &LeastSquares<'_>, penalty: &SeparablePenalty, zeta: &DVector<f64>, x: &DVector<f64>, sigma: f64) -> PhiEval {
    let atz = ls.a().tr_mul(zeta);
    let n = ls.cols();
    let mut primal = DVector::zeros(n);
    let mut envelope = 0.0;
    for i in 0..n {
        let c = Coord::of(penalty, i);
        let w = prox_primal_coord(x[i] + sigma * atz[i], c, sigma);
        primal[i] = w;
        envelope += w * w / (2.0 * sigma);
        if c.radius.is_finite() {
            let conj_point = atz[i] + (x[i] - w) / sigma;
            envelope += conj_coord(conj_point, c);
        }
    }
    let s = ls.scale();
    let mut grad = ls.apply_sparse(&primal);
    grad.axpy(s, zeta, 1.0);
    grad -= ls.b();
    let value = -ls.b().dot(zeta) + 0.5 * s * zeta.norm_squared() + envelope;
    PhiEval { value, grad, primal, atz }
}

/// `Φ(ζ)` at the given state.
pub fn phi_value(state: &SsnalState, instance: &ProblemInstance, penalty: &SeparablePenalty) -> Result<f64> {
    let ls = LeastSquares::from_instance(instance);
    check_state(&ls, penalty, state)?;
    Ok(eval_phi(&ls, penalty, &state.zeta, &state.x, state.sigma).value)
}

/// `∇Φ(ζ) = mζ + A·prox_{σf}(x + σAᵀζ) − b`.
pub fn grad_phi(state: &SsnalState, instance: &ProblemInstance, penalty: &SeparablePenalty) -> Result<DVector<f64>> {
    let ls = LeastSquares::from_instance(instance);
    check_state(&ls, penalty, state)?;
    Ok(eval_phi(&ls, penalty, &state.zeta, &state.x, state.sigma).grad)
}

/// A Newton direction together with how it was obtained.
#[derive(Debug, Clone)]
pub struct NewtonDirection {
    pub direction: DVector<f64>,
    pub cg_iterations: usize,
    /// Indices `J` with a zero Jacobian entry.
    pub active: Vec<usize>,
    /// CG failed and the direction is `−∇Φ/m`.
    pub degraded: bool,
}

fn active_set(ls: &LeastSquares<'_>, penalty: &SeparablePenalty, atz: &DVector<f64>, x: &DVector<f64>, sigma: f64) -> Vec<usize> {
    let t = 1.0 / sigma;
    (0..ls.cols())
        .filter(|&i| !jacobian_coord(atz[i] + x[i] / sigma, Coord::of(penalty, i), t))
        .collect()
}

fn solve_newton(
    ls: &LeastSquares<'_>,
    active: Vec<usize>,
    grad: &DVector<f64>,
    sigma: f64,
    rel_tol: f64,
    max_iter: usize,
) -> NewtonDirection {
    let s = ls.scale();
    let rhs = -grad;
    if active.is_empty() {
        return NewtonDirection { direction: rhs / s, cg_iterations: 0, active, degraded: false };
    }
    let apply = |v: &DVector<f64>| {
        let mut out = v * s;
        for &j in &active {
            let col = ls.column(j);
            let coef = sigma * dot(col, v.as_slice());
            axpy(coef, col, out.as_mut_slice());
        }
        out
    };
    let cg = conjugate_gradient(apply, &rhs, rel_tol, max_iter);
    if cg.converged && cg.solution.iter().all(|v| v.is_finite()) {
        NewtonDirection { direction: cg.solution, cg_iterations: cg.iterations, active, degraded: false }
    } else {
        NewtonDirection { direction: rhs / s, cg_iterations: cg.iterations, active, degraded: true }
    }
}

/// Solves `(mI + σ·A_J·A_Jᵀ)p = −∇Φ` by conjugate gradients to relative
/// residual `rel_tol`.
pub fn newton_step(
    state: &SsnalState,
    instance: &ProblemInstance,
    penalty: &SeparablePenalty,
    rel_tol: f64,
    max_iter: usize,
) -> Result<NewtonDirection> {
    let ls = LeastSquares::from_instance(instance);
    check_state(&ls, penalty, state)?;
    let ev = eval_phi(&ls, penalty, &state.zeta, &state.x, state.sigma);
    let active = active_set(&ls, penalty, &ev.atz, &state.x, state.sigma);
    Ok(solve_newton(&ls, active, &ev.grad, state.sigma, rel_tol, max_iter))
}

/// `‖x − prox_{s f}(x − Aᵀ(Ax − b))‖`, zero exactly at minimizers.
pub fn kkt_residual_ls(ls: &LeastSquares<'_>, penalty: &SeparablePenalty, x: &DVector<f64>) -> f64 {
    let r = ls.apply_sparse(x) - ls.b();
    let g = ls.a().tr_mul(&r);
    let s = ls.scale();
    (0..x.len())
        .map(|i| {
            let p = prox_primal_coord(x[i] - g[i], Coord::of(penalty, i), s);
            (x[i] - p).powi(2)
        })
        .sum::<f64>()
        .sqrt()
}

/// KKT residual of `x` for the instance with its natural scale.
pub fn kkt_residual(instance: &ProblemInstance, penalty: &SeparablePenalty, x: &DVector<f64>) -> Result<f64> {
    check_len(instance.n(), x.len())?;
    check_len(instance.n(), penalty.len())?;
    Ok(kkt_residual_ls(&LeastSquares::from_instance(instance), penalty, x))
}

/// `λ⁻¹·dist_∞(g, ∂f(x))` with `g = Aᵀ(b − Ax)/s`.
pub fn realized_inexactness_ls(ls: &LeastSquares<'_>, penalty: &SeparablePenalty, x: &DVector<f64>) -> f64 {
    let r = ls.b() - ls.apply_sparse(x);
    let g = ls.a().tr_mul(&r) / ls.scale();
    let mut worst = 0.0_f64;
    for i in 0..x.len() {
        let c = Coord::of(penalty, i);
        let y = g[i] + c.tilt;
        let xi = x[i];
        let dist = if c.radius.is_finite() && xi.abs() >= c.radius {
            let s = xi.signum();
            (c.lw - s * y).max(0.0)
        } else if xi != 0.0 {
            (y - c.lw * xi.signum()).abs()
        } else {
            (y.abs() - c.lw).max(0.0)
        };
        worst = worst.max(dist);
    }
    if penalty.lambda > 0.0 {
        worst / penalty.lambda
    } else {
        worst
    }
}

/// Certified inexactness of `x` as a solution of the penalized problem.
pub fn realized_inexactness(x: &DVector<f64>, instance: &ProblemInstance, penalty: &SeparablePenalty) -> Result<f64> {
    check_len(instance.n(), x.len())?;
    check_len(instance.n(), penalty.len())?;
    Ok(realized_inexactness_ls(&LeastSquares::from_instance(instance), penalty, x))
}

/// Primal objective `(1/2s)‖Ax − b‖² + f(x)`.
pub fn primal_objective_ls(ls: &LeastSquares<'_>, penalty: &SeparablePenalty, x: &DVector<f64>) -> f64 {
    ls.loss(x) + penalty.value(x)
}

/// Dual objective `bᵀζ − (s/2)‖ζ‖² − f*(Aᵀζ)` at `ζ` pulled back along the ray
/// to the origin until it is dual feasible. Returns `(value, scaling)`.
pub fn dual_objective_ls(ls: &LeastSquares<'_>, penalty: &SeparablePenalty, zeta: &DVector<f64>) -> (f64, f64) {
    let atz = ls.a().tr_mul(zeta);
    let mut scaling = 1.0_f64;
    for i in 0..atz.len() {
        let c = Coord::of(penalty, i);
        if c.radius.is_finite() {
            continue;
        }
        if c.tilt.abs() > c.lw {
            return (f64::NEG_INFINITY, 0.0);
        }
        let a = atz[i];
        let limit = if a > 0.0 {
            (c.lw - c.tilt) / a
        } else if a < 0.0 {
            (c.lw + c.tilt) / -a
        } else {
            f64::INFINITY
        };
        scaling = scaling.min(limit);
    }
    let scaling = scaling.max(0.0);
    let z = zeta * scaling;
    let conj: f64 = (0..atz.len())
        .map(|i| {
            let c = Coord::of(penalty, i);
            if c.radius.is_finite() {
                conj_coord(scaling * atz[i], c)
            } else {
                0.0
            }
        })
        .sum();
    (ls.b().dot(&z) - 0.5 * ls.scale() * z.norm_squared() - conj, scaling)
}

pub fn primal_objective(instance: &ProblemInstance, penalty: &SeparablePenalty, x: &DVector<f64>) -> Result<f64> {
    check_len(instance.n(), x.len())?;
    Ok(primal_objective_ls(&LeastSquares::from_instance(instance), penalty, x))
}

pub fn dual_objective(instance: &ProblemInstance, penalty: &SeparablePenalty, zeta: &DVector<f64>) -> Result<f64> {
    check_len(instance.m(), zeta.len())?;
    check_len(instance.n(), penalty.len())?;
    Ok(dual_objective_ls(&LeastSquares::from_instance(instance), penalty, zeta).0)
}

/// Solves the penalized least-squares problem of `instance` to relative KKT
/// accuracy `opts.tol`.
pub fn solve_subproblem(
    instance: &ProblemInstance,
    penalty: &SeparablePenalty,
    warm: Option<&SsnalState>,
    opts: &SsnalOptions,
) -> Result<SsnalReport> {
    if opts.ridge > 0.0 {
        let ls = LeastSquares::with_ridge(instance, opts.ridge);
        let warm = warm.map(|w| {
            let mut w = w.clone();
            if w.zeta.len() == instance.m() {
                let mut z = DVector::zeros(instance.m() + instance.n());
                z.rows_mut(0, instance.m()).copy_from(&w.zeta);
                w.zeta = z;
            }
            w
        });
        solve_ls(&ls, penalty, warm.as_ref(), opts)
    } else {
        solve_ls(&LeastSquares::from_instance(instance), penalty, warm, opts)
    }
}

/// [`solve_subproblem`] on explicit least-squares data.
pub fn solve_ls(
    ls: &LeastSquares<'_>,
    penalty: &SeparablePenalty,
    warm: Option<&SsnalState>,
    opts: &SsnalOptions,
) -> Result<SsnalReport> {
    penalty.validate()?;
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tolerance must be positive".into()));
    }
    let (m, n) = (ls.rows(), ls.cols());
    let mut state = match warm {
        Some(w) => w.clone(),
        None => SsnalState::cold(m, n),
    };
    check_state(ls, penalty, &state)?;

    let s = ls.scale();
    let bnorm = ls.b().norm();
    let target = if bnorm > 0.0 { opts.tol * bnorm } else { opts.tol };
    let anorm = spectral_norm(ls.a(), 1e-3).max(1.0);
    let newton_tol = (0.1 * opts.tol * (1.0 + bnorm) / anorm).max(1e-14 * (1.0 + bnorm));

    let mut counters = SsnalCounters::default();
    let mut residual = kkt_residual_ls(ls, penalty, &state.x);
    let mut best = (residual, state.x.clone(), state.zeta.clone());
    if residual <= target {
        let zeta = (ls.b() - ls.apply_sparse(&state.x)) / s;
        return Ok(finish(ls, penalty, state.x, zeta, residual, counters, SsnalStatus::Converged, state.sigma));
    }

    for _ in 0..opts.max_alm {
        counters.alm += 1;
        let mut ev = eval_phi(ls, penalty, &state.zeta, &state.x, state.sigma);
        for _ in 0..opts.max_newton {
            let gnorm = ev.grad.norm();
            if gnorm <= newton_tol {
                break;
            }
            counters.newton += 1;
            let active = active_set(ls, penalty, &ev.atz, &state.x, state.sigma);
            let forcing = 1e-2 * gnorm.min(1.0);
            let mut dir = solve_newton(ls, active, &ev.grad, state.sigma, forcing, opts.cg_max);
            counters.cg += dir.cg_iterations;
            let mut slope = ev.grad.dot(&dir.direction);
            if !(slope < 0.0) {
                dir.direction = -&ev.grad / s;
                dir.degraded = true;
                slope = ev.grad.dot(&dir.direction);
            }
            if dir.degraded {
                counters.degraded += 1;
            }
            let slack = 1e-14 * (1.0 + ev.value.abs());
            let mut alpha = 1.0;
            let mut accepted = None;
            while alpha >= 1e-12 {
                let trial = &state.zeta + &dir.direction * alpha;
                let tev = eval_phi(ls, penalty, &trial, &state.x, state.sigma);
                if tev.value <= ev.value + 1e-4 * alpha * slope + slack {
                    accepted = Some((trial, tev));
                    break;
                }
                alpha *= 0.5;
            }
            match accepted {
                Some((trial, tev)) => {
                    state.zeta = trial;
                    ev = tev;
                }
                None => break,
            }
        }
        state.x = ev.primal;
        state.outer_iter += 1;
        residual = kkt_residual_ls(ls, penalty, &state.x);
        if residual < best.0 {
            best = (residual, state.x.clone(), state.zeta.clone());
        }
        if residual <= target {
            state.newton_iter = counters.newton;
            state.cg_iter = counters.cg;
            return Ok(finish(ls, penalty, state.x, state.zeta, residual, counters, SsnalStatus::Converged, state.sigma));
        }
        state.sigma = (state.sigma * opts.sigma_factor).min(opts.sigma_max);
    }
    let (residual, x, zeta) = best;
    Ok(finish(ls, penalty, x, zeta, residual, counters, SsnalStatus::MaxIterations, state.sigma))
}

#[allow(clippy::too_many_arguments)]
fn finish(
    ls: &LeastSquares<'_>,
    penalty: &SeparablePenalty,
    x: DVector<f64>,
    zeta: DVector<f64>,
    residual: f64,
    counters: SsnalCounters,
    status: SsnalStatus,
    sigma: f64,
) -> SsnalReport {
    let realized = realized_inexactness_ls(ls, penalty, &x);
    SsnalReport {
        x_out: x,
        zeta_out: zeta,
        kkt_residual: residual,
        realized_inexactness: realized,
        iterations: counters,
        status,
        final_sigma: sigma,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn toy41() -> ProblemInstance {
        let a = DMatrix::from_row_slice(3, 4, &[1.0, -1.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0, 2.0, 0.0, 0.0, 1.0]);
        let b = DVector::from_vec(vec![0.05, 2.05, 10.05]);
        ProblemInstance::new(a, b).unwrap()
    }

    #[test]
    fn lasso_on_toy_matches_closed_form() {
        let inst = toy41();
        let pen = SeparablePenalty::lasso(4, 0.1);
        let rep = solve_subproblem(&inst, &pen, None, &SsnalOptions::with_tol(1e-10)).unwrap();
        assert_eq!(rep.status, SsnalStatus::Converged);
        let want = [2.05, 1.7, 0.0, 5.65];
        for i in 0..4 {
            assert!((rep.x_out[i] - want[i]).abs() < 1e-6, "{:?}", rep.x_out);
        }
        assert!(rep.realized_inexactness < 1e-6);
    }

    #[test]
    fn zero_response_gives_zero() {
        let inst = ProblemInstance::new(DMatrix::from_element(3, 2, 1.0), DVector::zeros(3)).unwrap();
        let rep = solve_subproblem(&inst, &SeparablePenalty::lasso(2, 0.1), None, &SsnalOptions::default()).unwrap();
        assert_eq!(rep.x_out, DVector::zeros(2));
        assert_eq!(rep.status, SsnalStatus::Converged);
    }

    #[test]
    fn gradient_at_origin_is_minus_b() {
        let inst = toy41();
        let pen = SeparablePenalty::lasso(4, 0.1);
        let g = grad_phi(&SsnalState::cold(3, 4), &inst, &pen).unwrap();
        assert_eq!(g, -inst.b());
    }

    #[test]
    fn orthogonal_design_closed_form() {
        let m = 4;
        // Scaled Hadamard columns: AᵀA = m·I.
        let a = DMatrix::from_row_slice(4, 4, &[
            1.0, 1.0, 1.0, 1.0, 1.0, -1.0, 1.0, -1.0, 1.0, 1.0, -1.0, -1.0, 1.0, -1.0, -1.0, 1.0,
        ]);
        let b = DVector::from_vec(vec![3.0, -1.0, 0.5, 2.0]);
        let inst = ProblemInstance::new(a.clone(), b.clone()).unwrap();
        let lambda = 0.4;
        let rep = solve_subproblem(&inst, &SeparablePenalty::lasso(4, lambda), None, &SsnalOptions::with_tol(1e-12)).unwrap();
        let z = a.tr_mul(&b) / m as f64;
        for i in 0..4 {
            let want = crate::prox::soft(z[i], lambda);
            assert_relative_eq!(rep.x_out[i], want, epsilon = 1e-9);
        }
    }

    #[test]
    fn ridge_rows_reproduce_penalty() {
        let inst = toy41();
        let ls = LeastSquares::with_ridge(&inst, 0.3);
        let x = DVector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        let plain = crate::model::loss(&inst, &x).unwrap() + 0.3 * x.norm_squared();
        assert_relative_eq!(ls.loss(&x), plain, max_relative = 1e-14);
    }

    #[test]
    fn inexactness_of_known_truncated_solution() {
        let inst = toy41();
        let pen = SeparablePenalty::truncated_l1(4, 0.1, &[true, true, true, false], 1e3);
        let x = DVector::from_vec(vec![0.05, 0.0, 1.7, 9.95]);
        assert!(realized_inexactness(&x, &inst, &pen).unwrap() < 1e-9);
        assert!(kkt_residual(&inst, &pen, &x).unwrap() < 1e-12);
    }
}

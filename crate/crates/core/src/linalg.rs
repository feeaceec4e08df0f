//! Small dense linear-algebra helpers shared by the solvers and diagnostics.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

/// Columns `cols` of `a` as a new matrix.
pub fn columns(a: &DMatrix<f64>, cols: &[usize]) -> DMatrix<f64> {
    DMatrix::from_fn(a.nrows(), cols.len(), |i, j| a[(i, cols[j])])
}

/// Spectral norm by power iteration on `AᵀA`, to relative accuracy `rel_tol`.
pub fn spectral_norm(a: &DMatrix<f64>, rel_tol: f64) -> f64 {
    let n = a.ncols();
    if n == 0 || a.nrows() == 0 {
        return 0.0;
    }
    // Deterministic start with no special structure.
    let mut v = DVector::from_fn(n, |i, _| 1.0 + 0.1 * ((i * 7919 % 101) as f64 / 101.0));
    v /= v.norm();
    let mut est = 0.0;
    for _ in 0..20_000 {
        let av = a * &v;
        let mut w = a.tr_mul(&av);
        let nw = w.norm();
        if nw == 0.0 {
            return 0.0;
        }
        w /= nw;
        let next = nw.sqrt();
        let done = (next - est).abs() <= rel_tol * next;
        est = next;
        v = w;
        if done {
            break;
        }
    }
    est
}

/// Smallest singular value of a tall or square matrix (0 if it has more columns than rows).
pub fn min_singular_value(a: &DMatrix<f64>) -> f64 {
    if a.ncols() > a.nrows() {
        return 0.0;
    }
    a.clone().svd(false, false).singular_values.min()
}

/// Numerical rank with the usual `max(m,n)·eps·σ_max` cutoff.
pub fn rank(a: &DMatrix<f64>) -> usize {
    if a.ncols() == 0 || a.nrows() == 0 {
        return 0;
    }
    let sv = a.clone().svd(false, false).singular_values;
    let cutoff = sv.max() * f64::EPSILON * a.nrows().max(a.ncols()) as f64;
    sv.iter().filter(|&&s| s > cutoff).count()
}

/// Minimum-norm least-squares solution of `min ‖a z − b‖`.
pub fn lstsq_min_norm(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = smax * f64::EPSILON * a.nrows().max(a.ncols()) as f64;
    svd.solve(b, cutoff).expect("both factors were requested")
}

/// Orthonormal basis of `Null(a)` as the columns of the returned matrix.
pub fn null_space(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.ncols();
    let gram = a.tr_mul(a);
    let eig = SymmetricEigen::new(gram);
    let top = eig.eigenvalues.iter().cloned().fold(0.0_f64, f64::max);
    let cutoff = (top.max(1.0)) * 1e-12 * n as f64;
    let cols: Vec<usize> = (0..n).filter(|&i| eig.eigenvalues[i] <= cutoff).collect();
    columns(&eig.eigenvectors, &cols)
}

/// Outcome of a conjugate-gradient solve.
#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub solution: DVector<f64>,
    pub iterations: usize,
    pub converged: bool,
}

/// Conjugate gradients for a symmetric positive definite operator.
///
/// Stops when `‖r‖ ≤ rel_tol·‖rhs‖` or after `max_iter` iterations.
pub fn conjugate_gradient<F>(apply: F, rhs: &DVector<f64>, rel_tol: f64, max_iter: usize) -> CgOutcome
where
    F: Fn(&DVector<f64>) -> DVector<f64>,
{
    let mut x = DVector::zeros(rhs.len());
    let target = rel_tol * rhs.norm();
    let mut r = rhs.clone();
    let mut rr = r.norm_squared();
    if rr.sqrt() <= target {
        return CgOutcome { solution: x, iterations: 0, converged: true };
    }
    let mut p = r.clone();
    for it in 1..=max_iter {
        let ap = apply(&p);
        let pap = p.dot(&ap);
        if !(pap > 0.0) {
            return CgOutcome { solution: x, iterations: it, converged: false };
        }
        let alpha = rr / pap;
        x.axpy(alpha, &p, 1.0);
        r.axpy(-alpha, &ap, 1.0);
        let rr_next = r.norm_squared();
        if rr_next.sqrt() <= target {
            return CgOutcome { solution: x, iterations: it, converged: true };
        }
        p = &r + &p * (rr_next / rr);
        rr = rr_next;
    }
    CgOutcome { solution: x, iterations: max_iter, converged: false }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn spectral_norm_of_diagonal() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![3.0, -5.0, 1.0]));
        assert_relative_eq!(spectral_norm(&a, 1e-12), 5.0, max_relative = 1e-9);
    }

    #[test]
    fn null_space_of_rank_one() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let ns = null_space(&a);
        assert_eq!(ns.ncols(), 2);
        assert!((&a * &ns).amax() < 1e-12);
    }

    #[test]
    fn min_norm_solution_on_duplicate_columns() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0]);
        let b = DVector::from_vec(vec![2.0, 4.0]);
        let z = lstsq_min_norm(&a, &b);
        assert_relative_eq!(z[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(z[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cg_matches_direct_solve() {
        let m = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.0, 1.0, 3.0, 0.5, 0.0, 0.5, 2.0]);
        let rhs = DVector::from_vec(vec![1.0, -2.0, 0.5]);
        let out = conjugate_gradient(|v| &m * v, &rhs, 1e-14, 50);
        let direct = m.clone().lu().solve(&rhs).unwrap();
        assert!(out.converged);
        assert!((out.solution - direct).amax() < 1e-12);
    }

    #[test]
    fn rank_detects_deficiency() {
        let a = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 2.0, 4.0, 3.0, 6.0]);
        assert_eq!(rank(&a), 1);
        assert_eq!(min_singular_value(&DMatrix::zeros(2, 3)), 0.0);
    }
}

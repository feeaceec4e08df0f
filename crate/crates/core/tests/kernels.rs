mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::Rng;
use sparse_iscra::model::ProblemInstance;
use sparse_iscra::prox::{moreau_envelope_conjugate, prox_conjugate, prox_jacobian_diag, prox_primal, ProxQuery};
use sparse_iscra::ssnal::{grad_phi, newton_step, phi_value, SsnalState};

fn small_state(seed: u64) -> (ProblemInstance, sparse_iscra::model::SeparablePenalty, SsnalState) {
    let mut g = rng(seed);
    let m = g.gen_range(2..=10);
    let n = g.gen_range(2..=15);
    let a = gaussian_matrix(&mut g, m, n);
    let b = gaussian_vector(&mut g, m) * 3.0;
    let inst = ProblemInstance::new(a, b).unwrap();
    let lambda = g.gen_range(0.05..1.0);
    let mu = g.gen_range(0.5..5.0);
    let pen = truncated_penalty(&mut g, n, lambda, mu);
    let state = SsnalState::warm(gaussian_vector(&mut g, m), gaussian_vector(&mut g, n), g.gen_range(0.1..50.0));
    (inst, pen, state)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn moreau_decomposition_holds(seed in any::<u64>()) {
        let mut g = rng(seed);
        let n = 10;
        let pen = general_penalty(&mut g, n);
        let u = gaussian_vector(&mut g, n) * g.gen_range(0.1..20.0);
        let t = g.gen_range(0.01..50.0);
        let x = prox_primal(ProxQuery::new(&u, &pen, t)).unwrap();
        let z = prox_conjugate(ProxQuery::new(&(&u / t), &pen, 1.0 / t)).unwrap();
        let gap = (&x + z * t - &u).amax();
        prop_assert!(gap <= 1e-12 * (1.0 + u.amax()), "gap {gap:e}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn prox_maps_are_firmly_nonexpansive(seed in any::<u64>()) {
        let mut g = rng(seed);
        let n = 8;
        let pen = general_penalty(&mut g, n);
        let t = g.gen_range(0.05..10.0);
        let u = gaussian_vector(&mut g, n) * 4.0;
        let v = gaussian_vector(&mut g, n) * 4.0;
        for conj in [false, true] {
            let map = |p: &DVector<f64>| {
                let q = ProxQuery::new(p, &pen, t);
                if conj { prox_conjugate(q).unwrap() } else { prox_primal(q).unwrap() }
            };
            let d = map(&u) - map(&v);
            let lhs = d.norm_squared();
            let rhs = d.dot(&(&u - &v));
            prop_assert!(lhs <= rhs + 1e-12 * (1.0 + rhs.abs()), "{lhs} > {rhs}");
        }
    }

    #[test]
    fn envelope_gradient_matches_central_differences(seed in any::<u64>()) {
        let mut g = rng(seed);
        let n = 6;
        let pen = general_penalty(&mut g, n);
        let t = g.gen_range(0.1..5.0);
        let u = gaussian_vector(&mut g, n) * 3.0;
        let grad = (&u - prox_conjugate(ProxQuery::new(&u, &pen, t)).unwrap()) / t;
        let h = 1e-6;
        let env = |p: &DVector<f64>| moreau_envelope_conjugate(ProxQuery::new(p, &pen, t)).unwrap();
        let fd = DVector::from_fn(n, |i, _| {
            let mut up = u.clone();
            let mut dn = u.clone();
            up[i] += h;
            dn[i] -= h;
            (env(&up) - env(&dn)) / (2.0 * h)
        });
        let err = (&fd - &grad).norm();
        prop_assert!(err <= 1e-6 * grad.norm().max(1.0), "fd {fd:?} vs {grad:?}");
    }

    #[test]
    fn jacobian_diag_matches_finite_differences(seed in any::<u64>()) {
        let mut g = rng(seed);
        let n = 8;
        let (lambda, mu) = (g.gen_range(0.05..1.0), g.gen_range(0.5..3.0));
        let pen = truncated_penalty(&mut g, n, lambda, mu);
        let t = g.gen_range(0.05..5.0);
        let u = gaussian_vector(&mut g, n) * 2.0;
        let diag = prox_jacobian_diag(ProxQuery::new(&u, &pen, t)).unwrap();
        let h = 1e-7;
        let up = prox_conjugate(ProxQuery::new(&u.add_scalar(h), &pen, t)).unwrap();
        let dn = prox_conjugate(ProxQuery::new(&u.add_scalar(-h), &pen, t)).unwrap();
        for i in 0..n {
            let slope = (up[i] - dn[i]) / (2.0 * h);
            // Skip points within h of a kink.
            if (slope - slope.round()).abs() < 1e-6 {
                prop_assert_eq!(slope.round(), diag[i]);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn grad_phi_matches_finite_differences(seed in any::<u64>()) {
        let (inst, pen, state) = small_state(seed);
        let grad = grad_phi(&state, &inst, &pen).unwrap();
        let h = 1e-5;
        let fd = DVector::from_fn(inst.m(), |i, _| {
            let mut up = state.clone();
            let mut dn = state.clone();
            up.zeta[i] += h;
            dn.zeta[i] -= h;
            (phi_value(&up, &inst, &pen).unwrap() - phi_value(&dn, &inst, &pen).unwrap()) / (2.0 * h)
        });
        let err = (&fd - &grad).norm();
        prop_assert!(err <= 1e-6 * grad.norm().max(1.0), "err {err:e}, grad {grad:?}");
    }

    #[test]
    fn newton_direction_matches_dense_solve(seed in any::<u64>()) {
        let (inst, pen, state) = small_state(seed);
        let step = newton_step(&state, &inst, &pen, 1e-15, 500).unwrap();
        prop_assert!(!step.degraded);

        // Oracle: primal-prox derivative by finite differences, then a dense LU solve
        // of (m·I + σ·A·D·Aᵀ) p = −∇Φ.
        let (a, sigma) = (inst.a(), state.sigma);
        let u = &state.x + a.tr_mul(&state.zeta) * sigma;
        let h = 1e-7;
        let up = prox_primal(ProxQuery::new(&u.add_scalar(h), &pen, sigma)).unwrap();
        let dn = prox_primal(ProxQuery::new(&u.add_scalar(-h), &pen, sigma)).unwrap();
        let slopes: Vec<f64> = (0..inst.n()).map(|i| (up[i] - dn[i]) / (2.0 * h)).collect();
        prop_assume!(slopes.iter().all(|s| (s - s.round()).abs() < 1e-6));
        let d = DMatrix::from_diagonal(&DVector::from_iterator(inst.n(), slopes.iter().map(|s| s.round())));
        let hess = DMatrix::identity(inst.m(), inst.m()) * inst.m() as f64 + a * d * a.transpose() * sigma;
        let rhs = -grad_phi(&state, &inst, &pen).unwrap();
        let dense = hess.lu().solve(&rhs).unwrap();
        let err = (&step.direction - &dense).norm();
        prop_assert!(err <= 1e-10 * dense.norm().max(1e-300), "err {err:e}");
    }
}

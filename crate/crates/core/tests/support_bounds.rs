mod common;

use common::*;
use itertools::Itertools;
use proptest::prelude::*;
use rand::Rng;
use sparse_iscra::analysis::{
    kappa, m_hat, nsp_witness_search, oracle_estimator, projection_norm, sparse_sigma, NspQuery, NspVerdict, KAPPA_BUDGET,
    SIGMA_BUDGET,
};
use sparse_iscra::model::{ProblemInstance, SeparablePenalty};
use sparse_iscra::ssnal::{solve_subproblem, SsnalOptions};

fn support_of(x: &nalgebra::DVector<f64>) -> Vec<usize> {
    (0..x.len()).filter(|&i| x[i] != 0.0).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn projection_norm_is_bounded_by_sparse_singular_value(seed in any::<u64>()) {
        let mut g = rng(seed);
        let r = g.gen_range(1..=6);
        let (inst, xbar) = planted_instance(&mut g, 30, 14, r);
        let support = support_of(&xbar);
        let sigma = sparse_sigma(inst.a(), r, SIGMA_BUDGET).unwrap();
        prop_assume!(sigma > 0.0);
        let m = inst.m() as f64;
        for size in 1..=r {
            for subset in support.iter().copied().combinations(size) {
                let lhs = m.sqrt() * projection_norm(inst.a(), &subset).unwrap();
                prop_assert!(lhs <= (1.0 / sigma) * (1.0 + 1e-10), "{subset:?}: {lhs} > {}", 1.0 / sigma);
            }
        }
    }

    #[test]
    fn oracle_estimator_properties(seed in any::<u64>()) {
        let mut g = rng(seed);
        let r = g.gen_range(1..=6);
        let m = 40;
        let a = gaussian_matrix(&mut g, m, 16);
        let mut xbar = nalgebra::DVector::zeros(16);
        for i in rand::seq::index::sample(&mut g, 16, r).into_iter() {
            xbar[i] = g.gen_range(1.0..5.0);
        }
        let noise = gaussian_vector(&mut g, m) * 0.3;
        let b = &a * &xbar + &noise;
        let inst = ProblemInstance::new(a.clone(), b.clone()).unwrap();
        let support = support_of(&xbar);
        let sigma = sparse_sigma(&a, r, SIGMA_BUDGET).unwrap();
        let oracle = oracle_estimator(&a, &b, &support).unwrap();
        prop_assert!(oracle.certificate.amax() <= 1e-9 * (1.0 + b.norm()));

        let lambda = inst.lambda_from_scale(10.0);
        let k = kappa(&a, &support, KAPPA_BUDGET).unwrap();
        let cap = m_hat(&inst, lambda, r, k, sigma).unwrap();
        prop_assert!(oracle.x.lp_norm(1) <= 0.8 * cap);

        let bound = r as f64 * a.tr_mul(&noise).amax() / (m as f64 * sigma);
        let dist = (&xbar - &oracle.x).lp_norm(1);
        prop_assert!(dist <= bound * (1.0 + 1e-10), "{dist} > {bound}");
    }

    #[test]
    fn subproblem_solutions_respect_the_l1_cap(seed in any::<u64>()) {
        let mut g = rng(seed);
        let r = g.gen_range(1..=4);
        let (inst, xbar) = planted_instance(&mut g, 50, 14, r);
        let support = support_of(&xbar);
        let sigma = sparse_sigma(inst.a(), r, SIGMA_BUDGET).unwrap();
        let k = kappa(inst.a(), &support, KAPPA_BUDGET).unwrap();
        let lambda = inst.lambda_from_scale(g.gen_range(1.0..20.0));
        // Unpenalize a random subset J of the true support, boxed by μ.
        let working: Vec<bool> = (0..14).map(|i| !(support.contains(&i) && g.gen_bool(0.5))).collect();
        let pen = SeparablePenalty::truncated_l1(14, lambda, &working, 1e3);
        let rep = solve_subproblem(&inst, &pen, None, &SsnalOptions::with_tol(1e-9)).unwrap();
        let cap = m_hat(&inst, lambda, r, k, sigma).unwrap();
        prop_assert!(rep.x_out.lp_norm(1) <= cap * (1.0 + 1e-6));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100_000))]

    #[test]
    fn capped_difference_inequality(a in -10.0f64..10.0, w in -30.0f64..30.0, slack in 0.0f64..10.0) {
        let cap = a.abs() + slack + 1e-12;
        let lhs = a.abs() - (a + w).abs();
        let rhs = w.abs().min(2.0 * cap - w.abs());
        prop_assert!(lhs <= rhs + 1e-12 * (1.0 + cap));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(30))]

    #[test]
    fn restricted_witnesses_also_violate_the_robust_inequality(seed in any::<u64>()) {
        let mut g = rng(seed);
        let m = g.gen_range(3..=6);
        let n = m + g.gen_range(1..=4);
        let a = gaussian_matrix(&mut g, m, n);
        let r = g.gen_range(1..=2);
        let gamma = g.gen_range(0.2..0.9);
        let tau = g.gen_range(0.1..5.0);
        let query = NspQuery::Rrnsp { r, l: r, eta: g.gen_range(0.0..0.5), cap: g.gen_range(0.5..3.0), gamma, tau };
        if let NspVerdict::Violated { witness, support, .. } = nsp_witness_search(&a, &query, 60, seed) {
            let d = nalgebra::DVector::from_vec(witness);
            let on: f64 = support.iter().map(|&i| d[i].abs()).sum();
            let off = d.lp_norm(1) - on;
            let rhs = gamma * off + tau * (r as f64 / m as f64).sqrt() * (&a * &d).norm();
            prop_assert!(on > rhs - 1e-12 * (1.0 + on));
        }
    }

    #[test]
    fn positive_restricted_eigenvalue_rules_out_robust_witnesses(seed in any::<u64>()) {
        let mut g = rng(seed);
        let n = g.gen_range(4..=8);
        let a = gaussian_matrix(&mut g, n + 4, n);
        let c = g.gen_range(1.5..4.0);
        let r = g.gen_range(1..=2);
        let chi = match nsp_witness_search(&a, &NspQuery::Rec { r, c }, 200, seed) {
            NspVerdict::NoViolationFound { estimate: Some(chi), .. } => chi,
            _ => return Ok(()),
        };
        // Sampling only bounds χ(c) from above, so use the certified lower
        // bound min σ_min(A)/√m instead.
        let floor = sparse_sigma(&a, n, SIGMA_BUDGET).unwrap();
        prop_assume!(floor > 0.0 && floor <= chi);
        let query = NspQuery::RobustNsp { r, gamma: 1.0 / c, tau: 1.0 / floor };
        prop_assert!(!nsp_witness_search(&a, &query, 200, seed).is_violated());
    }
}

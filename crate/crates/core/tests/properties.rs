use nalgebra::DMatrix;
use proptest::prelude::*;

use ness_core::lax::{lax_xxz, r6v, r6v_symmetric, Model};
use ness_core::liouvillian::{lindblad_apply, DrivingSpec};
use ness_core::mpo::{coupling_from_spin, solve_spin_param, DenseOperator};
use ness_core::qalgebra::{qnum, verma_sl2, QParams};
use ness_core::sparse::{dense_max_abs, SparseMat};
use ness_core::verify::{rll_residual, ybe_residual};
use ness_core::C64;

fn cplx(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn arb_c(scale: f64) -> impl Strategy<Value = C64> {
    (-scale..scale, -scale..scale).prop_map(|(a, b)| cplx(a, b))
}

fn random_state(n: usize, seed: &[f64]) -> DenseOperator {
    let d = 1usize << n;
    let a = DMatrix::from_fn(d, d, |i, j| cplx(seed[(i * d + j) % seed.len()], seed[(i + 3 * j + 1) % seed.len()]));
    let rho = &a * a.adjoint();
    let tr = rho.trace();
    DenseOperator::new(2, n, rho / tr).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn generator_is_trace_free_and_hermiticity_preserving(
        g in 0.0f64..1.5,
        gam in 0.1f64..3.0,
        n in 2usize..4,
        seed in prop::collection::vec(-1.0f64..1.0, 7..23),
    ) {
        let rho = random_state(n, &seed);
        let out = lindblad_apply(&rho, Model::Xxz { gamma: g }, &DrivingSpec::maximal_xxz(gam)).unwrap();
        prop_assert!(out.trace().norm() < 1e-12);
        prop_assert!(dense_max_abs(&(&out.matrix - out.matrix.adjoint())) < 1e-12);
    }

    #[test]
    fn r_matrices_satisfy_ybe(g in 0.05f64..1.5, lam in arb_c(0.8), mu in arb_c(0.8)) {
        let p = QParams::new(g);
        prop_assert!(ybe_residual(|x| r6v(x, &p), lam, mu) < 1e-11);
        prop_assert!(ybe_residual(|x| r6v_symmetric(x, &p), lam, mu) < 1e-11);
    }

    #[test]
    fn lax_intertwines(g in 0.05f64..1.4, lam in arb_c(0.6), mu in arb_c(0.6), s in arb_c(1.5)) {
        let p = QParams::new(g);
        let rep = verma_sl2(s, &p, 7).unwrap();
        let a = lax_xxz(&rep, &p.clone().with_lambda(lam)).unwrap();
        let b = lax_xxz(&rep, &p.clone().with_lambda(mu)).unwrap();
        prop_assert!(rll_residual(&r6v_symmetric(lam - mu, &p), &a, &b) < 1e-11);
    }

    #[test]
    fn q_numbers_obey_the_three_term_recursion(x in arb_c(2.0), g in 0.01f64..1.5) {
        // [2][x] = [x+1] + [x-1], [-x] = -[x]
        let two = qnum(cplx(2.0, 0.0), g);
        let lhs = two * qnum(x, g);
        let rhs = qnum(x + 1.0, g) + qnum(x - 1.0, g);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + lhs.norm()));
        prop_assert!((qnum(-x, g) + qnum(x, g)).norm() <= 1e-12 * (1.0 + qnum(x, g).norm()));
        prop_assert!((two - 2.0 * g.cos()).norm() < 1e-12);
    }

    #[test]
    fn verma_generators_close_on_interior(s in arb_c(2.0), g in 0.0f64..1.4) {
        let p = QParams::new(g);
        let d = 8;
        let rep = verma_sl2(s, &p, d).unwrap();
        let sp = rep.generator("S+").unwrap();
        let sm = rep.generator("S-").unwrap();
        let comm = &(sp * sm) - &(sm * sp);
        let want = SparseMat::from_diag(&rep.sz_diag().unwrap().iter().map(|z| qnum(z * 2.0, g)).collect::<Vec<_>>());
        // the last row sees the cutoff
        let diff = (&comm - &want).leading(d - 1).max_abs();
        prop_assert!(diff <= 1e-10 * (1.0 + want.max_abs()));
    }

    #[test]
    fn spin_parameter_inverts_coupling(g in 0.0f64..1.5, gam in 0.05f64..10.0) {
        let s = solve_spin_param(g, gam).unwrap();
        prop_assert!((coupling_from_spin(g, s) - gam).norm() < 1e-9 * gam.max(1.0));
    }

    #[test]
    fn sparse_products_match_dense(
        a in prop::collection::vec((0usize..5, 0usize..4, -1.0f64..1.0), 0..12),
        b in prop::collection::vec((0usize..4, 0usize..3, -1.0f64..1.0), 0..12),
    ) {
        let ta: Vec<_> = a.iter().map(|&(i, j, v)| (i, j, cplx(v, 0.5 * v))).collect();
        let tb: Vec<_> = b.iter().map(|&(i, j, v)| (i, j, cplx(-v, v))).collect();
        let sa = SparseMat::from_triplets(5, 4, ta);
        let sb = SparseMat::from_triplets(4, 3, tb);
        let (da, db) = (sa.to_dense(), sb.to_dense());
        prop_assert!(dense_max_abs(&((&sa * &sb).to_dense() - &da * &db)) < 1e-14);
        prop_assert!(dense_max_abs(&(sa.kron(&sb).to_dense() - da.kronecker(&db))) < 1e-14);
        prop_assert!(dense_max_abs(&(sa.adjoint().to_dense() - da.adjoint())) == 0.0);
    }
}

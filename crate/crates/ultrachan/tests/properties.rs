//! Randomized law checking across both engines.

use num_complex::Complex64;
use proptest::prelude::*;
use std::collections::BTreeSet;

use ultrachan::channel::{cesaro_limit, QuantumChannel};
use ultrachan::group::{FiniteGroup, GroupMeasure};
use ultrachan::operator::CMatrix;
use ultrachan::sets::{
    integrate_two_valued, ultralimit, DomainKind, GeneratorKind, OracleKind, SetAlgebra, SetExpr,
    StepFunction, TwoValuedMeasure, UltrafilterOracle,
};
use ultrachan::symbolic::{evaluate, yosida_hewitt_split, SymbolicObservable, SymbolicState};

fn weights(order: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.01..1.0f64, order).prop_map(|mut w| {
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|x| *x /= total);
        w
    })
}

/// Expression trees over two fixed generator names.
fn exprs() -> impl Strategy<Value = SetExpr> {
    let leaf = prop_oneof![
        Just(SetExpr::gen("a")),
        Just(SetExpr::gen("b")),
        Just(SetExpr::Empty),
        Just(SetExpr::Full),
    ];
    leaf.prop_recursive(3, 16, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(SetExpr::not),
            (inner.clone(), inner.clone()).prop_map(|(x, y)| SetExpr::and(x, y)),
            (inner.clone(), inner).prop_map(|(x, y)| SetExpr::or(x, y)),
        ]
    })
}

fn two_gen_algebra() -> ultrachan::sets::SharedAlgebra {
    let alg = SetAlgebra::new(DomainKind::Integers);
    {
        let mut a = alg.borrow_mut();
        a.register_generator(
            "a",
            GeneratorKind::Residue { modulus: 2, residues: BTreeSet::from([0]) },
        )
        .unwrap();
        a.register_generator(
            "b",
            GeneratorKind::Residue { modulus: 3, residues: BTreeSet::from([0]) },
        )
        .unwrap();
    }
    alg
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 64,
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    /// (μ*ν)*λ = μ*(ν*λ) on cyclic groups.
    #[test]
    fn convolution_is_associative(
        order in 2usize..6,
        seed_a in proptest::collection::vec(0.01..1.0f64, 6),
        seed_b in proptest::collection::vec(0.01..1.0f64, 6),
        seed_c in proptest::collection::vec(0.01..1.0f64, 6),
    ) {
        let g = FiniteGroup::cyclic(order);
        let norm = |v: &[f64]| {
            let w: Vec<f64> = v[..order].to_vec();
            let t: f64 = w.iter().sum();
            GroupMeasure::new(g.clone(), w.iter().map(|x| x / t).collect()).unwrap()
        };
        let (a, b, c) = (norm(&seed_a), norm(&seed_b), norm(&seed_c));
        let lhs = a.convolve(&b).unwrap().convolve(&c).unwrap();
        let rhs = a.convolve(&b.convolve(&c).unwrap()).unwrap();
        prop_assert!(lhs.total_variation(&rhs).unwrap() < 1e-12);
    }

    /// Haar absorbs any measure under convolution, on either side.
    #[test]
    fn haar_is_absorbing(order in 2usize..6, raw in proptest::collection::vec(0.01..1.0f64, 6)) {
        let g = FiniteGroup::cyclic(order);
        let w: Vec<f64> = raw[..order].to_vec();
        let t: f64 = w.iter().sum();
        let mu = GroupMeasure::new(g.clone(), w.iter().map(|x| x / t).collect()).unwrap();
        let haar = GroupMeasure::haar_uniform(g);
        prop_assert!(mu.convolve(&haar).unwrap().total_variation(&haar).unwrap() < 1e-12);
        prop_assert!(haar.convolve(&mu).unwrap().total_variation(&haar).unwrap() < 1e-12);
    }

    /// Mixed phase-unitary channels preserve the trace and have PSD Choi
    /// matrices.
    #[test]
    fn channels_are_cptp(
        phases in proptest::collection::vec(0.0..std::f64::consts::TAU, 6),
        ws in weights(2),
    ) {
        let u1 = CMatrix::from_fn(3, 3, |i, j| if i == j {
            Complex64::from_polar(1.0, phases[i])
        } else {
            Complex64::new(0.0, 0.0)
        });
        // A non-diagonal partner: cyclic permutation with phases.
        let u2 = CMatrix::from_fn(3, 3, |i, j| if (i + 1) % 3 == j {
            Complex64::from_polar(1.0, phases[3 + i])
        } else {
            Complex64::new(0.0, 0.0)
        });
        let phi = QuantumChannel::mixed_unitary(vec![(ws[0], u1), (ws[1], u2)]).unwrap();
        let choi = phi.choi();
        prop_assert!(choi.min_eigenvalue() >= -1e-9);
        let marginal = choi.input_marginal();
        for i in 0..3 {
            for j in 0..3 {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((marginal[(i, j)] - Complex64::new(want, 0.0)).norm() < 1e-10);
            }
        }
    }

    /// Cesàro limits of phase-permutation channels obey the projection laws.
    #[test]
    fn cesaro_limits_are_projections(
        phases in proptest::collection::vec(0.0..std::f64::consts::TAU, 2),
    ) {
        let u = CMatrix::from_fn(2, 2, |i, j| if i == j {
            Complex64::from_polar(1.0, phases[i])
        } else {
            Complex64::new(0.0, 0.0)
        });
        let phi = QuantumChannel::unitary(u).unwrap();
        let (limit, _) = cesaro_limit(&phi, 1e-10, 1 << 40).unwrap();
        let laws = [
            limit.compose(&phi).unwrap().distance(&limit).unwrap(),
            phi.compose(&limit).unwrap().distance(&limit).unwrap(),
            limit.compose(&limit).unwrap().distance(&limit).unwrap(),
        ];
        for d in laws {
            prop_assert!(d < 1e-7);
        }
    }

    /// Normalization is idempotent: the expression form of a normalized set
    /// normalizes to itself.
    #[test]
    fn normalize_is_idempotent(e in exprs()) {
        let alg = two_gen_algebra();
        let mut a = alg.borrow_mut();
        let m1 = a.normalize(&e).unwrap();
        let back = a.mask_to_expr(&m1);
        let m2 = a.normalize(&back).unwrap();
        prop_assert_eq!(m1, m2);
    }

    /// Exactly one of X, ¬X is in any fully pinned-down oracle, and the
    /// decision respects De Morgan rewrites of the query.
    #[test]
    fn oracle_dichotomy(e in exprs(), da in any::<bool>(), db in any::<bool>()) {
        let alg = two_gen_algebra();
        let oracle = UltrafilterOracle::new(alg, OracleKind::FreeSymbolic);
        oracle.register_decision(&SetExpr::gen("a"), da).unwrap();
        oracle.register_decision(&SetExpr::gen("b"), db).unwrap();
        let x = oracle.decide(&e).unwrap();
        let nx = oracle.decide(&SetExpr::not(e.clone())).unwrap();
        prop_assert_ne!(x, nx);
        // Intersecting with a decided-in set keeps the decision.
        let a_side = if da { SetExpr::gen("a") } else { SetExpr::not(SetExpr::gen("a")) };
        let meet = oracle.decide(&SetExpr::and(e, a_side)).unwrap();
        prop_assert_eq!(meet, x);
    }

    /// Integration against a two-valued measure is bitwise the ultralimit.
    #[test]
    fn integral_is_ultralimit(
        point in -20i64..20,
        vals in proptest::collection::vec((-5.0..5.0f64, -5.0..5.0f64), 4),
    ) {
        let alg = two_gen_algebra();
        let a = SetExpr::gen("a");
        let b = SetExpr::gen("b");
        let cells = vec![
            SetExpr::and(a.clone(), b.clone()),
            SetExpr::and(a.clone(), SetExpr::not(b.clone())),
            SetExpr::and(SetExpr::not(a.clone()), b.clone()),
            SetExpr::and(SetExpr::not(a), SetExpr::not(b)),
        ];
        let values: Vec<Complex64> = vals.iter().map(|(re, im)| Complex64::new(*re, *im)).collect();
        let f = StepFunction::new(cells, values);
        let oracle = UltrafilterOracle::new(alg, OracleKind::Principal(point));
        let mu = TwoValuedMeasure::new(oracle.clone());
        prop_assert_eq!(ultralimit(&oracle, &f).unwrap(), integrate_two_valued(&mu, &f).unwrap());
    }

    /// Yosida–Hewitt split recombines to the original state and its λ agrees
    /// with the supremum over finite projectors.
    #[test]
    fn yosida_hewitt_recombines(lambda in 0.05..0.95f64, idx in -10i64..10, offset in -3i64..3) {
        let alg = SetAlgebra::new(DomainKind::Integers);
        let oracle = UltrafilterOracle::new(alg.clone(), OracleKind::FreeSymbolic);
        let state = SymbolicState::mixture(&[
            (lambda, SymbolicState::basis_state(alg.clone(), idx)),
            (1.0 - lambda, SymbolicState::atom(alg.clone(), oracle, offset)),
        ]).unwrap();
        let split = yosida_hewitt_split(&state, &[]).unwrap();
        prop_assert!((split.lambda - lambda).abs() < 1e-12);
        prop_assert!((split.lambda_supremum - lambda).abs() < 1e-12);
        let recombined = SymbolicState::mixture(&[
            (split.lambda, split.normal.unwrap()),
            (1.0 - split.lambda, split.singular.unwrap()),
        ]).unwrap();
        for probe in [SymbolicObservable::identity(), SymbolicObservable::basis_projector(idx)] {
            let a = evaluate(&state, &probe).unwrap();
            let b = evaluate(&recombined, &probe).unwrap();
            prop_assert!((a - b).norm() < 1e-12);
        }
    }
}

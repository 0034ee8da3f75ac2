use gcwave::diagnostics::{eoc, sampling_grid};
use gcwave::polytime::{
    cardinal_basis, hermite_functionals, interpolate, interpolation_nodes, theta_kernel, InterpKind,
    QuadKind, QuadRule, SlabMap,
};
use gcwave::slabsolver::{march, MatrixOperators, Scheme, ZeroForcing};
use gcwave::sparsela::{LinearSolver, LuFactorization, SparseMatrix};
use proptest::prelude::*;

fn kind_strategy() -> impl Strategy<Value = QuadKind> {
    prop::sample::select(QuadKind::ALL.to_vec())
}

proptest! {
    #[test]
    fn rule_structure(kind in kind_strategy(), k in 3usize..=8) {
        prop_assume!(k >= kind.min_k());
        let r = QuadRule::build(kind, k).unwrap();
        prop_assert!(r.nodes.windows(2).all(|w| w[1] > w[0]));
        let n = r.nodes.len();
        for i in 0..n {
            prop_assert!((r.nodes[i] + r.nodes[n - 1 - i]).abs() < 1e-13);
            prop_assert!((r.value_weights[i] - r.value_weights[n - 1 - i]).abs() < 1e-13);
        }
        prop_assert!((r.value_weights.iter().sum::<f64>() - 2.0).abs() < 1e-13);
        prop_assert!((r.deriv_weight_left + r.deriv_weight_right).abs() < 1e-13);
        if kind != QuadKind::HermiteLong {
            prop_assert!(r.exactness_degree >= 2 * k - 3);
        }
    }

    #[test]
    fn hermite_rule_integrates_its_interpolant(k in 3usize..=8, a in -3.0f64..3.0, b in -3.0f64..3.0, c in 0.1f64..4.0) {
        let g = |t: f64| (a * t + b).sin() * (c * t).exp();
        let dg = |t: f64| a * (a * t + b).cos() * (c * t).exp() + c * g(t);
        let rule = QuadRule::build(QuadKind::HermiteShort, k).unwrap();
        let values: Vec<f64> = rule.nodes.iter().map(|&t| g(t)).collect();
        let q = rule.integrate_reference(&values, (dg(-1.0), dg(1.0)));
        let nodes = interpolation_nodes(InterpKind::Hermite, k);
        let vals: Vec<f64> = nodes.iter().map(|&t| g(t)).collect();
        let p = interpolate(InterpKind::Hermite, k, &vals, Some((dg(-1.0), dg(1.0)))).unwrap();
        prop_assert!((q - p.integral()).abs() <= 1e-12 * (1.0 + q.abs()));
    }

    #[test]
    fn theta_kernel_parity(k in 3usize..=9, t in -1.0f64..1.0) {
        let th = theta_kernel(k).unwrap();
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        prop_assert!((th.eval(-t) - sign * th.eval(t)).abs() < 1e-13);
        for f in hermite_functionals(k) {
            prop_assert!(f.apply(&th).abs() < 1e-12);
        }
    }

    #[test]
    fn slab_map_round_trip(t0 in -5.0f64..5.0, len in 1e-3f64..3.0, s in -1.0f64..1.0) {
        let m = SlabMap::new(t0, t0 + len).unwrap();
        prop_assert!((m.to_reference(m.to_time(s)) - s).abs() < 1e-13);
    }

    #[test]
    fn exact_scaling_gives_exact_order(c in 0.1f64..10.0, q in 1.5f64..4.0, alpha in 0.5f64..7.0) {
        let seq: Vec<f64> = (0..5).map(|i| c * q.powf(-alpha * i as f64)).collect();
        for r in eoc(&seq, q).unwrap() {
            prop_assert!((r - alpha).abs() < 1e-12);
        }
    }

    #[test]
    fn doubled_grid_is_superset(n in 1usize..6, s in 2usize..20) {
        let mesh: Vec<f64> = (0..=n).map(|i| i as f64 * 0.1).collect();
        let coarse = sampling_grid(&mesh, s).unwrap();
        let fine = sampling_grid(&mesh, 2 * s).unwrap();
        prop_assert_eq!(fine.len(), 2 * (coarse.len() - 1) + 1);
        for t in &coarse {
            prop_assert!(fine.iter().any(|f| (f - t).abs() < 1e-14));
        }
    }

    #[test]
    fn lu_solves_random_diagonally_dominant(seed in any::<u64>(), n in 2usize..30) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut rows = vec![vec![0.0; n]; n];
        for (i, row) in rows.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                if i == j || rng.random_bool(0.2) {
                    *v = rng.random_range(-1.0..1.0);
                }
            }
            row[i] += n as f64;
        }
        let a = SparseMatrix::from_dense(&rows);
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let b = a.matvec(&x);
        let y = LuFactorization::new(&a).unwrap().solve(&b).unwrap();
        for (u, v) in x.iter().zip(&y) {
            prop_assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn oscillator_energy_is_conserved(omega in 0.2f64..5.0, u0 in -2.0f64..2.0, v0 in -2.0f64..2.0, k in 3usize..=6) {
        prop_assume!(u0.abs() + v0.abs() > 1e-3);
        let ops = MatrixOperators::oscillator(omega);
        let sol = march(Scheme::CgpC1, k, &ops, &ZeroForcing { n_dof: 1 }, (vec![u0], vec![v0]), 0.1, 1.0).unwrap();
        let e = |t: f64| {
            let (u, v) = sol.evaluate(t, 0).unwrap();
            v[0] * v[0] + omega * omega * u[0] * u[0]
        };
        let e0 = e(0.0);
        for t in sol.time_mesh() {
            prop_assert!((e(t) - e0).abs() <= 1e-12 * e0);
        }
    }

    #[test]
    fn cardinal_basis_is_dual(k in 3usize..=8) {
        let f = hermite_functionals(k);
        let b = cardinal_basis(&f).unwrap();
        for (i, fi) in f.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((fi.apply(bj) - want).abs() < 1e-11);
            }
        }
    }
}

#[test]
fn gauss_lobatto_interpolation_is_not_projection() {
    let nodes = interpolation_nodes(InterpKind::GaussLobatto, 4);
    let values: Vec<f64> = nodes.iter().map(|t| t.powi(4)).collect();
    let p = interpolate(InterpKind::GaussLobatto, 4, &values, None).unwrap();
    for (t, v) in nodes.iter().zip(&values) {
        assert!((p.eval(*t) - v).abs() < 1e-13);
    }
    assert!(p.eval(0.0).abs() > 1e-3);
    assert!(p.degree(1e-13).unwrap() <= 3);
}

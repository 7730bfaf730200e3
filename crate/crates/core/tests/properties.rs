use gaugeflow_core::lie::{AlgebraElement, DualElement, LieAlgebra};
use gaugeflow_core::scenario::{builtin_text, parse_config};
use proptest::prelude::*;

fn algebras() -> impl Strategy<Value = LieAlgebra> {
    prop_oneof![
        Just(LieAlgebra::u1()),
        Just(LieAlgebra::so3()),
        Just(LieAlgebra::so(4)),
        Just(LieAlgebra::so2k(2)),
    ]
}

fn coords(d: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.5f64..1.5, d)
}

fn algebra_with(n: usize) -> impl Strategy<Value = (LieAlgebra, Vec<Vec<f64>>)> {
    algebras().prop_flat_map(move |g| {
        let d = g.dim();
        (Just(g), prop::collection::vec(coords(d), n))
    })
}

fn elt(c: &[f64]) -> AlgebraElement {
    AlgebraElement::new(c.to_vec()).unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #[test]
    fn bracket_is_antisymmetric((g, v) in algebra_with(2)) {
        let xy = g.bracket(&elt(&v[0]), &elt(&v[1])).unwrap().coords;
        let yx = g.bracket(&elt(&v[1]), &elt(&v[0])).unwrap().coords;
        let neg: Vec<f64> = yx.iter().map(|c| -c).collect();
        prop_assert!(close(&xy, &neg, 1e-12));
    }

    #[test]
    fn jacobi_identity((g, v) in algebra_with(3)) {
        let (x, y, z) = (elt(&v[0]), elt(&v[1]), elt(&v[2]));
        let b = |a: &AlgebraElement, c: &AlgebraElement| g.bracket(a, c).unwrap();
        let t1 = b(&x, &b(&y, &z)).coords;
        let t2 = b(&y, &b(&z, &x)).coords;
        let t3 = b(&z, &b(&x, &y)).coords;
        let sum: Vec<f64> = (0..g.dim()).map(|i| t1[i] + t2[i] + t3[i]).collect();
        prop_assert!(close(&sum, &vec![0.0; g.dim()], 1e-11));
    }

    #[test]
    fn adjoint_preserves_bracket((g, v) in algebra_with(3)) {
        let a = g.exp(&elt(&v[0])).unwrap();
        let (x, y) = (elt(&v[1]), elt(&v[2]));
        let lhs = g.adjoint(&a, &g.bracket(&x, &y).unwrap()).unwrap().coords;
        let rhs = g
            .bracket(&g.adjoint(&a, &x).unwrap(), &g.adjoint(&a, &y).unwrap())
            .unwrap()
            .coords;
        prop_assert!(close(&lhs, &rhs, 1e-10));
    }

    #[test]
    fn coadjoint_preserves_pairing((g, v) in algebra_with(3)) {
        let a = g.exp(&elt(&v[0])).unwrap();
        let xi = elt(&v[1]);
        let mu = DualElement { coords: v[2].clone() };
        let before = g.pair(&xi, &mu).unwrap();
        let after = g
            .pair(&g.adjoint(&a, &xi).unwrap(), &g.coadjoint(&a, &mu).unwrap())
            .unwrap();
        prop_assert!((before - after).abs() <= 1e-10);
    }

    #[test]
    fn exp_of_sum_along_a_line((g, v) in algebra_with(1), s in -1.0f64..1.0, t in -1.0f64..1.0) {
        let x = elt(&v[0]);
        let lhs = g.exp(&x.scaled(s)).unwrap().compose(&g.exp(&x.scaled(t)).unwrap());
        let rhs = g.exp(&x.scaled(s + t)).unwrap();
        let diff = lhs.matrix().sub(rhs.matrix()).max_abs();
        prop_assert!(diff <= 1e-12, "diff {diff}");
    }

    #[test]
    fn config_text_round_trips(
        field in prop::array::uniform3(-10.0f64..10.0),
        q in prop::collection::vec(-5.0f64..5.0, 3),
        v in prop::collection::vec(-5.0f64..5.0, 3),
        dt in 1e-6f64..0.5,
        t_end in 1e-3f64..100.0,
    ) {
        let mut c = parse_config(builtin_text("lorentz").unwrap()).unwrap();
        c.gauge = gaugeflow_core::scenario::GaugeSpec::Uniform { field };
        c.q = q;
        c.v = v;
        c.integrator.dt = dt;
        c.integrator.t_end = t_end;
        prop_assert_eq!(parse_config(&c.to_text()).unwrap(), c);
    }
}

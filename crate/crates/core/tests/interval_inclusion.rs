use interval_observer::{BinaryOp, Elementary, Expr, Interval, IntervalVector};
use proptest::prelude::*;

fn slack(v: f64) -> f64 {
    1e-12 * (1.0 + v.abs())
}

fn encloses(iv: Interval<f64>, v: f64) -> bool {
    iv.lo() - slack(v) <= v && v <= iv.hi() + slack(v)
}

prop_compose! {
    fn interval_with_point(lo: f64, hi: f64)(a in lo..hi, w in 0.0..5.0f64, f in 0.0..=1.0f64) -> (Interval<f64>, f64) {
        let iv = Interval::new(a, a + w).unwrap();
        (iv, a + f * w)
    }
}

prop_compose! {
    /// An interval, a point in it, and a sub-interval containing the point.
    fn nested(lo: f64, hi: f64)((outer, x) in interval_with_point(lo, hi), p in 0.0..=1.0f64, q in 0.0..=1.0f64) -> (Interval<f64>, Interval<f64>, f64) {
        let inner = Interval::new(outer.lo() + p * (x - outer.lo()), x + q * (outer.hi() - x)).unwrap();
        (outer, inner, x)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn arithmetic_encloses_pointwise((a, x) in interval_with_point(-10.0, 10.0), (b, y) in interval_with_point(-10.0, 10.0)) {
        prop_assert!(encloses(a + b, x + y));
        prop_assert!(encloses(a - b, x - y));
        prop_assert!(encloses(a * b, x * y));
        prop_assert!(encloses(-a, -x));
        if !b.contains_zero() {
            prop_assert!(encloses(a.div(b).unwrap(), x / y));
        } else {
            prop_assert!(a.div(b).is_err());
        }
    }

    #[test]
    fn elementary_functions_enclose_pointwise((a, x) in interval_with_point(-20.0, 20.0)) {
        prop_assert!(encloses(a.sin(), x.sin()));
        prop_assert!(encloses(a.cos(), x.cos()));
        prop_assert!(encloses(a.exp(), x.exp()));
        if a.lo() >= 0.0 {
            prop_assert!(encloses(a.sqrt().unwrap(), x.sqrt()));
        }
    }

    #[test]
    fn inclusion_monotone((a, a_in, _x) in nested(-10.0, 10.0), (b, b_in, _y) in nested(-10.0, 10.0)) {
        prop_assert!((a_in + b_in).subset_of(&(a + b)));
        prop_assert!((a_in - b_in).subset_of(&(a - b)));
        prop_assert!((a_in * b_in).subset_of(&(a * b)));
        prop_assert!(a_in.sin().subset_of(&a.sin()));
        prop_assert!(a_in.cos().subset_of(&a.cos()));
        prop_assert!(a_in.exp().subset_of(&a.exp()));
    }

    #[test]
    fn sine_range_is_tight_on_grid((a, _x) in interval_with_point(-10.0, 10.0)) {
        // brute-force the range on a fine grid plus the endpoints
        let n = 4000;
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for k in 0..=n {
            let v = (a.lo() + a.width() * k as f64 / n as f64).sin();
            lo = lo.min(v);
            hi = hi.max(v);
        }
        let s = a.sin();
        prop_assert!(s.lo() <= lo + 1e-12 && s.hi() >= hi - 1e-12);
        // grid spacing is at most 5/4000, so sin moves by less than that between samples
        prop_assert!(s.lo() >= lo - 2e-6 && s.hi() <= hi + 2e-6);
    }

    #[test]
    fn linear_extension_is_exact(coeffs in prop::collection::vec(-5.0..5.0f64, 1..6), seed in 0u64..1000) {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let boxes: Vec<Interval<f64>> = coeffs
            .iter()
            .map(|_| {
                let a: f64 = rng.gen_range(-3.0..3.0);
                Interval::new(a, a + rng.gen_range(0.0..2.0)).unwrap()
            })
            .collect();
        let ext = interval_observer::linear_natural_extension(&coeffs, &boxes).unwrap();
        // the extremes are attained at vertices chosen by coefficient sign
        let lo: f64 = coeffs.iter().zip(&boxes).map(|(&c, b)| if c >= 0.0 { c * b.lo() } else { c * b.hi() }).sum();
        let hi: f64 = coeffs.iter().zip(&boxes).map(|(&c, b)| if c >= 0.0 { c * b.hi() } else { c * b.lo() }).sum();
        prop_assert!((ext.lo() - lo).abs() <= 1e-12 * (1.0 + lo.abs()));
        prop_assert!((ext.hi() - hi).abs() <= 1e-12 * (1.0 + hi.abs()));
    }
}

fn arb_expr() -> impl Strategy<Value = Expr<f64>> {
    let leaf = prop_oneof![
        (-3.0..3.0f64).prop_map(Expr::constant),
        (0usize..2).prop_map(Expr::state),
        Just(Expr::time()),
        Just(Expr::input(0)),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Add, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Sub, a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::binary(BinaryOp::Mul, a, b)),
            inner.clone().prop_map(|a| Expr::unary(Elementary::Sin, a)),
            inner.clone().prop_map(|a| Expr::unary(Elementary::Cos, a)),
            inner.clone().prop_map(|a| Expr::unary(Elementary::Neg, a)),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn expression_natural_extension_encloses(
        e in arb_expr(),
        (x1, p1) in interval_with_point(-2.0, 2.0),
        (x2, p2) in interval_with_point(-2.0, 2.0),
        (u, pu) in interval_with_point(-1.0, 1.0),
        t in 0.0..5.0f64,
    ) {
        let bx = IntervalVector::new(vec![x1, x2]).unwrap();
        let iv = e.eval_interval(Interval::point(t), &[u], &bx).unwrap();
        let v = e.eval_real(t, &[pu], &[p1, p2]).unwrap();
        let tol = 1e-9 * (1.0 + v.abs());
        prop_assert!(iv.lo() - tol <= v && v <= iv.hi() + tol, "{e} gave {iv:?} but {v}");
    }

    #[test]
    fn expression_display_round_trips(e in arb_expr()) {
        let text = e.to_string();
        let back = Expr::<f64>::parse(&text, 2, 1).unwrap();
        prop_assert_eq!(back, e);
    }
}

use estimator::scenario::{GainChoice, NoiseSpec, Scenario};
use estimator::{BIOREACTOR_SCENARIO, LINEARIZED_SCENARIO};
use interval_observer::{LinearForm, Matrix, Method, Variant};
use proptest::prelude::*;

#[test]
fn bundled_scenarios_round_trip() {
    for text in [BIOREACTOR_SCENARIO, LINEARIZED_SCENARIO] {
        let s: Scenario = text.parse().unwrap();
        let printed = s.to_string();
        let again: Scenario = printed.parse().unwrap();
        assert_eq!(again, s);
        assert_eq!(again.to_string(), printed);
    }
}

#[test]
fn bundled_scenarios_have_expected_shape() {
    let bio: Scenario = BIOREACTOR_SCENARIO.parse().unwrap();
    assert_eq!((bio.model.n_x, bio.model.n_u, bio.model.n_y), (2, 2, 1));
    assert_eq!(bio.model.horizon, (0.0, 20.0));
    assert_eq!(bio.truth.x0, vec![5.0, 40.0]);
    assert_eq!(bio.observer.gain, GainChoice::Matrix(Matrix::column(&[2.0, 0.0])));
    assert_eq!(bio.system_model().unwrap().breakpoints(), vec![5.0, 10.0]);

    let lin: Scenario = LINEARIZED_SCENARIO.parse().unwrap();
    assert_eq!(lin.gains["gain1"], Matrix::column(&[3.0, 0.0, 0.0]));
    assert_eq!(lin.gains["gain2"], Matrix::column(&[4.27, 1.0, -1.0]));
    assert_eq!(lin.linear.as_ref().unwrap()[(1, 2)], 3f64.sqrt());
}

fn variant() -> impl Strategy<Value = Variant> {
    prop_oneof![
        Just(Variant::Gmac),
        Just(Variant::NoMeasurements),
        Just(Variant::NoConstraints)
    ]
}

fn method() -> impl Strategy<Value = Method> {
    prop_oneof![
        Just(Method::DormandPrince),
        Just(Method::Rosenbrock),
        Just(Method::Auto)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn edited_scenarios_round_trip(
        lo in prop::collection::vec(-1e3f64..1e3, 3),
        spread in prop::collection::vec(0f64..1e3, 3),
        t_end in 0.1f64..100.0,
        gain in prop::collection::vec(-50f64..50.0, 3),
        v in variant(),
        m in method(),
        split in any::<bool>(),
        seed in proptest::option::of(any::<u64>()),
        tol in 1e-14f64..1e-3,
        points in 2usize..5000,
        auto_gain in any::<bool>(),
    ) {
        let mut s: Scenario = LINEARIZED_SCENARIO.parse().unwrap();
        s.model.x0_lower = lo.clone();
        s.model.x0_upper = lo.iter().zip(&spread).map(|(a, b)| a + b).collect();
        s.model.horizon = (0.0, t_end);
        s.gains.insert("tuned".into(), Matrix::column(&gain));
        s.observer.variant = v;
        s.observer.gain = if auto_gain { GainChoice::Auto } else { GainChoice::Matrix(Matrix::column(&gain)) };
        s.observer.linear_form = if split { LinearForm::Split } else { LinearForm::Fused };
        s.integration.method = m;
        s.integration.rel_tol = tol;
        s.integration.output_points = points;
        if let Some(seed) = seed {
            s.truth.noise = NoiseSpec::Random { seed };
        }
        let again: Scenario = s.to_string().parse().unwrap();
        prop_assert_eq!(again, s);
    }
}

mod common;

use common::{bioreactor, expm_apply, feed, linearized, observer_config, realization};
use interval_observer::{
    run_observer, BoundSignal, EstimateTrajectory, IntervalVector, Matrix, MeasurementSignal,
    ObserverSpec, RunStatus, SystemModel, Variant, VectorField,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smooth noise inside `[-bound, bound]`: a short random Fourier series, clamped.
fn fourier_noise(seed: u64, bound: f64) -> impl Fn(f64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(f64, f64, f64)> = (0..4)
        .map(|_| (rng.gen_range(-0.6..0.6) * bound, rng.gen_range(0.1..12.0), rng.gen_range(0.0..6.3)))
        .collect();
    move |t| {
        let v: f64 = terms.iter().map(|(a, w, p)| a * (w * t + p).sin()).sum();
        vec![v.clamp(-bound, bound)]
    }
}

fn assert_encloses(model: &SystemModel<f64>, est: &EstimateTrajectory<f64>, truth: &interval_observer::Solution<f64>) {
    assert_eq!(est.diagnostics.status, RunStatus::Completed);
    for (k, &t) in est.times.iter().enumerate() {
        let x = truth.dense_eval(t).unwrap();
        for i in 0..model.n_x() {
            let (lo, hi) = (est.lower[k][i], est.upper[k][i]);
            let tol = 1e-6 * (1.0 + lo.abs().max(hi.abs()));
            assert!(lo - tol <= x[i] && x[i] <= hi + tol, "t={t} x{}={} outside [{lo}, {hi}]", i + 1, x[i]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn linearized_gmac_encloses_random_truths(seed in any::<u64>()) {
        let model = linearized();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let u = [rng.gen_range(4.48..=6.12), rng.gen_range(3.2..=3.6)];
        let (truth, meas) = realization(&model, |_| u.to_vec(), &[1.0, 1.0, 0.0], fourier_noise(seed, 0.1));
        let spec = ObserverSpec::new(Variant::Gmac, Matrix::column(&[4.27, 1.0, -1.0]));
        let est = run_observer(&spec, &model, &meas, &observer_config(&model)).unwrap();
        assert_encloses(&model, &est, &truth);
    }

    #[test]
    fn bioreactor_gmac_encloses_random_truths(seed in any::<u64>()) {
        let model = bioreactor();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        // the feed bounds move with t, so the feed is a fixed fraction of the nominal one
        let rate = rng.gen_range(0.703..=0.777);
        let scale = rng.gen_range(0.95..=1.05);
        let x0 = [rng.gen_range(0.0..=10.0), rng.gen_range(0.0..=100.0)];
        let (truth, meas) = realization(&model, |t| vec![rate, scale * feed(t)], &x0, fourier_noise(seed, 0.25));
        let spec = ObserverSpec::new(Variant::Gmac, Matrix::column(&[2.0, 0.0]));
        let est = run_observer(&spec, &model, &meas, &observer_config(&model)).unwrap();
        assert_encloses(&model, &est, &truth);
    }
}

#[test]
fn gmac_is_inside_no_constraints_on_bioreactor() {
    let model = bioreactor();
    let (_, meas) = realization(&model, |t| vec![0.74, feed(t)], &[5.0, 40.0], |_| vec![0.0]);
    let cfg = observer_config(&model);
    let gain = Matrix::column(&[2.0, 0.0]);
    let gmac = run_observer(&ObserverSpec::new(Variant::Gmac, gain.clone()), &model, &meas, &cfg).unwrap();
    let free = run_observer(&ObserverSpec::new(Variant::NoConstraints, gain), &model, &meas, &cfg).unwrap();
    assert_eq!(gmac.times, free.times);
    for k in 0..gmac.times.len() {
        for i in 0..2 {
            assert!(gmac.lower[k][i] >= free.lower[k][i] - 1e-9, "k={k} i={i}");
            assert!(gmac.upper[k][i] <= free.upper[k][i] + 1e-9, "k={k} i={i}");
        }
    }
}

#[test]
fn no_measurements_ignores_y_when_slab_is_inactive() {
    // noise bounds so wide that the slab never clips a face
    let base = linearized();
    let model = SystemModel::new(
        base.field.clone(),
        base.output.clone(),
        base.initial.clone(),
        base.horizon,
        base.inputs.clone(),
        BoundSignal::constant(&[-1e20], &[1e20]).unwrap(),
    )
    .unwrap();
    let a = MeasurementSignal::new(vec![0.0, 5.0], vec![vec![0.3], vec![0.9]]).unwrap();
    let b = MeasurementSignal::new(vec![0.0, 2.0, 5.0], vec![vec![-4.0], vec![7.0], vec![1.0]]).unwrap();
    let spec = ObserverSpec::new(Variant::NoMeasurements, Matrix::column(&[4.27, 1.0, -1.0]));
    assert!(spec.gain().is_zero());
    let cfg = observer_config(&model);
    let ra = run_observer(&spec, &model, &a, &cfg).unwrap();
    let rb = run_observer(&spec, &model, &b, &cfg).unwrap();
    assert_eq!(ra.diagnostics.ic_activation_count, 0);
    assert!(ra.lower == rb.lower && ra.upper == rb.upper);
}

#[test]
fn no_measurements_responds_to_y_only_through_the_slab() {
    let model = linearized();
    let spec = ObserverSpec::new(Variant::NoMeasurements, Matrix::column(&[0.0, 0.0, 0.0]));
    let cfg = observer_config(&model);
    let (_, a) = realization(&model, |_| vec![5.3, 3.4], &[1.0, 1.0, 0.0], |t| vec![0.1 * (10.0 * t).sin()]);
    let (_, b) = realization(&model, |_| vec![5.3, 3.4], &[1.0, 1.0, 0.0], |_| vec![0.0]);
    let ra = run_observer(&spec, &model, &a, &cfg).unwrap();
    let rb = run_observer(&spec, &model, &b, &cfg).unwrap();
    assert!(ra.diagnostics.ic_activation_count > 0);
    assert!(ra.upper != rb.upper);
}

#[test]
fn lti_widths_follow_comparison_system() {
    let s3 = 3f64.sqrt();
    let a = [[2.0, 0.0, 0.0], [1.0, -4.0, s3], [-1.0, -s3, -4.0]];
    let gain = [4.27, 1.0, -1.0];
    let field = VectorField::parse(
        &[
            "2*x1".to_string(),
            format!("x1 - 4*x2 + {s3}*x3"),
            format!("-x1 - {s3}*x2 - 4*x3"),
        ],
        0,
    )
    .unwrap();
    let lo = [0.5, 0.5, -0.5];
    let hi = [1.5, 1.5, 0.5];
    let model = SystemModel::new(
        field,
        Matrix::from_rows(&[vec![1.0, 0.0, 0.0]]).unwrap(),
        IntervalVector::from_bounds(&lo, &hi).unwrap(),
        (0.0, 5.0),
        BoundSignal::empty(),
        BoundSignal::constant(&[0.0], &[0.0]).unwrap(),
    )
    .unwrap();
    let (_, meas) = realization(&model, |_| Vec::new(), &[1.0, 1.0, 0.0], |_| vec![0.0]);
    let cfg = observer_config(&model).with_output_times(vec![0.0, 1.0, 2.0, 5.0]);
    let spec = ObserverSpec::new(Variant::NoConstraints, Matrix::column(&gain));
    let est = run_observer(&spec, &model, &meas, &cfg).unwrap();

    // comparison matrix: diagonal of A - L C, absolute off-diagonal entries
    let mut rows = vec![vec![0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let m = a[i][j] - if j == 0 { gain[i] } else { 0.0 };
            rows[i][j] = if i == j { m } else { m.abs() };
        }
    }
    let tilde = Matrix::from_rows(&rows).unwrap();
    let w0: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| h - l).collect();
    for (k, &t) in est.times.iter().enumerate().skip(1) {
        let exact = expm_apply(&tilde, &w0, t);
        for i in 0..3 {
            let w = est.upper[k][i] - est.lower[k][i];
            assert!((w - exact[i]).abs() <= 1e-7 * (1.0 + exact[i].abs()), "t={t} i={i} {w} vs {}", exact[i]);
        }
    }
}

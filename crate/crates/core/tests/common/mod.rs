#![allow(dead_code)]

use interval_observer::{
    make_measurements, simulate_truth, uniform_grid, BoundSignal, Expr, IntegConfig,
    IntervalVector, Matrix, MeasurementSignal, Method, SystemModel, VectorField,
};

pub const DILUTION: &str = "piecewise(t; 5, 10; 2, 0.5, 1.067)";

fn expr(src: &str) -> Expr<f64> {
    Expr::parse(src, 0, 0).unwrap()
}

pub fn bioreactor() -> SystemModel<f64> {
    let growth = "u1*x2/(x2 + 9.28 + x2*x2/256)";
    let field = VectorField::parse(
        &[
            format!("({growth} - 0.5*{DILUTION})*x1"),
            format!("-42.14*x1*{growth} + {DILUTION}*(u2 - x2)"),
        ],
        2,
    )
    .unwrap();
    SystemModel::new(
        field,
        Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap(),
        IntervalVector::from_bounds(&[0.0, 0.0], &[10.0, 100.0]).unwrap(),
        (0.0, 20.0),
        BoundSignal::new(
            vec![expr("0.703"), expr("0.95*(50 + 15*cos(t/5))")],
            vec![expr("0.777"), expr("1.05*(50 + 15*cos(t/5))")],
        )
        .unwrap(),
        BoundSignal::constant(&[-0.25], &[0.25]).unwrap(),
    )
    .unwrap()
}

pub fn linearized() -> SystemModel<f64> {
    let field = VectorField::parse(
        &[
            "2*x1 - 2*u1*x1*x2*(1 + sin(2*t))",
            "x1 - 4*x2 + sqrt(3)*x3",
            "-x1 - sqrt(3)*x2 - 4*x3 + u2*x1*x2*(1 + sin(2*t))",
        ],
        2,
    )
    .unwrap();
    SystemModel::new(
        field,
        Matrix::from_rows(&[vec![1.0, 0.0, 0.0]]).unwrap(),
        IntervalVector::from_bounds(&[1.0, 1.0, 0.0], &[1.0, 1.0, 0.0]).unwrap(),
        (0.0, 5.0),
        BoundSignal::constant(&[4.48, 3.2], &[6.12, 3.6]).unwrap(),
        BoundSignal::constant(&[-0.1], &[0.1]).unwrap(),
    )
    .unwrap()
}

/// Nominal substrate feed `50 + 15 cos(t/5)`.
pub fn feed(t: f64) -> f64 {
    50.0 + 15.0 * (t / 5.0).cos()
}

pub fn observer_config(model: &SystemModel<f64>) -> IntegConfig<f64> {
    IntegConfig::default()
        .with_method(Method::Auto)
        .with_output_times(uniform_grid(model.horizon.0, model.horizon.1, 500))
}

/// Truth and measurements for an input signal, a fixed initial state and a noise signal.
pub fn realization<U, N>(
    model: &SystemModel<f64>,
    input: U,
    x0: &[f64],
    noise: N,
) -> (interval_observer::Solution<f64>, MeasurementSignal<f64>)
where
    U: Fn(f64) -> Vec<f64>,
    N: Fn(f64) -> Vec<f64>,
{
    let cfg = IntegConfig::default().with_tolerances(1e-11, 1e-11);
    let truth = simulate_truth(model, input, x0, &cfg).unwrap();
    let meas = make_measurements(
        |t| truth.dense_eval(t).unwrap(),
        &model.output,
        noise,
        500,
        model.horizon,
    )
    .unwrap();
    (truth, meas)
}

/// `exp(m t) w0` by scaling and squaring with a truncated Taylor series.
pub fn expm_apply(m: &Matrix<f64>, w0: &[f64], t: f64) -> Vec<f64> {
    let n = m.nrows();
    let norm = (0..n)
        .map(|i| m.row(i).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
        * t.abs();
    let squarings = if norm > 0.25 { (norm / 0.25).log2().ceil() as i32 } else { 0 };
    let scaled = m.scale(t / 2f64.powi(squarings));
    let mut result = Matrix::identity(n);
    let mut term = Matrix::identity(n);
    for k in 1..=30 {
        term = term.matmul(&scaled).scale(1.0 / k as f64);
        result = result.sub(&term.scale(-1.0));
    }
    for _ in 0..squarings {
        result = result.matmul(&result);
    }
    result.mul_vec(w0)
}

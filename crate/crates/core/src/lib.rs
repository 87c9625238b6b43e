//! Guaranteed interval state estimation for nonlinear ODE systems with
//! bounded disturbances and bounded-error continuous measurements.
//!
//! The estimator propagates lower and upper state bounds by evaluating an
//! inclusion function of the measurement-injected dynamics on box faces that
//! have first been tightened against the measurement slab. The modules are
//! generic over the scalar type ([`Scalar`]: `f32` or `f64`); the `*64`
//! aliases below fix the common double-precision case.

pub mod expr;
pub mod gain;
pub mod integrator;
pub mod interval;
pub mod linalg;
pub mod observer;
pub mod scalar;
pub mod tighten;

pub use expr::{AffineSplit, BinaryOp, Expr, ExprError, VarKind, VectorField};
pub use gain::{
    build_gain_lp, margin_of, solve_lp, synthesize_gain, DenseLP, GainError, GainResult,
    LinearObserverData, LpSolution, LpStatus,
};
pub use integrator::{integrate, uniform_grid, IntegConfig, IntegStats, IntegStatus, Method, Solution};
pub use interval::{linear_natural_extension, Elementary, Interval, IntervalError, IntervalVector};
pub use linalg::Matrix;
pub use observer::{
    make_measurements, observer_rhs, run_observer, simulate_truth, BoundSignal, Diagnostics,
    EstimateTrajectory, LinearForm, MeasurementSignal, ObserverError, ObserverSpec, RunStatus, SystemModel,
    Variant,
};
pub use scalar::Scalar;
pub use tighten::{
    apply_ic, face, measurement_constraints, tighten_interval, FaceBox, LinearConstraints, Side,
};

pub type Interval64 = Interval<f64>;
pub type IntervalVector64 = IntervalVector<f64>;
pub type Expr64 = Expr<f64>;
pub type VectorField64 = VectorField<f64>;
pub type Matrix64 = Matrix<f64>;
pub type SystemModel64 = SystemModel<f64>;
pub type ObserverSpec64 = ObserverSpec<f64>;
pub type MeasurementSignal64 = MeasurementSignal<f64>;
pub type EstimateTrajectory64 = EstimateTrajectory<f64>;
pub type IntegConfig64 = IntegConfig<f64>;
pub type DenseLP64 = DenseLP<f64>;

pub type Interval32 = Interval<f32>;
pub type IntervalVector32 = IntervalVector<f32>;

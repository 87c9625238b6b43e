//! System model, measurement signals and the interval observer itself.
//!
//! The observer integrates `2 n_x` coupled bound equations. For component `i`
//! the lower (upper) bound moves with the lower (upper) endpoint of an
//! inclusion function of `f(t,u,z) - L C z - L v` over the `i`-th lower
//! (upper) face of the current box, optionally tightened against the
//! measurement slab `y - v^U <= C z <= y - v^L`, plus the injection
//! `(L y)_i`.

use thiserror::Error;

use crate::expr::{sort_dedup, AffineSplit, Expr, ExprError, VarKind, VectorField};
use crate::integrator::{integrate, IntegConfig, IntegStats, IntegStatus, Solution};
use crate::interval::{linear_extension_unchecked, Interval, IntervalError, IntervalVector};
use crate::linalg::Matrix;
use crate::scalar::Scalar;
use crate::tighten::{face_unchecked, MeasurementSlab, Side, TightenError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObserverError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Interval(#[from] IntervalError),
    #[error(transparent)]
    Tighten(#[from] TightenError),
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("inadmissible data: {0}")]
    Inadmissible(String),
    #[error("invalid measurement signal: {0}")]
    Measurement(String),
    #[error("integration failed: {0}")]
    Integration(String),
}

/// Time-varying box `[lower(t), upper(t)]` given by expressions of `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSignal<S> {
    lower: Vec<Expr<S>>,
    upper: Vec<Expr<S>>,
}

impl<S: Scalar> BoundSignal<S> {
    pub fn new(lower: Vec<Expr<S>>, upper: Vec<Expr<S>>) -> Result<Self, ObserverError> {
        if lower.len() != upper.len() {
            return Err(ObserverError::Dimension(format!(
                "bound signal has {} lower and {} upper components",
                lower.len(),
                upper.len()
            )));
        }
        if lower
            .iter()
            .chain(&upper)
            .any(|e| e.depends_on(VarKind::State) || e.depends_on(VarKind::Input))
        {
            return Err(ObserverError::Inadmissible(
                "bound signals may depend on t only".into(),
            ));
        }
        Ok(Self { lower, upper })
    }

    pub fn constant(lower: &[S], upper: &[S]) -> Result<Self, ObserverError> {
        Self::new(
            lower.iter().map(|&v| Expr::Const(v)).collect(),
            upper.iter().map(|&v| Expr::Const(v)).collect(),
        )
    }

    /// Zero-dimensional signal.
    pub fn empty() -> Self {
        Self {
            lower: Vec::new(),
            upper: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower_exprs(&self) -> &[Expr<S>] {
        &self.lower
    }

    pub fn upper_exprs(&self) -> &[Expr<S>] {
        &self.upper
    }

    fn eval_into(&self, t: S, lo: &mut [S], hi: &mut [S]) -> Result<(), ObserverError> {
        for k in 0..self.dim() {
            lo[k] = self.lower[k].eval_real(t, &[], &[])?;
            hi[k] = self.upper[k].eval_real(t, &[], &[])?;
            if !(lo[k] <= hi[k]) {
                return Err(IntervalError::Inverted {
                    lo: lo[k].as_f64(),
                    hi: hi[k].as_f64(),
                }
                .into());
            }
        }
        Ok(())
    }

    pub fn eval(&self, t: S) -> Result<Vec<Interval<S>>, ObserverError> {
        let mut lo = vec![S::zero(); self.dim()];
        let mut hi = vec![S::zero(); self.dim()];
        self.eval_into(t, &mut lo, &mut hi)?;
        Ok(lo
            .into_iter()
            .zip(hi)
            .map(|(l, h)| Interval::new(l, h))
            .collect::<Result<_, _>>()?)
    }

    fn collect_breakpoints(&self, out: &mut Vec<S>) {
        for e in self.lower.iter().chain(&self.upper) {
            e.collect_breakpoints(out);
        }
    }
}

/// Dynamics, output map, uncertainty bounds and horizon.
#[derive(Debug, Clone)]
pub struct SystemModel<S> {
    pub field: VectorField<S>,
    pub output: Matrix<S>,
    pub initial: IntervalVector<S>,
    pub horizon: (S, S),
    pub inputs: BoundSignal<S>,
    pub noise: BoundSignal<S>,
}

impl<S: Scalar> SystemModel<S> {
    pub fn new(
        field: VectorField<S>,
        output: Matrix<S>,
        initial: IntervalVector<S>,
        horizon: (S, S),
        inputs: BoundSignal<S>,
        noise: BoundSignal<S>,
    ) -> Result<Self, ObserverError> {
        let n_x = field.n_x();
        if output.ncols() != n_x {
            return Err(ObserverError::Dimension(format!(
                "output matrix has {} columns, expected {n_x}",
                output.ncols()
            )));
        }
        if initial.dim() != n_x {
            return Err(ObserverError::Dimension(format!(
                "initial box has dimension {}, expected {n_x}",
                initial.dim()
            )));
        }
        if inputs.dim() != field.n_u() {
            return Err(ObserverError::Dimension(format!(
                "input bounds have dimension {}, expected {}",
                inputs.dim(),
                field.n_u()
            )));
        }
        if noise.dim() != output.nrows() {
            return Err(ObserverError::Dimension(format!(
                "noise bounds have dimension {}, expected {}",
                noise.dim(),
                output.nrows()
            )));
        }
        if !(horizon.0 < horizon.1) {
            return Err(ObserverError::Inadmissible(format!(
                "horizon [{}, {}] is empty",
                horizon.0, horizon.1
            )));
        }
        let model = Self {
            field,
            output,
            initial,
            horizon,
            inputs,
            noise,
        };
        model.inputs.eval(horizon.0)?;
        model.noise.eval(horizon.0)?;
        Ok(model)
    }

    pub fn n_x(&self) -> usize {
        self.field.n_x()
    }

    pub fn n_u(&self) -> usize {
        self.field.n_u()
    }

    pub fn n_y(&self) -> usize {
        self.output.nrows()
    }

    /// Breakpoints of every piecewise-time node in the model, inside the horizon.
    pub fn breakpoints(&self) -> Vec<S> {
        let mut out = self.field.breakpoints();
        self.inputs.collect_breakpoints(&mut out);
        self.noise.collect_breakpoints(&mut out);
        out.retain(|&b| b > self.horizon.0 && b < self.horizon.1);
        sort_dedup(&mut out);
        out
    }
}

/// Sampled measurements, linearly interpolated and clamped outside the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementSignal<S> {
    times: Vec<S>,
    values: Vec<Vec<S>>,
}

impl<S: Scalar> MeasurementSignal<S> {
    pub fn new(times: Vec<S>, values: Vec<Vec<S>>) -> Result<Self, ObserverError> {
        if times.len() < 2 {
            return Err(ObserverError::Measurement("at least two samples are required".into()));
        }
        if times.len() != values.len() {
            return Err(ObserverError::Measurement(format!(
                "{} sample times but {} sample values",
                times.len(),
                values.len()
            )));
        }
        if times.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(ObserverError::Measurement(
                "sample times must be strictly increasing".into(),
            ));
        }
        let ny = values[0].len();
        if values.iter().any(|v| v.len() != ny) {
            return Err(ObserverError::Measurement("ragged sample values".into()));
        }
        Ok(Self { times, values })
    }

    pub fn times(&self) -> &[S] {
        &self.times
    }

    pub fn values(&self) -> &[Vec<S>] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values[0].len()
    }

    pub fn eval_into(&self, t: S, out: &mut [S]) {
        let n = self.times.len();
        if t <= self.times[0] {
            out.copy_from_slice(&self.values[0]);
            return;
        }
        if t >= self.times[n - 1] {
            out.copy_from_slice(&self.values[n - 1]);
            return;
        }
        let k = self.times.partition_point(|&s| s <= t);
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        for (o, (&a, &b)) in out.iter_mut().zip(self.values[k - 1].iter().zip(&self.values[k])) {
            *o = a + w * (b - a);
        }
    }

    pub fn eval(&self, t: S) -> Vec<S> {
        let mut out = vec![S::zero(); self.dim()];
        self.eval_into(t, &mut out);
        out
    }
}

/// Samples `y_k = C x(t_k) + v(t_k)` at `n_samples` equally spaced times.
pub fn make_measurements<S, T, N>(
    truth: T,
    output: &Matrix<S>,
    noise: N,
    n_samples: usize,
    horizon: (S, S),
) -> Result<MeasurementSignal<S>, ObserverError>
where
    S: Scalar,
    T: Fn(S) -> Vec<S>,
    N: Fn(S) -> Vec<S>,
{
    if n_samples < 2 {
        return Err(ObserverError::Measurement("at least two samples are required".into()));
    }
    let times = crate::integrator::uniform_grid(horizon.0, horizon.1, n_samples);
    let values = times
        .iter()
        .map(|&t| {
            let x = truth(t);
            let v = noise(t);
            if x.len() != output.ncols() || v.len() != output.nrows() {
                return Err(ObserverError::Dimension(
                    "truth or noise dimension does not match the output matrix".into(),
                ));
            }
            Ok(output.mul_vec(&x).into_iter().zip(v).map(|(a, b)| a + b).collect())
        })
        .collect::<Result<Vec<_>, _>>()?;
    MeasurementSignal::new(times, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    /// Gain injection and measurement-slab tightening of every face.
    Gmac,
    /// Zero gain; faces are still tightened against the measurement slab.
    NoMeasurements,
    /// Gain injection without face tightening.
    NoConstraints,
}

impl Variant {
    pub fn uses_constraints(self) -> bool {
        !matches!(self, Variant::NoConstraints)
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Gmac => "GMAC",
            Variant::NoMeasurements => "No Measurements",
            Variant::NoConstraints => "No Constraints",
        }
    }
}

/// How the linear part of the injected dynamics enters the inclusion function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum LinearForm {
    /// Top-level terms of `f` linear in the state are merged with `-L C z`
    /// and extended as one linear map; the rest gets its natural extension.
    #[default]
    Fused,
    /// Natural extension of `f` plus the separate extension of `-L C z`.
    Split,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObserverSpec<S> {
    gain: Matrix<S>,
    variant: Variant,
    pub linear_form: LinearForm,
}

impl<S: Scalar> ObserverSpec<S> {
    /// For `NoMeasurements` the gain is replaced by zeros of the same shape.
    pub fn new(variant: Variant, gain: Matrix<S>) -> Self {
        let gain = match variant {
            Variant::NoMeasurements => Matrix::zeros(gain.nrows(), gain.ncols()),
            _ => gain,
        };
        Self {
            gain,
            variant,
            linear_form: LinearForm::default(),
        }
    }

    pub fn with_linear_form(mut self, form: LinearForm) -> Self {
        self.linear_form = form;
        self
    }

    pub fn gain(&self) -> &Matrix<S> {
        &self.gain
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }
}

/// Prepared observer right-hand side with scratch buffers.
struct ObserverRhs<'a, S> {
    spec: &'a ObserverSpec<S>,
    model: &'a SystemModel<S>,
    meas: &'a MeasurementSignal<S>,
    /// Rows of `-L C`, fused with linear terms of `f` in `LinearForm::Fused`.
    lin_rows: Vec<Vec<S>>,
    splits: Vec<AffineSplit<S>>,
    neg_gain_rows: Vec<Vec<S>>,
    slab: MeasurementSlab<S>,
    u_lo: Vec<S>,
    u_hi: Vec<S>,
    v_lo: Vec<S>,
    v_hi: Vec<S>,
    y: Vec<S>,
    lo: Vec<S>,
    hi: Vec<S>,
    boxed: Vec<Interval<S>>,
    u_box: Vec<Interval<S>>,
    v_box: Vec<Interval<S>>,
    ic_activations: usize,
    slab_collapses: usize,
}

impl<'a, S: Scalar> ObserverRhs<'a, S> {
    fn new(
        spec: &'a ObserverSpec<S>,
        model: &'a SystemModel<S>,
        meas: &'a MeasurementSignal<S>,
    ) -> Result<Self, ObserverError> {
        let (n_x, n_y, n_u) = (model.n_x(), model.n_y(), model.n_u());
        if spec.gain.nrows() != n_x || spec.gain.ncols() != n_y {
            return Err(ObserverError::Dimension(format!(
                "gain is {}x{}, expected {n_x}x{n_y}",
                spec.gain.nrows(),
                spec.gain.ncols()
            )));
        }
        if meas.dim() != n_y {
            return Err(ObserverError::Dimension(format!(
                "measurements have dimension {}, expected {n_y}",
                meas.dim()
            )));
        }
        let neg_lc = spec.gain.matmul(&model.output).scale(-S::one());
        let splits: Vec<AffineSplit<S>> = match spec.linear_form {
            LinearForm::Fused => model
                .field
                .components()
                .iter()
                .map(|e| e.split_affine(n_x))
                .collect(),
            LinearForm::Split => Vec::new(),
        };
        let lin_rows = (0..n_x)
            .map(|i| {
                let mut row = neg_lc.row(i).to_vec();
                if let Some(split) = splits.get(i) {
                    for (r, &c) in row.iter_mut().zip(&split.coeffs) {
                        *r += c;
                    }
                }
                row
            })
            .collect();
        let neg_gain_rows = spec
            .gain
            .rows_iter()
            .map(|r| r.iter().map(|&v| -v).collect())
            .collect();
        let zero = S::zero();
        Ok(Self {
            spec,
            model,
            meas,
            lin_rows,
            splits,
            neg_gain_rows,
            slab: MeasurementSlab::new(&model.output),
            u_lo: vec![zero; n_u],
            u_hi: vec![zero; n_u],
            v_lo: vec![zero; n_y],
            v_hi: vec![zero; n_y],
            y: vec![zero; n_y],
            lo: vec![zero; n_x],
            hi: vec![zero; n_x],
            boxed: vec![Interval::point(zero); n_x],
            u_box: vec![Interval::point(zero); n_u],
            v_box: vec![Interval::point(zero); n_y],
            ic_activations: 0,
            slab_collapses: 0,
        })
    }

    fn eval(
        &mut self,
        t: S,
        xl: &[S],
        xu: &[S],
        dxl: &mut [S],
        dxu: &mut [S],
    ) -> Result<(), ObserverError> {
        let n_x = self.model.n_x();
        self.model.inputs.eval_into(t, &mut self.u_lo, &mut self.u_hi)?;
        self.model.noise.eval_into(t, &mut self.v_lo, &mut self.v_hi)?;
        for k in 0..self.u_box.len() {
            self.u_box[k] = Interval::raw(self.u_lo[k], self.u_hi[k]);
        }
        for k in 0..self.v_box.len() {
            self.v_box[k] = Interval::raw(self.v_lo[k], self.v_hi[k]);
        }
        self.meas.eval_into(t, &mut self.y);
        let constrained = self.spec.variant.uses_constraints();
        if constrained {
            self.slab.set(&self.y, &self.v_lo, &self.v_hi);
        }
        let t_pt = Interval::point(t);

        for i in 0..n_x {
            let injection = crate::linalg::dot(self.spec.gain.row(i), &self.y);
            let noise_term = linear_extension_unchecked(&self.neg_gain_rows[i], &self.v_box);
            for side in [Side::Lower, Side::Upper] {
                let face = face_unchecked(xl, xu, i, side);
                for (j, iv) in face.iter().enumerate() {
                    self.lo[j] = iv.lo();
                    self.hi[j] = iv.hi();
                }
                if constrained {
                    let report = self.slab.apply(&mut self.lo, &mut self.hi);
                    if report.active() {
                        self.ic_activations += 1;
                    }
                    self.slab_collapses += report.collapsed;
                }
                for j in 0..n_x {
                    self.boxed[j] = Interval::raw(self.lo[j], self.hi[j]);
                }
                let dyn_part = match self.splits.get(i) {
                    Some(split) => split
                        .eval_remainder(t_pt, &self.u_box, &self.boxed)?
                        .add(Interval::point(split.offset)),
                    None => self.model.field.components()[i].eval_interval(
                        t_pt,
                        &self.u_box,
                        &self.boxed,
                    )?,
                };
                let total = dyn_part
                    + linear_extension_unchecked(&self.lin_rows[i], &self.boxed)
                    + noise_term;
                match side {
                    Side::Lower => dxl[i] = total.lo() + injection,
                    Side::Upper => dxu[i] = total.hi() + injection,
                }
            }
        }
        Ok(())
    }
}

/// Derivatives of the lower and upper bounds at one instant.
pub fn observer_rhs<S: Scalar>(
    spec: &ObserverSpec<S>,
    model: &SystemModel<S>,
    meas: &MeasurementSignal<S>,
    t: S,
    xl: &[S],
    xu: &[S],
) -> Result<(Vec<S>, Vec<S>), ObserverError> {
    let n_x = model.n_x();
    if xl.len() != n_x || xu.len() != n_x {
        return Err(ObserverError::Dimension(format!(
            "bounds must have dimension {n_x}"
        )));
    }
    let mut rhs = ObserverRhs::new(spec, model, meas)?;
    let mut dxl = vec![S::zero(); n_x];
    let mut dxu = vec![S::zero(); n_x];
    rhs.eval(t, xl, xu, &mut dxl, &mut dxu)?;
    Ok((dxl, dxu))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RunStatus {
    Completed,
    Diverged,
    SolverFailure,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics<S> {
    pub status: RunStatus,
    pub failure_time: Option<S>,
    pub message: Option<String>,
    /// Number of face tightenings in which at least one bound moved.
    pub ic_activation_count: usize,
    /// Tightening updates that collapsed a component because the slab did
    /// not intersect the face.
    pub infeasible_slab_count: usize,
    /// First output time at which some lower bound exceeded its upper bound.
    pub first_crossing_time: Option<S>,
    pub stats: IntegStats,
}

#[derive(Debug, Clone)]
pub struct EstimateTrajectory<S> {
    pub times: Vec<S>,
    pub lower: Vec<Vec<S>>,
    pub upper: Vec<Vec<S>>,
    pub diagnostics: Diagnostics<S>,
}

impl<S: Scalar> EstimateTrajectory<S> {
    /// Time and bounds of the last recorded output.
    pub fn final_bounds(&self) -> Option<(S, &[S], &[S])> {
        let k = self.times.len().checked_sub(1)?;
        Some((self.times[k], &self.lower[k], &self.upper[k]))
    }

    /// Widths `upper - lower` at output index `k`.
    pub fn widths(&self, k: usize) -> Vec<S> {
        self.upper[k]
            .iter()
            .zip(&self.lower[k])
            .map(|(&u, &l)| u - l)
            .collect()
    }
}

/// Integrates the bound equations from the initial box over the model horizon.
pub fn run_observer<S: Scalar>(
    spec: &ObserverSpec<S>,
    model: &SystemModel<S>,
    meas: &MeasurementSignal<S>,
    config: &IntegConfig<S>,
) -> Result<EstimateTrajectory<S>, ObserverError> {
    let n_x = model.n_x();
    let mut rhs = ObserverRhs::new(spec, model, meas)?;
    let mut cfg = config.clone();
    cfg.breakpoints.extend(model.breakpoints());
    let state0: Vec<S> = model
        .initial
        .lower()
        .into_iter()
        .chain(model.initial.upper())
        .collect();
    let sol = integrate(
        |t: S, x: &[S], dx: &mut [S]| {
            let (xl, xu) = x.split_at(n_x);
            let (dxl, dxu) = dx.split_at_mut(n_x);
            rhs.eval(t, xl, xu, dxl, dxu)
        },
        &state0,
        model.horizon,
        &cfg,
    );
    let (status, message) = match &sol.status {
        IntegStatus::Completed => (RunStatus::Completed, None),
        IntegStatus::Diverged { .. } => (RunStatus::Diverged, None),
        IntegStatus::StepUnderflow { time } => (
            RunStatus::SolverFailure,
            Some(format!("step size underflow at t = {time}")),
        ),
        IntegStatus::RhsFailure { time, message } => (
            RunStatus::SolverFailure,
            Some(format!("right-hand side failed at t = {time}: {message}")),
        ),
    };
    let mut lower = Vec::with_capacity(sol.states.len());
    let mut upper = Vec::with_capacity(sol.states.len());
    let mut first_crossing_time = None;
    for (t, s) in sol.times.iter().zip(&sol.states) {
        let (l, u) = s.split_at(n_x);
        if first_crossing_time.is_none() && l.iter().zip(u).any(|(a, b)| a > b) {
            first_crossing_time = Some(*t);
        }
        lower.push(l.to_vec());
        upper.push(u.to_vec());
    }
    Ok(EstimateTrajectory {
        times: sol.times.clone(),
        lower,
        upper,
        diagnostics: Diagnostics {
            status,
            failure_time: sol.status.failure_time(),
            message,
            ic_activation_count: rhs.ic_activations,
            infeasible_slab_count: rhs.slab_collapses,
            first_crossing_time,
            stats: sol.stats,
        },
    })
}

/// Integrates the dynamics with a fixed admissible input and initial state.
/// The returned solution supports dense evaluation over the whole horizon.
pub fn simulate_truth<S, U>(
    model: &SystemModel<S>,
    input: U,
    x0: &[S],
    config: &IntegConfig<S>,
) -> Result<Solution<S>, ObserverError>
where
    S: Scalar,
    U: Fn(S) -> Vec<S>,
{
    if !model.initial.contains(x0) {
        return Err(ObserverError::Inadmissible(
            "initial state lies outside the initial box".into(),
        ));
    }
    let (t0, tf) = model.horizon;
    for t in crate::integrator::uniform_grid(t0, tf, 201) {
        let u = input(t);
        let bounds = model.inputs.eval(t)?;
        if u.len() != bounds.len() || !u.iter().zip(&bounds).all(|(v, b)| b.contains(*v)) {
            return Err(ObserverError::Inadmissible(format!(
                "input leaves its bounds at t = {t}"
            )));
        }
    }
    let mut cfg = config.clone();
    cfg.breakpoints.extend(model.breakpoints());
    let field = &model.field;
    let sol = integrate(
        |t: S, x: &[S], dx: &mut [S]| -> Result<(), ExprError> {
            let u = input(t);
            for (d, c) in dx.iter_mut().zip(field.components()) {
                *d = c.eval_real(t, &u, x)?;
            }
            Ok(())
        },
        x0,
        model.horizon,
        &cfg,
    );
    match &sol.status {
        IntegStatus::Completed => Ok(sol),
        other => Err(ObserverError::Integration(format!("{other:?}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scalar_model(noise: f64) -> SystemModel<f64> {
        SystemModel::new(
            VectorField::parse(&["-x1"], 0).unwrap(),
            Matrix::from_rows(&[vec![1.0]]).unwrap(),
            IntervalVector::from_bounds(&[0.0], &[2.0]).unwrap(),
            (0.0, 1.0),
            BoundSignal::empty(),
            BoundSignal::constant(&[-noise], &[noise]).unwrap(),
        )
        .unwrap()
    }

    fn flat_measurement(y: f64) -> MeasurementSignal<f64> {
        MeasurementSignal::new(vec![0.0, 1.0], vec![vec![y], vec![y]]).unwrap()
    }

    #[test]
    fn unconstrained_scalar_decay() {
        let model = scalar_model(0.1);
        let spec = ObserverSpec::new(Variant::NoConstraints, Matrix::zeros(1, 1));
        let (dl, du) =
            observer_rhs(&spec, &model, &flat_measurement(0.5), 0.3, &[0.0], &[2.0]).unwrap();
        assert_eq!(dl, vec![0.0]);
        assert_eq!(du, vec![-2.0]);
    }

    #[test]
    fn own_coordinate_face_is_not_clipped_by_its_slab() {
        // The face pins x1 to a point, and the median in the tightening
        // operator keeps degenerate components fixed.
        let model = scalar_model(0.1);
        let spec = ObserverSpec::new(Variant::Gmac, Matrix::zeros(1, 1));
        let (dl, du) =
            observer_rhs(&spec, &model, &flat_measurement(0.5), 0.3, &[0.0], &[2.0]).unwrap();
        assert_eq!(dl, vec![0.0]);
        assert_eq!(du, vec![-2.0]);
    }

    #[test]
    fn slab_clips_other_coordinates_on_a_face() {
        // x2' = -x1, measuring x1 in [0.4, 0.6]
        let model = SystemModel::new(
            VectorField::parse(&["0", "-x1"], 0).unwrap(),
            Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap(),
            IntervalVector::from_bounds(&[0.0, 0.0], &[2.0, 1.0]).unwrap(),
            (0.0, 1.0),
            BoundSignal::empty(),
            BoundSignal::constant(&[-0.1], &[0.1]).unwrap(),
        )
        .unwrap();
        let meas = flat_measurement(0.5);
        let gmac = ObserverSpec::new(Variant::Gmac, Matrix::zeros(2, 1));
        let (dl, du) = observer_rhs(&gmac, &model, &meas, 0.0, &[0.0, 0.0], &[2.0, 1.0]).unwrap();
        assert!((dl[1] + 0.6).abs() < 1e-15);
        assert!((du[1] + 0.4).abs() < 1e-15);
        let nocon = ObserverSpec::new(Variant::NoConstraints, Matrix::zeros(2, 1));
        let (dl, du) = observer_rhs(&nocon, &model, &meas, 0.0, &[0.0, 0.0], &[2.0, 1.0]).unwrap();
        assert_eq!((dl[1], du[1]), (-2.0, 0.0));
    }

    #[test]
    fn lti_face_matches_linear_extension() {
        let model = SystemModel::new(
            VectorField::parse(&["-2*x1 + x2", "x1 - 2*x2"], 0).unwrap(),
            Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap(),
            IntervalVector::from_bounds(&[0.0, 0.0], &[1.0, 1.0]).unwrap(),
            (0.0, 1.0),
            BoundSignal::empty(),
            BoundSignal::constant(&[0.0], &[0.0]).unwrap(),
        )
        .unwrap();
        let spec = ObserverSpec::new(Variant::NoConstraints, Matrix::zeros(2, 1));
        let (dl, du) =
            observer_rhs(&spec, &model, &flat_measurement(0.0), 0.0, &[0.0, 0.0], &[1.0, 1.0])
                .unwrap();
        assert_eq!(du[0], -1.0);
        assert_eq!(dl[0], 0.0);
        assert_eq!(du[1], -1.0);
    }

    #[test]
    fn fused_and_split_forms_differ_only_in_linear_coupling() {
        // x1' = x2, x2' = x1, gain (0, 1): fused row 2 has coefficient 1 - 1 = 0 on x1.
        let model = SystemModel::new(
            VectorField::parse(&["x2", "x1"], 0).unwrap(),
            Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap(),
            IntervalVector::from_bounds(&[0.0, 0.0], &[1.0, 1.0]).unwrap(),
            (0.0, 1.0),
            BoundSignal::empty(),
            BoundSignal::constant(&[0.0], &[0.0]).unwrap(),
        )
        .unwrap();
        let gain = Matrix::column(&[0.0, 1.0]);
        let meas = flat_measurement(0.0);
        let fused = ObserverSpec::new(Variant::NoConstraints, gain.clone());
        let split = fused.clone().with_linear_form(LinearForm::Split);
        let (fl, fu) = observer_rhs(&fused, &model, &meas, 0.0, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        let (sl, su) = observer_rhs(&split, &model, &meas, 0.0, &[0.0, 0.0], &[1.0, 1.0]).unwrap();
        assert_eq!((fl[1], fu[1]), (0.0, 0.0));
        assert_eq!((sl[1], su[1]), (-1.0, 1.0));
        assert_eq!((fl[0], fu[0]), (sl[0], su[0]));
    }

    #[test]
    fn no_measurements_forces_zero_gain() {
        let spec = ObserverSpec::new(Variant::NoMeasurements, Matrix::column(&[2.0, 0.0]));
        assert!(spec.gain().is_zero());
        assert_eq!(spec.gain().nrows(), 2);
    }

    #[test]
    fn measurement_interpolation_and_clamping() {
        let m = MeasurementSignal::new(vec![0.0, 1.0], vec![vec![0.0], vec![2.0]]).unwrap();
        assert_eq!(m.eval(0.5), vec![1.0]);
        assert_eq!(m.eval(-3.0), vec![0.0]);
        assert_eq!(m.eval(7.0), vec![2.0]);
        assert_eq!(m.eval(1.0), vec![2.0]);
        assert!(MeasurementSignal::new(vec![0.0], vec![vec![0.0]]).is_err());
        assert!(MeasurementSignal::new(vec![1.0, 0.0], vec![vec![0.0], vec![1.0]]).is_err());
    }

    #[test]
    fn noise_free_identity_measurements_reproduce_truth() {
        let c = Matrix::identity(2);
        let truth = |t: f64| vec![t.sin(), t * t];
        let m = make_measurements(truth, &c, |_| vec![0.0, 0.0], 11, (0.0, 1.0)).unwrap();
        for (t, v) in m.times().iter().zip(m.values()) {
            assert_eq!(v, &truth(*t));
        }
        assert!(make_measurements(truth, &c, |_| vec![0.0, 0.0], 1, (0.0, 1.0)).is_err());
    }

    #[test]
    fn truth_simulation() {
        let model = scalar_model(0.0);
        let cfg = IntegConfig::default();
        let sol = simulate_truth(&model, |_| vec![], &[1.0], &cfg).unwrap();
        let x1 = sol.dense_eval(1.0).unwrap()[0];
        assert!((x1 - (-1.0f64).exp()).abs() < 1e-6);
        assert!(simulate_truth(&model, |_| vec![], &[3.0], &cfg).is_err());

        let still = SystemModel::new(
            VectorField::parse(&["0"], 0).unwrap(),
            Matrix::from_rows(&[vec![1.0]]).unwrap(),
            IntervalVector::from_bounds(&[0.0], &[2.0]).unwrap(),
            (0.0, 1.0),
            BoundSignal::empty(),
            BoundSignal::constant(&[0.0], &[0.0]).unwrap(),
        )
        .unwrap();
        let sol = simulate_truth(&still, |_| vec![], &[1.25], &cfg).unwrap();
        assert_eq!(sol.dense_eval(0.6).unwrap(), vec![1.25]);
    }

    #[test]
    fn inadmissible_input_rejected() {
        let model = SystemModel::new(
            VectorField::parse(&["u1"], 1).unwrap(),
            Matrix::from_rows(&[vec![1.0]]).unwrap(),
            IntervalVector::from_bounds(&[0.0], &[1.0]).unwrap(),
            (0.0, 1.0),
            BoundSignal::constant(&[0.0], &[1.0]).unwrap(),
            BoundSignal::constant(&[0.0], &[0.0]).unwrap(),
        )
        .unwrap();
        let cfg = IntegConfig::default();
        assert!(simulate_truth(&model, |t| vec![2.0 * t], &[0.5], &cfg).is_err());
        assert!(simulate_truth(&model, |t| vec![0.5 * t], &[0.5], &cfg).is_ok());
    }

    #[test]
    fn model_validation() {
        let field = VectorField::parse(&["-x1"], 0).unwrap();
        let c = Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap();
        let x0 = IntervalVector::from_bounds(&[0.0], &[1.0]).unwrap();
        let v = BoundSignal::constant(&[0.0], &[0.0]).unwrap();
        assert!(SystemModel::new(field.clone(), c, x0.clone(), (0.0, 1.0), BoundSignal::empty(), v.clone()).is_err());
        let c = Matrix::from_rows(&[vec![1.0]]).unwrap();
        assert!(SystemModel::new(field.clone(), c.clone(), x0.clone(), (1.0, 1.0), BoundSignal::empty(), v.clone()).is_err());
        let inverted = BoundSignal::constant(&[1.0], &[0.0]).unwrap();
        assert!(SystemModel::new(field, c, x0, (0.0, 1.0), BoundSignal::empty(), inverted).is_err());
        let bad = BoundSignal::new(vec![Expr::state(0)], vec![Expr::Const(1.0)]);
        assert!(bad.is_err());
    }
}

//! Adaptive Dormand–Prince 4(5) integration with PI step control, dense
//! output and fixed breakpoints, with an optional switch to a linearly
//! implicit Rosenbrock method once the problem turns stiff.
//!
//! The horizon is cut into segments at the breakpoints and each segment is
//! integrated from a fresh start. The right-hand side is never sampled exactly
//! at an interior breakpoint: stage times that land on a segment's breakpoint
//! end are moved inward by a few ulps so the one-sided limit of a
//! piecewise-defined right-hand side is used.

use std::fmt::Display;

use thiserror::Error;

use crate::expr::sort_dedup;
use crate::linalg::Lu;
use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct IntegConfig<S> {
    pub rel_tol: S,
    pub abs_tol: S,
    /// Largest allowed step; infinite means the segment length.
    pub max_step: S,
    /// Integration stops with `Diverged` once any |state| exceeds this value.
    pub blow_up_threshold: S,
    pub breakpoints: Vec<S>,
    /// Times at which states are recorded. Empty records every accepted step.
    pub output_times: Vec<S>,
    /// Consecutive rejected steps tolerated before reporting `StepUnderflow`.
    pub max_rejections: usize,
    pub method: Method,
}

/// Step method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Method {
    /// Explicit Dormand–Prince 5(4).
    #[default]
    DormandPrince,
    /// Linearly implicit Rosenbrock 2(3) with a finite-difference Jacobian.
    Rosenbrock,
    /// Dormand–Prince until stiffness is detected, Rosenbrock afterwards.
    Auto,
}

impl<S: Scalar> Default for IntegConfig<S> {
    fn default() -> Self {
        Self {
            rel_tol: S::lit(1e-9),
            abs_tol: S::lit(1e-9),
            max_step: S::infinity(),
            blow_up_threshold: S::lit(1e12),
            breakpoints: Vec::new(),
            output_times: Vec::new(),
            max_rejections: 50,
            method: Method::DormandPrince,
        }
    }
}

impl<S: Scalar> IntegConfig<S> {
    pub fn with_tolerances(mut self, rel_tol: S, abs_tol: S) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_output_times(mut self, times: Vec<S>) -> Self {
        self.output_times = times;
        self
    }

    pub fn with_method(mut self, method: Method) -> Self {
        self.method = method;
        self
    }

    pub fn with_breakpoints(mut self, breakpoints: Vec<S>) -> Self {
        self.breakpoints = breakpoints;
        self
    }
}

/// `n` equally spaced times covering `[t0, tf]` inclusive.
pub fn uniform_grid<S: Scalar>(t0: S, tf: S, n: usize) -> Vec<S> {
    match n {
        0 => Vec::new(),
        1 => vec![t0],
        _ => {
            let span = tf - t0;
            let last = S::from_usize(n - 1).expect("grid size");
            (0..n)
                .map(|k| {
                    if k == n - 1 {
                        tf
                    } else {
                        t0 + span * S::from_usize(k).expect("grid index") / last
                    }
                })
                .collect()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum IntegStatus<S> {
    Completed,
    Diverged { time: S },
    StepUnderflow { time: S },
    RhsFailure { time: S, message: String },
}

impl<S: Scalar> IntegStatus<S> {
    pub fn is_completed(&self) -> bool {
        matches!(self, IntegStatus::Completed)
    }

    pub fn failure_time(&self) -> Option<S> {
        match self {
            IntegStatus::Completed => None,
            IntegStatus::Diverged { time }
            | IntegStatus::StepUnderflow { time }
            | IntegStatus::RhsFailure { time, .. } => Some(*time),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IntegStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DenseError {
    #[error("time {t} outside integrated range [{start}, {end}]")]
    OutOfRange { t: f64, start: f64, end: f64 },
}

/// Continuous extension of one accepted step.
#[derive(Debug, Clone)]
struct DenseStep<S> {
    t: S,
    h: S,
    /// Five coefficient vectors, each of the state dimension.
    cont: [Vec<S>; 5],
    y_end: Vec<S>,
}

impl<S: Scalar> DenseStep<S> {
    fn eval(&self, t: S) -> Vec<S> {
        if t == self.t + self.h {
            return self.y_end.clone();
        }
        let s = (t - self.t) / self.h;
        let s1 = S::one() - s;
        let [c0, c1, c2, c3, c4] = &self.cont;
        (0..c0.len())
            .map(|i| c0[i] + s * (c1[i] + s1 * (c2[i] + s * (c3[i] + s1 * c4[i]))))
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct Solution<S> {
    pub times: Vec<S>,
    pub states: Vec<Vec<S>>,
    pub status: IntegStatus<S>,
    pub stats: IntegStats,
    start: S,
    initial: Vec<S>,
    steps: Vec<DenseStep<S>>,
}

impl<S: Scalar> Solution<S> {
    /// Time reached by the last accepted step.
    pub fn end_time(&self) -> S {
        self.steps.last().map_or(self.start, |s| s.t + s.h)
    }

    pub fn final_state(&self) -> &[S] {
        self.steps.last().map_or(&self.initial, |s| &s.y_end)
    }

    /// Dense-output evaluation anywhere in the integrated range.
    pub fn dense_eval(&self, t: S) -> Result<Vec<S>, DenseError> {
        let end = self.end_time();
        if !(t >= self.start && t <= end) {
            return Err(DenseError::OutOfRange {
                t: t.as_f64(),
                start: self.start.as_f64(),
                end: end.as_f64(),
            });
        }
        if self.steps.is_empty() {
            return Ok(self.initial.clone());
        }
        // last step whose start is <= t
        let idx = self.steps.partition_point(|s| s.t <= t).max(1) - 1;
        Ok(self.steps[idx].eval(t))
    }

    pub fn step_times(&self) -> Vec<S> {
        std::iter::once(self.start)
            .chain(self.steps.iter().map(|s| s.t + s.h))
            .collect()
    }
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 0.2;
const C3: f64 = 0.3;
const C4: f64 = 0.8;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 0.2;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Tableau<S> {
    c: [S; 4],
    a: [[S; 6]; 6],
    e: [S; 7],
    d: [S; 7],
}

impl<S: Scalar> Tableau<S> {
    fn new() -> Self {
        let l = S::lit;
        let z = S::zero();
        Self {
            c: [l(C2), l(C3), l(C4), l(C5)],
            a: [
                [l(A21), z, z, z, z, z],
                [l(A31), l(A32), z, z, z, z],
                [l(A41), l(A42), l(A43), z, z, z],
                [l(A51), l(A52), l(A53), l(A54), z, z],
                [l(A61), l(A62), l(A63), l(A64), l(A65), z],
                [l(A71), z, l(A73), l(A74), l(A75), l(A76)],
            ],
            e: [l(E1), z, l(E3), l(E4), l(E5), l(E6), l(E7)],
            d: [l(D1), z, l(D3), l(D4), l(D5), l(D6), l(D7)],
        }
    }
}

enum Halt<S> {
    Diverged(S),
    Underflow(S),
    Rhs(S, String),
}

struct Driver<'a, S, F> {
    rhs: F,
    cfg: &'a IntegConfig<S>,
    n: usize,
    stats: IntegStats,
    /// Clamp window for right-hand-side time arguments in the current segment.
    window: (S, S),
    /// Set once the implicit method has taken over.
    stiff: bool,
}

impl<'a, S, F, E> Driver<'a, S, F>
where
    S: Scalar,
    F: FnMut(S, &[S], &mut [S]) -> Result<(), E>,
    E: Display,
{
    fn eval(&mut self, t: S, y: &[S], out: &mut [S]) -> Result<(), Halt<S>> {
        self.stats.rhs_evals += 1;
        let tc = t.max(self.window.0).min(self.window.1);
        (self.rhs)(tc, y, out).map_err(|e| Halt::Rhs(t, e.to_string()))
    }

    fn scale(&self, a: S, b: S) -> S {
        self.cfg.abs_tol + self.cfg.rel_tol * a.abs().max(b.abs())
    }

    fn initial_step(&mut self, t: S, y: &[S], f0: &[S], hmax: S) -> Result<S, Halt<S>> {
        let n = S::from_usize(self.n).expect("dimension");
        let mut dnf = S::zero();
        let mut dny = S::zero();
        for i in 0..self.n {
            let sk = self.scale(y[i], y[i]);
            dnf += (f0[i] / sk).powi(2);
            dny += (y[i] / sk).powi(2);
        }
        dnf = dnf / n;
        dny = dny / n;
        let tiny = S::lit(1e-10);
        let mut h = if dnf <= tiny || dny <= tiny {
            S::lit(1e-6)
        } else {
            (dny / dnf).sqrt() * S::lit(0.01)
        };
        h = h.min(hmax);
        let y1: Vec<S> = y.iter().zip(f0).map(|(&yi, &fi)| yi + h * fi).collect();
        let mut f1 = vec![S::zero(); self.n];
        self.eval(t + h, &y1, &mut f1)?;
        let mut der2 = S::zero();
        for i in 0..self.n {
            let sk = self.scale(y[i], y[i]);
            der2 += ((f1[i] - f0[i]) / sk).powi(2);
        }
        der2 = (der2 / n).sqrt() / h;
        let der12 = der2.abs().max(dnf.sqrt());
        let h1 = if der12 <= S::lit(1e-15) || !der12.is_finite() {
            S::lit(1e-6).max(h * S::lit(1e-3))
        } else {
            (S::lit(0.01) / der12).powf(S::lit(0.2))
        };
        Ok((S::lit(100.0) * h).min(h1).min(hmax))
    }

    fn segment(
        &mut self,
        a: S,
        b: S,
        y: &mut Vec<S>,
        steps: &mut Vec<DenseStep<S>>,
        outputs: &mut OutputCursor<'_, S>,
    ) -> Result<(), Halt<S>> {
        if !self.stiff {
            match self.explicit_segment(a, b, y, steps, outputs)? {
                None => return Ok(()),
                Some((t, h)) => {
                    self.stiff = true;
                    return self.rosenbrock_segment(t, b, Some(h), y, steps, outputs);
                }
            }
        }
        self.rosenbrock_segment(a, b, None, y, steps, outputs)
    }

    /// Dormand–Prince steps over `[a, b]`. In `Method::Auto` returns the
    /// time and step size at which stiffness was detected.
    fn explicit_segment(
        &mut self,
        a: S,
        b: S,
        y: &mut Vec<S>,
        steps: &mut Vec<DenseStep<S>>,
        outputs: &mut OutputCursor<'_, S>,
    ) -> Result<Option<(S, S)>, Halt<S>> {
        let n = self.n;
        let eps = S::epsilon();
        let hmax = self.cfg.max_step.min(b - a);
        let mut t = a;
        let mut k: [Vec<S>; 7] = std::array::from_fn(|_| vec![S::zero(); n]);
        let mut ystage = vec![S::zero(); n];
        let mut ynew = vec![S::zero(); n];
        self.eval(t, y, &mut k[0])?;
        let f0 = k[0].clone();
        let mut h = self.initial_step(t, y, &f0, hmax)?;
        let mut facold = S::lit(1e-4);
        let mut rejections = 0usize;
        let beta = S::lit(0.04);
        let expo1 = S::lit(0.2) - beta * S::lit(0.75);
        let safe = S::lit(0.9);
        let (facc1, facc2) = (S::lit(5.0), S::lit(0.1));
        let tab = Tableau::<S>::new();
        let detect = self.cfg.method == Method::Auto;
        let mut ysti = vec![S::zero(); n];
        let (mut stiff_hits, mut calm_hits) = (0usize, 0usize);

        while t < b {
            let mut last = false;
            if t + h >= b || (b - t - h).abs() <= S::lit(16.0) * eps * b.abs().max(S::one()) {
                h = b - t;
                last = true;
            }
            if h <= S::lit(16.0) * eps * t.abs().max(S::one()) {
                return Err(Halt::Underflow(t));
            }
            for s in 0..6 {
                let (done, rest) = k.split_at_mut(s + 1);
                for i in 0..n {
                    let acc = done
                        .iter()
                        .zip(&tab.a[s])
                        .fold(S::zero(), |acc, (kj, &a)| acc + a * kj[i]);
                    ystage[i] = y[i] + h * acc;
                }
                if s == 4 {
                    ysti.copy_from_slice(&ystage);
                }
                let ts = if s < 4 { t + tab.c[s] * h } else if last { b } else { t + h };
                self.eval(ts, &ystage, &mut rest[0])?;
            }
            // the last stage point is the 5th-order solution (FSAL)
            ynew.copy_from_slice(&ystage);
            let mut err = S::zero();
            for i in 0..n {
                let mut e = S::zero();
                for (j, kj) in k.iter().enumerate() {
                    e += tab.e[j] * kj[i];
                }
                let sk = self.scale(y[i], ynew[i]);
                err += (h * e / sk).powi(2);
            }
            err = (err / S::from_usize(n).expect("dimension")).sqrt();
            if !err.is_finite() {
                err = S::lit(1e10);
            }

            let fac11 = err.powf(expo1);
            if err <= S::one() {
                let fac = facc2.max(facc1.min(fac11 / facold.powf(beta) / safe));
                facold = err.max(S::lit(1e-4));
                self.stats.accepted += 1;
                rejections = 0;
                let t_new = if last { b } else { t + h };
                let mut cont: [Vec<S>; 5] = std::array::from_fn(|_| vec![S::zero(); n]);
                for i in 0..n {
                    let ydiff = ynew[i] - y[i];
                    let bspl = h * k[0][i] - ydiff;
                    cont[0][i] = y[i];
                    cont[1][i] = ydiff;
                    cont[2][i] = bspl;
                    cont[3][i] = ydiff - h * k[6][i] - bspl;
                    let mut dsum = S::zero();
                    for (j, kj) in k.iter().enumerate() {
                        dsum += tab.d[j] * kj[i];
                    }
                    cont[4][i] = h * dsum;
                }
                let step = DenseStep {
                    t,
                    h: t_new - t,
                    cont,
                    y_end: ynew.clone(),
                };
                outputs.advance(&step);
                steps.push(step);
                y.copy_from_slice(&ynew);
                k.swap(0, 6);
                t = t_new;
                let norm = y.iter().fold(S::zero(), |m, v| m.max(v.abs()));
                if !norm.is_finite() || norm > self.cfg.blow_up_threshold || y.iter().any(|v| v.is_nan()) {
                    return Err(Halt::Diverged(t));
                }
                let h_used = h;
                h = (h / fac).min(hmax);
                if detect && t < b && (self.stats.accepted % 100 == 0 || stiff_hits > 0) {
                    // after the swap k[0] holds f at the new point and k[5] f at the sixth stage
                    let mut num = S::zero();
                    let mut den = S::zero();
                    for i in 0..n {
                        num += (k[0][i] - k[5][i]).powi(2);
                        den += (y[i] - ysti[i]).powi(2);
                    }
                    if den > S::zero() && h_used * (num / den).sqrt() > S::lit(3.25) {
                        calm_hits = 0;
                        stiff_hits += 1;
                        if stiff_hits == 15 {
                            return Ok(Some((t, h)));
                        }
                    } else {
                        calm_hits += 1;
                        if calm_hits == 6 {
                            stiff_hits = 0;
                        }
                    }
                }
            } else {
                self.stats.rejected += 1;
                rejections += 1;
                if rejections > self.cfg.max_rejections {
                    return Err(Halt::Underflow(t));
                }
                h = h / facc1.min(fac11 / safe);
            }
        }
        Ok(None)
    }

    /// Forward-difference Jacobian `jac` (row-major) and time derivative `dt`.
    fn jacobian(&mut self, t: S, y: &[S], f0: &[S], jac: &mut [S], dt: &mut [S]) -> Result<(), Halt<S>> {
        let n = self.n;
        let root = S::epsilon().sqrt();
        let mut yp = y.to_vec();
        let mut fp = vec![S::zero(); n];
        for j in 0..n {
            let delta = root * y[j].abs().max(S::one());
            yp[j] = y[j] + delta;
            let delta = yp[j] - y[j];
            self.eval(t, &yp, &mut fp)?;
            for i in 0..n {
                jac[i * n + j] = (fp[i] - f0[i]) / delta;
            }
            yp[j] = y[j];
        }
        let mut delta = root * t.abs().max(S::one());
        if t + delta > self.window.1 {
            delta = -delta;
        }
        self.eval(t + delta, y, &mut fp)?;
        for i in 0..n {
            dt[i] = (fp[i] - f0[i]) / delta;
        }
        Ok(())
    }

    /// Linearly implicit Rosenbrock 2(3) steps (Shampine and Reichelt) over `[a, b]`.
    fn rosenbrock_segment(
        &mut self,
        a: S,
        b: S,
        h_start: Option<S>,
        y: &mut Vec<S>,
        steps: &mut Vec<DenseStep<S>>,
        outputs: &mut OutputCursor<'_, S>,
    ) -> Result<(), Halt<S>> {
        let n = self.n;
        let eps = S::epsilon();
        let hmax = self.cfg.max_step.min(b - a);
        let two = S::lit(2.0);
        let d = S::one() / (two + two.sqrt());
        let e32 = S::lit(6.0) + two.sqrt();
        let third = S::one() / S::lit(3.0);
        let mut t = a;
        let mut f0 = vec![S::zero(); n];
        self.eval(t, y, &mut f0)?;
        let mut h = match h_start {
            Some(h) => h.min(hmax),
            None => self.initial_step(t, y, &f0.clone(), hmax)?,
        };
        let mut jac = vec![S::zero(); n * n];
        let mut dt = vec![S::zero(); n];
        let mut w = vec![S::zero(); n * n];
        let mut rhs = vec![S::zero(); n];
        let (mut k1, mut k2, mut k3) = (vec![S::zero(); n], vec![S::zero(); n], vec![S::zero(); n]);
        let (mut f1, mut f2) = (vec![S::zero(); n], vec![S::zero(); n]);
        let mut ystage = vec![S::zero(); n];
        let mut ynew = vec![S::zero(); n];
        let mut rejections = 0usize;
        let mut fresh_jacobian = false;

        while t < b {
            if !fresh_jacobian {
                self.jacobian(t, y, &f0, &mut jac, &mut dt)?;
                fresh_jacobian = true;
            }
            let mut last = false;
            if t + h >= b || (b - t - h).abs() <= S::lit(16.0) * eps * b.abs().max(S::one()) {
                h = b - t;
                last = true;
            }
            if h <= S::lit(16.0) * eps * t.abs().max(S::one()) {
                return Err(Halt::Underflow(t));
            }
            let t_new = if last { b } else { t + h };
            let hd = h * d;
            for i in 0..n {
                for j in 0..n {
                    w[i * n + j] = -hd * jac[i * n + j];
                }
                w[i * n + i] += S::one();
            }
            let err = match Lu::factor(n, w.clone()) {
                None => S::infinity(),
                Some(lu) => {
                    for i in 0..n {
                        rhs[i] = f0[i] + hd * dt[i];
                    }
                    lu.solve(&rhs, &mut k1);
                    for i in 0..n {
                        ystage[i] = y[i] + S::lit(0.5) * h * k1[i];
                    }
                    self.eval(t + S::lit(0.5) * h, &ystage, &mut f1)?;
                    for i in 0..n {
                        rhs[i] = f1[i] - k1[i];
                    }
                    lu.solve(&rhs, &mut k2);
                    for i in 0..n {
                        k2[i] += k1[i];
                        ynew[i] = y[i] + h * k2[i];
                    }
                    self.eval(t_new, &ynew, &mut f2)?;
                    for i in 0..n {
                        rhs[i] = f2[i] - e32 * (k2[i] - f1[i]) - two * (k1[i] - f0[i]) + hd * dt[i];
                    }
                    lu.solve(&rhs, &mut k3);
                    let mut acc = S::zero();
                    for i in 0..n {
                        let e = h / S::lit(6.0) * (k1[i] - two * k2[i] + k3[i]);
                        acc += (e / self.scale(y[i], ynew[i])).powi(2);
                    }
                    (acc / S::from_usize(n).expect("dimension")).sqrt()
                }
            };

            if err.is_finite() && err <= S::one() {
                self.stats.accepted += 1;
                let h_used = t_new - t;
                let mut cont: [Vec<S>; 5] = std::array::from_fn(|_| vec![S::zero(); n]);
                for i in 0..n {
                    let ydiff = ynew[i] - y[i];
                    let bspl = h_used * f0[i] - ydiff;
                    cont[0][i] = y[i];
                    cont[1][i] = ydiff;
                    cont[2][i] = bspl;
                    cont[3][i] = ydiff - h_used * f2[i] - bspl;
                }
                let step = DenseStep {
                    t,
                    h: h_used,
                    cont,
                    y_end: ynew.clone(),
                };
                outputs.advance(&step);
                steps.push(step);
                y.copy_from_slice(&ynew);
                std::mem::swap(&mut f0, &mut f2);
                fresh_jacobian = false;
                t = t_new;
                let norm = y.iter().fold(S::zero(), |m, v| m.max(v.abs()));
                if !norm.is_finite() || norm > self.cfg.blow_up_threshold {
                    return Err(Halt::Diverged(t));
                }
                let grow = S::lit(0.9) * err.max(S::lit(1e-10)).powf(-third);
                let grow = if rejections > 0 { grow.min(S::one()) } else { grow.min(S::lit(5.0)) };
                rejections = 0;
                h = (h * grow.max(S::lit(0.1))).min(hmax);
            } else {
                self.stats.rejected += 1;
                rejections += 1;
                if rejections > self.cfg.max_rejections {
                    return Err(Halt::Underflow(t));
                }
                let shrink = if err.is_finite() {
                    (S::lit(0.9) * err.powf(-third)).max(S::lit(0.1))
                } else {
                    S::lit(0.1)
                };
                h = h * shrink;
            }
        }
        Ok(())
    }
}

struct OutputCursor<'a, S> {
    times: &'a [S],
    next: usize,
    every_step: bool,
    out_t: Vec<S>,
    out_y: Vec<Vec<S>>,
}

impl<'a, S: Scalar> OutputCursor<'a, S> {
    fn advance(&mut self, step: &DenseStep<S>) {
        let end = step.t + step.h;
        if self.every_step {
            self.out_t.push(end);
            self.out_y.push(step.y_end.clone());
            return;
        }
        while self.next < self.times.len() && self.times[self.next] <= end {
            let tau = self.times[self.next];
            self.out_t.push(tau);
            self.out_y.push(step.eval(tau));
            self.next += 1;
        }
    }
}

/// Integrates `y' = rhs(t, y)` over `horizon`. Failures are reported through
/// [`Solution::status`]; outputs are recorded up to the failure.
pub fn integrate<S, F, E>(rhs: F, state0: &[S], horizon: (S, S), config: &IntegConfig<S>) -> Solution<S>
where
    S: Scalar,
    F: FnMut(S, &[S], &mut [S]) -> Result<(), E>,
    E: Display,
{
    let (t0, tf) = horizon;
    assert!(t0 < tf, "integration horizon must satisfy t0 < tf");
    let mut cuts: Vec<S> = config
        .breakpoints
        .iter()
        .copied()
        .filter(|&b| b > t0 && b < tf)
        .collect();
    sort_dedup(&mut cuts);
    let mut nodes = Vec::with_capacity(cuts.len() + 2);
    nodes.push(t0);
    nodes.extend(cuts);
    nodes.push(tf);

    let mut out_times: Vec<S> = config
        .output_times
        .iter()
        .copied()
        .filter(|&t| t >= t0 && t <= tf)
        .collect();
    sort_dedup(&mut out_times);
    let mut outputs = OutputCursor {
        times: &out_times,
        next: 0,
        every_step: config.output_times.is_empty(),
        out_t: Vec::new(),
        out_y: Vec::new(),
    };
    if outputs.every_step || out_times.first() == Some(&t0) {
        outputs.out_t.push(t0);
        outputs.out_y.push(state0.to_vec());
        if !outputs.every_step {
            outputs.next = 1;
        }
    }

    let mut driver = Driver {
        rhs,
        cfg: config,
        n: state0.len(),
        stats: IntegStats::default(),
        window: (t0, tf),
        stiff: config.method == Method::Rosenbrock,
    };
    let mut y = state0.to_vec();
    let mut steps = Vec::new();
    let mut status = IntegStatus::Completed;
    for (idx, w) in nodes.windows(2).enumerate() {
        let (a, b) = (w[0], w[1]);
        let nudge = |x: S| S::lit(4.0) * S::epsilon() * x.abs().max(S::one());
        let lo = if idx == 0 { a } else { a + nudge(a) };
        let hi = if idx + 2 == nodes.len() { b } else { b - nudge(b) };
        driver.window = (lo, hi);
        if let Err(halt) = driver.segment(a, b, &mut y, &mut steps, &mut outputs) {
            status = match halt {
                Halt::Diverged(t) => IntegStatus::Diverged { time: t },
                Halt::Underflow(t) => IntegStatus::StepUnderflow { time: t },
                Halt::Rhs(t, message) => IntegStatus::RhsFailure { time: t, message },
            };
            break;
        }
    }
    Solution {
        times: outputs.out_t,
        states: outputs.out_y,
        status,
        stats: driver.stats,
        start: t0,
        initial: state0.to_vec(),
        steps,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::convert::Infallible;

    fn decay(_t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), Infallible> {
        dy[0] = -y[0];
        Ok(())
    }

    #[test]
    fn exponential_decay_endpoint() {
        let cfg = IntegConfig::default();
        let sol = integrate(decay, &[1.0], (0.0, 1.0), &cfg);
        assert!(sol.status.is_completed());
        let err = (sol.final_state()[0] - (-1.0f64).exp()).abs();
        assert!(err < 1e-8, "err = {err:e}");
    }

    #[test]
    fn dense_output_at_midpoints() {
        let cfg = IntegConfig::default();
        let sol = integrate(decay, &[1.0], (0.0, 1.0), &cfg);
        let knots = sol.step_times();
        for w in knots.windows(2) {
            let mid = 0.5 * (w[0] + w[1]);
            let v = sol.dense_eval(mid).unwrap()[0];
            assert!((v - (-mid).exp()).abs() < 1e-7);
        }
        // step endpoints are returned exactly
        let t_end = knots[1];
        assert_eq!(sol.dense_eval(t_end).unwrap(), sol.steps[0].y_end);
        assert_eq!(sol.dense_eval(0.0).unwrap(), vec![1.0]);
        assert!(sol.dense_eval(1.5).is_err());
        assert!(sol.dense_eval(-0.1).is_err());
    }

    #[test]
    fn constant_solution() {
        let cfg = IntegConfig::default();
        let sol = integrate(
            |_t: f64, _y: &[f64], dy: &mut [f64]| -> Result<(), Infallible> {
                dy[0] = 0.0;
                Ok(())
            },
            &[2.5],
            (0.0, 3.0),
            &cfg,
        );
        for t in [0.0, 0.7, 1.9, 3.0] {
            assert_eq!(sol.dense_eval(t).unwrap(), vec![2.5]);
        }
    }

    #[test]
    fn finite_time_blow_up_is_reported() {
        let cfg = IntegConfig::default();
        let sol = integrate(
            |_t: f64, y: &[f64], dy: &mut [f64]| -> Result<(), Infallible> {
                dy[0] = y[0] * y[0];
                Ok(())
            },
            &[1.0],
            (0.0, 2.0),
            &cfg,
        );
        match sol.status {
            IntegStatus::Diverged { time } | IntegStatus::StepUnderflow { time } => {
                assert!(time < 1.0, "failure at {time}")
            }
            other => panic!("unexpected status {other:?}"),
        }
    }

    #[test]
    fn piecewise_constant_rhs_is_exact_across_breakpoint() {
        let cfg = IntegConfig::default().with_breakpoints(vec![1.0]);
        let sol = integrate(
            |t: f64, _y: &[f64], dy: &mut [f64]| -> Result<(), Infallible> {
                // value 0 on (-inf, 1], 1 afterwards
                dy[0] = if t <= 1.0 { 0.0 } else { 1.0 };
                Ok(())
            },
            &[0.0],
            (0.0, 2.0),
            &cfg,
        );
        assert!(sol.status.is_completed());
        assert!((sol.final_state()[0] - 1.0).abs() < 1e-12);
        assert!(sol.dense_eval(1.0).unwrap()[0].abs() < 1e-12);
        assert!((sol.dense_eval(1.5).unwrap()[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn outputs_on_requested_grid() {
        let grid = uniform_grid(0.0, 1.0, 11);
        let cfg = IntegConfig::default().with_output_times(grid.clone());
        let sol = integrate(decay, &[1.0], (0.0, 1.0), &cfg);
        assert_eq!(sol.times, grid);
        for (t, y) in sol.times.iter().zip(&sol.states) {
            assert!((y[0] - (-t).exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn rhs_failure_is_reported() {
        let cfg = IntegConfig::default();
        let sol = integrate(
            |t: f64, y: &[f64], dy: &mut [f64]| {
                if t > 0.5 {
                    return Err("boom");
                }
                dy[0] = y[0];
                Ok(())
            },
            &[1.0],
            (0.0, 1.0),
            &cfg,
        );
        assert!(matches!(sol.status, IntegStatus::RhsFailure { .. }));
        assert!(sol.end_time() <= 0.5 + 1e-12);
    }

    #[test]
    fn deterministic() {
        let cfg = IntegConfig::default().with_output_times(uniform_grid(0.0, 5.0, 50));
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| -> Result<(), Infallible> {
            dy[0] = y[1];
            dy[1] = -y[0] + t.sin();
            Ok(())
        };
        let a = integrate(rhs, &[1.0, 0.0], (0.0, 5.0), &cfg);
        let b = integrate(rhs, &[1.0, 0.0], (0.0, 5.0), &cfg);
        assert_eq!(a.states, b.states);
    }

    #[test]
    fn uniform_grid_endpoints() {
        let g = uniform_grid(0.0, 20.0, 500);
        assert_eq!(g.len(), 500);
        assert_eq!(g[0], 0.0);
        assert_eq!(g[499], 20.0);
        assert!(uniform_grid(0.0, 1.0, 0).is_empty());
        assert_eq!(uniform_grid(3.0, 4.0, 1), vec![3.0]);
    }

    fn stiff_tracker(t: f64, y: &[f64], dy: &mut [f64]) -> Result<(), Infallible> {
        dy[0] = -1e5 * (y[0] - t.cos());
        Ok(())
    }

    fn stiff_exact(t: f64) -> f64 {
        let l: f64 = 1e5;
        let steady = (l * l * t.cos() + l * t.sin()) / (l * l + 1.0);
        steady + (1.0 - l * l / (l * l + 1.0)) * (-l * t).exp()
    }

    #[test]
    fn rosenbrock_decay_and_dense_output() {
        let cfg = IntegConfig::default().with_method(Method::Rosenbrock);
        let sol = integrate(decay, &[1.0], (0.0, 1.0), &cfg);
        assert!(sol.status.is_completed());
        assert!((sol.final_state()[0] - (-1.0f64).exp()).abs() < 1e-6);
        let mid = sol.dense_eval(0.37).unwrap()[0];
        assert!((mid - (-0.37f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn auto_switches_on_stiff_problem() {
        let cfg = IntegConfig::default().with_method(Method::Auto);
        let sol = integrate(stiff_tracker, &[1.0], (0.0, 2.0), &cfg);
        assert!(sol.status.is_completed());
        assert!((sol.final_state()[0] - stiff_exact(2.0)).abs() < 1e-7);
        let explicit = integrate(stiff_tracker, &[1.0], (0.0, 2.0), &IntegConfig::default());
        assert!(sol.stats.accepted * 2 < explicit.stats.accepted);
    }

    #[test]
    fn auto_stays_explicit_on_nonstiff_problem() {
        let auto = integrate(decay, &[1.0], (0.0, 5.0), &IntegConfig::default().with_method(Method::Auto));
        let plain = integrate(decay, &[1.0], (0.0, 5.0), &IntegConfig::default());
        assert_eq!(auto.final_state(), plain.final_state());
    }

    #[test]
    fn rosenbrock_honours_breakpoints() {
        let step = |t: f64, _y: &[f64], dy: &mut [f64]| -> Result<(), Infallible> {
            dy[0] = if t <= 1.0 { 1.0 } else { 0.0 };
            Ok(())
        };
        let cfg = IntegConfig::default()
            .with_method(Method::Rosenbrock)
            .with_breakpoints(vec![1.0]);
        let sol = integrate(step, &[0.0], (0.0, 2.0), &cfg);
        assert!((sol.final_state()[0] - 1.0).abs() < 1e-12);
    }
}

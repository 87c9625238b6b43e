//! Observer-gain synthesis.
//!
//! For linear dynamics `x' = A x` with output `y = C x`, a gain `L` makes the
//! unconstrained interval observer asymptotically exact whenever the
//! Gershgorin-type margin
//!
//! ```text
//! max_i  a_ii - l_i.C_i + sum_{j != i} |a_ij - l_i.C_j|
//! ```
//!
//! is negative. The margin is minimized through an LP in `(L, B, s)` where the
//! off-diagonal `b_ij` bound the absolute values and `s` bounds every row.

mod simplex;

use thiserror::Error;

use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GainError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("lower bound on s must be negative, got {0}")]
    NonNegativeSMin(f64),
    #[error("gain entry bound must be positive, got {0}")]
    NonPositiveGainBound(f64),
    #[error("gain LP did not reach an optimum: {0:?}")]
    LpFailed(LpStatus),
    #[error("no certified gain: optimal s* = {s_star} is not negative (margin {margin})")]
    SynthesisFailed { s_star: f64, margin: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

/// `min c.x  s.t.  rows: a.x <= b,  lower <= x <= upper` (bounds optional).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLP<S> {
    pub objective: Vec<S>,
    pub rows: Vec<(Vec<S>, S)>,
    pub lower: Vec<Option<S>>,
    pub upper: Vec<Option<S>>,
}

impl<S: Scalar> DenseLP<S> {
    /// LP over `n` free variables with the given objective and no rows.
    pub fn new(objective: Vec<S>) -> Self {
        let n = objective.len();
        Self {
            objective,
            rows: Vec::new(),
            lower: vec![None; n],
            upper: vec![None; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<S>, rhs: S) {
        assert_eq!(coeffs.len(), self.num_vars(), "row length");
        self.rows.push((coeffs, rhs));
    }

    pub fn set_bounds(&mut self, var: usize, lower: Option<S>, upper: Option<S>) {
        self.lower[var] = lower;
        self.upper[var] = upper;
    }

    /// Largest violation of any row or bound at `x` (zero when feasible).
    pub fn max_violation(&self, x: &[S]) -> S {
        let mut worst = S::zero();
        for (a, b) in &self.rows {
            worst = worst.max(crate::linalg::dot(a, x) - *b);
        }
        for (j, &xj) in x.iter().enumerate() {
            if let Some(lo) = self.lower[j] {
                worst = worst.max(lo - xj);
            }
            if let Some(hi) = self.upper[j] {
                worst = worst.max(xj - hi);
            }
        }
        worst
    }

    fn validate(&self) -> Result<(), GainError> {
        let n = self.num_vars();
        if n == 0 {
            return Err(GainError::DimensionMismatch("LP has no variables".into()));
        }
        if self.lower.len() != n || self.upper.len() != n {
            return Err(GainError::DimensionMismatch("bound vectors".into()));
        }
        if let Some(k) = self.rows.iter().position(|(a, _)| a.len() != n) {
            return Err(GainError::DimensionMismatch(format!("LP row {k}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution<S> {
    pub values: Vec<S>,
    pub objective: S,
    pub status: LpStatus,
}

impl<S: Scalar> LpSolution<S> {
    fn failed(status: LpStatus) -> Self {
        Self {
            values: Vec::new(),
            objective: S::nan(),
            status,
        }
    }
}

/// Solves a dense LP. Infeasible and unbounded problems are reported in
/// [`LpSolution::status`]; malformed LPs are reported as `Infeasible`.
pub fn solve_lp<S: Scalar>(lp: &DenseLP<S>) -> LpSolution<S> {
    if lp.validate().is_err() {
        return LpSolution::failed(LpStatus::Infeasible);
    }
    if lp
        .lower
        .iter()
        .zip(&lp.upper)
        .any(|(l, u)| matches!((l, u), (Some(l), Some(u)) if l > u))
    {
        return LpSolution::failed(LpStatus::Infeasible);
    }
    simplex::solve(lp)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearObserverData<S> {
    a: Matrix<S>,
    c: Matrix<S>,
}

impl<S: Scalar> LinearObserverData<S> {
    pub fn new(a: Matrix<S>, c: Matrix<S>) -> Result<Self, GainError> {
        if a.nrows() != a.ncols() {
            return Err(GainError::DimensionMismatch(format!(
                "A must be square, got {}x{}",
                a.nrows(),
                a.ncols()
            )));
        }
        if c.ncols() != a.nrows() {
            return Err(GainError::DimensionMismatch(format!(
                "C has {} columns, expected {}",
                c.ncols(),
                a.nrows()
            )));
        }
        Ok(Self { a, c })
    }

    pub fn a(&self) -> &Matrix<S> {
        &self.a
    }

    pub fn c(&self) -> &Matrix<S> {
        &self.c
    }

    pub fn n_x(&self) -> usize {
        self.a.nrows()
    }

    pub fn n_y(&self) -> usize {
        self.c.nrows()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GainResult<S> {
    pub gain: Matrix<S>,
    pub s_star: S,
    pub margin: S,
    pub feasible: bool,
}

/// Variable layout of the gain LP.
#[derive(Debug, Clone, Copy)]
pub struct GainLpLayout {
    pub n_x: usize,
    pub n_y: usize,
}

impl GainLpLayout {
    /// Index of `L[i][k]`.
    pub fn l(&self, i: usize, k: usize) -> usize {
        i * self.n_y + k
    }

    /// Index of `b_ij`, `j != i`. Diagonal entries are eliminated.
    pub fn b(&self, i: usize, j: usize) -> usize {
        debug_assert_ne!(i, j);
        let jj = if j < i { j } else { j - 1 };
        self.n_x * self.n_y + i * (self.n_x - 1) + jj
    }

    pub fn s(&self) -> usize {
        self.n_x * self.n_y + self.n_x * (self.n_x - 1)
    }

    pub fn num_vars(&self) -> usize {
        self.s() + 1
    }
}

/// Builds the gain LP. Rows are emitted family by family:
/// `l_i.C_j - b_ij <= a_ij` for all `i != j`, then
/// `-l_i.C_j - b_ij <= -a_ij`, then `-l_i.C_i + sum_j b_ij - s <= -a_ii`.
pub fn build_gain_lp<S: Scalar>(
    data: &LinearObserverData<S>,
    s_min: S,
    l_bound: S,
) -> Result<DenseLP<S>, GainError> {
    if !(s_min < S::zero()) {
        return Err(GainError::NonNegativeSMin(s_min.as_f64()));
    }
    if !(l_bound > S::zero()) {
        return Err(GainError::NonPositiveGainBound(l_bound.as_f64()));
    }
    let (n_x, n_y) = (data.n_x(), data.n_y());
    let layout = GainLpLayout { n_x, n_y };
    let nv = layout.num_vars();
    let mut objective = vec![S::zero(); nv];
    objective[layout.s()] = S::one();
    let mut lp = DenseLP::new(objective);
    let (a, c) = (&data.a, &data.c);

    for sign in [S::one(), -S::one()] {
        for i in 0..n_x {
            for j in (0..n_x).filter(|&j| j != i) {
                let mut row = vec![S::zero(); nv];
                for k in 0..n_y {
                    row[layout.l(i, k)] = sign * c[(k, j)];
                }
                row[layout.b(i, j)] = -S::one();
                lp.add_row(row, sign * a[(i, j)]);
            }
        }
    }
    for i in 0..n_x {
        let mut row = vec![S::zero(); nv];
        for k in 0..n_y {
            row[layout.l(i, k)] = -c[(k, i)];
        }
        for j in (0..n_x).filter(|&j| j != i) {
            row[layout.b(i, j)] = S::one();
        }
        row[layout.s()] = -S::one();
        lp.add_row(row, -a[(i, i)]);
    }

    for i in 0..n_x {
        for k in 0..n_y {
            lp.set_bounds(layout.l(i, k), Some(-l_bound), Some(l_bound));
        }
        for j in (0..n_x).filter(|&j| j != i) {
            lp.set_bounds(layout.b(i, j), Some(S::zero()), None);
        }
    }
    lp.set_bounds(layout.s(), Some(s_min), None);
    Ok(lp)
}

/// `max_i [a_ii - l_i.C_i + sum_{j != i} |a_ij - l_i.C_j|]`, the Gershgorin
/// bound on the width dynamics `A - L C` with off-diagonals in absolute value.
pub fn margin_of<S: Scalar>(data: &LinearObserverData<S>, gain: &Matrix<S>) -> Result<S, GainError> {
    if gain.nrows() != data.n_x() || gain.ncols() != data.n_y() {
        return Err(GainError::DimensionMismatch(format!(
            "gain is {}x{}, expected {}x{}",
            gain.nrows(),
            gain.ncols(),
            data.n_x(),
            data.n_y()
        )));
    }
    let m = data.a.sub(&gain.matmul(&data.c));
    Ok((0..data.n_x())
        .map(|i| {
            (0..data.n_x()).fold(S::zero(), |acc, j| {
                if j == i {
                    acc + m[(i, i)]
                } else {
                    acc + m[(i, j)].abs()
                }
            })
        })
        .fold(S::neg_infinity(), S::max))
}

/// Solves the gain LP and certifies the resulting gain.
pub fn synthesize_gain<S: Scalar>(
    data: &LinearObserverData<S>,
    s_min: S,
    l_bound: S,
) -> Result<GainResult<S>, GainError> {
    let lp = build_gain_lp(data, s_min, l_bound)?;
    let sol = solve_lp(&lp);
    if sol.status != LpStatus::Optimal {
        return Err(GainError::LpFailed(sol.status));
    }
    let layout = GainLpLayout {
        n_x: data.n_x(),
        n_y: data.n_y(),
    };
    let mut gain = Matrix::zeros(data.n_x(), data.n_y());
    for i in 0..data.n_x() {
        for k in 0..data.n_y() {
            gain[(i, k)] = sol.values[layout.l(i, k)];
        }
    }
    let margin = margin_of(data, &gain)?;
    let s_star = sol.objective;
    if !(s_star < S::zero()) {
        return Err(GainError::SynthesisFailed {
            s_star: s_star.as_f64(),
            margin: margin.as_f64(),
        });
    }
    Ok(GainResult {
        gain,
        s_star,
        margin,
        feasible: margin < S::zero(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linearized() -> LinearObserverData<f64> {
        let r3 = 3f64.sqrt();
        LinearObserverData::new(
            Matrix::from_rows(&[vec![2.0, 0.0, 0.0], vec![1.0, -4.0, r3], vec![-1.0, -r3, -4.0]])
                .unwrap(),
            Matrix::from_rows(&[vec![1.0, 0.0, 0.0]]).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn single_bound_lp() {
        let mut lp = DenseLP::new(vec![1.0f64]);
        lp.add_row(vec![-1.0], -3.0);
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.values[0] - 3.0).abs() < 1e-12);
        assert!((sol.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn unbounded_and_infeasible() {
        let lp = DenseLP::new(vec![1.0f64]);
        assert_eq!(solve_lp(&lp).status, LpStatus::Unbounded);

        let mut lp = DenseLP::new(vec![1.0f64]);
        lp.add_row(vec![1.0], 1.0);
        lp.add_row(vec![-1.0], -2.0);
        assert_eq!(solve_lp(&lp).status, LpStatus::Infeasible);

        let mut lp = DenseLP::new(vec![1.0f64]);
        lp.set_bounds(0, Some(1.0), Some(0.0));
        assert_eq!(solve_lp(&lp).status, LpStatus::Infeasible);
    }

    #[test]
    fn mixed_bounds() {
        // max x + y (min -x - y) s.t. x + 2y <= 4, x <= 3 (upper only), y free, y >= -1 via row
        let mut lp = DenseLP::new(vec![-1.0f64, -1.0]);
        lp.add_row(vec![1.0, 2.0], 4.0);
        lp.add_row(vec![0.0, -1.0], 1.0);
        lp.set_bounds(0, None, Some(3.0));
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.values[0] - 3.0).abs() < 1e-12);
        assert!((sol.values[1] - 0.5).abs() < 1e-12);
        assert!(lp.max_violation(&sol.values) <= 1e-9);
    }

    #[test]
    fn gain_lp_shape() {
        let lp = build_gain_lp(&linearized(), -10.0, 100.0).unwrap();
        assert_eq!(lp.num_vars(), 10);
        assert_eq!(lp.rows.len(), 15);
    }

    #[test]
    fn scalar_gain_lp_solved_by_hand() {
        // a = 1, c = 2: row -2 l - s <= -1, min s -> s = s_min, l = (a - s_min)/c
        let data = LinearObserverData::new(
            Matrix::from_rows(&[vec![1.0f64]]).unwrap(),
            Matrix::from_rows(&[vec![2.0]]).unwrap(),
        )
        .unwrap();
        let res = synthesize_gain(&data, -3.0, 100.0).unwrap();
        assert!((res.s_star + 3.0).abs() < 1e-12);
        assert!((res.gain[(0, 0)] - 2.0).abs() < 1e-12);
        assert!((res.margin + 3.0).abs() < 1e-12);
    }

    #[test]
    fn zero_output_matrix_gives_gershgorin_bound() {
        let data = LinearObserverData::new(
            Matrix::from_rows(&[vec![-3.0f64, 1.0], vec![-2.0, -1.0]]).unwrap(),
            Matrix::from_rows(&[vec![0.0, 0.0]]).unwrap(),
        )
        .unwrap();
        let lp = build_gain_lp(&data, -10.0, 100.0).unwrap();
        let sol = solve_lp(&lp);
        assert_eq!(sol.status, LpStatus::Optimal);
        assert!((sol.objective - 1.0).abs() < 1e-9, "{}", sol.objective);
        let res = synthesize_gain(&data, -10.0, 100.0);
        assert!(matches!(res, Err(GainError::SynthesisFailed { .. })));
    }

    #[test]
    fn unobservable_scalar_fails() {
        let data = LinearObserverData::new(
            Matrix::from_rows(&[vec![1.0]]).unwrap(),
            Matrix::from_rows(&[vec![0.0]]).unwrap(),
        )
        .unwrap();
        match synthesize_gain(&data, -10.0, 100.0) {
            Err(GainError::SynthesisFailed { s_star, margin }) => {
                assert!((s_star - 1.0).abs() < 1e-12);
                assert_eq!(margin, 1.0);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn margins_of_published_gains() {
        let data = linearized();
        let r3 = 3f64.sqrt();
        let l2 = Matrix::column(&[4.27, 1.0, -1.0]);
        let m2 = margin_of(&data, &l2).unwrap();
        assert!((m2 - (-4.0 + r3)).abs() < 1e-12);
        assert!((m2 + 2.268).abs() < 1e-3);
        let l1 = Matrix::column(&[3.0, 0.0, 0.0]);
        assert!((margin_of(&data, &l1).unwrap() + 1.0).abs() < 1e-12);
        let zero = Matrix::zeros(3, 1);
        assert_eq!(margin_of(&data, &zero).unwrap(), 2.0);
        let diag = LinearObserverData::new(
            Matrix::from_rows(&[vec![-1.0, 0.0], vec![0.0, -2.0]]).unwrap(),
            Matrix::from_rows(&[vec![1.0, 0.0]]).unwrap(),
        )
        .unwrap();
        assert_eq!(margin_of(&diag, &Matrix::zeros(2, 1)).unwrap(), -1.0);
        assert!(margin_of(&data, &Matrix::zeros(2, 1)).is_err());
    }

    #[test]
    fn synthesized_gain_certifies_linearized_system() {
        let data = linearized();
        let res = synthesize_gain(&data, -2.27, 10.0).unwrap();
        assert!(res.s_star < 0.0);
        assert!(res.margin <= res.s_star + 1e-9);
        let res = synthesize_gain(&data, -10.0, 100.0).unwrap();
        assert!(res.feasible);
        assert!((res.s_star - (-4.0 + 3f64.sqrt())).abs() < 1e-9);
        assert!(res.margin <= res.s_star + 1e-9);
    }

    #[test]
    fn invalid_bounds_rejected() {
        let data = linearized();
        assert!(matches!(
            build_gain_lp(&data, 1.0, 10.0),
            Err(GainError::NonNegativeSMin(_))
        ));
        assert!(matches!(
            build_gain_lp(&data, -1.0, 0.0),
            Err(GainError::NonPositiveGainBound(_))
        ));
    }
}

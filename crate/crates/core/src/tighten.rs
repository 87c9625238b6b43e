//! Box faces with midpoint repair, single-pass interval tightening against
//! linear inequalities, and its specialization to measurement slabs.

use thiserror::Error;

use crate::interval::{Interval, IntervalVector};
use crate::linalg::Matrix;
use crate::scalar::{median3, Scalar};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TightenError {
    #[error("dimension mismatch in {what}: expected {expected}, found {found}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    #[error("face index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("noise bounds inverted in component {0}")]
    InvertedNoiseBounds(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Lower,
    Upper,
}

/// The `fixed_index`-th lower or upper face of a (repaired) box.
#[derive(Debug, Clone, PartialEq)]
pub struct FaceBox<S> {
    pub bounds: IntervalVector<S>,
    pub fixed_index: usize,
    pub fixed_side: Side,
}

/// Face of the box `[v, w]`, repaired when bounds cross: each component is
/// widened to `[min(v_j, m_j), max(w_j, m_j)]` with `m_j` the midpoint, then
/// component `i` (0-based) is pinned to its lower or upper end.
pub fn face<S: Scalar>(v: &[S], w: &[S], i: usize, side: Side) -> Result<FaceBox<S>, TightenError> {
    if v.len() != w.len() {
        return Err(TightenError::DimensionMismatch {
            what: "face bounds",
            expected: v.len(),
            found: w.len(),
        });
    }
    if i >= v.len() {
        return Err(TightenError::IndexOutOfRange {
            index: i,
            dim: v.len(),
        });
    }
    Ok(FaceBox {
        bounds: face_unchecked(v, w, i, side),
        fixed_index: i,
        fixed_side: side,
    })
}

pub(crate) fn face_unchecked<S: Scalar>(v: &[S], w: &[S], i: usize, side: Side) -> IntervalVector<S> {
    let two = S::lit(2.0);
    let components = v
        .iter()
        .zip(w)
        .enumerate()
        .map(|(j, (&vj, &wj))| {
            let m = (vj + wj) / two;
            let (lo, hi) = (vj.min(m), wj.max(m));
            if j == i {
                match side {
                    Side::Lower => Interval::point(lo),
                    Side::Upper => Interval::point(hi),
                }
            } else {
                Interval::raw(lo, hi)
            }
        })
        .collect();
    IntervalVector::from_vec_unchecked(components)
}

/// Linear inequalities `M z <= d`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraints<S> {
    m: Matrix<S>,
    d: Vec<S>,
}

impl<S: Scalar> LinearConstraints<S> {
    pub fn new(m: Matrix<S>, d: Vec<S>) -> Result<Self, TightenError> {
        if m.nrows() != d.len() {
            return Err(TightenError::DimensionMismatch {
                what: "constraint right-hand side",
                expected: m.nrows(),
                found: d.len(),
            });
        }
        Ok(Self { m, d })
    }

    pub fn matrix(&self) -> &Matrix<S> {
        &self.m
    }

    pub fn rhs(&self) -> &[S] {
        &self.d
    }

    /// Whether `z` satisfies every row.
    pub fn is_satisfied(&self, z: &[S]) -> bool {
        self.m
            .rows_iter()
            .zip(&self.d)
            .all(|(row, &di)| crate::linalg::dot(row, z) <= di)
    }
}

/// Counts of bound updates performed by one tightening pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TightenReport {
    /// Updates where the bound moved strictly inward.
    pub tightened: usize,
    /// Updates where the candidate fell beyond the opposite endpoint, so the
    /// median clamped the component to a single point.
    pub collapsed: usize,
}

impl TightenReport {
    pub fn active(&self) -> bool {
        self.tightened + self.collapsed > 0
    }
}

/// Single pass of the interval-tightening operator: rows outer, columns
/// inner, each update applied in place so later columns see it.
pub fn tighten_interval<S: Scalar>(
    bounds: &IntervalVector<S>,
    constraints: &LinearConstraints<S>,
) -> Result<IntervalVector<S>, TightenError> {
    tighten_interval_with_report(bounds, constraints).map(|(b, _)| b)
}

pub fn tighten_interval_with_report<S: Scalar>(
    bounds: &IntervalVector<S>,
    constraints: &LinearConstraints<S>,
) -> Result<(IntervalVector<S>, TightenReport), TightenError> {
    let n = bounds.dim();
    if constraints.m.ncols() != n {
        return Err(TightenError::DimensionMismatch {
            what: "constraint columns",
            expected: n,
            found: constraints.m.ncols(),
        });
    }
    let mut lo = bounds.lower();
    let mut hi = bounds.upper();
    let report = tighten_in_place(&mut lo, &mut hi, &constraints.m, &constraints.d);
    let out = lo
        .into_iter()
        .zip(hi)
        .map(|(l, h)| Interval::raw(l, h))
        .collect();
    Ok((IntervalVector::from_vec_unchecked(out), report))
}

pub(crate) fn tighten_in_place<S: Scalar>(
    lo: &mut [S],
    hi: &mut [S],
    m: &Matrix<S>,
    d: &[S],
) -> TightenReport {
    let mut report = TightenReport::default();
    for (row, &di) in m.rows_iter().zip(d) {
        for (j, &mij) in row.iter().enumerate() {
            if mij.is_zero() {
                continue;
            }
            let mut acc = di;
            for (k, &mik) in row.iter().enumerate() {
                if k != j {
                    acc += (-mik * lo[k]).max(-mik * hi[k]);
                }
            }
            let candidate = acc / mij;
            let gamma = median3(lo[j], hi[j], candidate);
            if mij > S::zero() {
                if gamma < hi[j] {
                    if candidate < lo[j] {
                        report.collapsed += 1;
                    } else {
                        report.tightened += 1;
                    }
                }
                hi[j] = gamma;
            } else {
                if gamma > lo[j] {
                    if candidate > hi[j] {
                        report.collapsed += 1;
                    } else {
                        report.tightened += 1;
                    }
                }
                lo[j] = gamma;
            }
        }
    }
    report
}

/// Constraints `[C; -C] z <= [y - vL; -y + vU]`, i.e. the slab
/// `y - vU <= C z <= y - vL`.
pub fn measurement_constraints<S: Scalar>(
    c: &Matrix<S>,
    y: &[S],
    v_lower: &[S],
    v_upper: &[S],
) -> Result<LinearConstraints<S>, TightenError> {
    let ny = c.nrows();
    for (what, len) in [("measurement", y.len()), ("noise lower bound", v_lower.len()), ("noise upper bound", v_upper.len())] {
        if len != ny {
            return Err(TightenError::DimensionMismatch {
                what,
                expected: ny,
                found: len,
            });
        }
    }
    if let Some(k) = v_lower.iter().zip(v_upper).position(|(l, u)| l > u) {
        return Err(TightenError::InvertedNoiseBounds(k));
    }
    let mut m = Matrix::zeros(2 * ny, c.ncols());
    for i in 0..ny {
        for j in 0..c.ncols() {
            m[(i, j)] = c[(i, j)];
            m[(ny + i, j)] = -c[(i, j)];
        }
    }
    let d = y
        .iter()
        .zip(v_lower)
        .map(|(&yi, &l)| yi - l)
        .chain(y.iter().zip(v_upper).map(|(&yi, &u)| -yi + u))
        .collect();
    LinearConstraints::new(m, d)
}

/// Tightens a box against the measurement slab.
pub fn apply_ic<S: Scalar>(
    bounds: &IntervalVector<S>,
    c: &Matrix<S>,
    y: &[S],
    v_lower: &[S],
    v_upper: &[S],
) -> Result<IntervalVector<S>, TightenError> {
    let constraints = measurement_constraints(c, y, v_lower, v_upper)?;
    tighten_interval(bounds, &constraints)
}

/// Precomputed `[C; -C]` for repeated tightening with changing `y` and noise
/// bounds. Used on the observer's hot path.
#[derive(Debug, Clone)]
pub(crate) struct MeasurementSlab<S> {
    m: Matrix<S>,
    d: Vec<S>,
}

impl<S: Scalar> MeasurementSlab<S> {
    pub(crate) fn new(c: &Matrix<S>) -> Self {
        let ny = c.nrows();
        let mut m = Matrix::zeros(2 * ny, c.ncols());
        for i in 0..ny {
            for j in 0..c.ncols() {
                m[(i, j)] = c[(i, j)];
                m[(ny + i, j)] = -c[(i, j)];
            }
        }
        Self {
            m,
            d: vec![S::zero(); 2 * ny],
        }
    }

    pub(crate) fn set(&mut self, y: &[S], v_lower: &[S], v_upper: &[S]) {
        let ny = y.len();
        for i in 0..ny {
            self.d[i] = y[i] - v_lower[i];
            self.d[ny + i] = -y[i] + v_upper[i];
        }
    }

    pub(crate) fn apply(&self, lo: &mut [S], hi: &mut [S]) -> TightenReport {
        tighten_in_place(lo, hi, &self.m, &self.d)
    }
}

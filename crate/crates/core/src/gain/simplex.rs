//! Dense two-phase simplex with Bland's anti-cycling rule.

use crate::scalar::Scalar;

use super::{DenseLP, LpSolution, LpStatus};

/// How an original variable is expressed through nonnegative columns.
enum VarMap {
    /// `x = lower + y[col]`
    Shifted { col: usize },
    /// `x = upper - y[col]`
    Reflected { col: usize },
    /// `x = y[pos] - y[neg]`
    Free { pos: usize, neg: usize },
}

struct Tableau<S> {
    rows: Vec<Vec<S>>,
    rhs: Vec<S>,
    basis: Vec<usize>,
    tol: S,
}

impl<S: Scalar> Tableau<S> {
    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        self.rhs[r] /= p;
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r];
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c];
            if f.is_zero() {
                continue;
            }
            for (v, &pv) in self.rows[i].iter_mut().zip(&prow) {
                *v -= f * pv;
            }
            self.rows[i][c] = S::zero();
            self.rhs[i] -= f * prhs;
            if self.rhs[i] < S::zero() && self.rhs[i] > -self.tol {
                self.rhs[i] = S::zero();
            }
        }
        self.basis[r] = c;
    }

    /// Minimizes `cost . y` over the current basis. Returns `false` when unbounded.
    fn optimize(&mut self, cost: &[S], allowed: impl Fn(usize) -> bool) -> bool {
        let ncols = cost.len();
        let max_iter = 50_000usize;
        for _ in 0..max_iter {
            // Bland: lowest-index column with negative reduced cost enters.
            let entering = (0..ncols).filter(|&j| allowed(j)).find(|&j| {
                if self.basis.contains(&j) {
                    return false;
                }
                let mut reduced = cost[j];
                for (i, row) in self.rows.iter().enumerate() {
                    reduced -= cost[self.basis[i]] * row[j];
                }
                reduced < -self.tol
            });
            let Some(c) = entering else {
                return true;
            };
            let mut leave: Option<(usize, S)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                let a = row[c];
                if a > self.tol {
                    let ratio = self.rhs[i] / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - self.tol
                                || (ratio <= lr + self.tol && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return false;
            };
            self.pivot(r, c);
        }
        true
    }
}

pub(super) fn solve<S: Scalar>(lp: &DenseLP<S>) -> LpSolution<S> {
    let tol = S::epsilon().sqrt() * S::lit(0.1);
    let nvar = lp.objective.len();

    // Columns for the original variables, plus extra bound rows.
    let mut maps = Vec::with_capacity(nvar);
    let mut ncols = 0usize;
    let mut bound_rows: Vec<(usize, S)> = Vec::new();
    for j in 0..nvar {
        match (lp.lower[j], lp.upper[j]) {
            (Some(lo), hi) => {
                maps.push(VarMap::Shifted { col: ncols });
                if let Some(hi) = hi {
                    bound_rows.push((ncols, hi - lo));
                }
                ncols += 1;
            }
            (None, Some(_)) => {
                maps.push(VarMap::Reflected { col: ncols });
                ncols += 1;
            }
            (None, None) => {
                maps.push(VarMap::Free {
                    pos: ncols,
                    neg: ncols + 1,
                });
                ncols += 2;
            }
        }
    }
    // Anchor value of each variable: its lower bound, else its upper bound.
    let anchor = |j: usize| -> S {
        match (lp.lower[j], lp.upper[j]) {
            (Some(lo), _) => lo,
            (None, Some(hi)) => hi,
            _ => S::zero(),
        }
    };

    // Structural rows `A' y <= b'`.
    let mut a_rows: Vec<Vec<S>> = Vec::new();
    let mut b_vals: Vec<S> = Vec::new();
    for (coeffs, rhs) in &lp.rows {
        let mut row = vec![S::zero(); ncols];
        let mut b = *rhs;
        for (j, &a) in coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            b -= a * anchor(j);
            match maps[j] {
                VarMap::Shifted { col } => row[col] += a,
                VarMap::Reflected { col } => row[col] -= a,
                VarMap::Free { pos, neg } => {
                    row[pos] += a;
                    row[neg] -= a;
                }
            }
        }
        a_rows.push(row);
        b_vals.push(b);
    }
    for (col, ub) in bound_rows {
        let mut row = vec![S::zero(); ncols];
        row[col] = S::one();
        a_rows.push(row);
        b_vals.push(ub);
    }

    let m = a_rows.len();
    let n_art = b_vals.iter().filter(|b| **b < S::zero()).count();
    let total = ncols + m + n_art;
    let mut rows = Vec::with_capacity(m);
    let mut rhs = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = ncols + m;
    for (i, (row, b)) in a_rows.into_iter().zip(b_vals).enumerate() {
        let mut full = vec![S::zero(); total];
        full[..ncols].copy_from_slice(&row);
        full[ncols + i] = S::one();
        if b < S::zero() {
            for v in full.iter_mut() {
                *v = -*v;
            }
            full[art] = S::one();
            basis.push(art);
            art += 1;
            rhs.push(-b);
        } else {
            basis.push(ncols + i);
            rhs.push(b);
        }
        rows.push(full);
    }
    let mut tab = Tableau {
        rows,
        rhs,
        basis,
        tol,
    };
    let is_art = |j: usize| j >= ncols + m;

    if n_art > 0 {
        let cost: Vec<S> = (0..total)
            .map(|j| if is_art(j) { S::one() } else { S::zero() })
            .collect();
        tab.optimize(&cost, |_| true);
        let infeas = tab
            .basis
            .iter()
            .zip(&tab.rhs)
            .filter(|(b, _)| is_art(**b))
            .fold(S::zero(), |acc, (_, &v)| acc + v);
        let scale = tab.rhs.iter().fold(S::one(), |m, v| m.max(v.abs()));
        if infeas > S::epsilon().sqrt() * scale {
            return LpSolution::failed(LpStatus::Infeasible);
        }
        // Drive zero-valued artificials out of the basis; drop redundant rows.
        let mut r = 0;
        while r < tab.rows.len() {
            if is_art(tab.basis[r]) {
                let col = (0..ncols + m).find(|&j| tab.rows[r][j].abs() > tol);
                match col {
                    Some(c) => {
                        tab.pivot(r, c);
                        r += 1;
                    }
                    None => {
                        tab.rows.remove(r);
                        tab.rhs.remove(r);
                        tab.basis.remove(r);
                    }
                }
            } else {
                r += 1;
            }
        }
    }

    let mut cost = vec![S::zero(); total];
    for (j, &c) in lp.objective.iter().enumerate() {
        match maps[j] {
            VarMap::Shifted { col } => cost[col] += c,
            VarMap::Reflected { col } => cost[col] -= c,
            VarMap::Free { pos, neg } => {
                cost[pos] += c;
                cost[neg] -= c;
            }
        }
    }
    if !tab.optimize(&cost, |j| !is_art(j)) {
        return LpSolution::failed(LpStatus::Unbounded);
    }

    let mut y = vec![S::zero(); total];
    for (i, &b) in tab.basis.iter().enumerate() {
        y[b] = tab.rhs[i];
    }
    let values: Vec<S> = (0..nvar)
        .map(|j| match maps[j] {
            VarMap::Shifted { col } => anchor(j) + y[col],
            VarMap::Reflected { col } => anchor(j) - y[col],
            VarMap::Free { pos, neg } => y[pos] - y[neg],
        })
        .collect();
    let objective = crate::linalg::dot(&lp.objective, &values);
    LpSolution {
        values,
        objective,
        status: LpStatus::Optimal,
    }
}

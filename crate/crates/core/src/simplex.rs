//! Dense two-phase simplex with Bland's rule, for desk-scale problems.
//!
//! Solves `max c·x` subject to `A_le x ≤ b_le`, `A_eq x = b_eq`, `x ≥ 0`.

use crate::error::{Error, Result};

pub const LP_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub le: Vec<(Vec<f64>, f64)>,
    pub eq: Vec<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn optimal(&self) -> Option<(&[f64], f64)> {
        match self {
            LpOutcome::Optimal { x, value } => Some((x, *value)),
            _ => None,
        }
    }
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>) -> Self {
        Self { objective, ..Self::default() }
    }

    pub fn le(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.le.push((row, rhs));
        self
    }

    pub fn eq(mut self, row: Vec<f64>, rhs: f64) -> Self {
        self.eq.push((row, rhs));
        self
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        solve(self)
    }
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    width: usize,
}

enum Phase {
    Optimal,
    Unbounded,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.width]
    }

    fn pivot(&mut self, r: usize, c: usize, reduced: &mut [f64]) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i != r {
                let f = row[c];
                if f != 0.0 {
                    for (v, pv) in row.iter_mut().zip(&pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        let f = reduced[c];
        if f != 0.0 {
            for (v, pv) in reduced.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[r] = c;
    }

    /// Reduced costs `c_j − c_B·T_j`, with the negated objective value in the last slot.
    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut r: Vec<f64> = cost.to_vec();
        r.push(0.0);
        for (row, &b) in self.rows.iter().zip(&self.basis) {
            let cb = cost[b];
            if cb != 0.0 {
                for (v, x) in r.iter_mut().zip(row) {
                    *v -= cb * x;
                }
            }
        }
        r
    }

    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> Result<Phase> {
        let mut reduced = self.reduced_costs(cost);
        let cap = 50_000 + 100 * self.width * self.rows.len();
        for _ in 0..cap {
            let Some(enter) = (0..self.width).find(|&j| allowed[j] && reduced[j] > LP_TOL) else {
                return Ok(Phase::Optimal);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][enter];
                if a > LP_TOL {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((l, best)) => {
                            if ratio < best - LP_TOL || (ratio <= best + LP_TOL && self.basis[i] < self.basis[l]) {
                                Some((i, ratio))
                            } else {
                                Some((l, best))
                            }
                        }
                    };
                }
            }
            let Some((r, _)) = leave else {
                return Ok(Phase::Unbounded);
            };
            self.pivot(r, enter, &mut reduced);
        }
        Err(Error::LinearProgram(format!("no convergence after {cap} pivots")))
    }
}

pub fn solve(lp: &LinearProgram) -> Result<LpOutcome> {
    let n = lp.objective.len();
    if n == 0 {
        return Err(Error::LinearProgram("no variables".into()));
    }
    for (row, rhs) in lp.le.iter().chain(&lp.eq) {
        if row.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: row.len() });
        }
        if !rhs.is_finite() || row.iter().any(|x| !x.is_finite()) {
            return Err(Error::LinearProgram("non-finite coefficient".into()));
        }
    }
    let n_le = lp.le.len();
    let m = n_le + lp.eq.len();
    let needs_art: Vec<bool> = lp.le.iter().map(|(_, b)| *b < 0.0).chain(lp.eq.iter().map(|_| true)).collect();
    let n_art = needs_art.iter().filter(|&&x| x).count();
    let width = n + n_le + n_art;
    let mut rows = Vec::with_capacity(m);
    let mut basis = Vec::with_capacity(m);
    let mut art = n + n_le;
    for (i, (row, rhs)) in lp.le.iter().chain(&lp.eq).enumerate() {
        let sign = if *rhs < 0.0 { -1.0 } else { 1.0 };
        let mut t = vec![0.0; width + 1];
        for (v, a) in t.iter_mut().zip(row) {
            *v = sign * a;
        }
        if i < n_le {
            t[n + i] = sign;
        }
        t[width] = sign * rhs;
        if needs_art[i] {
            t[art] = 1.0;
            basis.push(art);
            art += 1;
        } else {
            basis.push(n + i);
        }
        rows.push(t);
    }
    let mut tab = Tableau { rows, basis, width };

    if n_art > 0 {
        let mut cost = vec![0.0; width];
        for c in cost.iter_mut().skip(n + n_le) {
            *c = -1.0;
        }
        let all = vec![true; width];
        tab.optimize(&cost, &all)?;
        let infeas: f64 = tab.basis.iter().enumerate().filter(|(_, &b)| b >= n + n_le).map(|(i, _)| tab.rhs(i)).sum();
        if infeas > LP_TOL * (1.0 + m as f64) {
            return Ok(LpOutcome::Infeasible);
        }
        // Drive remaining zero-level artificials out of the basis where possible.
        for r in 0..m {
            if tab.basis[r] >= n + n_le {
                if let Some(c) = (0..n + n_le).find(|&c| tab.rows[r][c].abs() > LP_TOL) {
                    let mut dummy = vec![0.0; width + 1];
                    tab.pivot(r, c, &mut dummy);
                }
            }
        }
    }

    let mut cost = vec![0.0; width];
    cost[..n].copy_from_slice(&lp.objective);
    let allowed: Vec<bool> = (0..width).map(|j| j < n + n_le).collect();
    match tab.optimize(&cost, &allowed)? {
        Phase::Unbounded => Ok(LpOutcome::Unbounded),
        Phase::Optimal => {
            let mut x = vec![0.0; n];
            for (i, &b) in tab.basis.iter().enumerate() {
                if b < n {
                    x[b] = tab.rhs(i).max(0.0);
                }
            }
            let value = x.iter().zip(&lp.objective).map(|(a, c)| a * c).sum();
            Ok(LpOutcome::Optimal { x, value })
        }
    }
}

//! Dense two-phase simplex for small linear programs
//!
//! ```text
//! maximize cᵀx  subject to  A x ≤ b,  x ≥ 0
//! ```
//!
//! `b` may have any sign; rows with negative right-hand side get an
//! artificial variable and are made feasible in phase one. Pivoting follows
//! Bland's rule, so degenerate problems (equalities written as two opposing
//! inequalities, redundant facets) terminate.

const EPS: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { x: Vec<f64>, value: f64 },
    Infeasible,
    Unbounded,
}

struct Tableau {
    rows: Vec<Vec<f64>>,
    basis: Vec<usize>,
    n_cols: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.rows[i][self.n_cols]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let p = self.rows[r][c];
        for v in self.rows[r].iter_mut() {
            *v /= p;
        }
        let pivot_row = self.rows[r].clone();
        for (i, row) in self.rows.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for (v, &pv) in row.iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
    }

    fn reduced_cost(&self, cost: &[f64], j: usize) -> f64 {
        let mut rc = cost[j];
        for (i, &bi) in self.basis.iter().enumerate() {
            rc -= cost[bi] * self.rows[i][j];
        }
        rc
    }

    /// Runs primal simplex on `cost` over the allowed columns. Returns false
    /// when the objective is unbounded.
    fn optimize(&mut self, cost: &[f64], allowed: &[bool]) -> bool {
        let max_iter = 50 * (self.n_cols + self.rows.len()) + 1000;
        for _ in 0..max_iter {
            let entering = (0..self.n_cols)
                .find(|&j| allowed[j] && !self.basis.contains(&j) && self.reduced_cost(cost, j) > EPS);
            let Some(c) = entering else {
                return true;
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows.len() {
                let a = self.rows[i][c];
                if a > EPS {
                    let ratio = self.rhs(i) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            if ratio < lr - EPS
                                || (ratio <= lr + EPS && self.basis[i] < self.basis[li])
                            {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            match leave {
                Some((r, _)) => self.pivot(r, c),
                None => return false,
            }
        }
        log::warn!("simplex iteration limit reached");
        true
    }
}

/// Solves `max cᵀx s.t. A x ≤ b, x ≥ 0`.
pub fn maximize(c: &[f64], a: &[Vec<f64>], b: &[f64]) -> LpOutcome {
    let n = c.len();
    let m = a.len();
    debug_assert_eq!(m, b.len());
    let negative: Vec<usize> = (0..m).filter(|&i| b[i] < 0.0).collect();
    let n_art = negative.len();
    // columns: x (n) | slack (m) | artificial (n_art) | rhs
    let n_cols = n + m + n_art;
    let mut rows = vec![vec![0.0; n_cols + 1]; m];
    let mut basis = vec![0; m];
    let mut art = 0;
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            rows[i][j] = sign * a[i][j];
        }
        rows[i][n + i] = sign;
        rows[i][n_cols] = sign * b[i];
        if b[i] < 0.0 {
            rows[i][n + m + art] = 1.0;
            basis[i] = n + m + art;
            art += 1;
        } else {
            basis[i] = n + i;
        }
    }
    let mut tab = Tableau { rows, basis, n_cols };

    if n_art > 0 {
        let mut phase1 = vec![0.0; n_cols];
        for v in phase1.iter_mut().skip(n + m) {
            *v = -1.0;
        }
        tab.optimize(&phase1, &vec![true; n_cols]);
        let infeasibility: f64 = (0..m)
            .filter(|&i| tab.basis[i] >= n + m)
            .map(|i| tab.rhs(i))
            .sum();
        let scale = 1.0 + b.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
        if infeasibility > 1e-9 * scale {
            return LpOutcome::Infeasible;
        }
        // drive remaining (zero-level) artificials out of the basis
        for i in 0..m {
            if tab.basis[i] >= n + m {
                if let Some(c) = (0..n + m).find(|&j| tab.rows[i][j].abs() > EPS) {
                    tab.pivot(i, c);
                }
            }
        }
    }

    let mut cost = vec![0.0; n_cols];
    cost[..n].copy_from_slice(c);
    let allowed: Vec<bool> = (0..n_cols).map(|j| j < n + m).collect();
    if !tab.optimize(&cost, &allowed) {
        return LpOutcome::Unbounded;
    }
    let mut x = vec![0.0; n];
    for (i, &bi) in tab.basis.iter().enumerate() {
        if bi < n {
            x[bi] = tab.rhs(i);
        }
    }
    let value = c.iter().zip(&x).map(|(ci, xi)| ci * xi).sum();
    LpOutcome::Optimal { x, value }
}

//! Dense two-phase primal simplex for small linear programs.
//!
//! Solves `min cᵀx` subject to linear rows and `x ≥ 0`. Bland's rule picks
//! both the entering and leaving variable, so the method cannot cycle.

use thiserror::Error;

const EPS: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub rel: Relation,
    pub rhs: f64,
}

impl Constraint {
    pub fn new(coeffs: Vec<f64>, rel: Relation, rhs: f64) -> Self {
        Constraint { coeffs, rel, rhs }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum LpError {
    #[error("infeasible")]
    Infeasible,
    #[error("unbounded")]
    Unbounded,
    #[error("constraint width does not match the objective")]
    Shape,
}

struct Tableau {
    /// `m` constraint rows, each `n_cols + 1` wide (last entry is the rhs).
    rows: Vec<Vec<f64>>,
    /// Reduced-cost row, same width; last entry is minus the objective.
    obj: Vec<f64>,
    basis: Vec<usize>,
    n_cols: usize,
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
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
        let f = self.obj[c];
        if f != 0.0 {
            for (v, pv) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pv;
            }
        }
        self.basis[r] = c;
    }

    /// Runs simplex iterations over columns `allowed`. Bland's rule.
    fn optimize(&mut self, allowed: &dyn Fn(usize) -> bool) -> Result<(), LpError> {
        loop {
            let Some(c) = (0..self.n_cols).find(|&j| allowed(j) && self.obj[j] < -EPS) else {
                return Ok(());
            };
            let mut leave: Option<(usize, f64)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if row[c] > EPS {
                    let ratio = row[self.n_cols] / row[c];
                    let better = match leave {
                        None => true,
                        Some((l, best)) => {
                            ratio < best - EPS || (ratio <= best + EPS && self.basis[i] < self.basis[l])
                        }
                    };
                    if better {
                        leave = Some((i, ratio));
                    }
                }
            }
            let (r, _) = leave.ok_or(LpError::Unbounded)?;
            self.pivot(r, c);
        }
    }

    fn set_objective(&mut self, costs: &[f64]) {
        self.obj = costs.to_vec();
        self.obj.resize(self.n_cols + 1, 0.0);
        for (i, &b) in self.basis.iter().enumerate() {
            let f = self.obj[b];
            if f != 0.0 {
                for (v, rv) in self.obj.iter_mut().zip(&self.rows[i]) {
                    *v -= f * rv;
                }
            }
        }
    }
}

pub fn minimize(c: &[f64], constraints: &[Constraint]) -> Result<LpSolution, LpError> {
    let n = c.len();
    if constraints.iter().any(|k| k.coeffs.len() != n) {
        return Err(LpError::Shape);
    }
    // Normalize to nonnegative right-hand sides.
    let rows: Vec<(Vec<f64>, Relation, f64)> = constraints
        .iter()
        .map(|k| {
            if k.rhs < 0.0 {
                let rel = match k.rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
                (k.coeffs.iter().map(|v| -v).collect(), rel, -k.rhs)
            } else {
                (k.coeffs.clone(), k.rel, k.rhs)
            }
        })
        .collect();

    let m = rows.len();
    let n_slack = rows.iter().filter(|r| r.1 != Relation::Eq).count();
    let n_art = rows.iter().filter(|r| r.1 != Relation::Le).count();
    let n_cols = n + n_slack + n_art;
    let art_start = n + n_slack;

    let mut t = Tableau {
        rows: Vec::with_capacity(m),
        obj: Vec::new(),
        basis: Vec::with_capacity(m),
        n_cols,
    };
    let (mut si, mut ai) = (n, art_start);
    for (coeffs, rel, rhs) in rows {
        let mut row = coeffs;
        row.resize(n_cols + 1, 0.0);
        row[n_cols] = rhs;
        match rel {
            Relation::Le => {
                row[si] = 1.0;
                t.basis.push(si);
                si += 1;
            }
            Relation::Ge => {
                row[si] = -1.0;
                si += 1;
                row[ai] = 1.0;
                t.basis.push(ai);
                ai += 1;
            }
            Relation::Eq => {
                row[ai] = 1.0;
                t.basis.push(ai);
                ai += 1;
            }
        }
        t.rows.push(row);
    }

    // Phase 1: drive the artificial variables to zero.
    if n_art > 0 {
        let mut phase1 = vec![0.0; n_cols];
        phase1[art_start..].iter_mut().for_each(|v| *v = 1.0);
        t.set_objective(&phase1);
        t.optimize(&|_| true)?;
        let scale = 1.0 + t.rows.iter().map(|r| r[n_cols].abs()).fold(0.0, f64::max);
        if -t.obj[n_cols] > 1e-9 * scale {
            return Err(LpError::Infeasible);
        }
        // Pivot zero-level artificials out where a structural column allows.
        for r in 0..m {
            if t.basis[r] >= art_start {
                if let Some(c) = (0..art_start).find(|&j| t.rows[r][j].abs() > EPS) {
                    t.pivot(r, c);
                }
            }
        }
    }

    // Phase 2 on the structural and slack columns only.
    t.set_objective(c);
    t.optimize(&|j| j < art_start)?;

    let mut x = vec![0.0; n];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < n {
            x[b] = t.rows[i][n_cols];
        }
    }
    let objective = c.iter().zip(&x).map(|(a, b)| a * b).sum();
    Ok(LpSolution { x, objective })
}

//! Dense two-phase simplex for small linear programs.
//!
//! Minimizes `cᵀx` subject to linear rows and `x ≥ 0`. Bland's rule keeps
//! the pivoting finite and deterministic. Intended for problems with a few
//! dozen variables; there is no sparsity or scaling.

use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-12;
const FEAS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
struct Row {
    coeffs: Vec<f64>,
    sense: Sense,
    rhs: f64,
}

/// A linear program over nonnegative variables.
#[derive(Debug, Clone)]
pub struct LinearProgram {
    cost: Vec<f64>,
    rows: Vec<Row>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: f64, x: Vec<f64> },
    Infeasible,
    Unbounded,
}

impl LinearProgram {
    pub fn new(cost: Vec<f64>) -> Self {
        Self {
            cost,
            rows: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.cost.len()
    }

    pub fn add_row(&mut self, coeffs: Vec<f64>, sense: Sense, rhs: f64) {
        assert_eq!(coeffs.len(), self.cost.len(), "row width");
        self.rows.push(Row { coeffs, sense, rhs });
    }

    pub fn solve(&self) -> Result<LpOutcome> {
        Tableau::build(self).run()
    }
}

/// Standard-form tableau: `m` constraint rows plus one objective row.
struct Tableau {
    m: usize,
    /// columns: structural, slack, artificial, rhs
    width: usize,
    n_struct: usize,
    n_art_start: usize,
    a: Vec<Vec<f64>>,
    basis: Vec<usize>,
    cost: Vec<f64>,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let n = lp.num_vars();
        let m = lp.rows.len();
        let n_slack = lp.rows.iter().filter(|r| r.sense != Sense::Eq).count();
        let n_art_start = n + n_slack;
        let width = n_art_start + m + 1;
        let mut a = vec![vec![0.0; width]; m];
        let mut slack = n;
        for (i, row) in lp.rows.iter().enumerate() {
            let r = &mut a[i];
            r[..n].copy_from_slice(&row.coeffs);
            match row.sense {
                Sense::Le => {
                    r[slack] = 1.0;
                    slack += 1;
                }
                Sense::Ge => {
                    r[slack] = -1.0;
                    slack += 1;
                }
                Sense::Eq => {}
            }
            r[width - 1] = row.rhs;
            if row.rhs < 0.0 {
                r.iter_mut().for_each(|v| *v = -*v);
            }
            r[n_art_start + i] = 1.0;
        }
        let mut cost = vec![0.0; width - 1];
        cost[..n].copy_from_slice(&lp.cost);
        Self {
            m,
            width,
            n_struct: n,
            n_art_start,
            a,
            basis: (0..m).map(|i| n_art_start + i).collect(),
            cost,
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let piv = self.a[row][col];
        self.a[row].iter_mut().for_each(|v| *v /= piv);
        let pivot_row = self.a[row].clone();
        for (i, r) in self.a.iter_mut().enumerate() {
            if i == row {
                continue;
            }
            let f = r[col];
            if f != 0.0 {
                for (v, &p) in r.iter_mut().zip(&pivot_row) {
                    *v -= f * p;
                }
                r[col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Reduced cost of column `j` for objective `c`.
    fn reduced(&self, c: &[f64], j: usize) -> f64 {
        let mut z = c[j];
        for (i, &b) in self.basis.iter().enumerate() {
            z -= c[b] * self.a[i][j];
        }
        z
    }

    /// Runs simplex iterations over columns `< limit`. Returns false if unbounded.
    fn optimize(&mut self, c: &[f64], limit: usize) -> Result<bool> {
        let rhs = self.width - 1;
        for _ in 0..100_000 {
            // Bland: lowest-index improving column
            let entering =
                (0..limit).find(|&j| !self.basis.contains(&j) && self.reduced(c, j) < -PIVOT_TOL);
            let Some(col) = entering else {
                return Ok(true);
            };
            let mut best: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let aij = self.a[i][col];
                if aij > PIVOT_TOL {
                    let ratio = self.a[i][rhs] / aij;
                    best = match best {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - PIVOT_TOL
                                || (ratio <= br + PIVOT_TOL && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            match best {
                None => return Ok(false),
                Some((row, _)) => self.pivot(row, col),
            }
        }
        Err(Error::Internal("simplex iteration limit".into()))
    }

    fn run(mut self) -> Result<LpOutcome> {
        let rhs = self.width - 1;
        let mut phase1 = vec![0.0; self.width - 1];
        phase1[self.n_art_start..].iter_mut().for_each(|v| *v = 1.0);
        self.optimize(&phase1, self.width - 1)?;
        let infeas: f64 = (0..self.m)
            .filter(|&i| self.basis[i] >= self.n_art_start)
            .map(|i| self.a[i][rhs])
            .sum();
        if infeas > FEAS_TOL {
            return Ok(LpOutcome::Infeasible);
        }
        // drive zero-level artificials out of the basis; drop redundant rows
        let mut i = 0;
        while i < self.m {
            if self.basis[i] >= self.n_art_start {
                let col = (0..self.n_art_start).find(|&j| self.a[i][j].abs() > 1e-9);
                match col {
                    Some(j) => {
                        self.pivot(i, j);
                        i += 1;
                    }
                    None => {
                        self.a.remove(i);
                        self.basis.remove(i);
                        self.m -= 1;
                    }
                }
            } else {
                i += 1;
            }
        }
        let cost = self.cost.clone();
        if !self.optimize(&cost, self.n_art_start)? {
            return Ok(LpOutcome::Unbounded);
        }
        let mut x = vec![0.0; self.n_struct];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.n_struct {
                x[b] = self.a[i][rhs];
            }
        }
        let value = x.iter().zip(&self.cost).map(|(a, b)| a * b).sum();
        Ok(LpOutcome::Optimal { value, x })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn optimum(lp: &LinearProgram) -> f64 {
        match lp.solve().unwrap() {
            LpOutcome::Optimal { value, .. } => value,
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y, x <= 4, 2y <= 12, 3x + 2y <= 18 -> 36 at (2, 6)
        let mut lp = LinearProgram::new(vec![-3.0, -5.0]);
        lp.add_row(vec![1.0, 0.0], Sense::Le, 4.0);
        lp.add_row(vec![0.0, 2.0], Sense::Le, 12.0);
        lp.add_row(vec![3.0, 2.0], Sense::Le, 18.0);
        match lp.solve().unwrap() {
            LpOutcome::Optimal { value, x } => {
                assert!((value + 36.0).abs() < 1e-12);
                assert!((x[0] - 2.0).abs() < 1e-12 && (x[1] - 6.0).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y, x + y = 1, x >= 0.25 (as Ge), y >= 0.1
        let mut lp = LinearProgram::new(vec![1.0, 2.0]);
        lp.add_row(vec![1.0, 1.0], Sense::Eq, 1.0);
        lp.add_row(vec![1.0, 0.0], Sense::Ge, 0.25);
        lp.add_row(vec![0.0, 1.0], Sense::Ge, 0.1);
        assert!((optimum(&lp) - 1.1).abs() < 1e-12);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::new(vec![1.0, 1.0]);
        lp.add_row(vec![1.0, 1.0], Sense::Eq, 1.0);
        lp.add_row(vec![2.0, 2.0], Sense::Eq, 2.0);
        assert!((optimum(&lp) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn negative_rhs() {
        // min x, -x <= -3
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_row(vec![-1.0], Sense::Le, -3.0);
        assert!((optimum(&lp) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::new(vec![1.0]);
        lp.add_row(vec![1.0], Sense::Le, 1.0);
        lp.add_row(vec![1.0], Sense::Ge, 2.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Infeasible);
        let mut lp = LinearProgram::new(vec![-1.0, 0.0]);
        lp.add_row(vec![1.0, -1.0], Sense::Le, 1.0);
        assert_eq!(lp.solve().unwrap(), LpOutcome::Unbounded);
    }
}

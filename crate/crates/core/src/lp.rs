//! Dense two-phase tableau simplex for the small linear programs solved
//! exactly at desk scale (configuration LPs and their duals).
//!
//! Problems are stated as `minimize c^T x` subject to `x >= 0` and a list of
//! rows `a^T x {<=, >=, =} b`. Pivoting uses Dantzig's rule and falls back to
//! Bland's rule after a run of degenerate pivots, which rules out cycling.

use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub coeffs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Clone, Debug, Default)]
pub struct LinearProgram {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
}

#[derive(Clone, Debug)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub objective: f64,
    pub pivots: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub enum LpError {
    Infeasible,
    Unbounded,
    IterationLimit,
}

impl fmt::Display for LpError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LpError::Infeasible => write!(f, "linear program is infeasible"),
            LpError::Unbounded => write!(f, "linear program is unbounded"),
            LpError::IterationLimit => write!(f, "simplex iteration limit reached"),
        }
    }
}

impl std::error::Error for LpError {}

const PIVOT_TOL: f64 = 1e-10;
const DEGENERATE_RUN: usize = 50;
const MAX_PIVOTS: usize = 200_000;

impl LinearProgram {
    /// A minimization over `num_vars` nonnegative variables.
    pub fn minimize(objective: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            constraints: Vec::new(),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add(&mut self, coeffs: Vec<f64>, relation: Relation, rhs: f64) {
        assert_eq!(coeffs.len(), self.objective.len(), "row width mismatch");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn solve(&self) -> Result<LpSolution, LpError> {
        Tableau::build(self).run(&self.objective)
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum ColumnKind {
    Structural,
    Slack,
    Artificial,
}

struct Tableau {
    rows: usize,
    cols: usize,
    // rows x (cols + 1); last column is the right-hand side
    t: Vec<f64>,
    basis: Vec<usize>,
    kinds: Vec<ColumnKind>,
    num_structural: usize,
    scale: f64,
    pivots: usize,
}

impl Tableau {
    fn build(lp: &LinearProgram) -> Self {
        let m = lp.constraints.len();
        let ns = lp.num_vars();
        let mut slack = 0;
        let mut artificial = 0;
        for c in &lp.constraints {
            let rel = normalized(c).1;
            match rel {
                Relation::Le => slack += 1,
                Relation::Ge => {
                    slack += 1;
                    artificial += 1
                }
                Relation::Eq => artificial += 1,
            }
        }
        let cols = ns + slack + artificial;
        let width = cols + 1;
        let mut t = vec![0.0; m * width];
        let mut kinds = vec![ColumnKind::Structural; ns];
        kinds.extend(std::iter::repeat_n(ColumnKind::Slack, slack));
        kinds.extend(std::iter::repeat_n(ColumnKind::Artificial, artificial));
        let mut basis = vec![0; m];
        let mut next_slack = ns;
        let mut next_art = ns + slack;
        let mut scale: f64 = 1.0;
        for (i, c) in lp.constraints.iter().enumerate() {
            let (sign, rel) = normalized(c);
            let row = &mut t[i * width..(i + 1) * width];
            for (dst, &a) in row.iter_mut().zip(&c.coeffs) {
                *dst = sign * a;
                scale = scale.max(a.abs());
            }
            row[cols] = sign * c.rhs;
            scale = scale.max(c.rhs.abs());
            match rel {
                Relation::Le => {
                    row[next_slack] = 1.0;
                    basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    row[next_slack] = -1.0;
                    next_slack += 1;
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    row[next_art] = 1.0;
                    basis[i] = next_art;
                    next_art += 1;
                }
            }
        }
        for &c in &lp.objective {
            scale = scale.max(c.abs());
        }
        Tableau {
            rows: m,
            cols,
            t,
            basis,
            kinds,
            num_structural: ns,
            scale,
            pivots: 0,
        }
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.t[i * (self.cols + 1) + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.t[i * (self.cols + 1) + self.cols]
    }

    fn run(mut self, objective: &[f64]) -> Result<LpSolution, LpError> {
        let has_artificial = self.kinds.contains(&ColumnKind::Artificial);
        if has_artificial {
            let phase1: Vec<f64> = self
                .kinds
                .iter()
                .map(|k| if *k == ColumnKind::Artificial { 1.0 } else { 0.0 })
                .collect();
            let value = self.optimize(&phase1, true)?;
            if value > 1e-9 * self.scale.max(1.0) {
                return Err(LpError::Infeasible);
            }
            self.evict_artificials();
        }
        let mut phase2 = vec![0.0; self.cols];
        phase2[..self.num_structural].copy_from_slice(objective);
        self.optimize(&phase2, false)?;

        let mut x = vec![0.0; self.num_structural];
        for (i, &b) in self.basis.iter().enumerate() {
            if b < self.num_structural {
                x[b] = self.rhs(i).max(0.0);
            }
        }
        let value = x.iter().zip(objective).map(|(a, b)| a * b).sum();
        Ok(LpSolution {
            x,
            objective: value,
            pivots: self.pivots,
        })
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        d.push(0.0);
        for i in 0..self.rows {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * (self.cols + 1)..(i + 1) * (self.cols + 1)];
                for (dj, &a) in d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        d
    }

    /// Minimizes `cost` from the current basis; returns the optimal value.
    fn optimize(&mut self, cost: &[f64], phase_one: bool) -> Result<f64, LpError> {
        let mut d = self.reduced_costs(cost);
        let cost_scale = cost.iter().fold(1.0f64, |m, c| m.max(c.abs()));
        let rc_tol = 1e-11 * cost_scale * self.scale.max(1.0);
        let mut degenerate = 0;
        let mut bland = false;
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(LpError::IterationLimit);
            }
            let allowed = |j: usize| phase_one || self.kinds[j] != ColumnKind::Artificial;
            let entering = if bland {
                (0..self.cols).find(|&j| allowed(j) && d[j] < -rc_tol)
            } else {
                (0..self.cols)
                    .filter(|&j| allowed(j) && d[j] < -rc_tol)
                    .min_by(|&a, &b| d[a].total_cmp(&d[b]))
            };
            let Some(col) = entering else {
                return Ok(-d[self.cols]);
            };
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.rows {
                let a = self.at(i, col);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((li, lr)) => {
                            let tie = (ratio - lr).abs() <= 1e-12 * lr.abs().max(1.0);
                            if ratio < lr && !tie || tie && self.basis[i] < self.basis[li] {
                                Some((i, ratio))
                            } else {
                                Some((li, lr))
                            }
                        }
                    };
                }
            }
            let Some((row, ratio)) = leave else {
                return Err(LpError::Unbounded);
            };
            if ratio <= 1e-14 {
                degenerate += 1;
                if degenerate >= DEGENERATE_RUN {
                    bland = true;
                }
            } else {
                degenerate = 0;
            }
            self.pivot(row, col);
            let factor = d[col];
            let w = self.cols + 1;
            for (dj, &a) in d.iter_mut().zip(&self.t[row * w..(row + 1) * w]) {
                *dj -= factor * a;
            }
            d[col] = 0.0;
        }
    }

    fn pivot(&mut self, row: usize, col: usize) {
        self.pivots += 1;
        let w = self.cols + 1;
        let p = self.t[row * w + col];
        for x in &mut self.t[row * w..(row + 1) * w] {
            *x /= p;
        }
        self.t[row * w + col] = 1.0;
        let pivot_row: Vec<f64> = self.t[row * w..(row + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == row {
                continue;
            }
            let f = self.t[i * w + col];
            if f != 0.0 {
                for (x, &pr) in self.t[i * w..(i + 1) * w].iter_mut().zip(&pivot_row) {
                    *x -= f * pr;
                }
                self.t[i * w + col] = 0.0;
            }
        }
        self.basis[row] = col;
    }

    /// Pivots zero-level artificials out of the basis where possible. Rows
    /// where no pivot exists are redundant and keep their artificial at zero.
    fn evict_artificials(&mut self) {
        for i in 0..self.rows {
            if self.kinds[self.basis[i]] != ColumnKind::Artificial {
                continue;
            }
            let candidate = (0..self.cols)
                .filter(|&j| self.kinds[j] != ColumnKind::Artificial)
                .max_by(|&a, &b| self.at(i, a).abs().total_cmp(&self.at(i, b).abs()));
            if let Some(j) = candidate {
                if self.at(i, j).abs() > 1e-9 {
                    self.pivot(i, j);
                }
            }
        }
    }
}

fn normalized(c: &Constraint) -> (f64, Relation) {
    if c.rhs < 0.0 {
        let flipped = match c.relation {
            Relation::Le => Relation::Ge,
            Relation::Ge => Relation::Le,
            Relation::Eq => Relation::Eq,
        };
        (-1.0, flipped)
    } else {
        (1.0, c.relation)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn textbook_maximization() {
        // max 3x + 5y st x <= 4, 2y <= 12, 3x + 2y <= 18  ->  36 at (2, 6)
        let mut lp = LinearProgram::minimize(vec![-3.0, -5.0]);
        lp.add(vec![1.0, 0.0], Relation::Le, 4.0);
        lp.add(vec![0.0, 2.0], Relation::Le, 12.0);
        lp.add(vec![3.0, 2.0], Relation::Le, 18.0);
        let s = lp.solve().unwrap();
        assert!((s.objective + 36.0).abs() < 1e-9);
        assert!((s.x[0] - 2.0).abs() < 1e-9 && (s.x[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + 2y st x + y = 1, x >= 0.25, y >= 0.5  -> x = 0.5, y = 0.5
        let mut lp = LinearProgram::minimize(vec![1.0, 2.0]);
        lp.add(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.add(vec![1.0, 0.0], Relation::Ge, 0.25);
        lp.add(vec![0.0, 1.0], Relation::Ge, 0.5);
        let s = lp.solve().unwrap();
        assert!((s.objective - 1.5).abs() < 1e-9);
    }

    #[test]
    fn negative_rhs_is_flipped() {
        // min x st -x <= -2  -> 2
        let mut lp = LinearProgram::minimize(vec![1.0]);
        lp.add(vec![-1.0], Relation::Le, -2.0);
        assert!((lp.solve().unwrap().objective - 2.0).abs() < 1e-12);
    }

    #[test]
    fn infeasible_and_unbounded() {
        let mut lp = LinearProgram::minimize(vec![1.0]);
        lp.add(vec![1.0], Relation::Le, 1.0);
        lp.add(vec![1.0], Relation::Ge, 2.0);
        assert_eq!(lp.solve().unwrap_err(), LpError::Infeasible);

        let mut lp = LinearProgram::minimize(vec![-1.0, 0.0]);
        lp.add(vec![1.0, -1.0], Relation::Le, 1.0);
        assert_eq!(lp.solve().unwrap_err(), LpError::Unbounded);
    }

    #[test]
    fn redundant_equalities() {
        let mut lp = LinearProgram::minimize(vec![1.0, 1.0]);
        lp.add(vec![1.0, 1.0], Relation::Eq, 1.0);
        lp.add(vec![2.0, 2.0], Relation::Eq, 2.0);
        let s = lp.solve().unwrap();
        assert!((s.objective - 1.0).abs() < 1e-12);
    }
}

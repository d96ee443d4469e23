//! Euclidean projection onto the Birkhoff polytope.
//!
//! Dykstra's alternating projections between the set of nonnegative
//! matrices with unit row sums and the set of nonnegative matrices with
//! unit column sums. Both sub-projections split into independent
//! sort-and-threshold projections onto the probability simplex.

use log::warn;

use crate::error::{Error, Result};
use crate::model::{DSMatrix, SquareMatrix};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionConfig {
    /// Feasibility and fixed-point tolerance.
    pub tol: f64,
    pub max_iters: usize,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            tol: 1e-9,
            max_iters: 100_000,
        }
    }
}

impl ProjectionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) || self.max_iters == 0 {
            return Err(Error::Config(format!(
                "projection needs tol > 0 and max_iters >= 1, got {self:?}"
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct Projection {
    pub matrix: DSMatrix,
    pub iterations: usize,
    /// False when `max_iters` was hit; `matrix` is then the last iterate.
    pub converged: bool,
}

/// Projection of `v` onto `{x >= 0, sum x = target_sum}`.
pub fn simplex_project(v: &[f64], target_sum: f64) -> Vec<f64> {
    let mut out = v.to_vec();
    simplex_project_in_place(&mut out, target_sum, &mut Vec::with_capacity(v.len()));
    out
}

fn simplex_project_in_place(v: &mut [f64], target_sum: f64, scratch: &mut Vec<f64>) {
    if v.is_empty() {
        return;
    }
    scratch.clear();
    scratch.extend_from_slice(v);
    scratch.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumulative = 0.0;
    let mut tau = 0.0;
    for (k, &u) in scratch.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - target_sum) / (k + 1) as f64;
        if u - candidate > 0.0 {
            tau = candidate;
        } else {
            break;
        }
    }
    for x in v.iter_mut() {
        *x = (*x - tau).max(0.0);
    }
}

fn project_rows(m: &mut SquareMatrix, scratch: &mut Vec<f64>) {
    let n = m.n();
    for i in 0..n {
        simplex_project_in_place(m.row_mut(i), 1.0, scratch);
    }
}

fn project_cols(m: &mut SquareMatrix, scratch: &mut Vec<f64>, column: &mut Vec<f64>) {
    let n = m.n();
    for j in 0..n {
        column.clear();
        column.extend((0..n).map(|i| m.get(i, j)));
        simplex_project_in_place(column, 1.0, scratch);
        for (i, &x) in column.iter().enumerate() {
            m.set(i, j, x);
        }
    }
}

fn max_sum_violation(m: &SquareMatrix) -> f64 {
    let n = m.n();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        let r: f64 = m.row(i).iter().sum();
        worst = worst.max((r - 1.0).abs());
        let c: f64 = (0..n).map(|k| m.get(k, i)).sum();
        worst = worst.max((c - 1.0).abs());
    }
    worst
}

/// `argmin_{A doubly stochastic} ||A - m||_F`.
pub fn project_birkhoff(m: &SquareMatrix, cfg: &ProjectionConfig) -> Result<Projection> {
    cfg.validate()?;
    m.check_finite()?;
    let n = m.n();
    if n == 0 {
        return Err(Error::Dimension {
            expected: 1,
            got: 0,
        });
    }
    let mut x = m.clone();
    let mut p = SquareMatrix::zeros(n);
    let mut q = SquareMatrix::zeros(n);
    let mut y = SquareMatrix::zeros(n);
    let mut scratch = Vec::with_capacity(n);
    let mut column = Vec::with_capacity(n);
    let mut previous = x.clone();

    for iter in 1..=cfg.max_iters {
        // y = P_rows(x + p); p = x + p - y
        for ((yv, &xv), &pv) in y.as_mut_slice().iter_mut().zip(x.as_slice()).zip(p.as_slice()) {
            *yv = xv + pv;
        }
        let shifted = y.clone();
        project_rows(&mut y, &mut scratch);
        for ((pv, &s), &yv) in p.as_mut_slice().iter_mut().zip(shifted.as_slice()).zip(y.as_slice()) {
            *pv = s - yv;
        }
        // x = P_cols(y + q); q = y + q - x
        for ((xv, &yv), &qv) in x.as_mut_slice().iter_mut().zip(y.as_slice()).zip(q.as_slice()) {
            *xv = yv + qv;
        }
        let shifted = x.clone();
        project_cols(&mut x, &mut scratch, &mut column);
        for ((qv, &s), &xv) in q.as_mut_slice().iter_mut().zip(shifted.as_slice()).zip(x.as_slice()) {
            *qv = s - xv;
        }

        let step = x.sub(&previous).frobenius_norm();
        if step < cfg.tol && max_sum_violation(&x) <= cfg.tol {
            return Ok(Projection {
                matrix: DSMatrix::from_trusted(x, cfg.tol),
                iterations: iter,
                converged: true,
            });
        }
        previous.as_mut_slice().copy_from_slice(x.as_slice());
    }
    warn!(
        "Birkhoff projection stopped after {} iterations without converging",
        cfg.max_iters
    );
    Ok(Projection {
        matrix: DSMatrix::from_trusted(x, cfg.tol),
        iterations: cfg.max_iters,
        converged: false,
    })
}

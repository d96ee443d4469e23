//! Block-greedy deterministic rounding.
//!
//! Positions are filled `r` at a time. Each block takes the `r` remaining
//! items minimising the block cost
//! `sum_i (1 - sum_{j < i} sum_{e in S} A_ej)_+`.

use crate::error::{Error, Result};
use crate::model::{DSMatrix, Permutation};
use crate::rounding::dp::{dp_solve, DpInstance, DpOutcome, Triple};

/// Largest number of subsets `block_exact` will enumerate.
pub const EXACT_SUBSET_CAP: u128 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SolverKind {
    Exact,
    Fptas { alpha: f64 },
    Heuristic,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlockSolver {
    pub kind: SolverKind,
    pub r: usize,
}

impl BlockSolver {
    pub fn exact(r: usize) -> Self {
        BlockSolver {
            kind: SolverKind::Exact,
            r,
        }
    }

    pub fn fptas(r: usize, alpha: f64) -> Self {
        BlockSolver {
            kind: SolverKind::Fptas { alpha },
            r,
        }
    }

    pub fn heuristic(r: usize) -> Self {
        BlockSolver {
            kind: SolverKind::Heuristic,
            r,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.r == 0 || self.r > n {
            return Err(Error::Config(format!(
                "block size must be in 1..={n}, got {}",
                self.r
            )));
        }
        if let SolverKind::Fptas { alpha } = self.kind {
            if !(alpha > 0.0 && alpha.is_finite()) {
                return Err(Error::Config(format!("fptas alpha must be positive, got {alpha}")));
            }
        }
        Ok(())
    }

    pub fn solve(&self, a: &DSMatrix, rem: &[usize]) -> Result<Vec<usize>> {
        match self.kind {
            SolverKind::Exact => block_exact(a, rem, self.r),
            SolverKind::Fptas { alpha } => block_fptas(a, rem, self.r, alpha),
            SolverKind::Heuristic => block_heuristic(a, rem, self.r),
        }
    }
}

/// `prefix[e][i] = sum_{j < i} A_ej` for `i in 0..n`.
fn strict_prefixes(a: &DSMatrix) -> Vec<Vec<f64>> {
    let n = a.n();
    (0..n)
        .map(|e| {
            let mut acc = 0.0;
            (0..n)
                .map(|j| {
                    let before = acc;
                    acc += a.get(e, j);
                    before
                })
                .collect()
        })
        .collect()
}

fn cost_from_prefixes(prefix: &[Vec<f64>], set: &[usize]) -> f64 {
    let n = prefix.first().map_or(0, Vec::len);
    (0..n)
        .map(|i| (1.0 - set.iter().map(|&e| prefix[e][i]).sum::<f64>()).max(0.0))
        .sum()
}

/// `sum_i (1 - sum_{j < i} sum_{e in set} A_ej)_+`
pub fn block_cost(a: &DSMatrix, set: &[usize]) -> f64 {
    cost_from_prefixes(&strict_prefixes(a), set)
}

fn check_block(a: &DSMatrix, rem: &[usize], r: usize) -> Result<Vec<usize>> {
    let mut sorted = rem.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != rem.len() {
        return Err(Error::InvalidRequest("remaining items contain duplicates".into()));
    }
    if let Some(&e) = sorted.last() {
        if e >= a.n() {
            return Err(Error::Dimension {
                expected: a.n(),
                got: e + 1,
            });
        }
    }
    if r > sorted.len() {
        return Err(Error::Config(format!(
            "block size {r} exceeds the {} remaining items",
            sorted.len()
        )));
    }
    Ok(sorted)
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Exact minimiser over all `r`-subsets of `rem`; the lexicographically
/// smallest sorted subset wins ties.
pub fn block_exact(a: &DSMatrix, rem: &[usize], r: usize) -> Result<Vec<usize>> {
    let rem = check_block(a, rem, r)?;
    let count = binomial(rem.len(), r);
    if count > EXACT_SUBSET_CAP {
        return Err(Error::DeskScale {
            what: "exact block search",
            count,
            cap: EXACT_SUBSET_CAP,
        });
    }
    let prefix = strict_prefixes(a);
    let m = rem.len();
    let mut idx: Vec<usize> = (0..r).collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut chosen = Vec::with_capacity(r);
    loop {
        chosen.clear();
        chosen.extend(idx.iter().map(|&i| rem[i]));
        let cost = cost_from_prefixes(&prefix, &chosen);
        if best.as_ref().is_none_or(|(b, _)| cost < b - 1e-12) {
            best = Some((cost, chosen.clone()));
        }
        // next combination in lexicographic order
        let Some(pos) = (0..r).rev().find(|&p| idx[p] != p + m - r) else {
            break;
        };
        idx[pos] += 1;
        for q in pos + 1..r {
            idx[q] = idx[q - 1] + 1;
        }
    }
    Ok(best.map(|(_, s)| s).unwrap_or_default())
}

/// Approximate minimiser: prefix masses are rounded down to a grid of
/// spacing `alpha / (n r)` and the rounded problem is solved exactly, one
/// knapsack-style program per candidate covering position.
pub fn block_fptas(a: &DSMatrix, rem: &[usize], r: usize, alpha: f64) -> Result<Vec<usize>> {
    if !(alpha > 0.0 && alpha.is_finite()) {
        return Err(Error::Config(format!("fptas alpha must be positive, got {alpha}")));
    }
    let rem = check_block(a, rem, r)?;
    if r == rem.len() {
        return Ok(rem);
    }
    if r == 0 {
        return Ok(Vec::new());
    }
    let n = a.n();
    let grid = ((n * r) as f64 / alpha).ceil() as u64;
    let prefix = strict_prefixes(a);
    // rounded[e][i] for i in 0..=n; index n is the full row mass
    let rounded: Vec<Vec<u64>> = rem
        .iter()
        .map(|&e| {
            let full: f64 = a.row(e).iter().sum();
            prefix[e]
                .iter()
                .copied()
                .chain(std::iter::once(full))
                .map(|b| ((b * grid as f64 + 1e-9).floor().max(0.0) as u64).min(grid))
                .collect()
        })
        .collect();

    let mut best: Option<(i64, Vec<usize>)> = None;
    // boundary k (1-based) is the first position whose rounded prefix covers;
    // k = n + 1 means no position is covered
    for k in 2..=n + 1 {
        let triples: Vec<Triple> = rounded
            .iter()
            .map(|row| {
                let w: i64 = row[..k - 1]
                    .iter()
                    .map(|&b| grid as i64 - (r as u64 * b) as i64)
                    .sum();
                Triple {
                    w,
                    c: if k <= n { row[k - 1] } else { 0 },
                    d: row[k - 2],
                }
            })
            .collect();
        let inst = DpInstance {
            triples,
            cover: if k <= n { grid } else { 0 },
            budget: grid - 1,
            r,
        };
        if let DpOutcome::Optimal { selection, value } = dp_solve(&inst) {
            if best.as_ref().is_none_or(|(b, _)| value < *b) {
                best = Some((value, selection.iter().map(|&i| rem[i]).collect()));
            }
        }
    }
    best.map(|(_, s)| s)
        .ok_or_else(|| Error::Internal("no feasible covering position".into()))
}

/// Greedy passes over a residual target: each pass takes the item whose
/// prefix masses leave the least residual, ties to the smallest id.
pub fn block_heuristic(a: &DSMatrix, rem: &[usize], r: usize) -> Result<Vec<usize>> {
    let rem = check_block(a, rem, r)?;
    let prefix = strict_prefixes(a);
    let n = a.n();
    let mut target = vec![1.0; n];
    let mut available = rem;
    let mut chosen = Vec::with_capacity(r);
    for _ in 0..r {
        let (slot, _) = available
            .iter()
            .enumerate()
            .map(|(slot, &e)| {
                let score: f64 = (0..n).map(|i| (target[i] - prefix[e][i]).max(0.0)).sum();
                (slot, score)
            })
            .fold(None, |acc: Option<(usize, f64)>, (slot, score)| match acc {
                Some((_, s)) if s <= score + 1e-12 => acc,
                _ => Some((slot, score)),
            })
            .expect("r does not exceed the remaining items");
        let e = available.remove(slot);
        for i in 0..n {
            target[i] = (target[i] - prefix[e][i]).max(0.0);
        }
        chosen.push(e);
    }
    chosen.sort_unstable();
    Ok(chosen)
}

/// The blocks chosen by the solver, in position order; leftover items form
/// a final shorter block when `r` does not divide `n`.
pub fn deterministic_blocks(a: &DSMatrix, solver: &BlockSolver) -> Result<Vec<Vec<usize>>> {
    let n = a.n();
    solver.validate(n)?;
    let mut rem: Vec<usize> = (0..n).collect();
    let mut blocks = Vec::with_capacity(n / solver.r + 1);
    for block in 0..n / solver.r {
        let mut chosen = solver.solve(a, &rem).map_err(|e| Error::Block {
            block: block + 1,
            source: Box::new(e),
        })?;
        chosen.sort_unstable();
        rem.retain(|e| chosen.binary_search(e).is_err());
        blocks.push(chosen);
    }
    if !rem.is_empty() {
        blocks.push(rem);
    }
    Ok(blocks)
}

/// Concatenates the blocks, each in ascending item order.
pub fn round_deterministic(a: &DSMatrix, solver: &BlockSolver) -> Result<Permutation> {
    let order: Vec<usize> = deterministic_blocks(a, solver)?.into_iter().flatten().collect();
    Permutation::new(order)
}

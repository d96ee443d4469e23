//! Exact dynamic program for the cardinality-constrained two-sided knapsack
//!
//! minimize `sum w_e x_e` subject to `sum c_e x_e >= C`, `sum d_e x_e <= D`,
//! `sum x_e = r`, `x` binary.
//!
//! The table is indexed by (items seen, items taken, covered amount clamped
//! at `C`, spent amount `<= D`).

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Triple {
    pub w: i64,
    pub c: u64,
    pub d: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DpInstance {
    pub triples: Vec<Triple>,
    pub cover: u64,
    pub budget: u64,
    pub r: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DpOutcome {
    Optimal { selection: Vec<usize>, value: i64 },
    Infeasible,
}

impl DpOutcome {
    pub fn value(&self) -> Option<i64> {
        match self {
            DpOutcome::Optimal { value, .. } => Some(*value),
            DpOutcome::Infeasible => None,
        }
    }
}

const UNREACHED: i64 = i64::MAX;
const NOT_TAKEN: u32 = u32::MAX;

pub fn dp_solve(inst: &DpInstance) -> DpOutcome {
    let m = inst.triples.len();
    let r = inst.r;
    if r > m {
        return DpOutcome::Infeasible;
    }
    let cc = inst.cover as usize + 1;
    let dd = inst.budget as usize + 1;
    let layer = (r + 1) * cc * dd;
    let idx = |k: usize, c: usize, d: usize| (k * cc + c) * dd + d;

    let mut current = vec![UNREACHED; layer];
    current[idx(0, 0, 0)] = 0;
    // from[item][state]: covered amount before taking `item` on the best
    // path into `state`, or NOT_TAKEN when that path skips the item
    let mut from: Vec<Vec<u32>> = Vec::with_capacity(m);
    for t in &inst.triples {
        let mut next = current.clone();
        let mut taken = vec![NOT_TAKEN; layer];
        let c_step = t.c.min(inst.cover) as usize;
        for k in 0..r {
            for c in 0..cc {
                for d in 0..dd {
                    let v = current[idx(k, c, d)];
                    if v == UNREACHED {
                        continue;
                    }
                    let nd = d as u64 + t.d;
                    if nd > inst.budget {
                        continue;
                    }
                    let nc = (c + c_step).min(cc - 1);
                    let target = idx(k + 1, nc, nd as usize);
                    let candidate = v + t.w;
                    if candidate < next[target] {
                        next[target] = candidate;
                        taken[target] = c as u32;
                    }
                }
            }
        }
        from.push(taken);
        current = next;
    }

    let full = inst.cover as usize;
    let best = (0..dd)
        .map(|d| (current[idx(r, full, d)], d))
        .filter(|(v, _)| *v != UNREACHED)
        .min_by_key(|&(v, d)| (v, d));
    let Some((value, mut d)) = best else {
        return DpOutcome::Infeasible;
    };

    let mut selection = Vec::with_capacity(r);
    let mut k = r;
    let mut c = full;
    for item in (0..m).rev() {
        if k == 0 {
            break;
        }
        let before = from[item][idx(k, c, d)];
        if before != NOT_TAKEN {
            selection.push(item);
            k -= 1;
            d -= inst.triples[item].d as usize;
            c = before as usize;
        }
    }
    selection.reverse();
    DpOutcome::Optimal { selection, value }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_selection() {
        let inst = DpInstance {
            triples: vec![Triple { w: 3, c: 1, d: 1 }],
            cover: 0,
            budget: 0,
            r: 0,
        };
        assert_eq!(
            dp_solve(&inst),
            DpOutcome::Optimal {
                selection: vec![],
                value: 0
            }
        );
    }

    #[test]
    fn single_item() {
        let inst = DpInstance {
            triples: vec![Triple { w: -2, c: 5, d: 1 }],
            cover: 4,
            budget: 1,
            r: 1,
        };
        assert_eq!(
            dp_solve(&inst),
            DpOutcome::Optimal {
                selection: vec![0],
                value: -2
            }
        );
    }

    #[test]
    fn infeasible_is_a_result() {
        let inst = DpInstance {
            triples: vec![Triple { w: 1, c: 1, d: 5 }, Triple { w: 1, c: 1, d: 5 }],
            cover: 2,
            budget: 4,
            r: 2,
        };
        assert_eq!(dp_solve(&inst), DpOutcome::Infeasible);
    }

    #[test]
    fn clamped_cover_backtracks() {
        let inst = DpInstance {
            triples: vec![
                Triple { w: 5, c: 3, d: 0 },
                Triple { w: 1, c: 2, d: 0 },
                Triple { w: 1, c: 9, d: 0 },
            ],
            cover: 4,
            budget: 0,
            r: 2,
        };
        assert_eq!(
            dp_solve(&inst),
            DpOutcome::Optimal {
                selection: vec![1, 2],
                value: 2
            }
        );
    }
}

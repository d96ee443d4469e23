//! Reference competitors for the online learner.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{access_cost, Instance, Permutation, Request};
use crate::sampling::{derive_rng, random_permutation};

/// Largest universe for exhaustive search over permutations.
pub const BRUTE_FORCE_MAX_N: usize = 8;
/// Largest universe for multiplicative weights over permutations.
pub const MWU_MAX_N: usize = 6;
/// RNG stream of the uniform-permutation baseline.
pub const RANDOM_STREAM: u64 = 2;

#[derive(Clone, Debug, PartialEq)]
pub struct BaselineResult {
    pub name: String,
    /// Cost charged in each round; an expectation for MWU.
    pub costs: Vec<f64>,
}

impl BaselineResult {
    pub fn total_cost(&self) -> f64 {
        self.costs.iter().sum()
    }
}

pub fn total_cost(inst: &Instance, pi: &Permutation) -> Result<usize> {
    inst.requests().iter().map(|r| access_cost(pi, r)).sum()
}

/// Per-round costs of always playing `pi`.
pub fn fixed_permutation_costs(inst: &Instance, pi: &Permutation) -> Result<Vec<f64>> {
    inst.requests()
        .iter()
        .map(|r| access_cost(pi, r).map(|c| c as f64))
        .collect()
}

/// Repeatedly places the item contained in the most uncovered requests,
/// ties to the smallest id.
pub fn flt_greedy(inst: &Instance) -> Result<Permutation> {
    if let Some(r) = inst.requests().iter().find(|r| r.demand() != 1) {
        return Err(Error::WrongDemand(r.demand()));
    }
    let n = inst.n();
    let mut uncovered: Vec<&Request> = inst.requests().iter().collect();
    let mut placed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let mut hits = vec![0usize; n];
        for r in &uncovered {
            for &e in r.items() {
                hits[e] += 1;
            }
        }
        let pick = (0..n)
            .filter(|&e| !placed[e])
            .max_by_key(|&e| (hits[e], std::cmp::Reverse(e)))
            .expect("an unplaced item remains");
        placed[pick] = true;
        order.push(pick);
        uncovered.retain(|r| !r.contains(pick));
    }
    Permutation::new(order)
}

/// Advances `v` to the next permutation in lexicographic order.
fn next_permutation(v: &mut [usize]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("pivot has a successor");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

fn all_permutations(n: usize) -> Vec<Permutation> {
    let mut v: Vec<usize> = (0..n).collect();
    let mut out = Vec::new();
    loop {
        out.push(Permutation::new(v.clone()).expect("lexicographic successor is a permutation"));
        if !next_permutation(&mut v) {
            return out;
        }
    }
}

fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

fn grouped(inst: &Instance) -> BTreeMap<&Request, usize> {
    let mut counts = BTreeMap::new();
    for r in inst.requests() {
        *counts.entry(r).or_insert(0) += 1;
    }
    counts
}

/// Exact best fixed permutation; the lexicographically smallest wins ties.
pub fn brute_force_opt(inst: &Instance) -> Result<(Permutation, usize)> {
    let n = inst.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(Error::DeskScale {
            what: "brute-force permutation search",
            count: factorial(n),
            cap: factorial(BRUTE_FORCE_MAX_N),
        });
    }
    let counts = grouped(inst);
    let mut v: Vec<usize> = (0..n).collect();
    let mut best: Option<(usize, Vec<usize>)> = None;
    loop {
        let pi = Permutation::new(v.clone())?;
        let mut cost = 0;
        for (r, &c) in &counts {
            cost += c * access_cost(&pi, r)?;
        }
        if best.as_ref().is_none_or(|(b, _)| cost < *b) {
            best = Some((cost, v.clone()));
        }
        if !next_permutation(&mut v) {
            break;
        }
    }
    let (cost, order) = best.expect("at least one permutation");
    Ok((Permutation::new(order)?, cost))
}

/// A fresh uniform permutation every round.
pub fn random_perm_baseline(inst: &Instance, seed: u64) -> Result<BaselineResult> {
    let mut rng = derive_rng(seed, RANDOM_STREAM);
    let costs = inst
        .requests()
        .iter()
        .map(|r| {
            let pi = random_permutation(inst.n(), &mut rng);
            access_cost(&pi, r).map(|c| c as f64)
        })
        .collect::<Result<_>>()?;
    Ok(BaselineResult {
        name: "random".into(),
        costs,
    })
}

#[derive(Clone, Debug)]
pub struct MwuRun {
    pub permutations: Vec<Permutation>,
    /// Distribution over `permutations` after the last update.
    pub distribution: Vec<f64>,
    /// Expected access cost in each round under the distribution played.
    pub expected_costs: Vec<f64>,
}

impl MwuRun {
    /// Probability mass on permutations whose cost for `r` is minimal.
    pub fn mass_on_best(&self, r: &Request) -> Result<f64> {
        let costs: Vec<usize> = self
            .permutations
            .iter()
            .map(|pi| access_cost(pi, r))
            .collect::<Result<_>>()?;
        let best = costs.iter().copied().min().unwrap_or(0);
        Ok(costs
            .iter()
            .zip(&self.distribution)
            .filter(|(&c, _)| c == best)
            .map(|(_, &p)| p)
            .sum())
    }
}

/// `sqrt(ln(n!) / T)`, the default learning rate.
pub fn default_mwu_eta(n: usize, rounds: usize) -> f64 {
    let ln_fact: f64 = (2..=n).map(|k| (k as f64).ln()).sum();
    if rounds == 0 || ln_fact == 0.0 {
        return 1.0;
    }
    (ln_fact / rounds as f64).sqrt()
}

/// Multiplicative weights with one expert per permutation and losses
/// `access_cost / n`.
pub fn mwu_permutations(inst: &Instance, eta: f64) -> Result<MwuRun> {
    let n = inst.n();
    if n > MWU_MAX_N {
        return Err(Error::DeskScale {
            what: "multiplicative weights over permutations",
            count: factorial(n),
            cap: factorial(MWU_MAX_N),
        });
    }
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::Config(format!("mwu eta must be positive, got {eta}")));
    }
    let permutations = all_permutations(n);
    let k = permutations.len();
    let mut log_w = vec![0.0f64; k];
    let mut distribution = vec![1.0 / k as f64; k];
    let mut expected_costs = Vec::with_capacity(inst.len());
    let mut losses = vec![0.0; k];
    for r in inst.requests() {
        for (slot, pi) in permutations.iter().enumerate() {
            losses[slot] = access_cost(pi, r)? as f64;
        }
        expected_costs.push(distribution.iter().zip(&losses).map(|(p, c)| p * c).sum());
        for (lw, c) in log_w.iter_mut().zip(&losses) {
            *lw -= eta * c / n as f64;
        }
        let top = log_w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let z: f64 = log_w.iter().map(|lw| (lw - top).exp()).sum();
        for (p, lw) in distribution.iter_mut().zip(&log_w) {
            *p = (lw - top).exp() / z;
        }
    }
    Ok(MwuRun {
        permutations,
        distribution,
        expected_costs,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(items: &[usize]) -> Request {
        Request::from_one_based(items, 1).unwrap()
    }

    #[test]
    fn greedy_picks_majority() {
        let inst = Instance::new(3, vec![req(&[1]), req(&[1]), req(&[2])]).unwrap();
        assert_eq!(flt_greedy(&inst).unwrap().order()[0], 0);
    }

    #[test]
    fn greedy_single_request() {
        let inst = Instance::new(5, vec![req(&[4, 2])]).unwrap();
        let pi = flt_greedy(&inst).unwrap();
        assert!([1, 3].contains(&pi.order()[0]));
    }

    #[test]
    fn greedy_rejects_demand() {
        let inst = Instance::new(3, vec![Request::from_one_based(&[1, 2], 2).unwrap()]).unwrap();
        assert!(matches!(flt_greedy(&inst), Err(Error::WrongDemand(2))));
    }

    #[test]
    fn brute_force_examples() {
        let empty = Instance::new(4, vec![]).unwrap();
        assert_eq!(brute_force_opt(&empty).unwrap(), (Permutation::identity(4), 0));
        let single = Instance::new(3, vec![req(&[3])]).unwrap();
        let (pi, cost) = brute_force_opt(&single).unwrap();
        assert_eq!(pi.to_one_based(), vec![3, 1, 2]);
        assert_eq!(cost, 1);
        assert!(matches!(
            brute_force_opt(&Instance::new(9, vec![]).unwrap()),
            Err(Error::DeskScale { .. })
        ));
    }

    #[test]
    fn lexicographic_enumeration() {
        let all = all_permutations(3);
        let flat: Vec<Vec<usize>> = all.iter().map(|p| p.order().to_vec()).collect();
        assert_eq!(
            flat,
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0]
            ]
        );
    }

    #[test]
    fn random_baseline_mean() {
        let n = 9;
        let inst = Instance::new(n, vec![req(&[4]); 10_000]).unwrap();
        let run = random_perm_baseline(&inst, 5).unwrap();
        let mean = run.total_cost() / 10_000.0;
        let expected = (n as f64 + 1.0) / 2.0;
        assert!((mean - expected).abs() <= 0.03 * expected, "{mean}");
        assert_eq!(run, random_perm_baseline(&inst, 5).unwrap());
        let one = Instance::new(1, vec![req(&[1]); 20]).unwrap();
        assert!(random_perm_baseline(&one, 0).unwrap().costs.iter().all(|&c| c == 1.0));
    }

    #[test]
    fn mwu_concentrates() {
        let r = req(&[2]);
        let inst = Instance::new(4, vec![r.clone(); 2000]).unwrap();
        let run = mwu_permutations(&inst, 0.1).unwrap();
        assert!(run.mass_on_best(&r).unwrap() >= 0.99);
        let empty = mwu_permutations(&Instance::new(3, vec![]).unwrap(), 0.1).unwrap();
        assert!(empty.distribution.iter().all(|&p| (p - 1.0 / 6.0).abs() < 1e-15));
    }

    #[test]
    fn mwu_cap_and_eta() {
        assert!(mwu_permutations(&Instance::new(7, vec![]).unwrap(), 0.1).is_err());
        assert!(mwu_permutations(&Instance::new(3, vec![]).unwrap(), 0.0).is_err());
        assert!((default_mwu_eta(4, 100) - (24f64.ln() / 100.0).sqrt()).abs() < 1e-12);
    }
}

//! Relaxed access costs of doubly stochastic matrices.
//!
//! * the fractional access cost (FAC): a configuration LP with an
//!   `n^4 / eps` penalty on the mismatch between the matrix and the
//!   marginals of the configuration mixture;
//! * the SW cost: an LP over per-position coverage levels `z_i` with one
//!   constraint per subset `M` of the request. For unit demand it collapses
//!   to `sum_i (1 - mass of R before i)_+`.
//!
//! Everything here is exact at desk scale and refuses larger inputs with
//! [`Error::DeskScale`].

use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::model::{DSMatrix, Request};

/// Largest number of configurations enumerated for one request.
pub const DEFAULT_CONFIG_CAP: u128 = 1_000_000;
/// Largest number of subsets instantiated for the SW LP.
pub const DEFAULT_SUBSET_CAP: u128 = 1 << 20;
pub const DEFAULT_EPSILON: f64 = 0.1;

/// Injective placement of a request's items; pairs are `(item, position)`,
/// sorted by item, both 0-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    assignment: Vec<(usize, usize)>,
}

impl Configuration {
    pub fn new(mut assignment: Vec<(usize, usize)>) -> Result<Self> {
        assignment.sort_unstable();
        for w in assignment.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(Error::InvalidRequest(format!(
                    "item {} assigned twice",
                    w[0].0 + 1
                )));
            }
        }
        let mut positions: Vec<usize> = assignment.iter().map(|p| p.1).collect();
        positions.sort_unstable();
        if positions.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidRequest(
                "two items share a position".into(),
            ));
        }
        Ok(Configuration { assignment })
    }

    pub fn from_one_based(pairs: &[(usize, usize)]) -> Result<Self> {
        let zero = pairs
            .iter()
            .map(|&(e, j)| match (e.checked_sub(1), j.checked_sub(1)) {
                (Some(e), Some(j)) => Ok((e, j)),
                _ => Err(Error::InvalidRequest("0 in 1-based configuration".into())),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(zero)
    }

    pub fn assignment(&self) -> &[(usize, usize)] {
        &self.assignment
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }
}

/// The `demand`-th smallest assigned position, 1-based.
pub fn config_cost(f: &Configuration, demand: usize) -> Result<usize> {
    if demand == 0 || demand > f.len() {
        return Err(Error::InvalidRequest(format!(
            "demand {demand} exceeds configuration size {}",
            f.len()
        )));
    }
    let mut positions: Vec<usize> = f.assignment.iter().map(|p| p.1).collect();
    positions.sort_unstable();
    Ok(positions[demand - 1] + 1)
}

/// `n! / (n - size)!`, saturating.
pub fn falling_factorial(n: usize, size: usize) -> u128 {
    if size > n {
        return 0;
    }
    (0..size).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128))
}

pub fn enumerate_configs(r: &Request, n: usize) -> Result<Vec<Configuration>> {
    enumerate_configs_capped(r, n, DEFAULT_CONFIG_CAP)
}

/// All injective placements of `r`'s items into `0..n`, in lexicographic
/// order of the position tuple (items ascending).
pub fn enumerate_configs_capped(r: &Request, n: usize, cap: u128) -> Result<Vec<Configuration>> {
    r.check_universe(n)?;
    let count = falling_factorial(n, r.len());
    if count > cap {
        return Err(Error::DeskScale {
            what: "configuration enumeration",
            count,
            cap,
        });
    }
    let items = r.items();
    let mut out = Vec::with_capacity(count as usize);
    let mut used = vec![false; n];
    let mut current = Vec::with_capacity(items.len());
    fn recurse(
        items: &[usize],
        n: usize,
        used: &mut [bool],
        current: &mut Vec<(usize, usize)>,
        out: &mut Vec<Configuration>,
    ) {
        let depth = current.len();
        if depth == items.len() {
            out.push(Configuration {
                assignment: current.clone(),
            });
            return;
        }
        for pos in 0..n {
            if !used[pos] {
                used[pos] = true;
                current.push((items[depth], pos));
                recurse(items, n, used, current, out);
                current.pop();
                used[pos] = false;
            }
        }
    }
    recurse(items, n, &mut used, &mut current, &mut out);
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct FacResult {
    pub value: f64,
    /// Configurations with nonzero weight in the optimal mixture.
    pub primal_weights: Vec<(Configuration, f64)>,
    /// `n^4/eps * sum |A_ej - sum_{F ∋ (e,j)} y_F|` at the optimum.
    pub penalty: f64,
    /// Largest single mismatch `|A_ej - sum_{F ∋ (e,j)} y_F|`.
    pub max_mismatch: f64,
    pub epsilon: f64,
}

/// Coefficient of the mismatch penalty, `n^4 / eps`.
pub fn penalty_coefficient(n: usize, epsilon: f64) -> f64 {
    (n as f64).powi(4) / epsilon
}

pub(crate) fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon.is_finite() && epsilon > 0.0 {
        Ok(())
    } else {
        Err(Error::Config(format!("epsilon must be positive, got {epsilon}")))
    }
}

/// Fractional access cost: the optimal value of the configuration LP.
pub fn fac_value(a: &DSMatrix, r: &Request, epsilon: f64) -> Result<FacResult> {
    check_epsilon(epsilon)?;
    let n = a.n();
    let configs = enumerate_configs(r, n)?;
    let costs: Vec<f64> = configs
        .iter()
        .map(|f| config_cost(f, r.demand()).map(|c| c as f64))
        .collect::<Result<_>>()?;
    let big = penalty_coefficient(n, epsilon);
    let nc = configs.len();
    let pairs = r.len() * n;
    // variables: y_F for every configuration, then u_(e,j) for every pair
    let pair_index = |slot: usize, pos: usize| slot * n + pos;

    let mut objective = costs.clone();
    objective.extend(std::iter::repeat_n(big, pairs));
    let mut lp = LinearProgram::minimize(objective);

    let mut simplex_row = vec![1.0; nc];
    simplex_row.extend(std::iter::repeat_n(0.0, pairs));
    lp.add(simplex_row, Relation::Eq, 1.0);

    // members[p] lists the configurations using pair p
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); pairs];
    for (fi, f) in configs.iter().enumerate() {
        for (slot, &(_, pos)) in f.assignment.iter().enumerate() {
            members[pair_index(slot, pos)].push(fi);
        }
    }
    for (slot, &e) in r.items().iter().enumerate() {
        for pos in 0..n {
            let p = pair_index(slot, pos);
            let target = a.get(e, pos);
            // u_p >= A_ej - sum y   and   u_p >= sum y - A_ej
            let mut upper = vec![0.0; nc + pairs];
            let mut lower = vec![0.0; nc + pairs];
            for &fi in &members[p] {
                upper[fi] = 1.0;
                lower[fi] = -1.0;
            }
            upper[nc + p] = 1.0;
            lower[nc + p] = 1.0;
            lp.add(upper, Relation::Ge, target);
            lp.add(lower, Relation::Ge, -target);
        }
    }

    let solution = lp
        .solve()
        .map_err(|e| Error::Internal(format!("configuration LP: {e}")))?;
    let y = &solution.x[..nc];

    let mut penalty_sum = 0.0;
    let mut max_mismatch: f64 = 0.0;
    for (slot, &e) in r.items().iter().enumerate() {
        for pos in 0..n {
            let covered: f64 = members[pair_index(slot, pos)].iter().map(|&fi| y[fi]).sum();
            let gap = (a.get(e, pos) - covered).abs();
            penalty_sum += gap;
            max_mismatch = max_mismatch.max(gap);
        }
    }
    let penalty = big * penalty_sum;
    let linear: f64 = y.iter().zip(&costs).map(|(w, c)| w * c).sum();
    let primal_weights = configs
        .into_iter()
        .zip(y.iter().copied())
        .filter(|(_, w)| *w > 1e-12)
        .collect();
    Ok(FacResult {
        value: linear + penalty,
        primal_weights,
        penalty,
        max_mismatch,
        epsilon,
    })
}

#[derive(Clone, Debug)]
pub struct SwResult {
    pub value: f64,
    /// Optimal coverage level per position.
    pub z: Vec<f64>,
}

pub fn sw_cost(a: &DSMatrix, r: &Request) -> Result<SwResult> {
    sw_cost_capped(a, r, DEFAULT_SUBSET_CAP)
}

/// Optimal value of the SW LP with every subset constraint instantiated.
///
/// Each constraint involves a single `z_i`, so the LP separates by
/// position and `z_i` is the tightest bound over all subsets `M` with
/// `|M| < K`, clipped to `[0, 1]`.
pub fn sw_cost_capped(a: &DSMatrix, r: &Request, subset_cap: u128) -> Result<SwResult> {
    r.check_universe(a.n())?;
    let size = r.len();
    let count = 1u128.checked_shl(size as u32).unwrap_or(u128::MAX);
    if count > subset_cap {
        return Err(Error::DeskScale {
            what: "subset constraints",
            count,
            cap: subset_cap,
        });
    }
    let n = a.n();
    let k = r.demand();
    // before[s][i] = mass of item s at positions < i
    let before: Vec<Vec<f64>> = r
        .items()
        .iter()
        .map(|&e| {
            let mut acc = 0.0;
            let mut v = Vec::with_capacity(n);
            for j in 0..n {
                v.push(acc);
                acc += a.get(e, j);
            }
            v
        })
        .collect();
    let mut z = vec![1.0f64; n];
    for mask in 0u64..(count as u64) {
        let removed = mask.count_ones() as usize;
        if removed >= k {
            continue;
        }
        let need = (k - removed) as f64;
        for (i, zi) in z.iter_mut().enumerate() {
            let mass: f64 = (0..size)
                .filter(|s| mask & (1 << s) == 0)
                .map(|s| before[s][i])
                .sum();
            *zi = zi.min(mass / need);
        }
    }
    for zi in &mut z {
        *zi = zi.clamp(0.0, 1.0);
    }
    let value = z.iter().map(|zi| 1.0 - zi).sum();
    Ok(SwResult { value, z })
}

/// The SW LP handed to the generic simplex; a slower second route to
/// [`sw_cost`] used for cross-checking.
pub fn sw_cost_lp(a: &DSMatrix, r: &Request) -> Result<SwResult> {
    r.check_universe(a.n())?;
    let size = r.len();
    if size > 16 {
        return Err(Error::DeskScale {
            what: "dense SW LP",
            count: 1u128 << size,
            cap: 1 << 16,
        });
    }
    let n = a.n();
    let k = r.demand();
    // minimize sum (1 - z_i)  ==  n - max sum z_i
    let mut lp = LinearProgram::minimize(vec![-1.0; n]);
    for i in 0..n {
        let mut row = vec![0.0; n];
        row[i] = 1.0;
        lp.add(row, Relation::Le, 1.0);
    }
    for mask in 0u32..(1 << size) {
        let removed = mask.count_ones() as usize;
        let coef = k as f64 - removed as f64;
        for i in 0..n {
            let mass: f64 = r
                .items()
                .iter()
                .enumerate()
                .filter(|(s, _)| mask & (1 << s) == 0)
                .map(|(_, &e)| (0..i).map(|j| a.get(e, j)).sum::<f64>())
                .sum();
            let mut row = vec![0.0; n];
            row[i] = coef;
            lp.add(row, Relation::Le, mass);
        }
    }
    let sol = lp
        .solve()
        .map_err(|e| Error::Internal(format!("SW LP: {e}")))?;
    let value = sol.x.iter().map(|zi| 1.0 - zi).sum();
    Ok(SwResult { value, z: sol.x })
}

/// Unit-demand SW cost, `sum_i (1 - sum_{j<i} sum_{e in R} A_ej)_+`.
pub fn sw_cost_closed(a: &DSMatrix, r: &Request) -> Result<f64> {
    if r.demand() != 1 {
        return Err(Error::WrongDemand(r.demand()));
    }
    r.check_universe(a.n())?;
    let mut before = 0.0f64;
    let mut total = 0.0;
    for j in 0..a.n() {
        total += (1.0 - before).max(0.0);
        before += r.items().iter().map(|&e| a.get(e, j)).sum::<f64>();
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{perm_to_matrix, Permutation, SquareMatrix};

    #[test]
    fn example_configuration_costs() {
        let f1 = Configuration::from_one_based(&[(2, 3), (5, 1), (7, 10)]).unwrap();
        let f2 = Configuration::from_one_based(&[(2, 3), (5, 1), (7, 2)]).unwrap();
        assert_eq!(config_cost(&f1, 2).unwrap(), 3);
        assert_eq!(config_cost(&f2, 2).unwrap(), 2);
        let single = Configuration::from_one_based(&[(4, 6)]).unwrap();
        assert_eq!(config_cost(&single, 1).unwrap(), 6);
        assert!(config_cost(&single, 2).is_err());
    }

    #[test]
    fn configuration_must_be_injective() {
        assert!(Configuration::from_one_based(&[(1, 2), (3, 2)]).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let r1 = Request::from_one_based(&[2], 1).unwrap();
        let r2 = Request::from_one_based(&[1, 3], 1).unwrap();
        let r3 = Request::from_one_based(&[1, 2, 5], 2).unwrap();
        assert_eq!(enumerate_configs(&r1, 4).unwrap().len(), 4);
        assert_eq!(enumerate_configs(&r2, 4).unwrap().len(), 12);
        let all = enumerate_configs(&r3, 5).unwrap();
        assert_eq!(all.len(), 60);
        let mut sorted = all.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted.len(), 60);
    }

    #[test]
    fn enumeration_cap() {
        let r = Request::from_one_based(&[1, 2, 3], 1).unwrap();
        match enumerate_configs_capped(&r, 10, 100) {
            Err(Error::DeskScale { count: 720, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn closed_form_examples() {
        let r = Request::from_one_based(&[2], 1).unwrap();
        let pi = Permutation::from_one_based(&[3, 1, 4, 2, 5]).unwrap();
        assert!((sw_cost_closed(&perm_to_matrix(&pi), &r).unwrap() - 4.0).abs() < 1e-12);

        let one = Request::from_one_based(&[1], 1).unwrap();
        assert!((sw_cost_closed(&DSMatrix::uniform(4), &one).unwrap() - 2.5).abs() < 1e-12);

        // item 1 split between positions 1 and 3
        let m = SquareMatrix::from_rows(&[
            vec![0.5, 0.0, 0.5],
            vec![0.5, 0.5, 0.0],
            vec![0.0, 0.5, 0.5],
        ])
        .unwrap();
        let a = DSMatrix::new(m, 1e-12).unwrap();
        assert!((sw_cost_closed(&a, &one).unwrap() - 2.0).abs() < 1e-12);

        let two = Request::from_one_based(&[1, 2], 2).unwrap();
        assert!(matches!(sw_cost_closed(&a, &two), Err(Error::WrongDemand(2))));
    }

    #[test]
    fn fac_on_permutation_matrix() {
        let pi = Permutation::from_one_based(&[4, 2, 1, 3]).unwrap();
        let r = Request::from_one_based(&[1, 3], 2).unwrap();
        let a = perm_to_matrix(&pi);
        let res = fac_value(&a, &r, 0.1).unwrap();
        assert!(res.value <= 4.0 + 1e-9);
        let weight: f64 = res.primal_weights.iter().map(|p| p.1).sum();
        assert!((weight - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fac_rejects_bad_epsilon() {
        let r = Request::from_one_based(&[1], 1).unwrap();
        assert!(fac_value(&DSMatrix::uniform(2), &r, 0.0).is_err());
    }

    #[test]
    fn sw_concentrated_full_demand() {
        // R = {1,2}, K = 2, all of R's mass on positions 1..2: z_i = 1 for i > 2
        let pi = Permutation::from_one_based(&[1, 2, 3, 4]).unwrap();
        let r = Request::from_one_based(&[1, 2], 2).unwrap();
        let res = sw_cost(&perm_to_matrix(&pi), &r).unwrap();
        assert_eq!(res.z, vec![0.0, 0.0, 1.0, 1.0]);
        assert!((res.value - 2.0).abs() < 1e-12);
    }

    #[test]
    fn sw_subset_cap() {
        let r = Request::new((0..6).collect(), 1).unwrap();
        assert!(matches!(
            sw_cost_capped(&DSMatrix::uniform(6), &r, 32),
            Err(Error::DeskScale { .. })
        ));
    }
}

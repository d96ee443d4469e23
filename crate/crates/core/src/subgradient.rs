//! Subgradient oracles for the relaxed costs.
//!
//! Sign convention: `g` is a subgradient of `f` at `A` when
//! `f(B) >= f(A) + <g, B - A>` for every doubly stochastic `B`.

use rand::Rng;

use crate::costs::{check_epsilon, config_cost, enumerate_configs, penalty_coefficient};
use crate::error::{Error, Result};
use crate::lp::{LinearProgram, Relation};
use crate::model::{DSMatrix, Request, SquareMatrix};
use crate::sampling::random_ds_matrix;

/// Entry `(e, j)` pairs with the matrix entry `A_ej`.
#[derive(Clone, Debug, PartialEq)]
pub struct SubgradientMatrix {
    entries: SquareMatrix,
}

impl SubgradientMatrix {
    pub fn new(entries: SquareMatrix) -> Self {
        SubgradientMatrix { entries }
    }

    pub fn zeros(n: usize) -> Self {
        SubgradientMatrix {
            entries: SquareMatrix::zeros(n),
        }
    }

    pub fn n(&self) -> usize {
        self.entries.n()
    }

    pub fn get(&self, item: usize, position: usize) -> f64 {
        self.entries.get(item, position)
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.frobenius_norm()
    }

    pub fn negated(&self) -> Self {
        let mut m = self.entries.clone();
        m.scale(-1.0);
        SubgradientMatrix { entries: m }
    }
}

/// `min { i : mass of R at positions <= i is >= 1 }`, 1-based, clamped to `n`.
pub(crate) fn covering_index(a: &DSMatrix, r: &Request) -> usize {
    let n = a.n();
    let mut acc = 0.0;
    for j in 0..n {
        acc += r.items().iter().map(|&e| a.get(e, j)).sum::<f64>();
        if acc >= 1.0 {
            return j + 1;
        }
    }
    n
}

/// Closed-form subgradient of the unit-demand SW cost:
/// `g_ej = -(i* - j)` for `e in R`, `j < i*`, zero elsewhere.
pub fn sw_subgradient_k1(a: &DSMatrix, r: &Request) -> Result<SubgradientMatrix> {
    if r.demand() != 1 {
        return Err(Error::WrongDemand(r.demand()));
    }
    r.check_universe(a.n())?;
    let istar = covering_index(a, r);
    let mut g = SquareMatrix::zeros(a.n());
    for &e in r.items() {
        for j in 1..istar {
            g.set(e, j - 1, -((istar - j) as f64));
        }
    }
    Ok(SubgradientMatrix::new(g))
}

/// Optimal solution of the dual configuration LP.
#[derive(Clone, Debug)]
pub struct FacDual {
    /// The `lambda_ej`, zero outside the request's rows.
    pub g: SubgradientMatrix,
    /// The free multiplier of the simplex constraint.
    pub lambda: f64,
    /// `lambda + sum A_ej lambda_ej`; equals the FAC by strong duality.
    pub value: f64,
    /// Each `|lambda_ej|` is at most this (`n^4 / eps`).
    pub entry_bound: f64,
}

impl FacDual {
    /// `n^5 / eps`, the norm bound implied by `entry_bound`.
    pub fn norm_bound(&self) -> f64 {
        self.entry_bound * self.g.n() as f64
    }
}

/// Solves the dual of the configuration LP over all enumerated configurations:
///
/// maximize `lambda + sum_{e in R, j} A_ej lambda_ej`
/// subject to `lambda + sum_{(e,j) in F} lambda_ej <= C_F` for all `F` and
/// `|lambda_ej| <= n^4/eps`.
pub fn fac_subgradient_exact(a: &DSMatrix, r: &Request, epsilon: f64) -> Result<FacDual> {
    check_epsilon(epsilon)?;
    let n = a.n();
    let configs = enumerate_configs(r, n)?;
    let big = penalty_coefficient(n, epsilon);
    let pairs = r.len() * n;
    let size = r.len() as f64;

    // x = [lambda_plus, lambda_minus, mu_p...] with lambda_ej = mu_p - big, mu_p in [0, 2 big]
    let mass = |p: usize| a.get(r.items()[p / n], p % n);
    let mut objective = vec![-1.0, 1.0];
    objective.extend((0..pairs).map(|p| -mass(p)));
    let mut lp = LinearProgram::minimize(objective);
    for f in &configs {
        let c = config_cost(f, r.demand())? as f64;
        let mut row = vec![0.0; 2 + pairs];
        row[0] = 1.0;
        row[1] = -1.0;
        for (slot, &(_, pos)) in f.assignment().iter().enumerate() {
            row[2 + slot * n + pos] = 1.0;
        }
        lp.add(row, Relation::Le, c + size * big);
    }
    for p in 0..pairs {
        let mut row = vec![0.0; 2 + pairs];
        row[2 + p] = 1.0;
        lp.add(row, Relation::Le, 2.0 * big);
    }
    let sol = lp
        .solve()
        .map_err(|e| Error::Internal(format!("dual configuration LP: {e}")))?;

    let lambda = sol.x[0] - sol.x[1];
    let mut g = SquareMatrix::zeros(n);
    let mut value = lambda;
    for p in 0..pairs {
        let l = (sol.x[2 + p] - big).clamp(-big, big);
        g.set(r.items()[p / n], p % n, l);
        value += mass(p) * l;
    }
    Ok(FacDual {
        g: SubgradientMatrix::new(g),
        lambda,
        value,
        entry_bound: big,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct SubgradientReport {
    pub trials: usize,
    /// Largest `cost(A) + <g, B - A> - cost(B)` seen; negative means slack.
    pub worst_violation: f64,
    /// Trials whose violation exceeded the tolerance.
    pub failures: usize,
}

impl SubgradientReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Samples `trials` random doubly stochastic `B` and checks the subgradient
/// inequality for each, up to `tol`.
pub fn verify_subgradient<F, R>(
    cost: F,
    a: &DSMatrix,
    g: &SubgradientMatrix,
    trials: usize,
    tol: f64,
    rng: &mut R,
) -> Result<SubgradientReport>
where
    F: Fn(&DSMatrix) -> Result<f64>,
    R: Rng + ?Sized,
{
    if g.n() != a.n() {
        return Err(Error::Dimension {
            expected: a.n(),
            got: g.n(),
        });
    }
    let base = cost(a)?;
    let mut worst = f64::NEG_INFINITY;
    let mut failures = 0;
    for _ in 0..trials {
        let b = random_ds_matrix(a.n(), rng);
        let lower = base + g.matrix().dot(&b.matrix().sub(a.matrix()));
        let violation = lower - cost(&b)?;
        worst = worst.max(violation);
        if violation > tol {
            failures += 1;
        }
    }
    Ok(SubgradientReport {
        trials,
        worst_violation: worst,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costs::sw_cost_closed;
    use crate::model::{perm_to_matrix, Permutation};
    use crate::sampling::derive_rng;

    #[test]
    fn zero_at_front_loaded_matrix() {
        let pi = Permutation::from_one_based(&[2, 1, 3, 4]).unwrap();
        let r = Request::from_one_based(&[2], 1).unwrap();
        let g = sw_subgradient_k1(&perm_to_matrix(&pi), &r).unwrap();
        assert_eq!(g.norm(), 0.0);
    }

    #[test]
    fn uniform_matrix_entries() {
        let r = Request::from_one_based(&[1], 1).unwrap();
        let g = sw_subgradient_k1(&DSMatrix::uniform(4), &r).unwrap();
        assert_eq!(g.matrix().row(0), &[-3.0, -2.0, -1.0, 0.0]);
        for e in 1..4 {
            assert!(g.matrix().row(e).iter().all(|&x| x == 0.0));
        }
        let mut rng = derive_rng(3, 0);
        let rep = verify_subgradient(
            |b| sw_cost_closed(b, &r),
            &DSMatrix::uniform(4),
            &g,
            1000,
            1e-9,
            &mut rng,
        )
        .unwrap();
        assert!(rep.passed(), "{rep:?}");
    }

    #[test]
    fn verification_detects_wrong_sign() {
        let r = Request::from_one_based(&[1], 1).unwrap();
        let a = DSMatrix::uniform(4);
        let g = sw_subgradient_k1(&a, &r).unwrap().negated();
        let mut rng = derive_rng(4, 0);
        let rep = verify_subgradient(|b| sw_cost_closed(b, &r), &a, &g, 200, 1e-9, &mut rng).unwrap();
        assert!(!rep.passed());
    }

    #[test]
    fn zero_at_minimizer_passes() {
        let pi = Permutation::identity(5);
        let a = perm_to_matrix(&pi);
        let r = Request::from_one_based(&[1, 4], 1).unwrap();
        let mut rng = derive_rng(5, 0);
        let rep = verify_subgradient(
            |b| sw_cost_closed(b, &r),
            &a,
            &SubgradientMatrix::zeros(5),
            300,
            1e-12,
            &mut rng,
        )
        .unwrap();
        assert!(rep.passed());
    }

    #[test]
    fn wrong_demand_rejected() {
        let r = Request::from_one_based(&[1, 2], 2).unwrap();
        assert!(matches!(
            sw_subgradient_k1(&DSMatrix::uniform(3), &r),
            Err(Error::WrongDemand(2))
        ));
    }

    #[test]
    fn dual_entries_bounded() {
        let r = Request::from_one_based(&[1, 3], 1).unwrap();
        let a = DSMatrix::uniform(3);
        let d = fac_subgradient_exact(&a, &r, 0.5).unwrap();
        for e in 0..3 {
            for j in 0..3 {
                assert!(d.g.get(e, j).abs() <= d.entry_bound);
            }
        }
        assert!(d.g.matrix().row(1).iter().all(|&x| x == 0.0));
        assert!(d.g.norm() <= d.norm_bound());
    }
}

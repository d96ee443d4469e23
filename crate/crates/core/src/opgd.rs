//! Online projected gradient descent over doubly stochastic matrices.

use std::collections::BTreeMap;

use log::debug;

use crate::costs::{check_epsilon, fac_value, sw_cost_closed};
use crate::error::{Error, Result};
use crate::model::{access_cost, DSMatrix, Instance, Request, SquareMatrix};
use crate::projection::{project_birkhoff, ProjectionConfig};
use crate::rounding::Rounder;
use crate::sampling::derive_rng;
use crate::subgradient::{fac_subgradient_exact, sw_subgradient_k1, SubgradientMatrix};

/// RNG stream used by the rounder inside `run_online`.
pub const ROUNDING_STREAM: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepRule {
    /// `2 eps / (n^4.5 sqrt t)`
    Theory,
    /// `d / (g sqrt t)`
    Custom { d: f64, g: f64 },
}

impl StepRule {
    /// `d = 2 sqrt n` (the Frobenius diameter bound) and `g` the largest
    /// possible norm of the unit-demand SW subgradient for requests of at
    /// most `max_request` items.
    pub fn sw_scaled(n: usize, max_request: usize) -> Self {
        StepRule::Custom {
            d: 2.0 * (n as f64).sqrt(),
            g: sw_subgradient_norm_bound(n, max_request),
        }
    }

    pub fn eta(&self, t: usize, n: usize, epsilon: f64) -> f64 {
        let root = (t as f64).sqrt();
        match *self {
            StepRule::Theory => 2.0 * epsilon / ((n as f64).powf(4.5) * root),
            StepRule::Custom { d, g } => d / (g * root),
        }
    }

    fn validate(&self) -> Result<()> {
        if let StepRule::Custom { d, g } = *self {
            if !(d > 0.0 && g > 0.0 && d.is_finite() && g.is_finite()) {
                return Err(Error::Config(format!("step rule needs d, g > 0, got d={d}, g={g}")));
            }
        }
        Ok(())
    }
}

/// `sqrt(size * sum_{j=1}^{n-1} j^2)`, an upper bound on `||g||` for the
/// closed-form SW subgradient; at least 1.
pub fn sw_subgradient_norm_bound(n: usize, size: usize) -> f64 {
    let squares: f64 = (1..n).map(|j| (j * j) as f64).sum();
    (size.max(1) as f64 * squares).sqrt().max(1.0)
}

#[derive(Clone, Debug)]
pub struct OPGDState {
    pub t: usize,
    pub a: DSMatrix,
    pub epsilon: f64,
    pub step_rule: StepRule,
}

pub fn opgd_init(n: usize, epsilon: f64) -> Result<OPGDState> {
    if n == 0 {
        return Err(Error::Dimension {
            expected: 1,
            got: 0,
        });
    }
    check_epsilon(epsilon)?;
    Ok(OPGDState {
        t: 1,
        a: DSMatrix::uniform(n),
        epsilon,
        step_rule: StepRule::Theory,
    })
}

/// One gradient step followed by projection back onto the doubly
/// stochastic matrices.
pub fn opgd_step(state: OPGDState, g: &SubgradientMatrix, proj: &ProjectionConfig) -> Result<OPGDState> {
    let n = state.a.n();
    if g.n() != n {
        return Err(Error::Dimension {
            expected: n,
            got: g.n(),
        });
    }
    let eta = state.step_rule.eta(state.t, n, state.epsilon);
    let mut moved = state.a.matrix().clone();
    moved.scaled_add(-eta, g.matrix());
    let projected = project_birkhoff(&moved, proj)?;
    if !projected.converged {
        debug!("round {}: projection stopped at the iteration cap", state.t);
    }
    Ok(OPGDState {
        t: state.t + 1,
        a: projected.matrix,
        epsilon: state.epsilon,
        step_rule: state.step_rule,
    })
}

/// A relaxed cost together with one of its subgradients.
pub trait CostOracle: Send + Sync {
    fn name(&self) -> &'static str;
    fn cost(&self, a: &DSMatrix, r: &Request) -> Result<f64>;
    fn subgradient(&self, a: &DSMatrix, r: &Request) -> Result<SubgradientMatrix>;
}

/// Closed-form unit-demand SW cost.
#[derive(Clone, Copy, Debug, Default)]
pub struct SwOracle;

impl CostOracle for SwOracle {
    fn name(&self) -> &'static str {
        "sw"
    }

    fn cost(&self, a: &DSMatrix, r: &Request) -> Result<f64> {
        sw_cost_closed(a, r)
    }

    fn subgradient(&self, a: &DSMatrix, r: &Request) -> Result<SubgradientMatrix> {
        sw_subgradient_k1(a, r)
    }
}

/// Configuration LP cost, solved exactly by enumeration.
#[derive(Clone, Copy, Debug)]
pub struct FacOracle {
    pub epsilon: f64,
}

impl CostOracle for FacOracle {
    fn name(&self) -> &'static str {
        "fac"
    }

    fn cost(&self, a: &DSMatrix, r: &Request) -> Result<f64> {
        Ok(fac_value(a, r, self.epsilon)?.value)
    }

    fn subgradient(&self, a: &DSMatrix, r: &Request) -> Result<SubgradientMatrix> {
        Ok(fac_subgradient_exact(a, r, self.epsilon)?.g)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RoundTrace {
    pub t: usize,
    pub relaxed_cost: f64,
    /// Access cost of the played permutation, when a rounder was supplied.
    pub rounded_cost: Option<f64>,
    pub baseline_costs: BTreeMap<String, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OnlineConfig {
    pub epsilon: f64,
    pub step_rule: StepRule,
    pub projection: ProjectionConfig,
}

impl Default for OnlineConfig {
    fn default() -> Self {
        OnlineConfig {
            epsilon: crate::costs::DEFAULT_EPSILON,
            step_rule: StepRule::Theory,
            projection: ProjectionConfig::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OnlineRun {
    pub traces: Vec<RoundTrace>,
    pub final_state: OPGDState,
}

/// Plays the request sequence. In round `t` the permutation is rounded
/// from `A^t` before `R_t` is looked at; `A^{t+1}` is then computed from
/// the subgradient at `R_t`.
pub fn run_online(
    inst: &Instance,
    oracle: &dyn CostOracle,
    rounder: Option<&dyn Rounder>,
    cfg: &OnlineConfig,
    seed: u64,
) -> Result<OnlineRun> {
    cfg.step_rule.validate()?;
    cfg.projection.validate()?;
    let mut state = opgd_init(inst.n(), cfg.epsilon)?;
    state.step_rule = cfg.step_rule;
    let mut rng = derive_rng(seed, ROUNDING_STREAM);
    let mut traces = Vec::with_capacity(inst.len());
    for (idx, r) in inst.requests().iter().enumerate() {
        let round = idx + 1;
        let wrap = |e: Error| Error::Round {
            round,
            source: Box::new(e),
        };
        let played = match rounder {
            Some(rd) => Some(rd.round(&state.a, &mut rng).map_err(wrap)?),
            None => None,
        };
        let rounded_cost = match &played {
            Some(pi) => Some(access_cost(pi, r).map_err(wrap)? as f64),
            None => None,
        };
        let relaxed_cost = oracle.cost(&state.a, r).map_err(wrap)?;
        let g = oracle.subgradient(&state.a, r).map_err(wrap)?;
        traces.push(RoundTrace {
            t: round,
            relaxed_cost,
            rounded_cost,
            baseline_costs: BTreeMap::new(),
        });
        state = opgd_step(state, &g, &cfg.projection).map_err(wrap)?;
    }
    Ok(OnlineRun {
        traces,
        final_state: state,
    })
}

#[derive(Clone, Debug)]
pub struct OfflineOptimum {
    pub matrix: DSMatrix,
    /// Average cost over the request sequence at `matrix`.
    pub average_cost: f64,
    pub iterations: usize,
}

/// Best fixed matrix in hindsight, approximated by projected subgradient
/// descent on the average cost with steps `2 sqrt(n) / (||G|| sqrt k)`.
/// Returns the best iterate seen.
pub fn offline_optimum(
    requests: &[Request],
    n: usize,
    oracle: &dyn CostOracle,
    iterations: usize,
    proj: &ProjectionConfig,
) -> Result<OfflineOptimum> {
    if requests.is_empty() {
        return Ok(OfflineOptimum {
            matrix: DSMatrix::uniform(n),
            average_cost: 0.0,
            iterations: 0,
        });
    }
    let mut counts: BTreeMap<&Request, f64> = BTreeMap::new();
    for r in requests {
        *counts.entry(r).or_default() += 1.0;
    }
    let total = requests.len() as f64;
    let diameter = 2.0 * (n as f64).sqrt();

    let evaluate = |a: &DSMatrix| -> Result<(f64, SquareMatrix)> {
        let mut value = 0.0;
        let mut grad = SquareMatrix::zeros(n);
        for (r, &c) in &counts {
            value += c * oracle.cost(a, r)?;
            grad.scaled_add(c / total, oracle.subgradient(a, r)?.matrix());
        }
        Ok((value / total, grad))
    };

    let mut a = DSMatrix::uniform(n);
    let (mut value, mut grad) = evaluate(&a)?;
    let mut best = (value, a.clone());
    for k in 1..=iterations {
        let norm = grad.frobenius_norm();
        if norm == 0.0 {
            break;
        }
        let mut moved = a.matrix().clone();
        moved.scaled_add(-diameter / (norm * (k as f64).sqrt()), &grad);
        a = project_birkhoff(&moved, proj)?.matrix;
        (value, grad) = evaluate(&a)?;
        if value < best.0 {
            best = (value, a.clone());
        }
    }
    Ok(OfflineOptimum {
        matrix: best.1,
        average_cost: best.0,
        iterations,
    })
}

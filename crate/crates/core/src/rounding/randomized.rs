//! Randomized threshold rounding with the doubling transform.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::model::{access_cost, DSMatrix, Permutation, Request, SquareMatrix};

pub const MSSC_SCALE: f64 = 1.6783;
pub const GMSSC_SCALE: f64 = 5.03;
/// Expected-cost guarantee of the unit-demand scheme relative to the SW cost.
pub const MSSC_GUARANTEE: f64 = 11.713;
/// Expected-cost guarantee of the general-demand scheme relative to the SW cost.
pub const GMSSC_GUARANTEE: f64 = 28.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RoundingParams {
    pub scale_constant: f64,
}

impl RoundingParams {
    pub fn new(scale_constant: f64) -> Result<Self> {
        if !(scale_constant > 0.0 && scale_constant.is_finite()) {
            return Err(Error::Config(format!(
                "scale constant must be positive, got {scale_constant}"
            )));
        }
        Ok(RoundingParams { scale_constant })
    }

    pub fn mssc() -> Self {
        RoundingParams {
            scale_constant: MSSC_SCALE,
        }
    }

    pub fn gmssc() -> Self {
        RoundingParams {
            scale_constant: GMSSC_SCALE,
        }
    }
}

/// Draw from density `2x` on `(0, 1)`.
pub fn sample_alpha<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u.sqrt();
        }
    }
}

/// For `j = 1..=n/2` ascending, adds column `j` to column `2j` (1-based).
pub fn double_matrix(m: &SquareMatrix) -> SquareMatrix {
    let n = m.n();
    let mut out = m.clone();
    for e in 0..n {
        let row = out.row_mut(e);
        for j in 1..=n / 2 {
            row[2 * j - 1] += row[j - 1];
        }
    }
    out
}

/// `double((scale / alpha) * a)`, the matrix the thresholds are compared to.
pub fn threshold_matrix(a: &DSMatrix, params: &RoundingParams, alpha: f64) -> SquareMatrix {
    let mut scaled = a.matrix().clone();
    scaled.scale(params.scale_constant / alpha);
    double_matrix(&scaled)
}

/// Largest 1-based `i` with `sum_{j < i} row_j < threshold`.
fn effective_index(row: &[f64], threshold: f64) -> usize {
    let mut acc = 0.0;
    let mut idx = 1;
    for (j, &x) in row.iter().enumerate().take(row.len().saturating_sub(1)) {
        acc += x;
        if acc < threshold {
            idx = j + 2;
        } else {
            break;
        }
    }
    idx
}

pub fn round_randomized<R: Rng + ?Sized>(
    a: &DSMatrix,
    params: &RoundingParams,
    rng: &mut R,
) -> Permutation {
    let n = a.n();
    let alpha = sample_alpha(rng);
    let b = threshold_matrix(a, params, alpha);
    let keys: Vec<usize> = (0..n)
        .map(|e| {
            let threshold = 1.0 - rng.random::<f64>();
            effective_index(b.row(e), threshold)
        })
        .collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    order.sort_by_key(|&e| keys[e]);
    Permutation::new(order).expect("sorted item list is a permutation")
}

/// Monte Carlo mean and standard error of the access cost of one rounding.
pub fn expected_cost_estimate<R: Rng + ?Sized>(
    a: &DSMatrix,
    params: &RoundingParams,
    r: &Request,
    samples: usize,
    rng: &mut R,
) -> Result<(f64, f64)> {
    if samples == 0 {
        return Err(Error::Config("at least one sample is required".into()));
    }
    r.check_universe(a.n())?;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let c = access_cost(&round_randomized(a, params, rng), r)? as f64;
        sum += c;
        sum_sq += c * c;
    }
    let k = samples as f64;
    let mean = sum / k;
    if samples == 1 {
        return Ok((mean, 0.0));
    }
    let var = ((sum_sq - k * mean * mean) / (k - 1.0)).max(0.0);
    Ok((mean, (var / k).sqrt()))
}

/// First 1-based position where the request's cumulative mass reaches
/// `alpha`; `n` when it never does.
pub fn i_r_alpha(a: &DSMatrix, r: &Request, alpha: f64) -> Result<usize> {
    if r.demand() != 1 {
        return Err(Error::WrongDemand(r.demand()));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Config(format!("alpha must lie in (0, 1], got {alpha}")));
    }
    r.check_universe(a.n())?;
    let prefix = a.prefix_mass(r.items());
    Ok(prefix
        .iter()
        .position(|&p| p >= alpha)
        .map_or(a.n(), |i| i + 1))
}

//! Items, permutations, requests and doubly stochastic matrices.
//!
//! Items and positions are 0-based in memory. Every external format
//! (instance files, CSV, CLI flags, Python bindings) is 1-based.

use std::fmt;

use crate::error::{Error, Result};

/// Default feasibility slack carried by [`DSMatrix`].
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// A ranking of the items `0..n`; `order()[i]` is the item at position `i`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Permutation {
    order: Vec<usize>,
    position: Vec<usize>,
}

impl Permutation {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        let n = order.len();
        let mut position = vec![usize::MAX; n];
        for (pos, &item) in order.iter().enumerate() {
            if item >= n {
                return Err(Error::InvalidPermutation(format!(
                    "item {} outside universe of size {n}",
                    item + 1
                )));
            }
            if position[item] != usize::MAX {
                return Err(Error::InvalidPermutation(format!(
                    "item {} appears twice",
                    item + 1
                )));
            }
            position[item] = pos;
        }
        Ok(Permutation { order, position })
    }

    pub fn from_one_based(order: &[usize]) -> Result<Self> {
        let zero = order
            .iter()
            .map(|&x| {
                x.checked_sub(1)
                    .ok_or_else(|| Error::InvalidPermutation("item 0 in 1-based order".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(zero)
    }

    pub fn identity(n: usize) -> Self {
        let order: Vec<usize> = (0..n).collect();
        Permutation {
            position: order.clone(),
            order,
        }
    }

    pub fn n(&self) -> usize {
        self.order.len()
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.order.iter().map(|x| x + 1).collect()
    }

    /// Position (0-based) of `item`.
    pub fn position_of(&self, item: usize) -> usize {
        self.position[item]
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation{:?}", self.to_one_based())
    }
}

/// A set of items together with its covering requirement.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Request {
    items: Vec<usize>,
    demand: usize,
}

impl Request {
    /// Items are 0-based; they are sorted on construction. Duplicates are rejected.
    pub fn new(mut items: Vec<usize>, demand: usize) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvalidRequest("empty item set".into()));
        }
        items.sort_unstable();
        if let Some(w) = items.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidRequest(format!(
                "duplicate item {}",
                w[0] + 1
            )));
        }
        if demand == 0 || demand > items.len() {
            return Err(Error::InvalidRequest(format!(
                "demand {demand} outside 1..={}",
                items.len()
            )));
        }
        Ok(Request { items, demand })
    }

    pub fn from_one_based(items: &[usize], demand: usize) -> Result<Self> {
        let zero = items
            .iter()
            .map(|&x| {
                x.checked_sub(1)
                    .ok_or_else(|| Error::InvalidRequest("item 0 in 1-based request".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(zero, demand)
    }

    pub fn items(&self) -> &[usize] {
        &self.items
    }

    pub fn demand(&self) -> usize {
        self.demand
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn contains(&self, item: usize) -> bool {
        self.items.binary_search(&item).is_ok()
    }

    pub(crate) fn max_item(&self) -> usize {
        *self.items.last().expect("requests are nonempty")
    }

    /// Fails unless every item lies in `0..n`.
    pub fn check_universe(&self, n: usize) -> Result<()> {
        if self.max_item() >= n {
            return Err(Error::InvalidRequest(format!(
                "item {} outside universe of size {n}",
                self.max_item() + 1
            )));
        }
        Ok(())
    }
}

impl fmt::Debug for Request {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let one: Vec<usize> = self.items.iter().map(|x| x + 1).collect();
        write!(f, "Request{{items: {one:?}, k: {}}}", self.demand)
    }
}

/// Dense row-major `n x n` real matrix without feasibility constraints.
#[derive(Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    data: Vec<f64>,
}

impl SquareMatrix {
    pub fn zeros(n: usize) -> Self {
        SquareMatrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn filled(n: usize, value: f64) -> Self {
        SquareMatrix {
            n,
            data: vec![value; n * n],
        }
    }

    pub fn from_vec(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::Dimension {
                expected: n * n,
                got: data.len(),
            });
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let mut data = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::Dimension {
                    expected: n,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Ok(SquareMatrix { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.n + col]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row * self.n + col] = value;
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.data[row * self.n..(row + 1) * self.n]
    }

    pub fn row_mut(&mut self, row: usize) -> &mut [f64] {
        &mut self.data[row * self.n..(row + 1) * self.n]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.data.chunks(self.n).map(|r| r.to_vec()).collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn dot(&self, other: &SquareMatrix) -> f64 {
        debug_assert_eq!(self.n, other.n);
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn sub(&self, other: &SquareMatrix) -> SquareMatrix {
        debug_assert_eq!(self.n, other.n);
        SquareMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    /// `self += scale * other`
    pub fn scaled_add(&mut self, scale: f64, other: &SquareMatrix) {
        debug_assert_eq!(self.n, other.n);
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    pub fn scale(&mut self, factor: f64) {
        for a in &mut self.data {
            *a *= factor;
        }
    }

    /// Returns `P * self * Q` where `P` moves row `i` to `row_perm[i]`
    /// and `Q` moves column `j` to `col_perm[j]`.
    pub fn relabel(&self, row_perm: &[usize], col_perm: &[usize]) -> SquareMatrix {
        let mut out = SquareMatrix::zeros(self.n);
        for i in 0..self.n {
            for j in 0..self.n {
                out.set(row_perm[i], col_perm[j], self.get(i, j));
            }
        }
        out
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        match self.data.iter().position(|x| !x.is_finite()) {
            Some(idx) => Err(Error::NonFinite {
                row: idx / self.n,
                col: idx % self.n,
            }),
            None => Ok(()),
        }
    }
}

impl fmt::Debug for SquareMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.data.chunks(self.n)).finish()
    }
}

/// A doubly stochastic matrix; entry `(e, j)` is the mass of item `e` at position `j`.
#[derive(Clone, PartialEq)]
pub struct DSMatrix {
    inner: SquareMatrix,
    tolerance: f64,
}

impl DSMatrix {
    pub fn new(inner: SquareMatrix, tolerance: f64) -> Result<Self> {
        if !(tolerance >= 0.0) {
            return Err(Error::Config(format!("negative tolerance {tolerance}")));
        }
        inner.check_finite()?;
        let n = inner.n();
        if n == 0 {
            return Err(Error::Dimension {
                expected: 1,
                got: 0,
            });
        }
        for (idx, &x) in inner.as_slice().iter().enumerate() {
            if x < -tolerance || x > 1.0 + tolerance {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({}, {}) = {x} outside [0, 1]",
                    idx / n + 1,
                    idx % n + 1
                )));
            }
        }
        for e in 0..n {
            let s: f64 = inner.row(e).iter().sum();
            if (s - 1.0).abs() > tolerance {
                return Err(Error::InvalidMatrix(format!("row {} sums to {s}", e + 1)));
            }
        }
        for j in 0..n {
            let s: f64 = (0..n).map(|e| inner.get(e, j)).sum();
            if (s - 1.0).abs() > tolerance {
                return Err(Error::InvalidMatrix(format!(
                    "column {} sums to {s}",
                    j + 1
                )));
            }
        }
        Ok(DSMatrix { inner, tolerance })
    }

    pub fn with_default_tolerance(inner: SquareMatrix) -> Result<Self> {
        Self::new(inner, DEFAULT_TOLERANCE)
    }

    /// The barycenter `1/n * ones`.
    pub fn uniform(n: usize) -> Self {
        DSMatrix {
            inner: SquareMatrix::filled(n, 1.0 / n as f64),
            tolerance: DEFAULT_TOLERANCE,
        }
    }

    pub(crate) fn from_trusted(inner: SquareMatrix, tolerance: f64) -> Self {
        DSMatrix { inner, tolerance }
    }

    pub fn n(&self) -> usize {
        self.inner.n()
    }

    pub fn tolerance(&self) -> f64 {
        self.tolerance
    }

    #[inline]
    pub fn get(&self, item: usize, position: usize) -> f64 {
        self.inner.get(item, position)
    }

    pub fn row(&self, item: usize) -> &[f64] {
        self.inner.row(item)
    }

    pub fn matrix(&self) -> &SquareMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> SquareMatrix {
        self.inner
    }

    /// True when every entry is within tolerance of 0 or 1.
    pub fn is_integral(&self) -> bool {
        self.inner
            .as_slice()
            .iter()
            .all(|&x| x.abs() <= self.tolerance || (x - 1.0).abs() <= self.tolerance)
    }

    /// `lambda * self + (1 - lambda) * other`
    pub fn mix(&self, other: &DSMatrix, lambda: f64) -> DSMatrix {
        let mut m = self.inner.clone();
        m.scale(lambda);
        m.scaled_add(1.0 - lambda, &other.inner);
        DSMatrix {
            inner: m,
            tolerance: self.tolerance.max(other.tolerance),
        }
    }

    /// Cumulative mass of `items` at positions `0..=i`, for every `i`.
    pub fn prefix_mass(&self, items: &[usize]) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n];
        let mut acc = 0.0;
        for (j, slot) in out.iter_mut().enumerate() {
            acc += items.iter().map(|&e| self.get(e, j)).sum::<f64>();
            *slot = acc;
        }
        out
    }
}

impl fmt::Debug for DSMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.inner.fmt(f)
    }
}

/// A universe size together with an ordered request sequence.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Instance {
    n: usize,
    requests: Vec<Request>,
}

impl Instance {
    pub fn new(n: usize, requests: Vec<Request>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Parse {
                request: None,
                message: "n must be positive".into(),
            });
        }
        for (idx, r) in requests.iter().enumerate() {
            r.check_universe(n).map_err(|e| Error::Parse {
                request: Some(idx),
                message: e.to_string(),
            })?;
        }
        Ok(Instance { n, requests })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn requests(&self) -> &[Request] {
        &self.requests
    }

    pub fn len(&self) -> usize {
        self.requests.len()
    }

    pub fn is_empty(&self) -> bool {
        self.requests.is_empty()
    }

    pub fn all_unit_demand(&self) -> bool {
        self.requests.iter().all(|r| r.demand() == 1)
    }
}

/// First position (1-based) at which `r.demand()` items of `r` have appeared in `pi`.
pub fn access_cost(pi: &Permutation, r: &Request) -> Result<usize> {
    r.check_universe(pi.n())?;
    let mut found = 0;
    for (pos, &item) in pi.order().iter().enumerate() {
        if r.contains(item) {
            found += 1;
            if found == r.demand() {
                return Ok(pos + 1);
            }
        }
    }
    Err(Error::Internal("demand exceeds request size".into()))
}

/// `sum_i min{1, (K - sum_{j<i} sum_{e in R} A_ej)_+}`; equals [`access_cost`] on
/// permutation matrices and is defined for fractional matrices as well.
pub fn access_cost_matrix_form(a: &DSMatrix, r: &Request) -> Result<f64> {
    if r.max_item() >= a.n() {
        return Err(Error::Dimension {
            expected: a.n(),
            got: r.max_item() + 1,
        });
    }
    let k = r.demand() as f64;
    let mut before = 0.0;
    let mut total = 0.0;
    for j in 0..a.n() {
        total += (k - before).clamp(0.0, 1.0);
        before += r.items().iter().map(|&e| a.get(e, j)).sum::<f64>();
    }
    Ok(total)
}

pub fn perm_to_matrix(pi: &Permutation) -> DSMatrix {
    let n = pi.n();
    let mut m = SquareMatrix::zeros(n);
    for (pos, &item) in pi.order().iter().enumerate() {
        m.set(item, pos, 1.0);
    }
    DSMatrix::from_trusted(m, 0.0)
}

/// Inverse of [`perm_to_matrix`]; fails unless `a` is a permutation matrix (within tolerance).
pub fn matrix_to_perm(a: &DSMatrix) -> Result<Permutation> {
    if !a.is_integral() {
        return Err(Error::InvalidPermutation("matrix is not integral".into()));
    }
    let n = a.n();
    let mut order = vec![usize::MAX; n];
    for e in 0..n {
        for (j, slot) in order.iter_mut().enumerate() {
            if a.get(e, j) > 0.5 {
                *slot = e;
            }
        }
    }
    Permutation::new(order)
}

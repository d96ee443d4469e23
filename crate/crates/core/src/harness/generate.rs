//! Synthetic request streams.

use rand::seq::IndexedRandom;

use crate::error::{Error, Result};
use crate::model::{Instance, Request};
use crate::sampling::derive_rng;

/// RNG stream used for instance generation.
pub const GENERATOR_STREAM: u64 = 0;

/// `anchors` are 1-based.
pub(crate) fn check_anchored(n: usize, anchors: &[usize], extra: usize) -> Result<()> {
    if anchors.is_empty() {
        return Err(Error::Config("anchors must be nonempty".into()));
    }
    let mut sorted = anchors.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != anchors.len() {
        return Err(Error::Config("anchors must be distinct".into()));
    }
    if let Some(&a) = anchors.iter().find(|&&a| a == 0 || a > n) {
        return Err(Error::Config(format!("anchor {a} outside 1..={n}")));
    }
    if extra + 1 > n {
        return Err(Error::Config(format!(
            "requests of {} items do not fit a universe of {n}",
            extra + 1
        )));
    }
    Ok(())
}

/// Every request is one uniformly chosen anchor plus `extra` distinct
/// items drawn uniformly from the rest of the universe; demand 1.
/// `anchors` are 1-based.
pub fn generate_anchored(n: usize, anchors: &[usize], extra: usize, rounds: usize, seed: u64) -> Result<Instance> {
    check_anchored(n, anchors, extra)?;
    let mut rng = derive_rng(seed, GENERATOR_STREAM);
    let anchors: Vec<usize> = anchors.iter().map(|a| a - 1).collect();
    let mut others = Vec::with_capacity(n);
    let mut requests = Vec::with_capacity(rounds);
    for _ in 0..rounds {
        let anchor = *anchors.choose(&mut rng).expect("anchors are nonempty");
        others.clear();
        others.extend((0..n).filter(|&e| e != anchor));
        let mut items: Vec<usize> = others.choose_multiple(&mut rng, extra).copied().collect();
        items.push(anchor);
        requests.push(Request::new(items, 1)?);
    }
    Instance::new(n, requests)
}

//! Maps from doubly stochastic matrices to permutations.

pub mod deterministic;
pub mod dp;
pub mod randomized;

pub use deterministic::{
    block_cost, block_exact, block_fptas, block_heuristic, deterministic_blocks, round_deterministic,
    BlockSolver, SolverKind,
};
pub use dp::{dp_solve, DpInstance, DpOutcome, Triple};
pub use randomized::{
    double_matrix, expected_cost_estimate, i_r_alpha, round_randomized, sample_alpha,
    threshold_matrix, RoundingParams,
};

use crate::error::Result;
use crate::model::{DSMatrix, Permutation};
use crate::sampling::StreamRng;

pub trait Rounder: Send + Sync {
    fn name(&self) -> String;
    fn round(&self, a: &DSMatrix, rng: &mut StreamRng) -> Result<Permutation>;
}

impl Rounder for BlockSolver {
    fn name(&self) -> String {
        match self.kind {
            SolverKind::Exact => format!("det-exact-r{}", self.r),
            SolverKind::Fptas { alpha } => format!("det-fptas-r{}-a{alpha}", self.r),
            SolverKind::Heuristic => format!("det-heuristic-r{}", self.r),
        }
    }

    fn round(&self, a: &DSMatrix, _rng: &mut StreamRng) -> Result<Permutation> {
        round_deterministic(a, self)
    }
}

impl Rounder for RoundingParams {
    fn name(&self) -> String {
        format!("rand-z{}", self.scale_constant)
    }

    fn round(&self, a: &DSMatrix, rng: &mut StreamRng) -> Result<Permutation> {
        Ok(round_randomized(a, self, rng))
    }
}

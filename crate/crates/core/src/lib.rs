//! Online learning of rankings for (generalized) min-sum set cover.
//!
//! The learner keeps a doubly stochastic matrix, updates it by projected
//! subgradient steps on a convex relaxation of the access cost, and turns
//! it into a permutation each round with a deterministic or randomized
//! rounding scheme.

pub mod baselines;
pub mod costs;
pub mod error;
pub mod harness;
pub mod instance;
pub mod lp;
pub mod model;
pub mod opgd;
pub mod projection;
pub mod rounding;
pub mod sampling;
pub mod subgradient;

pub use error::{Error, Result};
pub use model::{
    access_cost, access_cost_matrix_form, matrix_to_perm, perm_to_matrix, DSMatrix, Instance,
    Permutation, Request, SquareMatrix,
};

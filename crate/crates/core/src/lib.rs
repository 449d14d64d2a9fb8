//! Incomplete LDL preconditioners built from random walks on the matrix
//! graph, a preconditioned conjugate-gradient driver, and classical
//! incomplete-Cholesky baselines for comparison.

pub mod baselines;
pub mod error;
pub mod game;
pub mod general;
pub mod krylov;
pub mod precond;
pub mod solver;
pub mod sparse;
pub mod stats;

pub use error::{Error, Result};
pub use game::{build_game, ScalingMode, StepOutcome, StepSampler, WalkGame};
pub use precond::{build_preconditioner, IncompleteLdl, OrderingStrategy, StoppingCriterion};
pub use sparse::{Permutation, SparseMatrix};

//! Monte Carlo counting of n-queens solutions.
//!
//! Counting solutions is recast as rare-event probability estimation: the
//! number of solutions equals P(S = 0) times the size of the ambient state
//! space, where S counts attacking pairs. The crate provides an exact
//! backtracking oracle for desk-scale boards next to a suite of Monte Carlo
//! estimators — naive sampling, adaptive multilevel splitting, cross-entropy
//! importance sampling, nested sampling, split sampling with level
//! reweighting, and Wang-Landau density-of-states estimation — all sharing
//! the same board representation, Metropolis kernels, and seed derivation,
//! so every estimator can be validated against the oracle.
//!
//! Start with the `examples/` directory: each major capability has a
//! runnable example. The `queenscount` binary exposes the same operations
//! as subcommands emitting canonical JSON.

pub mod board;
pub mod chains;
pub mod cli;
pub mod estimators;
pub mod exact;
pub mod harness;
pub mod quantile;
pub mod rng;

pub use board::{BoardSpec, Embedding, Energy, Placement};


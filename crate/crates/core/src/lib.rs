//! Low-rank matrix sensing with piecewise Toeplitz operators.
//!
//! * [`matrix_model`]: rank-`r` matrices and their primary/secondary
//!   column decomposition.
//! * [`operators`]: piecewise Toeplitz and dense random sensing operators.
//! * [`coherence`]: the effective matrix `Theta`, Gram/Gershgorin bounds,
//!   uniqueness probes, the measurement bound and the concentration study.
//! * [`solvers`]: singular value thresholding and alternating least squares.
//! * [`bench`]: the Monte Carlo error-vs-rank harness behind the CLI.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod coherence;
pub mod error;
pub mod io;
pub mod linalg;
pub mod matrix_model;
pub mod operators;
pub mod rng;
pub mod solvers;

pub use error::{Error, Result};
pub use matrix_model::{LowRankMatrix, RankDecomposition};
pub use operators::{
    DenseOperator, Operator, OperatorKind, PiecewiseToeplitzOperator, SensingOperator,
};
pub use solvers::{SolveResult, SolverConfig, SolverKind};

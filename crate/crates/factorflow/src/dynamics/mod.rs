//! Time evolution: scalar and coupled recursions, full-matrix gradient descent
//! and the continuous gradient flow.

use thiserror::Error;

pub mod flow;
pub mod matrix;
pub mod perturbed;
pub mod scalar;

pub use flow::{flow_value, negative_flow_step, rk4_flow, y_minus};
pub use matrix::{matrix_gd_step, FactorState, InitKind, DEFAULT_MATRIX_CAP};
pub use perturbed::{perturbed_path, perturbed_step, recursion_defect, run_perturbed, AuxSequences, PerturbedPair, PerturbedRun};
pub use scalar::{
    detect_divergence, factor_scalars_step, positive_root, scalar_limit, run_scalar, run_scalar_guarded, scalar_path, scalar_step, ScalarTrajectory,
    DEFAULT_SCALAR_CAP, DIVERGENCE_GUARD,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("root bracketing failed ({0})")]
    NoBracket(String),
}

//! Closed-form constants, hitting times, step-size thresholds, error bounds and
//! plateau windows.

use thiserror::Error;

pub mod approx;
pub mod bounds;
pub mod constants;
pub mod plateau;
pub mod potentials;
pub mod times;

pub use approx::{approx_t_plus, eta_from_kappa, TimeApproximation};
pub use bounds::{divergence_threshold, error_bound, stepsize_bound, InitRegime, StepsizeContext};
pub use constants::{c_n, c_root, TheoryConstants};
pub use plateau::{flow_plateau, gd_plateau, iteration_windows, recommended_params, FlowPlateau, FlowProfile, GdPlateau, Interval};
pub use potentials::{t_minus, t_plus, u_minus, u_plus, u_plus_real};
pub use times::{
    evaluate_identical, evaluate_perturbed, t_identical, t_identical_lower, t_perturbed, IdCase, PredictionBundle,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TheoryError {
    #[error("{0}")]
    Domain(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
}

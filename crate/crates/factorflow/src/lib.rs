//! Gradient descent and gradient flow for deep symmetric matrix factorization
//! min ½‖W_N⋯W₁ − Ŵ‖_F², with closed-form predictions to check the simulations against.

// Negated float comparisons are deliberate: they treat NaN as a failure.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod harness;
pub mod spectral;
pub mod theory;

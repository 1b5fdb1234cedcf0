use serde::{Deserialize, Serialize};

use super::constants::c_root;
use super::TheoryError;

/// Which admissibility condition on η to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepsizeContext {
    /// Scalar convergence to λ₊^{1/N}; input is λ.
    Convergence,
    /// Scalar hitting-time bounds; input is λ.
    HittingTime,
    /// Matrix GD with identical init; input is ‖Ŵ‖.
    MatrixIdentical,
    /// Matrix GD with perturbed init; input is ‖Ŵ‖.
    MatrixPerturbed,
    /// Perturbed scalar pair with (α−β)α^{N−1} ≤ λ; input is λ.
    PairBelowTarget,
    /// Perturbed scalar pair with (α−β)α^{N−1} > λ ≥ 0; input is λ.
    PairAboveTarget,
}

impl StepsizeContext {
    pub const ALL: [StepsizeContext; 6] = [
        StepsizeContext::Convergence,
        StepsizeContext::HittingTime,
        StepsizeContext::MatrixIdentical,
        StepsizeContext::MatrixPerturbed,
        StepsizeContext::PairBelowTarget,
        StepsizeContext::PairAboveTarget,
    ];

    pub fn name(self) -> &'static str {
        match self {
            StepsizeContext::Convergence => "convergence",
            StepsizeContext::HittingTime => "hitting_time",
            StepsizeContext::MatrixIdentical => "matrix_identical",
            StepsizeContext::MatrixPerturbed => "matrix_perturbed",
            StepsizeContext::PairBelowTarget => "pair_below_target",
            StepsizeContext::PairAboveTarget => "pair_above_target",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.name() == s)
    }
}

/// Upper limit on η for the given context. `value` is λ or ‖Ŵ‖ as documented on the context.
pub fn stepsize_bound(context: StepsizeContext, value: f64, alpha: f64, n: u32) -> f64 {
    let nf = n as f64;
    let root = value.abs().powf(1.0 / nf);
    let m = alpha.max(root);
    let e = 2 * n as i32 - 2;
    match context {
        StepsizeContext::Convergence => {
            if n == 1 {
                1.0
            } else if value > 0.0 {
                1.0 / (nf * m.powi(e))
            } else if alpha >= root {
                alpha.powi(-e)
            } else {
                1.0 / ((3.0 * nf - 2.0) * value.abs().powf(2.0 - 2.0 / nf))
            }
        }
        StepsizeContext::HittingTime => {
            if value >= 0.0 {
                1.0 / (2.0 * nf * m.powi(e))
            } else {
                1.0 / ((3.0 * nf - 2.0) * m.powi(e))
            }
        }
        StepsizeContext::MatrixIdentical => 1.0 / ((3.0 * nf - 2.0) * m.powi(e)),
        StepsizeContext::MatrixPerturbed => 1.0 / (9.0 * nf * (c_root(n) * m).powi(e)),
        StepsizeContext::PairBelowTarget => {
            let cm = (c_root(n) * m).powi(e);
            ((2f64.powf(1.0 / nf) - 1.0) / (2.0 * cm)).min(1.0 / (8.0 * nf * cm))
        }
        StepsizeContext::PairAboveTarget => {
            let a = alpha.powi(e);
            ((1.0 - 2f64.powf(-1.0 / nf)) / (2.0 * a)).min(1.0 / (9.0 * nf * a))
        }
    }
}

/// Step size above which the iteration leaves (λ > 0) or blows up (N = 1, λ < 0).
pub fn divergence_threshold(lambda: f64, alpha: f64, n: u32) -> Result<f64, TheoryError> {
    let nf = n as f64;
    if n == 1 {
        return Ok(2.0);
    }
    if lambda > 0.0 {
        return Ok(2.0 / (nf * lambda.powf(2.0 - 2.0 / nf)));
    }
    if lambda < 0.0 {
        let root = lambda.abs().powf(1.0 / nf);
        return Ok((1.0 + 2f64.powf(1.0 / nf)) * alpha.max(root) / alpha.min(root).powi(2 * n as i32 - 1));
    }
    Err(TheoryError::Domain("no threshold stated for N >= 2 and lambda = 0".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitRegime {
    Identical,
    Perturbed,
}

/// Bound on |W_ii(k) − λᵢ| (identical: against λ₊) once the hitting time has passed.
pub fn error_bound(lambda: f64, epsilon: f64, alpha: f64, n: u32, regime: InitRegime) -> f64 {
    let nf = n as f64;
    let an = alpha.powi(n as i32);
    match regime {
        InitRegime::Identical => {
            if lambda > 0.0 {
                epsilon * nf * lambda.powf(1.0 - 1.0 / nf)
            } else {
                epsilon.powi(n as i32)
            }
        }
        InitRegime::Perturbed => {
            if lambda.abs() >= an {
                epsilon * nf * lambda.abs().powf(1.0 - 1.0 / nf)
            } else if lambda >= 0.0 {
                an
            } else {
                2.0 * an
            }
        }
    }
}

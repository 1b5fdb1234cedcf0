//! Iteration-count predictions for the scalar recursions.

use serde::{Deserialize, Serialize};

use super::bounds::{error_bound, stepsize_bound, InitRegime, StepsizeContext};
use super::constants::{a_n, b_n, c_n, c_root};
use super::potentials::{t_minus, t_plus};
use super::TheoryError;

/// Which branch of the piecewise T_Id formula applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdCase {
    /// λ < 0: decay towards zero.
    Negative,
    /// 0 ≤ λ < α^N: decreasing approach from above.
    BelowInit,
    /// c_N λ < α^N ≤ λ: α already past the inflection point.
    NearInit,
    /// c_N λ ≥ α^N with a fine ε: slow phase plus linear contraction.
    TwoPhase,
    /// c_N λ ≥ α^N with a coarse ε.
    Coarse,
}

impl IdCase {
    pub fn select(lambda: f64, epsilon: f64, alpha: f64, n: u32) -> IdCase {
        let nf = n as f64;
        let an = alpha.powi(n as i32);
        let c = c_n(n);
        if lambda < 0.0 {
            IdCase::Negative
        } else if lambda < an {
            IdCase::BelowInit
        } else if c * lambda < an {
            IdCase::NearInit
        } else if epsilon < (1.0 - c.powf(1.0 / nf)) * lambda.powf(1.0 / nf) {
            IdCase::TwoPhase
        } else {
            IdCase::Coarse
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionBundle {
    pub lambda: f64,
    pub epsilon: f64,
    pub alpha: f64,
    pub beta: Option<f64>,
    pub eta: f64,
    pub depth: u32,
    #[serde(rename = "M")]
    pub m: f64,
    pub t_id: Option<f64>,
    /// T_Id with the s_N term dropped.
    pub t_id_without_s: Option<f64>,
    pub t_id_lower: Option<f64>,
    pub t_perturbed: Option<f64>,
    pub s_n: Option<u64>,
    pub error_bound: f64,
    pub case_tag: Option<IdCase>,
    /// Inflection point (c_N λ)^{1/N}, for λ > 0.
    pub zeta: Option<f64>,
    /// Preconditions that fail for these parameters; empty when the prediction is valid.
    pub violations: Vec<String>,
}

/// s_N = ⌈c_N^{1−1/N}(λ^{1/N}/α)^{N−1}⌉.
pub fn s_n(lambda: f64, alpha: f64, n: u32) -> u64 {
    let nf = n as f64;
    (c_n(n).powf(1.0 - 1.0 / nf) * (lambda.powf(1.0 / nf) / alpha).powi(n as i32 - 1)).ceil() as u64
}

/// Value of the T_Id formula without precondition checks; returns (value, value without s_N, case, s_N).
pub fn t_identical_value(
    lambda: f64,
    epsilon: f64,
    alpha: f64,
    eta: f64,
    n: u32,
) -> Result<(f64, f64, IdCase, Option<u64>), TheoryError> {
    if n < 2 {
        return Err(TheoryError::Precondition("T_Id needs N >= 2".into()));
    }
    let nf = n as f64;
    let case = IdCase::select(lambda, epsilon, alpha, n);
    let c = c_n(n);
    let slow_rate = || (1.0 - eta * nf * (c * lambda).powf(2.0 - 2.0 / nf)).ln().abs();
    let out = match case {
        IdCase::Negative => {
            let v = t_minus(epsilon, alpha, n)? / (eta * lambda.abs());
            (v, v, None)
        }
        IdCase::BelowInit => {
            let v = t_plus(lambda, lambda.powf(1.0 / nf) + epsilon, alpha, n)? / eta;
            (v, v, None)
        }
        IdCase::NearInit => {
            let gap = lambda.powf(1.0 / nf) - alpha;
            // λ = α^N: already at the fixed point
            let v = if gap <= 0.0 { 0.0 } else { (gap / epsilon).ln() / slow_rate() };
            (v, v, None)
        }
        IdCase::TwoPhase => {
            let s = s_n(lambda, alpha, n);
            let zeta = (c * lambda).powf(1.0 / nf);
            let v = t_plus(lambda, zeta, alpha, n)? / eta
                + ((lambda.powf(1.0 / nf) / epsilon).ln() - a_n(n)) / slow_rate();
            (v + s as f64, v, Some(s))
        }
        IdCase::Coarse => {
            let s = s_n(lambda, alpha, n);
            let mu = lambda.powf(1.0 / nf) - epsilon;
            // an ε this coarse is met at k = 0; only s_N remains
            let v = if mu <= alpha { 0.0 } else { t_plus(lambda, mu, alpha, n)? / eta };
            (v + s as f64, v, Some(s))
        }
    };
    Ok((out.0, out.1, case, out.2))
}

/// Lower bound on the hitting time for λ > α^N, without precondition checks.
pub fn t_identical_lower_value(lambda: f64, epsilon: f64, alpha: f64, eta: f64, n: u32) -> Result<f64, TheoryError> {
    let nf = n as f64;
    let an = alpha.powi(n as i32);
    if !(lambda > an) {
        return Err(TheoryError::Precondition(format!(
            "lower bound undefined: lambda = {lambda} <= alpha^N = {an}"
        )));
    }
    let c = c_n(n);
    let r = lambda.powf(1.0 / nf);
    if an < c * lambda {
        let rate = (1.0 - eta * nf * lambda.powf(2.0 - 2.0 / nf)).ln().abs();
        Ok(t_plus(lambda, (c * lambda).powf(1.0 / nf), alpha, n)? / eta + ((r / epsilon).ln() - b_n(n)) / rate)
    } else {
        let rate = (1.0 - eta * nf * (c * lambda).powf(2.0 - 2.0 / nf)).ln().abs();
        Ok(((r - alpha) / epsilon).ln() / rate)
    }
}

fn identical_violations(lambda: f64, epsilon: f64, alpha: f64, eta: f64, n: u32) -> Vec<String> {
    let mut v = Vec::new();
    if n < 2 {
        v.push(format!("depth N = {n} must be at least 2"));
    }
    if !(alpha > 0.0) {
        v.push(format!("alpha = {alpha} must be positive"));
    }
    let target = lambda.max(0.0).powf(1.0 / n as f64);
    let width = (alpha - target).abs();
    if !(epsilon > 0.0 && epsilon < width) {
        v.push(format!("epsilon = {epsilon} must lie in (0, |alpha - lambda_+^(1/N)|) = (0, {width})"));
    }
    let bound = stepsize_bound(StepsizeContext::HittingTime, lambda, alpha, n);
    if !(eta > 0.0 && eta < bound) {
        v.push(format!("eta = {eta} must lie in (0, {bound}) (hitting-time step-size condition)"));
    }
    v
}

fn scalar_m(lambda: f64, alpha: f64, n: u32) -> f64 {
    alpha.max(lambda.abs().powf(1.0 / n as f64))
}

/// T_Id bundle; violations are listed rather than rejected.
pub fn evaluate_identical(lambda: f64, epsilon: f64, alpha: f64, eta: f64, n: u32) -> Result<PredictionBundle, TheoryError> {
    let violations = identical_violations(lambda, epsilon, alpha, eta, n);
    let (t_id, t_id_without_s, case, s) = t_identical_value(lambda, epsilon, alpha, eta, n)?;
    let lower = if lambda > alpha.powi(n as i32) {
        Some(t_identical_lower_value(lambda, epsilon, alpha, eta, n)?)
    } else {
        None
    };
    Ok(PredictionBundle {
        lambda,
        epsilon,
        alpha,
        beta: None,
        eta,
        depth: n,
        m: scalar_m(lambda, alpha, n),
        t_id: Some(t_id),
        t_id_without_s: Some(t_id_without_s),
        t_id_lower: lower,
        t_perturbed: None,
        s_n: s,
        error_bound: error_bound(lambda, epsilon, alpha, n, InitRegime::Identical),
        case_tag: Some(case),
        zeta: (lambda > 0.0).then(|| (c_n(n) * lambda).powf(1.0 / n as f64)),
        violations,
    })
}

/// Upper bound on the hitting time of the identical-init scalar iteration.
pub fn t_identical(lambda: f64, epsilon: f64, alpha: f64, eta: f64, n: u32) -> Result<PredictionBundle, TheoryError> {
    let v = identical_violations(lambda, epsilon, alpha, eta, n);
    if !v.is_empty() {
        return Err(TheoryError::Precondition(v.join("; ")));
    }
    evaluate_identical(lambda, epsilon, alpha, eta, n)
}

pub fn t_identical_lower(lambda: f64, epsilon: f64, alpha: f64, eta: f64, n: u32) -> Result<f64, TheoryError> {
    let v = identical_violations(lambda, epsilon, alpha, eta, n);
    if !v.is_empty() {
        return Err(TheoryError::Precondition(v.join("; ")));
    }
    t_identical_lower_value(lambda, epsilon, alpha, eta, n)
}

/// Time spent before d₁ turns negative, added to the restarted T_Id for λ ≤ −α^N.
pub fn sign_flip_time(lambda: f64, alpha: f64, beta: f64, eta: f64, n: u32) -> f64 {
    let nf = n as f64;
    let c = c_root(n);
    let r = lambda.abs().powf(1.0 / nf);
    let lead = (9.0 * nf - 2.0 * (c - 1.0)) / (9.0 * nf) * beta * r;
    alpha / (eta * lead.powi(n as i32 - 1) * (r - beta / (c - 1.0)))
}

fn perturbed_violations(lambda: f64, epsilon: f64, alpha: f64, beta: f64, eta: f64, n: u32) -> Vec<String> {
    let mut v = Vec::new();
    if n < 2 {
        v.push(format!("depth N = {n} must be at least 2"));
        return v;
    }
    if !(beta > 0.0 && beta < alpha) {
        v.push(format!("beta = {beta} must lie in (0, alpha = {alpha})"));
    }
    let c = c_root(n);
    if !(beta / (c - 1.0) < alpha) {
        v.push(format!("beta/(c-1) = {} must be below alpha = {alpha}", beta / (c - 1.0)));
    }
    let bound = stepsize_bound(StepsizeContext::MatrixPerturbed, lambda, alpha, n);
    if !(eta > 0.0 && eta < bound) {
        v.push(format!("eta = {eta} must lie in (0, {bound}) (perturbed step-size condition)"));
    }
    let an = alpha.powi(n as i32);
    if lambda.abs() >= an {
        let init = if lambda >= 0.0 { alpha } else { beta };
        let width = (init - lambda.abs().powf(1.0 / n as f64)).abs();
        if !(epsilon > 0.0 && epsilon < width) {
            v.push(format!("epsilon = {epsilon} must lie in (0, {width})"));
        }
    }
    v
}

/// T_P bundle with violations listed rather than rejected.
pub fn evaluate_perturbed(
    lambda: f64,
    epsilon: f64,
    alpha: f64,
    beta: f64,
    eta: f64,
    n: u32,
) -> Result<PredictionBundle, TheoryError> {
    let violations = perturbed_violations(lambda, epsilon, alpha, beta, eta, n);
    if n < 2 {
        return Err(TheoryError::Precondition(violations.join("; ")));
    }
    let an = alpha.powi(n as i32);
    let mut bundle = PredictionBundle {
        lambda,
        epsilon,
        alpha,
        beta: Some(beta),
        eta,
        depth: n,
        m: scalar_m(lambda, alpha, n),
        t_id: None,
        t_id_without_s: None,
        t_id_lower: None,
        t_perturbed: None,
        s_n: None,
        error_bound: error_bound(lambda, epsilon, alpha, n, InitRegime::Perturbed),
        case_tag: None,
        zeta: (lambda != 0.0).then(|| (c_n(n) * lambda.abs()).powf(1.0 / n as f64)),
        violations,
    };
    if lambda >= an {
        let (t, t_without_s, case, s) = t_identical_value(lambda, epsilon, alpha, eta, n)?;
        bundle.t_id = Some(t);
        bundle.t_id_without_s = Some(t_without_s);
        bundle.case_tag = Some(case);
        bundle.s_n = s;
        bundle.t_perturbed = Some(t);
    } else if lambda <= -an {
        let (t, t_without_s, case, s) = t_identical_value(lambda.abs(), epsilon, beta, eta, n)?;
        let flip = sign_flip_time(lambda, alpha, beta, eta, n);
        bundle.t_id = Some(t);
        bundle.t_id_without_s = Some(t_without_s);
        bundle.case_tag = Some(case);
        bundle.s_n = s;
        bundle.t_perturbed = Some(t + flip);
    }
    Ok(bundle)
}

/// Upper bound on the iterations for the perturbed pair to reach the perturbed error bound.
pub fn t_perturbed(lambda: f64, epsilon: f64, alpha: f64, beta: f64, eta: f64, n: u32) -> Result<PredictionBundle, TheoryError> {
    let v = perturbed_violations(lambda, epsilon, alpha, beta, eta, n);
    if !v.is_empty() {
        return Err(TheoryError::Precondition(v.join("; ")));
    }
    evaluate_perturbed(lambda, epsilon, alpha, beta, eta, n)
}

use serde::{Deserialize, Serialize};

use super::constants::big_c_n;
use super::TheoryError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeApproximation {
    pub value: f64,
    /// Upper bound on |value − exact|.
    pub g_envelope: f64,
}

/// Small-α expansion of (1/η)T⁺(λ_k, (c_N λ_k)^{1/N}, α) with η = κ/(Nλ₁^{2−2/N}).
pub fn approx_t_plus(lambda_k: f64, lambda_1: f64, alpha: f64, kappa: f64, n: u32) -> Result<TimeApproximation, TheoryError> {
    if n < 3 {
        return Err(TheoryError::Domain("the small-alpha expansion requires N >= 3".into()));
    }
    let nf = n as f64;
    let mut bad = Vec::new();
    if !(lambda_k > 0.0 && lambda_k <= lambda_1) {
        bad.push(format!("need 0 < lambda_k = {lambda_k} <= lambda_1 = {lambda_1}"));
    }
    if !(alpha > 0.0 && alpha.powi(n as i32) < lambda_k) {
        bad.push(format!("need 0 < alpha^N < lambda_k (alpha = {alpha})"));
    }
    if !(kappa > 0.0 && kappa < 1.0 / 3.0) {
        bad.push(format!("kappa = {kappa} must lie in (0, 1/3)"));
    }
    if !bad.is_empty() {
        return Err(TheoryError::Precondition(bad.join("; ")));
    }
    let scale = (lambda_1 / lambda_k).powf(2.0 - 2.0 / nf) / kappa;
    let xi = alpha / lambda_k.powf(1.0 / nf);
    let value = scale * (nf * xi.powi(-(n as i32 - 2)) / (nf - 2.0) + big_c_n(n) - nf / 2.0 * xi * xi);
    let g_envelope = scale * nf * xi.powi(3) / (3.0 * (1.0 - xi).powi(3));
    Ok(TimeApproximation { value, g_envelope })
}

/// Step size matching κ in `approx_t_plus`.
pub fn eta_from_kappa(kappa: f64, lambda_1: f64, n: u32) -> f64 {
    let nf = n as f64;
    kappa / (nf * lambda_1.powf(2.0 - 2.0 / nf))
}

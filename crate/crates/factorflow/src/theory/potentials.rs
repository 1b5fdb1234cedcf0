//! Antiderivatives of the scalar gradient flow y′ = −y^{N−1}(y^N − λ).
//!
//! The flow time between two values is a difference of potentials: T⁻ for the
//! λ-independent decay towards zero and T⁺ for approach to λ^{1/N} > 0.

use std::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;

use super::TheoryError;

/// Σ_{ℓ=1..N} Re(e^{4πiℓ/N} ln(e^{2πiℓ/N} − x)) with the principal logarithm.
pub fn root_log_sum(x: f64, n: u32) -> f64 {
    let nf = n as f64;
    (1..=n)
        .map(|l| {
            let theta = 2.0 * PI * l as f64 / nf;
            let root = Complex64::from_polar(1.0, theta);
            let weight = Complex64::from_polar(1.0, 2.0 * theta);
            (weight * (root - x).ln()).re
        })
        .sum()
}

/// −ln μ for N = 2, μ^{−(N−2)}/(N−2) for N ≥ 3.
pub fn u_minus(mu: f64, n: u32) -> Result<f64, TheoryError> {
    if !(mu > 0.0) {
        return Err(TheoryError::Domain(format!("u_minus needs mu > 0, got {mu}")));
    }
    match n {
        0 | 1 => Err(TheoryError::Domain("u_minus needs N >= 2".into())),
        2 => Ok(-mu.ln()),
        _ => Ok(mu.powi(-(n as i32 - 2)) / (n as f64 - 2.0)),
    }
}

pub fn u_plus(lambda: f64, mu: f64, n: u32) -> Result<f64, TheoryError> {
    if !(lambda > 0.0) || !(mu > 0.0) {
        return Err(TheoryError::Domain(format!("u_plus needs lambda > 0 and mu > 0 (lambda={lambda}, mu={mu})")));
    }
    match n {
        0 | 1 => Err(TheoryError::Domain("u_plus needs N >= 2".into())),
        2 => {
            let arg = lambda / (mu * mu) - 1.0;
            if arg <= 0.0 {
                return Err(TheoryError::Domain(format!(
                    "outside convergent branch: mu^2 = {} >= lambda = {lambda}",
                    mu * mu
                )));
            }
            Ok(-arg.ln() / (2.0 * lambda))
        }
        _ => {
            let nf = n as f64;
            let r = lambda.powf(1.0 / nf);
            if mu == r {
                return Err(TheoryError::Domain("u_plus is singular at mu = lambda^(1/N)".into()));
            }
            Ok(-lambda.powf(2.0 / nf - 2.0) / nf * root_log_sum(mu / r, n)
                - 1.0 / (lambda * (nf - 2.0) * mu.powi(n as i32 - 2)))
        }
    }
}

/// U⁻(μ) − U⁻(α).
pub fn t_minus(mu: f64, alpha: f64, n: u32) -> Result<f64, TheoryError> {
    Ok(u_minus(mu, n)? - u_minus(alpha, n)?)
}

/// U⁺(λ, μ) − U⁺(λ, α): the flow time from α to μ.
///
/// Also covers μ, α on the far side of λ^{1/N} for N = 2, and λ = 0 as a limit.
pub fn t_plus(lambda: f64, mu: f64, alpha: f64, n: u32) -> Result<f64, TheoryError> {
    if n < 2 {
        return Err(TheoryError::Domain("t_plus needs N >= 2".into()));
    }
    if !(mu > 0.0) || !(alpha > 0.0) {
        return Err(TheoryError::Domain(format!("t_plus needs positive arguments (mu={mu}, alpha={alpha})")));
    }
    if lambda == 0.0 {
        let p = 2 * n as i32 - 2;
        return Ok((mu.powi(-p) - alpha.powi(-p)) / p as f64);
    }
    if lambda < 0.0 {
        return Err(TheoryError::Domain(format!("t_plus needs lambda >= 0, got {lambda}")));
    }
    if n == 2 {
        let num = lambda / (alpha * alpha) - 1.0;
        let den = lambda / (mu * mu) - 1.0;
        if num == 0.0 || den == 0.0 || num.signum() != den.signum() {
            return Err(TheoryError::Domain(format!(
                "mu={mu} and alpha={alpha} are not on the same side of sqrt(lambda)"
            )));
        }
        return Ok((num / den).ln() / (2.0 * lambda));
    }
    let r = lambda.powf(1.0 / n as f64);
    if (mu - r).signum() != (alpha - r).signum() && alpha != r {
        return Err(TheoryError::Domain(format!(
            "mu={mu} and alpha={alpha} are not on the same side of lambda^(1/N)"
        )));
    }
    Ok(u_plus(lambda, mu, n)? - u_plus(lambda, alpha, n)?)
}

/// Real-arithmetic flow time from α to μ for N ≥ 3, pairing conjugate roots of unity.
pub fn u_plus_real(lambda: f64, mu: f64, alpha: f64, n: u32) -> Result<f64, TheoryError> {
    if n < 3 {
        return Err(TheoryError::Domain("real form needs N >= 3".into()));
    }
    if !(lambda > 0.0) {
        return Err(TheoryError::Domain(format!("real form needs lambda > 0, got {lambda}")));
    }
    let nf = n as f64;
    let r = lambda.powf(1.0 / nf);
    for (name, v) in [("mu", mu), ("alpha", alpha)] {
        if !(v > 0.0 && v < r) {
            return Err(TheoryError::Domain(format!("{name}={v} must lie in (0, lambda^(1/N)) = (0, {r})")));
        }
    }
    let potential = |y: f64| -> f64 {
        let x = y / r;
        let mut sum = (1.0 - x).ln();
        if n.is_multiple_of(2) {
            sum += (1.0 + x).ln();
        }
        for l in 1..n.div_ceil(2) {
            let theta = 2.0 * PI * l as f64 / nf;
            let (s, c) = theta.sin_cos();
            let (s2, c2) = (2.0 * theta).sin_cos();
            let log_mod = 0.5 * (1.0 - 2.0 * x * c + x * x).ln();
            let arg = FRAC_PI_2 + ((x - c) / s).atan();
            sum += 2.0 * (c2 * log_mod - s2 * arg);
        }
        -lambda.powf(2.0 / nf - 2.0) / nf * sum - 1.0 / (lambda * (nf - 2.0) * y.powi(n as i32 - 2))
    };
    Ok(potential(mu) - potential(alpha))
}

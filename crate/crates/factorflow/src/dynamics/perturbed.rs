use serde::{Deserialize, Serialize};

use super::scalar::{scalar_step, DIVERGENCE_GUARD};
use super::DynamicsError;
use crate::theory::{error_bound, InitRegime};

/// The coupled scalars of the perturbed initialization, with derived quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbedPair {
    pub d1: f64,
    pub d2: f64,
    /// d₂ − d₁
    pub delta1: f64,
    /// d₂² − d₁²
    pub delta2: f64,
    /// d₂^{N−2}(d₁d₂^{N−1} − λ)
    pub kappa: f64,
    /// d₁d₂^{N−1}
    pub product: f64,
}

impl PerturbedPair {
    pub fn new(d1: f64, d2: f64, lambda: f64, n: u32) -> Self {
        let product = d1 * d2.powi(n as i32 - 1);
        PerturbedPair {
            d1,
            d2,
            delta1: d2 - d1,
            delta2: (d2 - d1) * (d2 + d1),
            kappa: d2.powi(n as i32 - 2) * (product - lambda),
            product,
        }
    }
}

/// Both updates evaluated at step k, then applied.
pub fn perturbed_step(pair: &PerturbedPair, lambda: f64, eta: f64, n: u32) -> PerturbedPair {
    let residual = pair.product - lambda;
    let d1 = pair.d1 - eta * pair.d2.powi(n as i32 - 1) * residual;
    let d2 = pair.d2 - eta * pair.d1 * pair.d2.powi(n as i32 - 2) * residual;
    PerturbedPair::new(d1, d2, lambda, n)
}

/// Identical-init comparison sequences started at α−β and α.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AuxSequences {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub p_a: Vec<f64>,
    pub p_b: Vec<f64>,
}

impl AuxSequences {
    fn push(&mut self, a: f64, b: f64, n: u32) {
        self.a.push(a);
        self.b.push(b);
        self.p_a.push(a.powi(n as i32));
        self.p_b.push(b.powi(n as i32));
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbedRun {
    pub lambda: f64,
    pub alpha: f64,
    pub beta: f64,
    pub eta: f64,
    pub depth: u32,
    pub pairs: Vec<PerturbedPair>,
    pub aux: AuxSequences,
    /// First k with d₁(k) < 0.
    pub k0: Option<usize>,
    /// First k with |p(k) − λ| within the perturbed error bound.
    pub hit_index: Option<usize>,
    pub tolerance: f64,
    pub diverged: bool,
}

fn check_pair_args(alpha: f64, beta: f64, n: u32) -> Result<(), DynamicsError> {
    if n < 2 {
        return Err(DynamicsError::Invalid(format!("perturbed dynamics need N >= 2, got {n}")));
    }
    if !(beta > 0.0 && beta < alpha) {
        return Err(DynamicsError::Invalid(format!("need 0 < beta < alpha (alpha={alpha}, beta={beta})")));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn simulate(
    lambda: f64,
    alpha: f64,
    beta: f64,
    eta: f64,
    n: u32,
    tolerance: f64,
    steps: usize,
    stop_at_hit: bool,
) -> PerturbedRun {
    let mut pair = PerturbedPair::new(alpha - beta, alpha, lambda, n);
    let (mut a, mut b) = (alpha - beta, alpha);
    let mut run = PerturbedRun {
        lambda,
        alpha,
        beta,
        eta,
        depth: n,
        pairs: vec![pair],
        aux: AuxSequences::default(),
        k0: None,
        hit_index: None,
        tolerance,
        diverged: false,
    };
    run.aux.push(a, b, n);
    for k in 0..=steps {
        if run.k0.is_none() && pair.d1 < 0.0 {
            run.k0 = Some(k);
        }
        if run.hit_index.is_none() && (pair.product - lambda).abs() <= tolerance {
            run.hit_index = Some(k);
            if stop_at_hit {
                break;
            }
        }
        if !pair.d1.is_finite() || pair.d1.abs().max(pair.d2.abs()) > DIVERGENCE_GUARD {
            run.diverged = true;
            break;
        }
        if k == steps {
            break;
        }
        pair = perturbed_step(&pair, lambda, eta, n);
        a = scalar_step(a, lambda, eta, n);
        b = scalar_step(b, lambda, eta, n);
        run.pairs.push(pair);
        run.aux.push(a, b, n);
    }
    run
}

/// Run from (α−β, α) until |p − λ| is within the perturbed error bound or `cap` steps.
pub fn run_perturbed(
    lambda: f64,
    alpha: f64,
    beta: f64,
    eta: f64,
    n: u32,
    epsilon: f64,
    cap: usize,
) -> Result<PerturbedRun, DynamicsError> {
    check_pair_args(alpha, beta, n)?;
    let tol = error_bound(lambda, epsilon, alpha, n, InitRegime::Perturbed);
    Ok(simulate(lambda, alpha, beta, eta, n, tol, cap, true))
}

/// Exactly `steps` steps (unless diverged), recording the first hit of the error bound.
pub fn perturbed_path(
    lambda: f64,
    alpha: f64,
    beta: f64,
    eta: f64,
    n: u32,
    epsilon: f64,
    steps: usize,
) -> Result<PerturbedRun, DynamicsError> {
    check_pair_args(alpha, beta, n)?;
    let tol = error_bound(lambda, epsilon, alpha, n, InitRegime::Perturbed);
    Ok(simulate(lambda, alpha, beta, eta, n, tol, steps, false))
}

/// Largest relative violation of the Δ₁, Δ₂ recursions along a run.
pub fn recursion_defect(run: &PerturbedRun) -> (f64, f64) {
    let rel = |x: f64, y: f64| {
        let scale = x.abs().max(y.abs());
        if scale == 0.0 {
            0.0
        } else {
            (x - y).abs() / scale
        }
    };
    let mut worst = (0.0f64, 0.0f64);
    for w in run.pairs.windows(2) {
        let (p, q) = (&w[0], &w[1]);
        let ek = run.eta * p.kappa;
        worst.0 = worst.0.max(rel(q.delta1, (1.0 + ek) * p.delta1));
        worst.1 = worst.1.max(rel(q.delta2, (1.0 - ek * ek) * p.delta2));
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn balanced_fixed_point() {
        let r = 8f64.powf(1.0 / 3.0);
        let p = PerturbedPair::new(r, r, 8.0, 3);
        let q = perturbed_step(&p, 8.0, 0.01, 3);
        assert_eq!((q.d1, q.d2), (p.d1, p.d2));
    }

    #[test]
    fn delta_recursions() {
        let run = perturbed_path(-5.0, 0.1, 0.05, 1e-3, 3, 0.01, 20_000).unwrap();
        let (d1, d2) = recursion_defect(&run);
        assert!(d1 <= 1e-12 && d2 <= 1e-12, "{d1} {d2}");
    }

    #[test]
    fn negative_target_flips_sign() {
        let run = perturbed_path(-5.0, 0.1, 0.05, 1e-3, 3, 0.01, 60_000).unwrap();
        let k0 = run.k0.expect("phase transition");
        assert!(run.pairs[k0..].iter().all(|p| p.d1 < 0.0));
        let last = run.pairs.last().unwrap();
        assert!((last.product + 5.0).abs() < 1e-6, "{}", last.product);
    }

    #[test]
    fn zero_target_decreases() {
        let run = perturbed_path(0.0, 0.5, 0.1, 0.05, 2, 0.01, 3000).unwrap();
        let ps: Vec<f64> = run.pairs.iter().map(|p| p.product).collect();
        assert!(ps.windows(2).all(|w| w[1] <= w[0] && w[1] >= 0.0));
        assert!(*ps.last().unwrap() < 0.05);
    }

    #[test]
    fn rejects_bad_beta() {
        assert!(run_perturbed(1.0, 0.1, 0.2, 1e-3, 2, 0.01, 10).is_err());
    }
}

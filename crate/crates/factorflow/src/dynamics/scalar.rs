use serde::{Deserialize, Serialize};

/// |d| above this counts as divergence.
pub const DIVERGENCE_GUARD: f64 = 1e9;
pub const DEFAULT_SCALAR_CAP: usize = 10_000_000;

/// d − η d^{N−1}(d^N − λ).
pub fn scalar_step(d: f64, lambda: f64, eta: f64, n: u32) -> f64 {
    d - eta * d.powi(n as i32 - 1) * (d.powi(n as i32) - lambda)
}

/// λ₊^{1/N}, the limit of the identical-init iteration for N ≥ 2.
pub fn positive_root(lambda: f64, n: u32) -> f64 {
    lambda.max(0.0).powf(1.0 / n as f64)
}

/// Limit of d(k) for admissible η: λ itself when N = 1, else λ₊^{1/N}.
pub fn scalar_limit(lambda: f64, n: u32) -> f64 {
    if n == 1 {
        lambda
    } else {
        positive_root(lambda, n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalarTrajectory {
    pub lambda: f64,
    pub alpha: f64,
    pub eta: f64,
    pub depth: u32,
    pub values: Vec<f64>,
    pub hit_index: Option<usize>,
    pub diverged: bool,
}

impl ScalarTrajectory {
    /// |d(k)^N − λ₊| along the trajectory.
    pub fn errors(&self) -> impl Iterator<Item = f64> + '_ {
        let target = if self.depth == 1 { self.lambda } else { self.lambda.max(0.0) };
        self.values.iter().map(move |d| (d.powi(self.depth as i32) - target).abs())
    }
}

/// Iterate until |d − λ₊^{1/N}| ≤ ε, `cap` steps, or divergence.
pub fn run_scalar(lambda: f64, alpha: f64, eta: f64, n: u32, epsilon: f64, cap: usize) -> ScalarTrajectory {
    run_scalar_guarded(lambda, alpha, eta, n, epsilon, cap, DIVERGENCE_GUARD)
}

pub fn run_scalar_guarded(
    lambda: f64,
    alpha: f64,
    eta: f64,
    n: u32,
    epsilon: f64,
    cap: usize,
    guard: f64,
) -> ScalarTrajectory {
    let target = scalar_limit(lambda, n);
    let mut values = vec![alpha];
    let mut d = alpha;
    let mut hit_index = None;
    let mut diverged = false;
    for k in 0..=cap {
        if (d - target).abs() <= epsilon {
            hit_index = Some(k);
            break;
        }
        if !d.is_finite() || d.abs() > guard {
            diverged = true;
            break;
        }
        if k == cap {
            break;
        }
        d = scalar_step(d, lambda, eta, n);
        values.push(d);
    }
    ScalarTrajectory { lambda, alpha, eta, depth: n, values, hit_index, diverged }
}

/// Fixed number of steps, stopping early only on divergence.
pub fn scalar_path(lambda: f64, alpha: f64, eta: f64, n: u32, steps: usize) -> ScalarTrajectory {
    let mut values = Vec::with_capacity(steps + 1);
    let mut d = alpha;
    values.push(d);
    let mut diverged = false;
    for _ in 0..steps {
        d = scalar_step(d, lambda, eta, n);
        values.push(d);
        if !d.is_finite() || d.abs() > DIVERGENCE_GUARD {
            diverged = true;
            break;
        }
    }
    ScalarTrajectory { lambda, alpha, eta, depth: n, values, hit_index: None, diverged }
}

/// One step of N independent scalar factors d_j with product target λ (scaled-identity inits).
pub fn factor_scalars_step(d: &[f64], lambda: f64, eta: f64) -> Vec<f64> {
    let residual = d.iter().product::<f64>() - lambda;
    (0..d.len())
        .map(|j| {
            let others: f64 = d.iter().enumerate().filter(|(l, _)| *l != j).map(|(_, v)| v).product();
            d[j] - eta * others * residual
        })
        .collect()
}

/// True if the guard was crossed, or |d| grew at every one of the last 100 steps while far from the target scale.
pub fn detect_divergence(traj: &ScalarTrajectory) -> bool {
    if traj.diverged || traj.values.iter().any(|d| !d.is_finite() || d.abs() > DIVERGENCE_GUARD) {
        return true;
    }
    let v = &traj.values;
    if v.len() < 101 {
        return false;
    }
    let scale = 10.0 * traj.alpha.max(traj.lambda.abs().powf(1.0 / traj.depth as f64));
    v[v.len() - 101..]
        .windows(2)
        .all(|w| w[1].abs() >= (1.0 + 1e-9) * w[0].abs() && w[0].abs() > scale)
}

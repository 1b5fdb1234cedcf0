use serde::{Deserialize, Serialize};

use super::DynamicsError;
use crate::harness::rng::Prng;
use crate::spectral::{Matrix, SymmetricMatrix};

pub const DEFAULT_MATRIX_CAP: usize = 100_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InitKind {
    /// Every factor starts at αI.
    Identical { alpha: f64 },
    /// W₁ = (α−β)I, the rest αI.
    Perturbed { alpha: f64, beta: f64 },
    /// W_j = α_j I with α_j ~ N(0, α²).
    RandomScaledIdentity { alpha: f64, seed: u64 },
    /// Independent N(0, σ²) entries.
    GaussianDense { sigma: f64, seed: u64 },
}

impl InitKind {
    pub fn factors(&self, dim: usize, depth: u32) -> Vec<Matrix> {
        let depth = depth as usize;
        match *self {
            InitKind::Identical { alpha } => vec![Matrix::scaled_identity(dim, alpha); depth],
            InitKind::Perturbed { alpha, beta } => {
                let mut f = vec![Matrix::scaled_identity(dim, alpha); depth];
                f[0] = Matrix::scaled_identity(dim, alpha - beta);
                f
            }
            InitKind::RandomScaledIdentity { alpha, seed } => {
                let mut rng = Prng::new(seed);
                (0..depth).map(|_| Matrix::scaled_identity(dim, alpha * rng.gaussian())).collect()
            }
            InitKind::GaussianDense { sigma, seed } => {
                let mut rng = Prng::new(seed);
                (0..depth).map(|_| rng.gaussian_matrix(dim, dim, sigma)).collect()
            }
        }
    }

    /// Per-factor scalar multiples of I, when the init has that form.
    pub fn scalar_factors(&self, depth: u32) -> Option<Vec<f64>> {
        let d = depth as usize;
        match *self {
            InitKind::Identical { alpha } => Some(vec![alpha; d]),
            InitKind::Perturbed { alpha, beta } => {
                let mut v = vec![alpha; d];
                v[0] = alpha - beta;
                Some(v)
            }
            InitKind::RandomScaledIdentity { alpha, seed } => {
                let mut rng = Prng::new(seed);
                Some((0..d).map(|_| alpha * rng.gaussian()).collect())
            }
            InitKind::GaussianDense { .. } => None,
        }
    }
}

/// N factor matrices; `factors[0]` is W₁ and the product is W_N⋯W₁.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FactorState {
    pub depth: u32,
    pub factors: Vec<Matrix>,
    pub eta: f64,
    pub iteration: u64,
    pub init: InitKind,
}

impl FactorState {
    pub fn new(dim: usize, depth: u32, eta: f64, init: InitKind) -> Result<Self, DynamicsError> {
        if depth < 1 {
            return Err(DynamicsError::Invalid("depth must be at least 1".into()));
        }
        Ok(FactorState { depth, factors: init.factors(dim, depth), eta, iteration: 0, init })
    }

    pub fn dim(&self) -> usize {
        self.factors[0].rows()
    }

    pub fn product(&self) -> Matrix {
        let mut w = self.factors[0].clone();
        for f in &self.factors[1..] {
            w = f.matmul(&w).expect("square factors");
        }
        w
    }
}

/// One simultaneous gradient step on ½‖W_N⋯W₁ − Ŵ‖_F².
pub fn matrix_gd_step(state: &FactorState, target: &SymmetricMatrix) -> Result<FactorState, DynamicsError> {
    let n = target.dim();
    if state.factors.iter().any(|f| f.rows() != n || f.cols() != n) {
        return Err(DynamicsError::Dimension(format!("factors must be {n}x{n} to match the target")));
    }
    let depth = state.factors.len();
    // prefix[j] = W_j⋯W_1 (prefix[0] = I); suffix[j] = W_N⋯W_{j+1} (suffix[N] = I)
    let mut prefix = Vec::with_capacity(depth + 1);
    prefix.push(Matrix::identity(n));
    for f in &state.factors {
        let next = f.matmul(prefix.last().unwrap())?;
        prefix.push(next);
    }
    let mut suffix = vec![Matrix::identity(n); depth + 1];
    for j in (0..depth).rev() {
        suffix[j] = suffix[j + 1].matmul(&state.factors[j])?;
    }
    let residual = prefix[depth].sub(target.matrix())?;
    let mut factors = Vec::with_capacity(depth);
    for j in 0..depth {
        let grad = suffix[j + 1].transpose().matmul(&residual)?.matmul(&prefix[j].transpose())?;
        factors.push(state.factors[j].sub(&grad.scale(state.eta))?);
    }
    Ok(FactorState { factors, iteration: state.iteration + 1, ..state.clone() })
}

impl From<crate::spectral::SpectralError> for DynamicsError {
    fn from(e: crate::spectral::SpectralError) -> Self {
        DynamicsError::Dimension(e.to_string())
    }
}

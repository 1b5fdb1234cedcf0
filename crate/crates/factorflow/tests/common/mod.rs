//! Shared oracles for the integration tests.

use factorflow::dynamics::{matrix_gd_step, perturbed_step, scalar_step, FactorState, InitKind, PerturbedPair};
use factorflow::harness::Prng;
use factorflow::spectral::{Matrix, SymmetricMatrix};
use factorflow::theory::{stepsize_bound, StepsizeContext};

pub const DIM: usize = 20;
pub const STEPS: usize = 200;

fn spectrum() -> Vec<f64> {
    (0..DIM).map(|i| 4.0 - 0.4 * i as f64).collect()
}

fn rotated(q: &Matrix, diag: &[f64]) -> Matrix {
    SymmetricMatrix::from_factors(q, diag).unwrap().into_matrix()
}

fn max_dev(a: &Matrix, b: &Matrix) -> f64 {
    a.sub(b).unwrap().max_abs()
}

/// Largest entrywise deviation over all factors and the product.
pub fn decoupling_deviation(init: InitKind, depth: u32, seed: u64) -> f64 {
    let values = spectrum();
    let q = Prng::new(seed).orthogonal(DIM);
    let target = SymmetricMatrix::from_factors(&q, &values).unwrap();
    let norm = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let (alpha, context) = match init {
        InitKind::Identical { alpha } => (alpha, StepsizeContext::MatrixIdentical),
        InitKind::Perturbed { alpha, .. } => (alpha, StepsizeContext::MatrixPerturbed),
        _ => unreachable!(),
    };
    let eta = 0.5 * stepsize_bound(context, norm, alpha, depth);
    let mut state = FactorState::new(DIM, depth, eta, init).unwrap();
    // (first factor, remaining factors) per eigenvalue
    let mut scalars: Vec<(f64, f64)> = match init {
        InitKind::Identical { alpha } => vec![(alpha, alpha); DIM],
        InitKind::Perturbed { alpha, beta } => vec![(alpha - beta, alpha); DIM],
        _ => unreachable!(),
    };
    let mut worst = 0.0f64;
    for _ in 0..=STEPS {
        let first: Vec<f64> = scalars.iter().map(|s| s.0).collect();
        let rest: Vec<f64> = scalars.iter().map(|s| s.1).collect();
        let product: Vec<f64> = scalars.iter().map(|s| s.0 * s.1.powi(depth as i32 - 1)).collect();
        worst = worst.max(max_dev(&state.factors[0], &rotated(&q, &first)));
        for f in &state.factors[1..] {
            worst = worst.max(max_dev(f, &rotated(&q, &rest)));
        }
        worst = worst.max(max_dev(&state.product(), &rotated(&q, &product)));

        state = matrix_gd_step(&state, &target).unwrap();
        scalars = scalars
            .iter()
            .zip(&values)
            .map(|(s, l)| match init {
                InitKind::Identical { .. } => {
                    let d = scalar_step(s.0, *l, eta, depth);
                    (d, d)
                }
                _ => {
                    let p = perturbed_step(&PerturbedPair::new(s.0, s.1, *l, depth), *l, eta, depth);
                    (p.d1, p.d2)
                }
            })
            .collect();
    }
    worst
}

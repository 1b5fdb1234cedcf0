//! Seeded randomness. Every draw in the crate goes through `Prng`.
//!
//! The generator is ChaCha8 keyed by a 64-bit seed: a counter-based stream, so
//! `split` gives independent substreams by selecting a different stream id.

use std::f64::consts::PI;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::spectral::Matrix;

#[derive(Debug, Clone)]
pub struct Prng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        Prng { inner: ChaCha8Rng::seed_from_u64(seed), spare: None }
    }

    /// Independent stream `stream` of the same seed.
    pub fn split(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Prng { inner, spare: None }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on [0, 1) with 53 random bits.
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform on [−scale, scale].
    pub fn uniform_symmetric(&mut self, scale: f64) -> f64 {
        scale * (2.0 * self.uniform() - 1.0)
    }

    /// Standard normal via Box–Muller; the second value of each pair is cached.
    pub fn gaussian(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        // 1 - u lies in (0, 1], keeping the log finite
        let u1 = 1.0 - self.uniform();
        let u2 = self.uniform();
        let radius = (-2.0 * u1.ln()).sqrt();
        let (s, c) = (2.0 * PI * u2).sin_cos();
        self.spare = Some(radius * s);
        radius * c
    }

    pub fn gaussian_matrix(&mut self, rows: usize, cols: usize, sigma: f64) -> Matrix {
        let data = (0..rows * cols).map(|_| sigma * self.gaussian()).collect();
        Matrix::from_vec(rows, cols, data).expect("sized buffer")
    }

    /// Orthogonal matrix from Gram–Schmidt on a Gaussian matrix.
    pub fn orthogonal(&mut self, n: usize) -> Matrix {
        let g = self.gaussian_matrix(n, n, 1.0);
        let mut cols: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| g[(i, j)]).collect()).collect();
        for j in 0..n {
            // two passes keep the columns orthogonal to working precision
            for _ in 0..2 {
                for k in 0..j {
                    let dot: f64 = cols[j].iter().zip(&cols[k]).map(|(a, b)| a * b).sum();
                    let (head, tail) = cols.split_at_mut(j);
                    for (x, y) in tail[0].iter_mut().zip(&head[k]) {
                        *x -= dot * y;
                    }
                }
            }
            let norm = cols[j].iter().map(|x| x * x).sum::<f64>().sqrt();
            cols[j].iter_mut().for_each(|x| *x /= norm);
        }
        let mut q = Matrix::zeros(n, n);
        for (j, col) in cols.iter().enumerate() {
            for (i, v) in col.iter().enumerate() {
                q[(i, j)] = *v;
            }
        }
        q
    }
}

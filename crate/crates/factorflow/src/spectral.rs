//! Dense symmetric linear algebra: a cyclic Jacobi eigensolver, norms,
//! effective rank and truncation.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_REL_TOL: f64 = 1e-13;
/// Relative threshold below which an eigenvalue counts as zero for rank purposes.
pub const RANK_REL_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric: entry ({i},{j}) differs from ({j},{i})")]
    NotSymmetric { i: usize, j: usize },
    #[error("jacobi sweeps did not converge within {sweeps} sweeps (off-diagonal norm {off:e})")]
    NoConvergence { sweeps: usize, off: f64 },
    #[error("effective rank undefined for the zero matrix")]
    ZeroMatrix,
    #[error("rank {rank} out of range 1..={dim}")]
    RankOutOfRange { rank: usize, dim: usize },
    #[error("dimension mismatch: {0}")]
    Dimension(String),
}

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::scaled_identity(n, 1.0)
    }

    pub fn scaled_identity(n: usize, s: f64) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = s;
        }
        m
    }

    pub fn diag(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, v) in values.iter().enumerate() {
            m[(i, i)] = *v;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SpectralError> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(SpectralError::Dimension("ragged rows".into()));
        }
        Ok(Matrix { rows: r, cols: c, data: rows.concat() })
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, SpectralError> {
        if data.len() != rows * cols {
            return Err(SpectralError::Dimension(format!(
                "expected {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(Matrix { rows, cols, data })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix, SpectralError> {
        if self.cols != other.rows {
            return Err(SpectralError::Dimension(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == 0.0 {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix, SpectralError> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix, SpectralError> {
        self.zip_with(other, |a, b| a + b)
    }

    fn zip_with(&self, other: &Matrix, f: impl Fn(f64, f64) -> f64) -> Result<Matrix, SpectralError> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(SpectralError::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let data = self.data.iter().zip(&other.data).map(|(a, b)| f(*a, *b)).collect();
        Ok(Matrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn scale(&self, s: f64) -> Matrix {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * s).collect() }
    }

    pub fn frobenius(&self) -> f64 {
        self.data.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, a| m.max(a.abs()))
    }

    /// Largest absolute off-diagonal entry.
    pub fn max_off_diagonal(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != j {
                    m = m.max(self[(i, j)].abs());
                }
            }
        }
        m
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    /// Largest singular value, via the eigenvalues of MᵀM.
    pub fn spectral_norm(&self) -> Result<f64, SpectralError> {
        let gram = self.transpose().matmul(self)?;
        let sym = SymmetricMatrix::from_matrix(symmetrize_exact(&gram))?;
        let spec = eigh(&sym)?;
        Ok(spec.eigenvalues.iter().fold(0.0f64, |m, v| m.max(*v)).sqrt())
    }
}

impl std::ops::Index<(usize, usize)> for Matrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Matrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

// Rounding in a product like MᵀM can leave the two triangles a few ulps apart.
fn symmetrize_exact(m: &Matrix) -> Matrix {
    let mut out = m.clone();
    for i in 0..m.rows {
        for j in (i + 1)..m.cols {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            out[(i, j)] = v;
            out[(j, i)] = v;
        }
    }
    out
}

/// Square matrix with exactly equal mirrored entries.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Matrix", into = "Matrix")]
pub struct SymmetricMatrix(Matrix);

impl SymmetricMatrix {
    pub fn from_matrix(m: Matrix) -> Result<Self, SpectralError> {
        if !m.is_square() {
            return Err(SpectralError::NotSquare { rows: m.rows, cols: m.cols });
        }
        for i in 0..m.rows {
            for j in (i + 1)..m.cols {
                if m[(i, j)] != m[(j, i)] {
                    return Err(SpectralError::NotSymmetric { i, j });
                }
            }
        }
        Ok(SymmetricMatrix(m))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self, SpectralError> {
        Self::from_matrix(Matrix::from_rows(rows)?)
    }

    pub fn diag(values: &[f64]) -> Self {
        SymmetricMatrix(Matrix::diag(values))
    }

    pub fn identity(n: usize) -> Self {
        SymmetricMatrix(Matrix::identity(n))
    }

    /// Q·diag(values)·Qᵀ, symmetrized exactly to absorb rounding.
    pub fn from_factors(q: &Matrix, values: &[f64]) -> Result<Self, SpectralError> {
        let n = values.len();
        if q.rows != n || q.cols != n {
            return Err(SpectralError::Dimension("eigenvector matrix does not match eigenvalues".into()));
        }
        let mut scaled = q.clone();
        for i in 0..n {
            for j in 0..n {
                scaled[(i, j)] *= values[j];
            }
        }
        let m = scaled.matmul(&q.transpose())?;
        Ok(SymmetricMatrix(symmetrize_exact(&m)))
    }

    pub fn dim(&self) -> usize {
        self.0.rows
    }

    pub fn matrix(&self) -> &Matrix {
        &self.0
    }

    pub fn into_matrix(self) -> Matrix {
        self.0
    }

    pub fn scale(&self, s: f64) -> SymmetricMatrix {
        SymmetricMatrix(self.0.scale(s))
    }
}

impl TryFrom<Matrix> for SymmetricMatrix {
    type Error = SpectralError;
    fn try_from(m: Matrix) -> Result<Self, Self::Error> {
        SymmetricMatrix::from_matrix(m)
    }
}

impl From<SymmetricMatrix> for Matrix {
    fn from(s: SymmetricMatrix) -> Matrix {
        s.0
    }
}

/// Eigendecomposition Ŵ = VΛVᵀ with eigenvalues sorted non-increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymmetricSpectrum {
    pub eigenvalues: Vec<f64>,
    /// Column i is the eigenvector paired with `eigenvalues[i]`.
    pub eigenvectors: Matrix,
}

impl SymmetricSpectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Spectrum with the identity as eigenvector basis; values are sorted.
    pub fn from_eigenvalues(values: &[f64]) -> Self {
        let mut v = values.to_vec();
        v.sort_by(|a, b| b.total_cmp(a));
        SymmetricSpectrum { eigenvectors: Matrix::identity(v.len()), eigenvalues: v }
    }

    pub fn reconstruct(&self) -> SymmetricMatrix {
        SymmetricMatrix::from_factors(&self.eigenvectors, &self.eigenvalues)
            .expect("spectrum dimensions are consistent")
    }

    /// Largest |λ|.
    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// Cyclic Jacobi eigensolver with row-major sweeps over the upper triangle.
pub fn eigh(m: &SymmetricMatrix) -> Result<SymmetricSpectrum, SpectralError> {
    let n = m.dim();
    let mut a = m.0.clone();
    let mut v = Matrix::identity(n);
    let tol = JACOBI_REL_TOL * a.frobenius();

    let off_norm = |a: &Matrix| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in (i + 1)..n {
                s += 2.0 * a[(i, j)] * a[(i, j)];
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let off = off_norm(&a);
        if off <= tol {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(SpectralError::NoConvergence { sweeps, off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    // stable: ties keep Jacobi output order
    order.sort_by(|&i, &j| a[(j, j)].total_cmp(&a[(i, i)]));
    let eigenvalues = order.iter().map(|&i| a[(i, i)]).collect();
    let mut eigenvectors = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        for k in 0..n {
            eigenvectors[(k, col)] = v[(k, src)];
        }
    }
    Ok(SymmetricSpectrum { eigenvalues, eigenvectors })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Norms {
    pub spectral: f64,
    pub frobenius: f64,
    pub nuclear: f64,
}

pub fn norms_of_eigenvalues(values: &[f64]) -> Norms {
    Norms {
        spectral: values.iter().fold(0.0, |m, v| m.max(v.abs())),
        frobenius: values.iter().map(|v| v * v).sum::<f64>().sqrt(),
        nuclear: values.iter().map(|v| v.abs()).sum(),
    }
}

pub fn matrix_norms(m: &SymmetricMatrix) -> Result<Norms, SpectralError> {
    Ok(norms_of_eigenvalues(&eigh(m)?.eigenvalues))
}

/// Nuclear norm over spectral norm, from the eigenvalues of a symmetric matrix.
pub fn effective_rank_of_eigenvalues(values: &[f64]) -> Result<f64, SpectralError> {
    let n = norms_of_eigenvalues(values);
    if n.spectral == 0.0 {
        return Err(SpectralError::ZeroMatrix);
    }
    Ok(n.nuclear / n.spectral)
}

pub fn effective_rank(m: &SymmetricMatrix) -> Result<f64, SpectralError> {
    effective_rank_of_eigenvalues(&eigh(m)?.eigenvalues)
}

/// Count of |λ| above `RANK_REL_TOL`·max|λ|.
pub fn numerical_rank(values: &[f64]) -> usize {
    let top = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    values.iter().filter(|v| v.abs() > RANK_REL_TOL * top).count()
}

/// Σ_{i≤L} λᵢ vᵢvᵢᵀ over the L largest (signed) eigenvalues.
pub fn best_rank_approx(s: &SymmetricSpectrum, rank: usize) -> Result<SymmetricMatrix, SpectralError> {
    let n = s.dim();
    if rank < 1 || rank > n {
        return Err(SpectralError::RankOutOfRange { rank, dim: n });
    }
    let mut values = s.eigenvalues.clone();
    for v in values.iter_mut().skip(rank) {
        *v = 0.0;
    }
    SymmetricMatrix::from_factors(&s.eigenvectors, &values)
}

/// ½(M + Mᵀ).
pub fn symmetrize(m: &Matrix) -> Result<SymmetricMatrix, SpectralError> {
    if !m.is_square() {
        return Err(SpectralError::NotSquare { rows: m.rows, cols: m.cols });
    }
    Ok(SymmetricMatrix(symmetrize_exact(m)))
}

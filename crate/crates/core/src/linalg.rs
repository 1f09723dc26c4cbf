//! Dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::index::IndexMap;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[inline]
pub fn cis(phase: f64) -> Complex64 {
    Complex64::from_polar(1.0, phase)
}

/// Unitary DFT matrix, `F[k, n] = exp(-j 2 pi k n / N) / sqrt(N)`.
pub fn dft_matrix(size: usize) -> CMatrix {
    let scale = 1.0 / (size as f64).sqrt();
    CMatrix::from_fn(size, size, |k, n| {
        // Reduce k*n mod N before scaling to keep the phase exact for large N.
        let kn = (k * n) % size;
        cis(-2.0 * PI * kn as f64 / size as f64) * scale
    })
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// SFFT matrix `F_N ⊗ F_M^H`, mapping a flattened TF grid to the DD grid.
///
/// Its adjoint is the ISFFT. Both carry the `1/sqrt(MN)` factors internally.
pub fn sfft_matrix(map: IndexMap) -> CMatrix {
    kron(&dft_matrix(map.n()), &dft_matrix(map.m()).adjoint())
}

/// Block-diagonal `I_k ⊗ a`.
pub fn block_diag_repeat(a: &CMatrix, copies: usize) -> CMatrix {
    kron(&CMatrix::identity(copies, copies), a)
}

/// Largest entry magnitude.
pub fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Max-entry distance between two matrices of equal shape.
pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .fold(0.0, |acc, (x, y)| acc.max((x - y).norm()))
}

/// `(a + a^H) / 2`, removing round-off asymmetry before a Hermitian solver.
pub fn hermitian_part(a: &CMatrix) -> CMatrix {
    (a + a.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn real_diag(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|&v| Complex64::new(v, 0.0)),
    ))
}

/// Eigendecomposition of a Hermitian matrix, eigenvalues in descending order.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

impl HermitianEigen {
    pub fn new(a: &CMatrix) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::dim("square matrix", format!("{:?}", a.shape())));
        }
        let dim = a.nrows();
        if dim == 0 {
            return Ok(HermitianEigen {
                values: Vec::new(),
                vectors: CMatrix::zeros(0, 0),
            });
        }
        let eig = hermitian_part(a).symmetric_eigen();
        if eig.eigenvalues.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numerical("non-finite eigenvalue".into()));
        }
        let mut order: Vec<usize> = (0..dim).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = CMatrix::from_fn(dim, dim, |r, c| eig.eigenvectors[(r, order[c])]);
        Ok(HermitianEigen { values, vectors })
    }

    /// `U f(Λ) U^H`.
    pub fn apply(&self, f: impl Fn(f64) -> f64) -> CMatrix {
        let mapped: Vec<f64> = self.values.iter().map(|&v| f(v)).collect();
        let scaled = scale_columns(&self.vectors, &mapped);
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|v| v)
    }
}

/// `a * diag(weights)`.
pub fn scale_columns(a: &CMatrix, weights: &[f64]) -> CMatrix {
    assert_eq!(a.ncols(), weights.len());
    let mut out = a.clone();
    for (mut col, &w) in out.column_iter_mut().zip(weights) {
        col *= Complex64::new(w, 0.0);
    }
    out
}

/// Real parts of the diagonal of `u^H a u`, computed column by column.
pub fn congruence_diag(u: &CMatrix, a: &CMatrix) -> Vec<f64> {
    let au = a * u;
    (0..u.ncols())
        .map(|c| u.column(c).dotc(&au.column(c)).re)
        .collect()
}

/// `log2 det(a)` for a Hermitian positive definite matrix, via Cholesky.
pub fn log2_det_hpd(a: &CMatrix) -> Result<f64> {
    let chol = hermitian_part(a)
        .cholesky()
        .ok_or_else(|| Error::Numerical("matrix is not positive definite".into()))?;
    let l = chol.l_dirty();
    Ok((0..a.nrows()).map(|i| 2.0 * l[(i, i)].re.log2()).sum())
}

/// Solve `a x = b` for Hermitian positive definite `a`.
pub fn solve_hpd(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let chol = hermitian_part(a)
        .cholesky()
        .ok_or_else(|| Error::Numerical("matrix is not positive definite".into()))?;
    Ok(chol.solve(b))
}

/// Solve `a x = b` with a pseudo-inverse fallback when `a` is singular.
pub fn solve_or_pinv(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if let Some(x) = a.clone().lu().solve(b) {
        if x.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Ok(x);
        }
    }
    let pinv = a
        .clone()
        .pseudo_inverse(1e-12 * max_abs(a).max(f64::MIN_POSITIVE))
        .map_err(|e| Error::Numerical(format!("pseudo-inverse failed: {e}")))?;
    Ok(pinv * b)
}

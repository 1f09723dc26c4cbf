//! Correlated DD-domain noise.
//!
//! Matched filtering onto the non-orthogonal TF basis colors white channel
//! noise with the Gram matrix, and the SFFT carries that coloring to the DD
//! grid: `E[z z^H] = N0 A G A^H`.

use rand::Rng;

use crate::error::{Error, Result};
use crate::gram::GramMatrix;
use crate::linalg::{sfft_matrix, CMatrix, CVector};
use crate::rng::complex_normal;

#[derive(Debug, Clone)]
pub struct NoiseModel {
    n0: f64,
    /// `A G^{1/2}`; draws scale it by `sqrt(N0)`.
    coloring: CMatrix,
    covariance: CMatrix,
}

impl NoiseModel {
    pub fn new(gram: &GramMatrix, n0: f64) -> Result<Self> {
        if !(n0.is_finite() && n0 >= 0.0) {
            return Err(Error::config("n0", format!("must be finite and >= 0, got {n0}")));
        }
        let a = sfft_matrix(gram.map());
        let coloring = &a * gram.sqrt();
        let covariance = &a * gram.matrix() * a.adjoint();
        Ok(NoiseModel {
            n0,
            coloring,
            covariance,
        })
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    pub fn dim(&self) -> usize {
        self.coloring.nrows()
    }

    /// Same coloring at a different noise level.
    pub fn with_n0(&self, n0: f64) -> Self {
        NoiseModel {
            n0,
            ..self.clone()
        }
    }

    /// `A G^{1/2}`.
    pub fn coloring(&self) -> &CMatrix {
        &self.coloring
    }

    /// `A G A^H`, the covariance per unit `N0`.
    pub fn unit_covariance(&self) -> &CMatrix {
        &self.covariance
    }

    /// `N0 A G A^H`.
    pub fn covariance(&self) -> CMatrix {
        &self.covariance * num_complex::Complex64::new(self.n0, 0.0)
    }

    /// `sqrt(N0) A G^{1/2} w` with `w ~ CN(0, I)`.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> CVector {
        let dim = self.dim();
        if self.n0 == 0.0 {
            return CVector::zeros(dim);
        }
        let w = CVector::from_fn(dim, |_, _| complex_normal(rng, self.n0));
        &self.coloring * w
    }

    /// Independent draws for `antennas` receive antennas, stacked.
    pub fn draw_stacked<R: Rng + ?Sized>(&self, antennas: usize, rng: &mut R) -> CVector {
        let dim = self.dim();
        let mut out = CVector::zeros(dim * antennas);
        for r in 0..antennas {
            out.rows_mut(r * dim, dim).copy_from(&self.draw(rng));
        }
        out
    }
}

/// Free-function form of [`NoiseModel::draw`].
pub fn draw_dd_noise<R: Rng + ?Sized>(model: &NoiseModel, rng: &mut R) -> CVector {
    model.draw(rng)
}

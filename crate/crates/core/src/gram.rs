//! The MC-FTN-induced ISI/ICI matrix `G` and its Hermitian square-root factors.
//!
//! `G` is the Gram matrix of the non-orthogonal TF basis functions
//! `g(t - n alpha T0) exp(j 2 pi m beta df0 (t - n alpha T0))`, indexed by the TF
//! flat index `n * M + m`. It is also the covariance of the matched-filter noise
//! samples divided by `N0`:
//!
//! ```text
//! G[(m1,n1),(m2,n2)] = A((m1-m2) beta df0, (n1-n2) alpha T0) exp(j 2 pi m2 beta df0 (n1-n2) alpha T0)
//! ```

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::index::IndexMap;
use crate::linalg::{cis, CMatrix, HermitianEigen};
use crate::pulse::RrcPulse;
use num_complex::Complex64;
use std::f64::consts::PI;

/// Relative eigenvalue floor below which a Gram mode is deactivated.
pub const EIGEN_FLOOR_REL: f64 = 1e-10;
/// Negative eigenvalues beyond this (relative to the largest) mean the
/// quadrature is broken rather than round-off.
const PSD_TOLERANCE_REL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct GramMatrix {
    map: IndexMap,
    matrix: CMatrix,
    eigen: HermitianEigen,
    floor: f64,
    sqrt: CMatrix,
    inv_sqrt: CMatrix,
}

impl GramMatrix {
    /// Factorizes an arbitrary Hermitian PSD matrix as a Gram matrix.
    pub fn from_matrix(map: IndexMap, matrix: CMatrix) -> Result<Self> {
        if matrix.shape() != (map.len(), map.len()) {
            return Err(Error::dim(
                format!("{0}x{0}", map.len()),
                format!("{:?}", matrix.shape()),
            ));
        }
        let eigen = HermitianEigen::new(&matrix)?;
        let max = eigen.values.first().copied().unwrap_or(0.0);
        if max <= 0.0 {
            return Err(Error::Degenerate(
                "Gram matrix has no positive eigenvalue".into(),
            ));
        }
        let min = eigen.values.last().copied().unwrap_or(0.0);
        if min < -PSD_TOLERANCE_REL * max {
            return Err(Error::Numerical(format!(
                "Gram matrix is not positive semidefinite (min eigenvalue {min:.3e}, max {max:.3e})"
            )));
        }
        let floor = EIGEN_FLOOR_REL * max;
        let sqrt = eigen.apply(|v| v.max(0.0).sqrt());
        let inv_sqrt = eigen.apply(|v| if v >= floor { 1.0 / v.sqrt() } else { 0.0 });
        Ok(GramMatrix {
            map,
            matrix,
            eigen,
            floor,
            sqrt,
            inv_sqrt,
        })
    }

    /// `G = I`, the orthogonal-signaling limit.
    pub fn identity(map: IndexMap) -> Self {
        Self::from_matrix(map, CMatrix::identity(map.len(), map.len()))
            .expect("identity is a valid Gram matrix")
    }

    pub fn map(&self) -> IndexMap {
        self.map
    }

    pub fn dim(&self) -> usize {
        self.map.len()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigen.vectors
    }

    pub fn floor(&self) -> f64 {
        self.floor
    }

    /// Hermitian `G^{1/2}`.
    pub fn sqrt(&self) -> &CMatrix {
        &self.sqrt
    }

    /// Hermitian `G^{-1/2}` on the active subspace, zero on deactivated modes.
    pub fn inv_sqrt(&self) -> &CMatrix {
        &self.inv_sqrt
    }

    pub fn active_modes(&self) -> usize {
        self.eigen.values.iter().filter(|&&v| v >= self.floor).count()
    }

    pub fn deactivated_modes(&self) -> usize {
        self.dim() - self.active_modes()
    }

    /// Orthogonal projector onto the span of the active eigenvectors.
    pub fn active_projector(&self) -> CMatrix {
        let floor = self.floor;
        self.eigen.apply(|v| if v >= floor { 1.0 } else { 0.0 })
    }

    /// `lambda_max / lambda_min` over the active modes.
    pub fn condition_number(&self) -> f64 {
        let max = self.eigen.values[0];
        let min = self
            .eigen
            .values
            .iter()
            .rev()
            .find(|&&v| v >= self.floor)
            .copied()
            .unwrap_or(max);
        max / min
    }
}

/// Ambiguity samples on the lattice of index differences, evaluated once each.
struct LatticeTable {
    m: usize,
    n: usize,
    values: Vec<Complex64>,
}

impl LatticeTable {
    fn new(map: IndexMap, mut eval: impl FnMut(isize, isize) -> Complex64) -> Self {
        let (m, n) = (map.m(), map.n());
        let mut values = Vec::with_capacity((2 * m - 1) * (2 * n - 1));
        for dn in -(n as isize - 1)..=(n as isize - 1) {
            for dm in -(m as isize - 1)..=(m as isize - 1) {
                values.push(eval(dm, dn));
            }
        }
        LatticeTable { m, n, values }
    }

    #[inline]
    fn get(&self, dm: isize, dn: isize) -> Complex64 {
        let row = (dn + self.n as isize - 1) as usize;
        let col = (dm + self.m as isize - 1) as usize;
        self.values[row * (2 * self.m - 1) + col]
    }
}

/// Builds `G` for `cfg`, evaluating only the Toeplitz-distinct ambiguity values.
pub fn build_gram(cfg: &SystemConfig, pulse: &RrcPulse) -> Result<GramMatrix> {
    cfg.validate()?;
    let map = IndexMap::new(cfg.m, cfg.n);
    let df = cfg.subcarrier_spacing();
    let dt = cfg.symbol_interval();
    let table = LatticeTable::new(map, |dm, dn| {
        pulse.cross_ambiguity(dm as f64 * df, dn as f64 * dt)
    });
    let dim = map.len();
    let matrix = CMatrix::from_fn(dim, dim, |row, col| {
        let (m1, n1) = map.grid(row);
        let (m2, n2) = map.grid(col);
        let dm = m1 as isize - m2 as isize;
        let dn = n1 as isize - n2 as isize;
        table.get(dm, dn) * cis(2.0 * PI * m2 as f64 * df * dn as f64 * dt)
    });
    GramMatrix::from_matrix(map, matrix)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, max_abs_diff};

    fn cfg(m: usize, n: usize, alpha: f64, beta: f64, theta: f64) -> SystemConfig {
        SystemConfig {
            m,
            n,
            alpha,
            beta,
            theta,
            ..Default::default()
        }
    }

    fn gram(c: &SystemConfig) -> GramMatrix {
        build_gram(c, &RrcPulse::new(c.theta, c.t0).unwrap()).unwrap()
    }

    #[test]
    fn hermitian_unit_diagonal_psd() {
        for c in [
            cfg(2, 2, 0.8, 0.9, 0.25),
            cfg(8, 4, 0.9, 0.9, 0.25),
            cfg(4, 4, 0.6, 0.6, 0.75),
        ] {
            let g = gram(&c);
            let m = g.matrix();
            assert!(max_abs_diff(m, &m.adjoint()) < 1e-12);
            for i in 0..g.dim() {
                assert!((m[(i, i)] - Complex64::new(1.0, 0.0)).norm() < 1e-9);
            }
            assert!(*g.eigenvalues().last().unwrap() > 0.0);
            assert_eq!(g.deactivated_modes(), 0);
        }
    }

    #[test]
    fn nyquist_time_orthogonality() {
        let c = cfg(8, 4, 1.0, 1.0, 0.25);
        let g = gram(&c);
        let map = g.map();
        for (m1, n1) in map.iter() {
            for n2 in 0..c.n {
                if n2 != n1 {
                    let v = g.matrix()[(map.flat(m1, n1), map.flat(m1, n2))];
                    assert!(v.norm() < 1e-6, "{v}");
                }
            }
        }
    }

    #[test]
    fn square_root_factors() {
        let g = gram(&cfg(4, 2, 0.85, 0.9, 0.25));
        let s = g.sqrt();
        assert!(max_abs_diff(&(s * s), g.matrix()) < 1e-9);
        assert!(max_abs_diff(s, &s.adjoint()) < 1e-12);
        let w = g.inv_sqrt();
        let id = w * w * g.matrix();
        let n = g.dim();
        assert!(max_abs_diff(&id, &CMatrix::identity(n, n)) < 1e-8);
    }

    #[test]
    fn deactivation_below_floor() {
        let map = IndexMap::new(2, 1);
        let m = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(1e-14, 0.0),
        ]));
        let g = GramMatrix::from_matrix(map, m).unwrap();
        assert_eq!(g.active_modes(), 1);
        assert_eq!(g.inv_sqrt()[(1, 1)], Complex64::new(0.0, 0.0));
        let p = g.active_projector();
        assert!((p[(0, 0)].re - 1.0).abs() < 1e-15 && p[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn rejects_indefinite_and_zero() {
        let map = IndexMap::new(2, 1);
        let indefinite = CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(-0.1, 0.0),
        ]));
        assert!(matches!(
            GramMatrix::from_matrix(map, indefinite),
            Err(Error::Numerical(_))
        ));
        assert!(matches!(
            GramMatrix::from_matrix(map, CMatrix::zeros(2, 2)),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn beta_one_time_block_is_ftn_gram() {
        // Fixing the subcarrier, G reduces to the 1-D FTN Gram matrix of the RRC
        // autocorrelation sampled at alpha T0.
        // The RRC autocorrelation is the raised-cosine pulse.
        let raised_cosine = |t: f64, theta: f64| {
            let sinc = if t == 0.0 { 1.0 } else { (PI * t).sin() / (PI * t) };
            sinc * (PI * theta * t).cos() / (1.0 - (2.0 * theta * t).powi(2))
        };
        let c = cfg(4, 6, 0.85, 1.0, 0.25);
        let g = gram(&c);
        let map = g.map();
        for n1 in 0..c.n {
            for n2 in 0..c.n {
                let d = (n1 as f64 - n2 as f64) * c.alpha;
                let want = raised_cosine(d, c.theta);
                let got = g.matrix()[(map.flat(0, n1), map.flat(0, n2))];
                assert!((got.re - want).abs() < 1e-13 && got.im.abs() < 1e-13, "{d}: {got} vs {want}");
            }
        }
        assert!(max_abs(g.matrix()) <= 1.0 + 1e-12);
    }
}

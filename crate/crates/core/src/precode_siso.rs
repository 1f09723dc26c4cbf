//! EVD precoding with weighted water-filling for a single link.
//!
//! Whitening the matched-filter output gives `D = G^{-1/2} A^H H_dd`. The
//! precoder `P = U_D Λ_P^{1/2}` diagonalizes `P^H D^H D P`, and `Λ_P` is
//! water-filled over the eigenvalues of `D^H D` with costs `φ = diag(U_D^H G U_D)`
//! under `Σ λ_P φ <= MN`.

use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::gram::GramMatrix;
use crate::linalg::{congruence_diag, log2_det_hpd, scale_columns, CMatrix, CVector, HermitianEigen};
use crate::waterfill::{sum_rate, waterfill, WEIGHT_FLOOR};

/// How the per-mode powers are chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PowerMode {
    /// Optimal weighted water-filling.
    WaterFilling,
    /// EVD precoding with `Λ_P = I`.
    Uniform,
    /// `P = I`.
    Unprecoded,
}

/// `G^{-1/2} A^H H`. Deactivated Gram modes map to zero rows of the
/// whitened output.
pub fn build_effective_channel(gram: &GramMatrix, h_dd: &CMatrix) -> Result<CMatrix> {
    if gram.active_modes() == 0 {
        return Err(Error::config("alpha", "every Gram mode is deactivated"));
    }
    crate::precode_mimo::build_mimo_effective(gram, h_dd, 1, 1)
}

/// Eigenbasis and power allocation for one normal matrix `Q`.
#[derive(Debug, Clone)]
pub struct EigenAllocation {
    /// Eigenvectors of `Q`, columns in descending eigenvalue order.
    pub u: CMatrix,
    /// Eigenvalues of `Q`, clamped at zero.
    pub gains: Vec<f64>,
    /// `diag(U^H G U)`; values at or below the weight floor are reported as zero.
    pub weights: Vec<f64>,
    pub power: Vec<f64>,
    pub xi: Option<f64>,
}

impl EigenAllocation {
    /// `U Λ_P^{1/2}`.
    pub fn precoder(&self) -> CMatrix {
        let amp: Vec<f64> = self.power.iter().map(|p| p.sqrt()).collect();
        scale_columns(&self.u, &amp)
    }

    /// `Σ log2(1 + snr p_k g_k)`.
    pub fn rate(&self, snr: f64) -> f64 {
        sum_rate(&self.gains, &self.power, snr)
    }

    /// `Σ p_k φ_k`.
    pub fn energy(&self) -> f64 {
        self.power.iter().zip(&self.weights).map(|(p, w)| p * w).sum()
    }
}

/// EVD of the Hermitian PSD `q` followed by power allocation with cost
/// matrix `cost` under `budget`.
pub fn eigen_allocate(
    q: &CMatrix,
    cost: &CMatrix,
    snr: f64,
    budget: f64,
    mode: PowerMode,
) -> Result<EigenAllocation> {
    let eig = HermitianEigen::new(q)?;
    let gains: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let weights: Vec<f64> = congruence_diag(&eig.vectors, cost)
        .into_iter()
        .map(|w| if w > WEIGHT_FLOOR { w } else { 0.0 })
        .collect();
    let (power, xi) = match mode {
        PowerMode::WaterFilling => {
            let wf = waterfill(&gains, &weights, snr, budget);
            (wf.power, wf.xi)
        }
        PowerMode::Uniform | PowerMode::Unprecoded => (
            weights.iter().map(|&w| if w > 0.0 { 1.0 } else { 0.0 }).collect(),
            None,
        ),
    };
    Ok(EigenAllocation {
        u: eig.vectors,
        gains,
        weights,
        power,
        xi,
    })
}

#[derive(Debug, Clone)]
pub struct SisoPrecoder {
    pub mode: PowerMode,
    pub snr: f64,
    pub d: CMatrix,
    pub u_d: CMatrix,
    /// Eigenvalues of `D^H D`, descending.
    pub lambda_d: Vec<f64>,
    pub phi: Vec<f64>,
    pub lambda_p: Vec<f64>,
    pub p: CMatrix,
    pub xi: Option<f64>,
}

impl SisoPrecoder {
    /// Solves the precoder for the whitened channel `d` at linear SNR `snr`,
    /// with energy budget `MN`.
    pub fn solve(d: CMatrix, gram: &GramMatrix, snr: f64, mode: PowerMode) -> Result<Self> {
        let dim = gram.dim();
        if d.shape() != (dim, dim) {
            return Err(Error::dim(format!("{dim}x{dim}"), format!("{:?}", d.shape())));
        }
        let q = d.adjoint() * &d;
        let alloc = eigen_allocate(&q, gram.matrix(), snr, dim as f64, mode)?;
        let p = match mode {
            PowerMode::Unprecoded => CMatrix::identity(dim, dim),
            _ => alloc.precoder(),
        };
        Ok(SisoPrecoder {
            mode,
            snr,
            d,
            p,
            u_d: alloc.u,
            lambda_d: alloc.gains,
            phi: alloc.weights,
            lambda_p: alloc.power,
            xi: alloc.xi,
        })
    }

    /// Builds `D` from the DD channel and solves at `cfg.snr()`.
    pub fn for_channel(gram: &GramMatrix, h_dd: &CMatrix, cfg: &SystemConfig, mode: PowerMode) -> Result<Self> {
        let d = build_effective_channel(gram, h_dd)?;
        Self::solve(d, gram, cfg.snr(), mode)
    }

    /// Mutual information per frame in bits, `Σ log2(1 + snr λ_P λ_D)`; the
    /// unprecoded case uses `log2 det(I + snr D^H D)`.
    pub fn raw_capacity(&self) -> Result<f64> {
        match self.mode {
            PowerMode::Unprecoded => {
                let dim = self.d.ncols();
                let m = CMatrix::identity(dim, dim) + self.d.adjoint() * &self.d * Complex64::new(self.snr, 0.0);
                log2_det_hpd(&m)
            }
            _ => Ok(sum_rate(&self.lambda_d, &self.lambda_p, self.snr)),
        }
    }

    /// Capacity in bit/s/Hz, normalized by the occupied `alpha beta MN E0`.
    pub fn capacity(&self, cfg: &SystemConfig) -> Result<f64> {
        Ok(self.raw_capacity()? / normalization(cfg))
    }

    /// `P x`.
    pub fn precode(&self, x: &CVector) -> Result<CVector> {
        if x.len() != self.p.ncols() {
            return Err(Error::dim(self.p.ncols(), x.len()));
        }
        Ok(&self.p * x)
    }

    /// `tr(G P P^H)`, bounded by `MN`.
    pub fn energy_trace(&self, gram: &GramMatrix) -> f64 {
        let gp = gram.matrix() * &self.p;
        self.p.iter().zip(gp.iter()).map(|(p, g)| (p.conj() * g).re).sum()
    }

    /// Average transmit energy per frame, `alpha beta E0 sigma_x2 tr(G P P^H)`.
    pub fn frame_energy(&self, gram: &GramMatrix, cfg: &SystemConfig) -> f64 {
        cfg.alpha * cfg.beta * cfg.e0 * cfg.sigma_x2 * self.energy_trace(gram)
    }
}

/// `alpha beta MN E0`, the time-bandwidth a frame occupies in units of `E0`.
pub fn normalization(cfg: &SystemConfig) -> f64 {
    cfg.alpha * cfg.beta * cfg.frame_len() as f64 * cfg.e0
}

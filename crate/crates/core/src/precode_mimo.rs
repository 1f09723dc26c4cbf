//! SIC-based per-stream precoding for MIMO links, and water-filling references.
//!
//! With `D = (I ⊗ G^{-1/2})(I ⊗ A^H) H` and a block-diagonal precoder, the
//! MIMO log-det telescopes exactly:
//!
//! ```text
//! log2 det(I + s D P P^H D^H) = Σ_t log2 det(I + s P_t^H D_t^H T_{t-1}^{-1} D_t P_t)
//! T_t = T_{t-1} + s D_t P_t P_t^H D_t^H,   T_0 = I
//! ```
//!
//! where `D_t` is the column block of stream `t`. Each term is then maximized
//! in turn with the single-link EVD water-filling.

use num_complex::Complex64;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::gram::GramMatrix;
use crate::linalg::{log2_det_hpd, scale_columns, sfft_matrix, solve_hpd, CMatrix, HermitianEigen};
use crate::precode_siso::{eigen_allocate, normalization, PowerMode};
use crate::waterfill::{sum_rate, waterfill};

/// `(I ⊗ G^{-1/2} A^H) H_mimo`, whitening each receive block row alike.
pub fn build_mimo_effective(gram: &GramMatrix, h_mimo: &CMatrix, n_r: usize, n_t: usize) -> Result<CMatrix> {
    let mn = gram.dim();
    if h_mimo.shape() != (mn * n_r, mn * n_t) {
        return Err(Error::dim(
            format!("{}x{}", mn * n_r, mn * n_t),
            format!("{:?}", h_mimo.shape()),
        ));
    }
    let w = gram.inv_sqrt() * sfft_matrix(gram.map()).adjoint();
    let mut d = CMatrix::zeros(mn * n_r, mn * n_t);
    for r in 0..n_r {
        let rows = h_mimo.rows(r * mn, mn);
        d.rows_mut(r * mn, mn).copy_from(&(&w * rows));
    }
    Ok(d)
}

/// One stream of the SIC decomposition.
#[derive(Debug, Clone)]
pub struct StreamSolution {
    /// Transmit antenna this stream belongs to.
    pub antenna: usize,
    pub u: CMatrix,
    /// Eigenvalues of `Q_{t-1} = D_t^H T_{t-1}^{-1} D_t`, descending.
    pub lambda_q: Vec<f64>,
    /// `diag(U^H G U)`.
    pub psi: Vec<f64>,
    pub gamma: Vec<f64>,
    pub p: CMatrix,
    pub xi: Option<f64>,
    /// `Σ log2(1 + s γ λ_Q)` in bits.
    pub rate: f64,
}

#[derive(Debug, Clone)]
pub struct MimoPrecoderState {
    pub d: CMatrix,
    /// `T` after the last stream.
    pub t: CMatrix,
    /// Streams in processing order.
    pub streams: Vec<StreamSolution>,
    /// Per-stream budget on `tr(G P_t P_t^H)`.
    pub budgets: Vec<f64>,
    pub snr: f64,
    pub mn: usize,
    pub n_t: usize,
}

impl MimoPrecoderState {
    /// Block-diagonal `P_MIMO` in antenna order.
    pub fn precoder(&self) -> CMatrix {
        let mn = self.mn;
        let mut p = CMatrix::zeros(mn * self.n_t, mn * self.n_t);
        for s in &self.streams {
            p.view_mut((s.antenna * mn, s.antenna * mn), (mn, mn)).copy_from(&s.p);
        }
        p
    }

    /// Per-stream rates in antenna order, in bits per frame.
    pub fn stream_rates(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_t];
        for s in &self.streams {
            out[s.antenna] = s.rate;
        }
        out
    }

    pub fn raw_capacity(&self) -> f64 {
        self.streams.iter().map(|s| s.rate).sum()
    }

    /// Normalized capacity in bit/s/Hz.
    pub fn capacity(&self, cfg: &SystemConfig) -> f64 {
        self.raw_capacity() / normalization(cfg)
    }
}

fn column_block(d: &CMatrix, mn: usize, t: usize) -> CMatrix {
    d.columns(t * mn, mn).into_owned()
}

/// `T + s D_t P P^H D_t^H`.
fn update_t(t: &mut CMatrix, d_t: &CMatrix, p: &CMatrix, snr: f64) {
    let dp = d_t * p;
    *t += &dp * dp.adjoint() * Complex64::new(snr, 0.0);
}

/// `D_t^H T^{-1} D_t`, symmetrized.
fn interference_normal(t: &CMatrix, d_t: &CMatrix) -> Result<CMatrix> {
    let x = solve_hpd(t, d_t)?;
    let q = d_t.adjoint() * x;
    Ok((&q + q.adjoint()) * Complex64::new(0.5, 0.0))
}

/// Runs the SIC decomposition with every stream budget `MN`, streams in
/// natural antenna order.
pub fn sic_precode(d: &CMatrix, gram: &GramMatrix, n_t: usize, snr: f64) -> Result<MimoPrecoderState> {
    let order: Vec<usize> = (0..n_t).collect();
    let budgets = vec![gram.dim() as f64; n_t];
    sic_precode_ordered(d, gram, snr, &order, &budgets)
}

/// SIC decomposition over the streams listed in `order`, with `budgets`
/// indexed by antenna.
pub fn sic_precode_ordered(
    d: &CMatrix,
    gram: &GramMatrix,
    snr: f64,
    order: &[usize],
    budgets: &[f64],
) -> Result<MimoPrecoderState> {
    let mn = gram.dim();
    let n_t = order.len();
    if d.ncols() != mn * n_t || !d.nrows().is_multiple_of(mn) {
        return Err(Error::dim(format!("{} columns", mn * n_t), d.ncols()));
    }
    if budgets.len() != n_t {
        return Err(Error::dim(n_t, budgets.len()));
    }
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    if sorted != (0..n_t).collect::<Vec<_>>() {
        return Err(Error::config("order", "must be a permutation of the transmit antennas"));
    }

    let rows = d.nrows();
    let mut t = CMatrix::identity(rows, rows);
    let mut streams = Vec::with_capacity(n_t);
    for &antenna in order {
        let d_t = column_block(d, mn, antenna);
        let q = interference_normal(&t, &d_t)?;
        let alloc = eigen_allocate(&q, gram.matrix(), snr, budgets[antenna], PowerMode::WaterFilling)?;
        let p = alloc.precoder();
        update_t(&mut t, &d_t, &p, snr);
        streams.push(StreamSolution {
            antenna,
            rate: alloc.rate(snr),
            u: alloc.u,
            lambda_q: alloc.gains,
            psi: alloc.weights,
            gamma: alloc.power,
            xi: alloc.xi,
            p,
        });
    }
    Ok(MimoPrecoderState {
        d: d.clone(),
        t,
        streams,
        budgets: budgets.to_vec(),
        snr,
        mn,
        n_t,
    })
}

/// `log2 det(I + s D P P^H D^H)`.
pub fn direct_log_det(d: &CMatrix, p: &CMatrix, snr: f64) -> Result<f64> {
    let dp = d * p;
    let rows = d.nrows();
    log2_det_hpd(&(CMatrix::identity(rows, rows) + &dp * dp.adjoint() * Complex64::new(snr, 0.0)))
}

/// Per-stream terms `log2 det(I + s P_t^H Q_{t-1} P_t)` of the telescoping
/// decomposition, for any block-diagonal precoder given by its blocks.
pub fn telescoped_log_dets(d: &CMatrix, blocks: &[CMatrix], snr: f64) -> Result<Vec<f64>> {
    let n_t = blocks.len();
    let mn = d.ncols() / n_t.max(1);
    let rows = d.nrows();
    let mut t = CMatrix::identity(rows, rows);
    let mut out = Vec::with_capacity(n_t);
    for (i, p) in blocks.iter().enumerate() {
        let d_t = column_block(d, mn, i);
        let q = interference_normal(&t, &d_t)?;
        let k = p.ncols();
        let inner = CMatrix::identity(k, k) + p.adjoint() * q * p * Complex64::new(snr, 0.0);
        out.push(log2_det_hpd(&inner)?);
        update_t(&mut t, &d_t, p, snr);
    }
    Ok(out)
}

/// Which problem the water-filling reference solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WfVariant {
    /// Unstructured `P` by the single-link recipe applied to the full matrix:
    /// EVD of `D^H D`, weights `diag(U^H (I ⊗ G) U)`, total budget `n_t MN`.
    Relaxed,
    /// Global optimum of the unstructured problem under
    /// `tr((I ⊗ G) P P^H) <= n_t MN`, solved by whitening the constraint.
    Whitened,
    /// Block-diagonal `P` with per-stream budgets, by exact block-coordinate
    /// ascent started from the SIC solution.
    Structured,
}

#[derive(Debug, Clone)]
pub struct WfSolution {
    pub p: CMatrix,
    /// Bits per frame.
    pub raw_capacity: f64,
    /// Sweeps used by the structured variant.
    pub sweeps: usize,
}

impl WfSolution {
    pub fn capacity(&self, cfg: &SystemConfig) -> f64 {
        self.raw_capacity / normalization(cfg)
    }
}

const STRUCTURED_MAX_SWEEPS: usize = 100;
const STRUCTURED_TOL: f64 = 1e-10;

/// Water-filling reference with total budget `n_t MN` (per-stream `MN` for
/// the structured variant).
pub fn wf_baseline(d: &CMatrix, gram: &GramMatrix, n_t: usize, snr: f64, variant: WfVariant) -> Result<WfSolution> {
    let mn = gram.dim();
    if d.ncols() != mn * n_t {
        return Err(Error::dim(format!("{} columns", mn * n_t), d.ncols()));
    }
    let total = (mn * n_t) as f64;
    match variant {
        WfVariant::Whitened => {
            // With P~ = (I ⊗ G^{1/2}) P the constraint is tr(P~ P~^H) <= budget and
            // the optimum is plain water-filling on D~ = D (I ⊗ G^{-1/2}).
            let inv = block_diag(gram.inv_sqrt(), n_t);
            let dw = d * &inv;
            let weights = active_weights(gram, n_t);
            let eig = HermitianEigen::new(&(dw.adjoint() * &dw))?;
            let gains: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
            let wf = waterfill(&gains, &weights_in_basis(&eig.vectors, &weights), snr, total);
            let amp: Vec<f64> = wf.power.iter().map(|p| p.sqrt()).collect();
            let p = inv * scale_columns(&eig.vectors, &amp);
            Ok(WfSolution {
                raw_capacity: sum_rate(&gains, &wf.power, snr),
                p,
                sweeps: 0,
            })
        }
        WfVariant::Relaxed => {
            let cost = block_diag(gram.matrix(), n_t);
            let alloc = eigen_allocate(&(d.adjoint() * d), &cost, snr, total, PowerMode::WaterFilling)?;
            Ok(WfSolution {
                raw_capacity: alloc.rate(snr),
                p: alloc.precoder(),
                sweeps: 0,
            })
        }
        WfVariant::Structured => structured(d, gram, n_t, snr),
    }
}

fn block_diag(a: &CMatrix, copies: usize) -> CMatrix {
    crate::linalg::block_diag_repeat(a, copies)
}

/// Indicator of active Gram modes, repeated per antenna, as a diagonal in
/// the whitened coordinates.
fn active_weights(gram: &GramMatrix, n_t: usize) -> CMatrix {
    block_diag(&gram.active_projector(), n_t)
}

fn weights_in_basis(u: &CMatrix, projector: &CMatrix) -> Vec<f64> {
    crate::linalg::congruence_diag(u, projector)
        .into_iter()
        .map(|w| if w > 0.5 { 1.0 } else { 0.0 })
        .collect()
}

/// Exact optimum of one block given the others: whitened water-filling on
/// `G^{-1/2} D_t^H T^{-1} D_t G^{-1/2}`.
fn best_block(q: &CMatrix, gram: &GramMatrix, snr: f64, budget: f64) -> Result<CMatrix> {
    let qw = gram.inv_sqrt() * q * gram.inv_sqrt();
    let eig = HermitianEigen::new(&qw)?;
    let gains: Vec<f64> = eig.values.iter().map(|v| v.max(0.0)).collect();
    let weights = weights_in_basis(&eig.vectors, &gram.active_projector());
    let wf = waterfill(&gains, &weights, snr, budget);
    let amp: Vec<f64> = wf.power.iter().map(|p| p.sqrt()).collect();
    Ok(gram.inv_sqrt() * scale_columns(&eig.vectors, &amp))
}

fn structured(d: &CMatrix, gram: &GramMatrix, n_t: usize, snr: f64) -> Result<WfSolution> {
    let mn = gram.dim();
    let sic = sic_precode(d, gram, n_t, snr)?;
    let mut blocks: Vec<CMatrix> = (0..n_t)
        .map(|a| sic.precoder().view((a * mn, a * mn), (mn, mn)).into_owned())
        .collect();
    let assemble = |blocks: &[CMatrix]| {
        let mut p = CMatrix::zeros(mn * n_t, mn * n_t);
        for (a, b) in blocks.iter().enumerate() {
            p.view_mut((a * mn, a * mn), (mn, mn)).copy_from(b);
        }
        p
    };
    let mut value = direct_log_det(d, &assemble(&blocks), snr)?;
    let rows = d.nrows();
    let mut sweeps = 0;
    while sweeps < STRUCTURED_MAX_SWEEPS {
        sweeps += 1;
        let start = value;
        for a in 0..n_t {
            // Interference-plus-noise from every other block.
            let mut t = CMatrix::identity(rows, rows);
            for (b, p) in blocks.iter().enumerate() {
                if b != a {
                    update_t(&mut t, &column_block(d, mn, b), p, snr);
                }
            }
            let q = interference_normal(&t, &column_block(d, mn, a))?;
            let candidate = best_block(&q, gram, snr, mn as f64)?;
            let previous = std::mem::replace(&mut blocks[a], candidate);
            let next = direct_log_det(d, &assemble(&blocks), snr)?;
            if next >= value {
                value = next;
            } else {
                blocks[a] = previous;
            }
        }
        if value - start <= STRUCTURED_TOL * value.abs().max(1.0) {
            break;
        }
    }
    Ok(WfSolution {
        p: assemble(&blocks),
        raw_capacity: value,
        sweeps,
    })
}

//! Random delay-Doppler channels and their TF / DD matrices.
//!
//! Row index of every channel matrix is the receive grid point, column index
//! the transmit grid point, both in flat order. The TF entry of one path is
//!
//! ```text
//! h A(dm beta df0 - nu, dn alpha T0 - tau)
//!   exp(j 2 pi (nu + m' beta df0)(dn alpha T0 - tau)) exp(j 2 pi nu n' alpha T0)
//! ```
//!
//! with `dm = m - m'`, `dn = n - n'`, and `H_dd = A H_tf A^H`.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::f64::consts::PI;

use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::index::IndexMap;
use crate::linalg::{cis, sfft_matrix, CMatrix, ZERO};
use crate::pulse::RrcPulse;
use crate::rng::{self, complex_normal, Purpose};

/// One propagation path: complex gain, delay in seconds, Doppler in Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DdPath {
    pub gain: Complex64,
    pub delay: f64,
    pub doppler: f64,
}

impl DdPath {
    pub fn new(gain: Complex64, delay: f64, doppler: f64) -> Self {
        DdPath {
            gain,
            delay,
            doppler,
        }
    }

    /// Unit-gain path with no delay or Doppler.
    pub fn identity() -> Self {
        DdPath::new(Complex64::new(1.0, 0.0), 0.0, 0.0)
    }

    fn validate(&self) -> Result<()> {
        let finite = self.gain.re.is_finite()
            && self.gain.im.is_finite()
            && self.delay.is_finite()
            && self.doppler.is_finite();
        if !finite {
            return Err(Error::config("paths", "path parameters must be finite"));
        }
        if self.delay < 0.0 {
            return Err(Error::config(
                "paths",
                format!("delay must be >= 0, got {}", self.delay),
            ));
        }
        Ok(())
    }
}

/// Draws `cfg.paths` paths with gains `CN(0, 1/L)`, delays uniform on
/// `[0, tau_max]` and Dopplers uniform on `[-nu_max, nu_max]`.
pub fn sample_paths<R: Rng + ?Sized>(cfg: &SystemConfig, rng: &mut R) -> Vec<DdPath> {
    let var = 1.0 / cfg.paths as f64;
    (0..cfg.paths)
        .map(|_| {
            let gain = complex_normal(rng, var);
            let delay = cfg.tau_max * rng.random::<f64>();
            let doppler = cfg.nu_max * (2.0 * rng.random::<f64>() - 1.0);
            DdPath::new(gain, delay, doppler)
        })
        .collect()
}

/// Direct evaluation of one TF channel entry `H_{m,n}[m', n']`.
pub fn tf_channel_entry(
    paths: &[DdPath],
    (m, n): (usize, usize),
    (mp, np): (usize, usize),
    cfg: &SystemConfig,
    pulse: &RrcPulse,
) -> Complex64 {
    let df = cfg.subcarrier_spacing();
    let dt = cfg.symbol_interval();
    let dm = m as f64 - mp as f64;
    let dn = n as f64 - np as f64;
    paths
        .iter()
        .map(|p| {
            let lag = dn * dt - p.delay;
            p.gain
                * pulse.cross_ambiguity(dm * df - p.doppler, lag)
                * cis(2.0 * PI * (p.doppler + mp as f64 * df) * lag)
                * cis(2.0 * PI * p.doppler * np as f64 * dt)
        })
        .sum()
}

/// A SISO channel realization with its TF and DD matrices.
#[derive(Debug, Clone)]
pub struct DdChannel {
    pub paths: Vec<DdPath>,
    pub h_tf: CMatrix,
    pub h_dd: CMatrix,
}

impl DdChannel {
    pub fn dim(&self) -> usize {
        self.h_dd.nrows()
    }

    /// SHA-256 of the path parameters, truncated to 64 bits.
    pub fn digest(&self) -> u64 {
        paths_digest(&self.paths)
    }
}

pub fn paths_digest(paths: &[DdPath]) -> u64 {
    let mut hasher = Sha256::new();
    for p in paths {
        for v in [p.gain.re, p.gain.im, p.delay, p.doppler] {
            hasher.update(v.to_le_bytes());
        }
    }
    let out = hasher.finalize();
    u64::from_le_bytes(out[..8].try_into().expect("digest is 32 bytes"))
}

/// Builds `H_tf` entry-wise, evaluating each ambiguity value once per
/// `(dm, dn, path)`, then `H_dd = A H_tf A^H`.
pub fn build_dd_channel(paths: &[DdPath], cfg: &SystemConfig, pulse: &RrcPulse) -> Result<DdChannel> {
    cfg.validate()?;
    for p in paths {
        p.validate()?;
    }
    let map = IndexMap::new(cfg.m, cfg.n);
    let (m, n) = (cfg.m as isize, cfg.n as isize);
    let df = cfg.subcarrier_spacing();
    let dt = cfg.symbol_interval();
    let width = (2 * m - 1) as usize;

    // tables[p][(dn + n - 1) * width + (dm + m - 1)] = h_p A(dm df - nu_p, dn dt - tau_p)
    let tables: Vec<Vec<Complex64>> = paths
        .par_iter()
        .map(|p| {
            let mut t = Vec::with_capacity(width * (2 * n - 1) as usize);
            for dn in -(n - 1)..=(n - 1) {
                for dm in -(m - 1)..=(m - 1) {
                    let a = if p.gain == ZERO {
                        ZERO
                    } else {
                        pulse.cross_ambiguity(dm as f64 * df - p.doppler, dn as f64 * dt - p.delay)
                    };
                    t.push(p.gain * a);
                }
            }
            t
        })
        .collect();

    let dim = map.len();
    let mut h_tf = CMatrix::zeros(dim, dim);
    for (p, table) in paths.iter().zip(&tables) {
        for col in 0..dim {
            let (mp, np) = map.grid(col);
            let doppler_phase = cis(2.0 * PI * p.doppler * np as f64 * dt);
            let carrier = p.doppler + mp as f64 * df;
            for row in 0..dim {
                let (mr, nr) = map.grid(row);
                let dm = mr as isize - mp as isize;
                let dn = nr as isize - np as isize;
                let amb = table[(dn + n - 1) as usize * width + (dm + m - 1) as usize];
                let lag = dn as f64 * dt - p.delay;
                h_tf[(row, col)] += amb * cis(2.0 * PI * carrier * lag) * doppler_phase;
            }
        }
    }
    let a = sfft_matrix(map);
    let h_dd = &a * &h_tf * a.adjoint();
    Ok(DdChannel {
        paths: paths.to_vec(),
        h_tf,
        h_dd,
    })
}

/// `n_r x n_t` grid of independently drawn SISO links.
#[derive(Debug, Clone)]
pub struct MimoChannel {
    /// Row-major over `(r, t)`: `blocks[r * n_t + t]`.
    pub blocks: Vec<DdChannel>,
    pub n_r: usize,
    pub n_t: usize,
    /// `(MN n_r) x (MN n_t)` block matrix of the DD channels.
    pub h_mimo_dd: CMatrix,
}

impl MimoChannel {
    pub fn block(&self, r: usize, t: usize) -> &DdChannel {
        &self.blocks[r * self.n_t + t]
    }

    pub fn assemble(blocks: Vec<DdChannel>, n_r: usize, n_t: usize) -> Result<Self> {
        if blocks.len() != n_r * n_t {
            return Err(Error::dim(format!("{} blocks", n_r * n_t), blocks.len().to_string()));
        }
        let mn = blocks[0].h_dd.nrows();
        let mut h = CMatrix::zeros(mn * n_r, mn * n_t);
        for r in 0..n_r {
            for t in 0..n_t {
                let b = &blocks[r * n_t + t].h_dd;
                if b.shape() != (mn, mn) {
                    return Err(Error::dim(format!("{mn}x{mn}"), format!("{:?}", b.shape())));
                }
                h.view_mut((r * mn, t * mn), (mn, mn)).copy_from(b);
            }
        }
        Ok(MimoChannel {
            blocks,
            n_r,
            n_t,
            h_mimo_dd: h,
        })
    }

    pub fn digest(&self) -> u64 {
        let paths: Vec<DdPath> = self.blocks.iter().flat_map(|b| b.paths.clone()).collect();
        paths_digest(&paths)
    }
}

/// Samples and builds the `(r, t)` links of realization `index`. Link
/// `(r, t)` draws from channel sub-stream `r * n_t + t`, so SISO runs see the
/// same link as the `(0, 0)` block of a MIMO run with the same seed.
pub fn build_mimo_channel(cfg: &SystemConfig, index: u64, pulse: &RrcPulse) -> Result<MimoChannel> {
    cfg.validate()?;
    let blocks = (0..cfg.n_r * cfg.n_t)
        .into_par_iter()
        .map(|sub| {
            let mut rng = rng::stream(cfg.seed, Purpose::Channel, index, sub as u64);
            let paths = sample_paths(cfg, &mut rng);
            build_dd_channel(&paths, cfg, pulse)
        })
        .collect::<Result<Vec<_>>>()?;
    MimoChannel::assemble(blocks, cfg.n_r, cfg.n_t)
}

/// Samples and builds the SISO link of realization `index`.
pub fn build_siso_channel(cfg: &SystemConfig, index: u64, pulse: &RrcPulse) -> Result<DdChannel> {
    let mut rng = rng::stream(cfg.seed, Purpose::Channel, index, 0);
    let paths = sample_paths(cfg, &mut rng);
    build_dd_channel(&paths, cfg, pulse)
}

/// Path list as JSON; matrices are rebuilt from it deterministically.
pub fn paths_to_json(paths: &[DdPath]) -> Result<String> {
    serde_json::to_string_pretty(paths).map_err(|e| Error::Numerical(e.to_string()))
}

pub fn paths_from_json(s: &str) -> Result<Vec<DdPath>> {
    let paths: Vec<DdPath> =
        serde_json::from_str(s).map_err(|e| Error::config("paths", e.to_string()))?;
    for p in &paths {
        p.validate()?;
    }
    Ok(paths)
}

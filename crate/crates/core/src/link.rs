//! Symbol-level link: mapping, precoding, channel, colored noise, LMMSE
//! equalization and hard-decision bit error counting.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{block_diag_repeat, solve_or_pinv, CMatrix, CVector};
use crate::noise::NoiseModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Constellation {
    #[default]
    Bpsk,
    /// Gray-mapped QPSK.
    Qpsk,
}

impl Constellation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Constellation::Bpsk => 1,
            Constellation::Qpsk => 2,
        }
    }

    /// Maps `bits` (length a multiple of `bits_per_symbol`) onto symbols of
    /// average energy `energy`.
    pub fn map(self, bits: &[bool], energy: f64) -> CVector {
        let amp = energy.sqrt();
        let sign = |b: bool| if b { -1.0 } else { 1.0 };
        match self {
            Constellation::Bpsk => CVector::from_iterator(
                bits.len(),
                bits.iter().map(|&b| Complex64::new(amp * sign(b), 0.0)),
            ),
            Constellation::Qpsk => {
                let a = amp / std::f64::consts::SQRT_2;
                CVector::from_iterator(
                    bits.len() / 2,
                    bits.chunks_exact(2)
                        .map(|c| Complex64::new(a * sign(c[0]), a * sign(c[1]))),
                )
            }
        }
    }

    /// Minimum-distance hard decisions.
    pub fn demap(self, symbols: &CVector) -> Vec<bool> {
        match self {
            Constellation::Bpsk => symbols.iter().map(|s| s.re < 0.0).collect(),
            Constellation::Qpsk => symbols.iter().flat_map(|s| [s.re < 0.0, s.im < 0.0]).collect(),
        }
    }

    /// Uniform random bits for `symbols` symbols, and their mapping.
    pub fn random<R: Rng + ?Sized>(self, symbols: usize, energy: f64, rng: &mut R) -> (Vec<bool>, CVector) {
        let bits: Vec<bool> = (0..symbols * self.bits_per_symbol()).map(|_| rng.random()).collect();
        let x = self.map(&bits, energy);
        (bits, x)
    }
}

/// `y = H P x + z`, with `z` drawn independently per receive antenna.
pub fn transmit<R: Rng + ?Sized>(
    h: &CMatrix,
    p: &CMatrix,
    x: &CVector,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<CVector> {
    if p.ncols() != x.len() || h.ncols() != p.nrows() {
        return Err(Error::dim(
            format!("H {}x{}, P {}x{}", h.nrows(), h.ncols(), h.ncols(), x.len()),
            format!("P {}x{}, x {}", p.nrows(), p.ncols(), x.len()),
        ));
    }
    let antennas = h.nrows() / noise.dim();
    if antennas * noise.dim() != h.nrows() {
        return Err(Error::dim(format!("multiple of {}", noise.dim()), h.nrows()));
    }
    Ok(h * (p * x) + noise.draw_stacked(antennas, rng))
}

/// Linear MMSE estimator for `y = B x + z`, `E[x x^H] = sigma_x2 I`,
/// `E[z z^H] = R_z`:
///
/// ```text
/// W = sigma_x2 B^H (sigma_x2 B B^H + R_z)^{-1}
/// ```
#[derive(Debug, Clone)]
pub struct MmseEqualizer {
    w: CMatrix,
    mse: f64,
}

impl MmseEqualizer {
    pub fn new(b: &CMatrix, r_z: &CMatrix, sigma_x2: f64) -> Result<Self> {
        let rows = b.nrows();
        if r_z.shape() != (rows, rows) {
            return Err(Error::dim(format!("{rows}x{rows}"), format!("{:?}", r_z.shape())));
        }
        let s = Complex64::new(sigma_x2, 0.0);
        let k = b * b.adjoint() * s + r_z;
        // W^H = sigma_x2 K^{-1} B, since K is Hermitian.
        let w = (solve_or_pinv(&k, b)? * s).adjoint();
        let wb = &w * b;
        let trace: f64 = (0..wb.nrows()).map(|i| wb[(i, i)].re).sum();
        let mse = sigma_x2 * (b.ncols() as f64 - trace);
        Ok(MmseEqualizer { w, mse })
    }

    /// Equalizer for `H P` under the model's colored noise, stacked over the
    /// receive antennas implied by `h`.
    pub fn for_link(h: &CMatrix, p: &CMatrix, noise: &NoiseModel, sigma_x2: f64) -> Result<Self> {
        let antennas = h.nrows() / noise.dim();
        let r_z = block_diag_repeat(&noise.covariance(), antennas);
        Self::new(&(h * p), &r_z, sigma_x2)
    }

    pub fn filter(&self) -> &CMatrix {
        &self.w
    }

    /// Analytic `E||x_hat - x||^2 = sigma_x2 tr(I - W B)` per frame.
    pub fn mse(&self) -> f64 {
        self.mse
    }

    pub fn equalize(&self, y: &CVector) -> CVector {
        &self.w * y
    }
}

/// Bit error tally with a Wilson score interval.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BerEstimate {
    pub errors: u64,
    pub bits: u64,
}

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959963984540054;

impl BerEstimate {
    pub fn new(errors: u64, bits: u64) -> Self {
        assert!(errors <= bits);
        BerEstimate { errors, bits }
    }

    pub fn ber(&self) -> f64 {
        if self.bits == 0 {
            0.0
        } else {
            self.errors as f64 / self.bits as f64
        }
    }

    /// Wilson 95% interval.
    pub fn interval(&self) -> (f64, f64) {
        if self.bits == 0 {
            return (0.0, 1.0);
        }
        let n = self.bits as f64;
        let p = self.ber();
        let z2 = Z95 * Z95;
        let centre = (p + z2 / (2.0 * n)) / (1.0 + z2 / n);
        let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / (1.0 + z2 / n);
        let lo = if self.errors == 0 { 0.0 } else { (centre - half).max(0.0) };
        let hi = if self.errors == self.bits { 1.0 } else { (centre + half).min(1.0) };
        (lo, hi)
    }

    pub fn merge(self, other: Self) -> Self {
        BerEstimate {
            errors: self.errors + other.errors,
            bits: self.bits + other.bits,
        }
    }
}

/// One simulated frame.
#[derive(Debug, Clone)]
pub struct LinkRealization {
    pub tx_bits: Vec<bool>,
    pub tx_symbols: CVector,
    pub rx: CVector,
    pub equalized: CVector,
    pub errors: u64,
}

/// A fixed channel, precoder and equalizer, reused across frames.
#[derive(Debug, Clone)]
pub struct Link {
    pub h: CMatrix,
    pub p: CMatrix,
    pub noise: NoiseModel,
    pub equalizer: MmseEqualizer,
    pub constellation: Constellation,
    pub sigma_x2: f64,
}

impl Link {
    pub fn new(h: CMatrix, p: CMatrix, noise: NoiseModel, constellation: Constellation, sigma_x2: f64) -> Result<Self> {
        let equalizer = MmseEqualizer::for_link(&h, &p, &noise, sigma_x2)?;
        Ok(Link {
            h,
            p,
            noise,
            equalizer,
            constellation,
            sigma_x2,
        })
    }

    pub fn frame<R: Rng + ?Sized>(&self, bits_rng: &mut R, noise_rng: &mut R) -> Result<LinkRealization> {
        let (tx_bits, tx_symbols) = self.constellation.random(self.p.ncols(), self.sigma_x2, bits_rng);
        let rx = transmit(&self.h, &self.p, &tx_symbols, &self.noise, noise_rng)?;
        let equalized = self.equalizer.equalize(&rx);
        let decided = self.constellation.demap(&equalized);
        let errors = decided.iter().zip(&tx_bits).filter(|(a, b)| a != b).count() as u64;
        Ok(LinkRealization {
            tx_bits,
            tx_symbols,
            rx,
            equalized,
            errors,
        })
    }

    /// Runs `frames` frames and tallies bit errors.
    pub fn measure_ber<R: Rng + ?Sized>(&self, frames: usize, bits_rng: &mut R, noise_rng: &mut R) -> Result<BerEstimate> {
        let mut est = BerEstimate::default();
        for _ in 0..frames {
            let f = self.frame(bits_rng, noise_rng)?;
            est = est.merge(BerEstimate::new(f.errors, f.tx_bits.len() as u64));
        }
        Ok(est)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gram::GramMatrix;
    use crate::index::IndexMap;
    use crate::linalg::max_abs;
    use crate::rng::{complex_normal, stream, Purpose};

    fn white(m: usize, n: usize, n0: f64) -> NoiseModel {
        NoiseModel::new(&GramMatrix::identity(IndexMap::new(m, n)), n0).unwrap()
    }

    #[test]
    fn mapping_round_trip_and_energy() {
        let mut rng = stream(0, Purpose::Bits, 0, 0);
        for c in [Constellation::Bpsk, Constellation::Qpsk] {
            let (bits, x) = c.random(64, 2.0, &mut rng);
            assert_eq!(c.demap(&x), bits);
            for s in x.iter() {
                assert!((s.norm_sqr() - 2.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn noiseless_identity_link() {
        let noise = white(2, 2, 0.0);
        let id = CMatrix::identity(4, 4);
        let x = CVector::from_fn(4, |i, _| Complex64::new(i as f64, 1.0));
        let mut rng = stream(0, Purpose::Noise, 0, 0);
        assert_eq!(transmit(&id, &id, &x, &noise, &mut rng).unwrap(), x);

        let link = Link::new(id.clone(), id, noise, Constellation::Bpsk, 1.0).unwrap();
        let mut b = stream(0, Purpose::Bits, 0, 0);
        let est = link.measure_ber(50, &mut b, &mut rng).unwrap();
        assert_eq!(est.errors, 0);
        assert_eq!(est.bits, 200);
    }

    #[test]
    fn zero_input_gives_noise_and_is_reproducible() {
        let noise = white(2, 2, 0.3);
        let id = CMatrix::identity(4, 4);
        let draw = || {
            let mut rng = stream(4, Purpose::Noise, 1, 0);
            transmit(&id, &id, &CVector::zeros(4), &noise, &mut rng).unwrap()
        };
        let mut rng = stream(4, Purpose::Noise, 1, 0);
        assert_eq!(draw(), noise.draw(&mut rng));
        assert_eq!(draw(), draw());
    }

    #[test]
    fn zero_forcing_limit() {
        let mut rng = stream(1, Purpose::Aux, 0, 0);
        let b = CMatrix::from_fn(4, 4, |_, _| complex_normal(&mut rng, 1.0));
        let noise = white(2, 2, 1e-12);
        let eq = MmseEqualizer::for_link(&b, &CMatrix::identity(4, 4), &noise, 1.0).unwrap();
        let x = CVector::from_fn(4, |_, _| complex_normal(&mut rng, 1.0));
        let xh = eq.equalize(&(&b * &x));
        assert!((xh - x).norm() < 1e-6);
    }

    #[test]
    fn null_channel_returns_prior_mean() {
        let noise = white(2, 1, 0.1);
        let eq = MmseEqualizer::for_link(&CMatrix::zeros(2, 2), &CMatrix::identity(2, 2), &noise, 1.0).unwrap();
        assert_eq!(max_abs(eq.filter()), 0.0);
        assert!((eq.mse() - 2.0).abs() < 1e-12);
    }

    #[test]
    fn scalar_wiener() {
        let h = Complex64::new(0.7, -0.4);
        let (s, n0) = (2.0, 0.5);
        let noise = white(1, 1, n0);
        let eq = MmseEqualizer::for_link(&CMatrix::from_element(1, 1, h), &CMatrix::identity(1, 1), &noise, s).unwrap();
        let want = h.conj() * s / (s * h.norm_sqr() + n0);
        assert!((eq.filter()[(0, 0)] - want).norm() < 1e-14);
    }

    #[test]
    fn pure_noise_guesses() {
        let noise = white(4, 2, 1.0);
        let link = Link::new(CMatrix::zeros(8, 8), CMatrix::identity(8, 8), noise, Constellation::Bpsk, 1.0).unwrap();
        let mut b = stream(2, Purpose::Bits, 0, 0);
        let mut z = stream(2, Purpose::Noise, 0, 0);
        let est = link.measure_ber(2000, &mut b, &mut z).unwrap();
        // x_hat = 0 decides every bit as 0, so half the random bits are wrong.
        let (lo, hi) = est.interval();
        assert!(lo <= 0.5 && 0.5 <= hi, "{est:?}");
    }

    #[test]
    fn wilson_interval() {
        let e = BerEstimate::new(0, 100);
        let (lo, hi) = e.interval();
        assert_eq!(lo, 0.0);
        assert!((hi - 0.036995).abs() < 1e-5);
        let (lo, hi) = BerEstimate::new(50, 100).interval();
        assert!((lo - 0.40383).abs() < 1e-4 && (hi - 0.59617).abs() < 1e-4);
    }

    #[test]
    fn dimension_errors() {
        let noise = white(2, 1, 0.1);
        let mut rng = stream(0, Purpose::Noise, 0, 0);
        let id = CMatrix::identity(2, 2);
        assert!(transmit(&id, &id, &CVector::zeros(3), &noise, &mut rng).is_err());
        assert!(MmseEqualizer::new(&id, &CMatrix::identity(3, 3), 1.0).is_err());
    }
}

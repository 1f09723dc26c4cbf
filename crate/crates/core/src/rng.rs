//! Deterministic random streams.
//!
//! Every random draw comes from a ChaCha8 generator keyed by the run seed and
//! positioned on a 64-bit stream id:
//!
//! ```text
//! stream = purpose << 56 | index << 24 | sub
//! ```
//!
//! `index` is the realization (or trial) number and `sub` distinguishes draws
//! inside one realization, e.g. the `(rx, tx)` antenna pair or the SNR point.
//! A given `(seed, purpose, index, sub)` always yields the same sequence, no
//! matter which thread consumes it or in what order.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Stream = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Purpose {
    Channel = 1,
    Noise = 2,
    Bits = 3,
    /// Reserved for test oracles and ad hoc sampling.
    Aux = 4,
}

const INDEX_BITS: u32 = 32;
const SUB_BITS: u32 = 24;

pub fn stream(seed: u64, purpose: Purpose, index: u64, sub: u64) -> Stream {
    assert!(index < (1 << INDEX_BITS), "realization index {index} too large");
    assert!(sub < (1 << SUB_BITS), "sub-stream {sub} too large");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 56) | (index << SUB_BITS) | sub);
    rng
}

/// Circularly-symmetric complex Gaussian sample with total variance `var`.
pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R, var: f64) -> Complex64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

//! Root raised-cosine pulse and its cross-ambiguity function.
//!
//! The matched receive filter of a real, even RRC pulse is the pulse itself, so
//! a single auto-ambiguity function
//!
//! ```text
//! A(f, tau) = ∫ g(t - tau) g(t) exp(-j 2 pi f (t - tau)) dt
//! ```
//!
//! serves both the Gram matrix and the TF channel entries.
//!
//! Two evaluation routes are provided. [`AmbiguityMethod::Spectral`] (the
//! default) integrates `G(nu) G(nu - f) exp(j 2 pi nu tau)` over the compact
//! support of the RRC spectrum, so it has no truncation error and reaches
//! machine precision. [`AmbiguityMethod::TimeDomain`] integrates the closed-form
//! impulse response over its truncated support with composite Gauss-Legendre
//! panels; its error is dominated by the `~1/t^2` tails cut at `±K T0`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, PI};

use crate::error::{Error, Result};
use crate::linalg::cis;
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AmbiguityMethod {
    Spectral,
    TimeDomain,
}

/// Nodes per spectral sub-segment; each sub-segment spans at most one
/// oscillation period of `exp(j 2 pi nu tau)`.
const SPECTRAL_NODES: usize = 24;

#[derive(Debug, Clone)]
pub struct RrcPulse {
    theta: f64,
    t0: f64,
    truncation_span: usize,
    samples_per_t0: usize,
    method: AmbiguityMethod,
    spectral_rule: GaussLegendre,
    time_rule: GaussLegendre,
}

impl RrcPulse {
    pub const DEFAULT_TRUNCATION_SPAN: usize = 32;
    pub const DEFAULT_SAMPLES_PER_T0: usize = 64;

    pub fn new(theta: f64, t0: f64) -> Result<Self> {
        Self::with_quadrature(
            theta,
            t0,
            Self::DEFAULT_TRUNCATION_SPAN,
            Self::DEFAULT_SAMPLES_PER_T0,
        )
    }

    pub fn with_quadrature(
        theta: f64,
        t0: f64,
        truncation_span: usize,
        samples_per_t0: usize,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&theta) {
            return Err(Error::config("theta", format!("must lie in [0, 1], got {theta}")));
        }
        if !(t0.is_finite() && t0 > 0.0) {
            return Err(Error::config("t0", format!("must be > 0, got {t0}")));
        }
        if truncation_span == 0 || samples_per_t0 == 0 {
            return Err(Error::config("truncation_span", "quadrature sizes must be >= 1"));
        }
        Ok(RrcPulse {
            theta,
            t0,
            truncation_span,
            samples_per_t0,
            method: AmbiguityMethod::Spectral,
            spectral_rule: GaussLegendre::new(SPECTRAL_NODES),
            time_rule: GaussLegendre::new(samples_per_t0),
        })
    }

    pub fn with_method(mut self, method: AmbiguityMethod) -> Self {
        self.method = method;
        self
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn truncation_span(&self) -> usize {
        self.truncation_span
    }

    pub fn samples_per_t0(&self) -> usize {
        self.samples_per_t0
    }

    pub fn method(&self) -> AmbiguityMethod {
        self.method
    }

    fn support(&self) -> f64 {
        self.truncation_span as f64 * self.t0
    }

    /// Edges of the flat band and of the roll-off band, in Hz.
    fn band_edges(&self) -> (f64, f64) {
        (
            (1.0 - self.theta) / (2.0 * self.t0),
            (1.0 + self.theta) / (2.0 * self.t0),
        )
    }

    /// Unit-energy RRC impulse response, zero outside `±K T0`.
    pub fn time(&self, t: f64) -> f64 {
        if t.abs() > self.support() {
            return 0.0;
        }
        self.time_untruncated(t)
    }

    fn time_untruncated(&self, t: f64) -> f64 {
        let theta = self.theta;
        let x = t / self.t0;
        let norm = 1.0 / self.t0.sqrt();
        if x.abs() < 1e-9 {
            return norm * (1.0 - theta + 4.0 * theta / PI);
        }
        let q = 4.0 * theta * x;
        let denom = PI * x * (1.0 - q * q);
        // Removable singularity at |t| = T0/(4 theta): evaluate through the
        // spectrum instead of losing digits to cancellation.
        if theta > 0.0 && (1.0 - q * q).abs() < 1e-4 {
            if (1.0 - q * q).abs() < 1e-13 {
                let arg = PI / (4.0 * theta);
                return norm
                    * theta
                    * FRAC_1_SQRT_2
                    * ((1.0 + 2.0 / PI) * arg.sin() + (1.0 - 2.0 / PI) * arg.cos());
            }
            return self.time_from_spectrum(t);
        }
        let num = (PI * x * (1.0 - theta)).sin() + q * (PI * x * (1.0 + theta)).cos();
        norm * num / denom
    }

    /// Inverse Fourier transform of the spectrum, `2 ∫_0^b G(nu) cos(2 pi nu t) dnu`.
    fn time_from_spectrum(&self, t: f64) -> f64 {
        let (a, b) = self.band_edges();
        let mut acc = 0.0;
        for (lo, hi) in [(0.0, a), (a, b)] {
            for (lo, hi) in split(lo, hi, t.abs()) {
                for (nu, w) in self.spectral_rule.mapped(lo, hi) {
                    acc += w * self.spectrum(nu) * (2.0 * PI * nu * t).cos();
                }
            }
        }
        2.0 * acc
    }

    /// Real, even RRC spectrum with unit energy.
    pub fn spectrum(&self, nu: f64) -> f64 {
        let (a, b) = self.band_edges();
        let v = nu.abs();
        let amp = self.t0.sqrt();
        if v <= a {
            amp
        } else if v <= b {
            amp * (PI * self.t0 / (2.0 * self.theta) * (v - a)).cos()
        } else {
            0.0
        }
    }

    /// Cross-ambiguity `A(f, tau)` of the pulse with itself.
    pub fn cross_ambiguity(&self, f: f64, tau: f64) -> Complex64 {
        match self.method {
            AmbiguityMethod::Spectral => self.ambiguity_spectral(f, tau),
            AmbiguityMethod::TimeDomain => self.ambiguity_time(f, tau),
        }
    }

    /// `∫ G(nu) G(nu - f) exp(j 2 pi nu tau) dnu`.
    fn ambiguity_spectral(&self, f: f64, tau: f64) -> Complex64 {
        let (a, b) = self.band_edges();
        let lo = (-b).max(f - b);
        let hi = b.min(f + b);
        if hi <= lo {
            return Complex64::new(0.0, 0.0);
        }
        let mut cuts = vec![lo, hi];
        cuts.extend(
            [-b, -a, a, b, f - b, f - a, f + a, f + b]
                .into_iter()
                .filter(|&c| c > lo && c < hi),
        );
        cuts.sort_by(f64::total_cmp);
        cuts.dedup();
        let mut acc = Complex64::new(0.0, 0.0);
        for seg in cuts.windows(2) {
            for (s, e) in split(seg[0], seg[1], tau.abs()) {
                for (nu, w) in self.spectral_rule.mapped(s, e) {
                    let mag = self.spectrum(nu) * self.spectrum(nu - f);
                    acc += cis(2.0 * PI * nu * tau) * (w * mag);
                }
            }
        }
        acc
    }

    /// `∫ g(u) g(u + tau) exp(-j 2 pi f u) du` over the truncated supports.
    fn ambiguity_time(&self, f: f64, tau: f64) -> Complex64 {
        let k = self.support();
        let lo = (-k).max(-tau - k);
        let hi = k.min(-tau + k);
        if hi <= lo {
            return Complex64::new(0.0, 0.0);
        }
        let panels = ((hi - lo) / self.t0).ceil().max(1.0) as usize;
        let width = (hi - lo) / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for p in 0..panels {
            let s = lo + p as f64 * width;
            for (u, w) in self.time_rule.mapped(s, s + width) {
                let mag = self.time(u) * self.time(u + tau);
                acc += cis(-2.0 * PI * f * u) * (w * mag);
            }
        }
        acc
    }
}

/// Splits `[lo, hi]` so that each piece holds at most one period of a phase
/// rotating at `rate` cycles per unit.
fn split(lo: f64, hi: f64, rate: f64) -> impl Iterator<Item = (f64, f64)> {
    let pieces = ((hi - lo) * rate).ceil().max(1.0) as usize;
    let width = (hi - lo) / pieces as f64;
    (0..pieces).map(move |i| (lo + i as f64 * width, lo + (i + 1) as f64 * width))
}

/// Free-function form of [`RrcPulse::time`].
pub fn rrc_time(t: f64, pulse: &RrcPulse) -> f64 {
    pulse.time(t)
}

/// Free-function form of [`RrcPulse::cross_ambiguity`].
pub fn cross_ambiguity(f: f64, tau: f64, pulse: &RrcPulse) -> Complex64 {
    pulse.cross_ambiguity(f, tau)
}

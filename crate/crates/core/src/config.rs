//! Scalar parameters shared by every stage of a simulation run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// All scalar parameters of one MC-FTN-OTFS configuration.
///
/// Times are in seconds and frequencies in Hz. The Nyquist subcarrier
/// spacing is always `1 / t0` and is derived on demand.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SystemConfig {
    /// Delay bins / subcarriers.
    pub m: usize,
    /// Doppler bins / time symbols per frame.
    pub n: usize,
    /// Time compression factor.
    pub alpha: f64,
    /// Frequency compression factor.
    pub beta: f64,
    /// RRC roll-off.
    pub theta: f64,
    pub t0: f64,
    pub e0: f64,
    pub sigma_x2: f64,
    pub n0: f64,
    /// Number of propagation paths per link.
    pub paths: usize,
    pub n_t: usize,
    pub n_r: usize,
    pub tau_max: f64,
    pub nu_max: f64,
    pub seed: u64,
    /// Permit `alpha < 1/(1+theta)`; near-null Gram modes are then deactivated.
    pub allow_deactivation: bool,
}

impl Default for SystemConfig {
    fn default() -> Self {
        SystemConfig {
            m: 8,
            n: 4,
            alpha: 1.0,
            beta: 1.0,
            theta: 0.25,
            t0: 1.0,
            e0: 1.0,
            sigma_x2: 1.0,
            n0: 0.1,
            paths: 3,
            n_t: 1,
            n_r: 1,
            tau_max: 2.0,
            nu_max: 0.1,
            seed: 0,
            allow_deactivation: false,
        }
    }
}

impl SystemConfig {
    /// Nyquist subcarrier spacing `1 / t0`.
    pub fn delta_f0(&self) -> f64 {
        1.0 / self.t0
    }

    /// Compressed symbol interval `alpha * t0`.
    pub fn symbol_interval(&self) -> f64 {
        self.alpha * self.t0
    }

    /// Compressed subcarrier spacing `beta / t0`.
    pub fn subcarrier_spacing(&self) -> f64 {
        self.beta * self.delta_f0()
    }

    /// Frame size `M * N`.
    pub fn frame_len(&self) -> usize {
        self.m * self.n
    }

    /// Linear SNR `sigma_x2 / n0`.
    pub fn snr(&self) -> f64 {
        self.sigma_x2 / self.n0
    }

    /// Copy with `n0` set so that `sigma_x2 / n0` equals `snr_db`.
    pub fn at_snr_db(&self, snr_db: f64) -> Self {
        let mut cfg = self.clone();
        cfg.n0 = self.sigma_x2 / 10f64.powf(snr_db / 10.0);
        cfg
    }

    /// Smallest time compression for which the Gram matrix stays invertible.
    pub fn min_alpha(&self) -> f64 {
        1.0 / (1.0 + self.theta)
    }

    pub fn validate(&self) -> Result<()> {
        fn positive(field: &'static str, v: f64) -> Result<()> {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::config(field, format!("must be finite and > 0, got {v}")))
            }
        }
        if self.m == 0 {
            return Err(Error::config("m", "must be >= 1"));
        }
        if self.n == 0 {
            return Err(Error::config("n", "must be >= 1"));
        }
        for (field, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::config(field, format!("must lie in (0, 1], got {v}")));
            }
        }
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::config(
                "theta",
                format!("must lie in [0, 1], got {}", self.theta),
            ));
        }
        positive("t0", self.t0)?;
        positive("e0", self.e0)?;
        positive("sigma_x2", self.sigma_x2)?;
        if !(self.n0.is_finite() && self.n0 >= 0.0) {
            return Err(Error::config("n0", format!("must be finite and >= 0, got {}", self.n0)));
        }
        if self.paths == 0 {
            return Err(Error::config("paths", "must be >= 1"));
        }
        if self.n_t == 0 {
            return Err(Error::config("n_t", "must be >= 1"));
        }
        if self.n_r == 0 {
            return Err(Error::config("n_r", "must be >= 1"));
        }
        for (field, v) in [("tau_max", self.tau_max), ("nu_max", self.nu_max)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::config(field, format!("must be finite and >= 0, got {v}")));
            }
        }
        let frame = self.m.checked_mul(self.n);
        let fits = frame
            .and_then(|f| f.checked_mul(self.n_t.max(self.n_r)))
            .is_some();
        if !fits {
            return Err(Error::config("m", "M*N*antennas overflows the index type"));
        }
        // Small slack so that e.g. alpha = 0.8 passes at theta = 0.25.
        if !self.allow_deactivation && self.alpha < self.min_alpha() - 1e-12 {
            return Err(Error::config(
                "alpha",
                format!(
                    "{} is below 1/(1+theta) = {:.6}; set allow_deactivation to run anyway",
                    self.alpha,
                    self.min_alpha()
                ),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_is_valid() {
        SystemConfig::default().validate().unwrap();
    }

    #[test]
    fn alpha_guard() {
        let cfg = SystemConfig {
            alpha: 0.7,
            theta: 0.25,
            ..Default::default()
        };
        match cfg.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "alpha"),
            other => panic!("unexpected {other:?}"),
        }
        let cfg = SystemConfig {
            allow_deactivation: true,
            ..cfg
        };
        cfg.validate().unwrap();

        let edge = SystemConfig {
            alpha: 0.8,
            ..Default::default()
        };
        edge.validate().unwrap();
    }

    #[test]
    fn rejects_bad_fields() {
        let bad = [
            SystemConfig { m: 0, ..Default::default() },
            SystemConfig { beta: 1.5, ..Default::default() },
            SystemConfig { theta: -0.1, ..Default::default() },
            SystemConfig { t0: 0.0, ..Default::default() },
            SystemConfig { n0: f64::NAN, ..Default::default() },
            SystemConfig { paths: 0, ..Default::default() },
            SystemConfig { n_r: 0, ..Default::default() },
            SystemConfig { tau_max: -1.0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(cfg.validate().is_err(), "{cfg:?}");
        }
    }

    #[test]
    fn snr_roundtrip() {
        let cfg = SystemConfig::default().at_snr_db(10.0);
        assert!((cfg.snr() - 10.0).abs() < 1e-12);
        assert_eq!(cfg.delta_f0(), 1.0);
    }

    #[test]
    fn json_fills_defaults() {
        let cfg: SystemConfig = serde_json::from_str(r#"{"alpha": 0.9, "n_t": 2}"#).unwrap();
        assert_eq!(cfg.alpha, 0.9);
        assert_eq!(cfg.n_t, 2);
        assert_eq!(cfg.m, 8);
        assert!(serde_json::from_str::<SystemConfig>(r#"{"alfa": 0.9}"#).is_err());
    }
}

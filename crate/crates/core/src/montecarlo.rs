//! SNR sweeps averaged over channel realizations.
//!
//! Realization `r` draws its channel from channel stream `r` and, for BER,
//! its bits and noise at SNR index `s` from streams `(r, s)`. Every scheme in
//! a sweep therefore sees the same channels, bits and noise, and scheme
//! differences are paired per realization.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{build_mimo_channel, MimoChannel};
use crate::config::SystemConfig;
use crate::error::{Error, Result};
use crate::gram::{build_gram, GramMatrix};
use crate::link::{BerEstimate, Constellation, Link};
use crate::noise::NoiseModel;
use crate::precode_mimo::{build_mimo_effective, sic_precode, wf_baseline, WfVariant};
use crate::precode_siso::{normalization, PowerMode, SisoPrecoder};
use crate::pulse::RrcPulse;
use crate::rng::{stream, Purpose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// EVD precoding with water-filling.
    SisoPa,
    /// EVD precoding with unit powers.
    SisoNopa,
    /// `P = I`.
    SisoUnprecoded,
    /// SIC-based per-stream precoding.
    Sic,
    /// Unstructured water-filling reference.
    WfRelaxed,
    /// Block-diagonal water-filling reference.
    WfStructured,
    /// Global optimum of the unstructured problem.
    WfWhitened,
}

impl Scheme {
    pub const ALL: [Scheme; 7] = [
        Scheme::SisoPa,
        Scheme::SisoNopa,
        Scheme::SisoUnprecoded,
        Scheme::Sic,
        Scheme::WfRelaxed,
        Scheme::WfStructured,
        Scheme::WfWhitened,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::SisoPa => "siso_pa",
            Scheme::SisoNopa => "siso_nopa",
            Scheme::SisoUnprecoded => "siso_unprecoded",
            Scheme::Sic => "sic",
            Scheme::WfRelaxed => "wf_relaxed",
            Scheme::WfStructured => "wf_structured",
            Scheme::WfWhitened => "wf_whitened",
        }
    }

    pub fn is_siso(self) -> bool {
        matches!(self, Scheme::SisoPa | Scheme::SisoNopa | Scheme::SisoUnprecoded)
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::config("schemes", format!("unknown scheme `{s}`")))
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    /// Normalized capacity in bit/s/Hz.
    Capacity,
    /// Uncoded bit error rate after LMMSE equalization.
    Ber,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub base: SystemConfig,
    /// Strictly increasing.
    pub snr_db: Vec<f64>,
    pub realizations: usize,
    pub schemes: Vec<Scheme>,
    pub metric: Metric,
    /// Frames per realization and SNR point for the BER metric.
    pub frames: usize,
    pub constellation: Constellation,
}

pub const DEFAULT_REALIZATIONS: usize = 500;

impl SweepSpec {
    pub fn new(base: SystemConfig, snr_db: Vec<f64>, schemes: Vec<Scheme>, metric: Metric) -> Self {
        SweepSpec {
            base,
            snr_db,
            realizations: DEFAULT_REALIZATIONS,
            schemes,
            metric,
            frames: 10,
            constellation: Constellation::Bpsk,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.base.validate()?;
        if self.realizations == 0 {
            return Err(Error::config("realizations", "must be >= 1"));
        }
        if self.snr_db.is_empty() {
            return Err(Error::config("snr_db", "must not be empty"));
        }
        if self.snr_db.iter().any(|v| !v.is_finite()) || self.snr_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::config("snr_db", "must be finite and strictly increasing"));
        }
        if self.schemes.is_empty() {
            return Err(Error::config("schemes", "must not be empty"));
        }
        let mimo = self.base.n_t > 1 || self.base.n_r > 1;
        if let Some(s) = self.schemes.iter().find(|s| mimo && s.is_siso()) {
            return Err(Error::config(
                "schemes",
                format!("`{s}` needs n_t = n_r = 1"),
            ));
        }
        if self.metric == Metric::Ber && self.frames == 0 {
            return Err(Error::config("frames", "must be >= 1"));
        }
        Ok(())
    }
}

/// Aggregate for one `(snr, scheme)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub snr_db: f64,
    pub scheme: Scheme,
    pub mean: f64,
    /// Sample standard deviation over realizations divided by `sqrt(n)`.
    pub stderr: f64,
    pub count: usize,
    /// Per-realization values in realization order.
    pub samples: Vec<f64>,
    /// Pooled bit errors, for the BER metric.
    pub ber: Option<BerEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepMetadata {
    pub spec: SweepSpec,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// SNR-major, then schemes in spec order.
    pub points: Vec<SweepPoint>,
    /// Channel digest of each realization.
    pub digests: Vec<u64>,
    pub metadata: SweepMetadata,
}

impl SweepResult {
    pub fn point(&self, snr_db: f64, scheme: Scheme) -> Option<&SweepPoint> {
        self.points
            .iter()
            .find(|p| p.snr_db == snr_db && p.scheme == scheme)
    }

    pub fn series(&self, scheme: Scheme) -> Vec<&SweepPoint> {
        self.points.iter().filter(|p| p.scheme == scheme).collect()
    }
}

/// Mean and standard error of `values`.
pub fn mean_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Shared, SNR-independent state of a sweep.
struct Context {
    pulse: RrcPulse,
    gram: GramMatrix,
    noise: NoiseModel,
}

/// Per-realization output: `values[snr][scheme]` and BER tallies alike.
struct Realization {
    digest: u64,
    values: Vec<Vec<f64>>,
    ber: Vec<Vec<BerEstimate>>,
}

pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let base = &spec.base;
    let pulse = RrcPulse::new(base.theta, base.t0)?;
    let gram = build_gram(base, &pulse)?;
    let noise = NoiseModel::new(&gram, base.n0)?;
    let ctx = Context { pulse, gram, noise };
    log::info!(
        "sweep: {} realizations, {} SNR points, {} schemes, gram condition {:.3e}",
        spec.realizations,
        spec.snr_db.len(),
        spec.schemes.len(),
        ctx.gram.condition_number()
    );

    let runs: Vec<Realization> = (0..spec.realizations)
        .into_par_iter()
        .map(|r| run_realization(spec, &ctx, r))
        .collect::<Result<_>>()?;

    let mut points = Vec::with_capacity(spec.snr_db.len() * spec.schemes.len());
    for (s, &snr_db) in spec.snr_db.iter().enumerate() {
        for (k, &scheme) in spec.schemes.iter().enumerate() {
            let samples: Vec<f64> = runs.iter().map(|r| r.values[s][k]).collect();
            let (mut mean, stderr) = mean_stderr(&samples);
            let ber = (spec.metric == Metric::Ber)
                .then(|| runs.iter().fold(BerEstimate::default(), |acc, r| acc.merge(r.ber[s][k])));
            if let Some(b) = ber {
                // Every realization sends the same number of bits, so the pooled
                // rate equals the sample mean up to round-off.
                mean = b.ber();
            }
            points.push(SweepPoint {
                snr_db,
                scheme,
                mean,
                stderr,
                count: samples.len(),
                samples,
                ber,
            });
        }
    }
    Ok(SweepResult {
        points,
        digests: runs.iter().map(|r| r.digest).collect(),
        metadata: SweepMetadata {
            spec: spec.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

fn run_realization(spec: &SweepSpec, ctx: &Context, r: usize) -> Result<Realization> {
    let wrap = |snr_db: f64| {
        move |e: Error| Error::Sweep {
            realization: r,
            snr_db,
            source: Box::new(e),
        }
    };
    let base = &spec.base;
    let channel = build_mimo_channel(base, r as u64, &ctx.pulse).map_err(wrap(f64::NAN))?;
    log::debug!("realization {r}: channel digest {:016x}", channel.digest());
    let d = build_mimo_effective(&ctx.gram, &channel.h_mimo_dd, base.n_r, base.n_t).map_err(wrap(f64::NAN))?;
    let mut values = Vec::with_capacity(spec.snr_db.len());
    let mut ber = Vec::with_capacity(spec.snr_db.len());
    for (s, &snr_db) in spec.snr_db.iter().enumerate() {
        let cfg = base.at_snr_db(snr_db);
        let mut row = Vec::with_capacity(spec.schemes.len());
        let mut ber_row = Vec::with_capacity(spec.schemes.len());
        for &scheme in &spec.schemes {
            let (capacity, p) = solve_scheme(scheme, &d, ctx, &cfg).map_err(wrap(snr_db))?;
            match spec.metric {
                Metric::Capacity => {
                    row.push(capacity);
                    ber_row.push(BerEstimate::default());
                }
                Metric::Ber => {
                    let est = simulate_ber(spec, ctx, &channel, p, &cfg, r, s).map_err(wrap(snr_db))?;
                    row.push(est.ber());
                    ber_row.push(est);
                }
            }
        }
        values.push(row);
        ber.push(ber_row);
    }
    Ok(Realization {
        digest: channel.digest(),
        values,
        ber,
    })
}

/// Normalized capacity and precoder of `scheme` on whitened channel `d`.
fn solve_scheme(scheme: Scheme, d: &crate::CMatrix, ctx: &Context, cfg: &SystemConfig) -> Result<(f64, crate::CMatrix)> {
    let snr = cfg.snr();
    let siso = |mode| -> Result<(f64, crate::CMatrix)> {
        let pre = SisoPrecoder::solve(d.clone(), &ctx.gram, snr, mode)?;
        Ok((pre.capacity(cfg)?, pre.p))
    };
    let wf = |variant| -> Result<(f64, crate::CMatrix)> {
        let sol = wf_baseline(d, &ctx.gram, cfg.n_t, snr, variant)?;
        Ok((sol.raw_capacity / normalization(cfg), sol.p))
    };
    match scheme {
        Scheme::SisoPa => siso(PowerMode::WaterFilling),
        Scheme::SisoNopa => siso(PowerMode::Uniform),
        Scheme::SisoUnprecoded => siso(PowerMode::Unprecoded),
        Scheme::Sic => {
            let state = sic_precode(d, &ctx.gram, cfg.n_t, snr)?;
            Ok((state.capacity(cfg), state.precoder()))
        }
        Scheme::WfRelaxed => wf(WfVariant::Relaxed),
        Scheme::WfStructured => wf(WfVariant::Structured),
        Scheme::WfWhitened => wf(WfVariant::Whitened),
    }
}

fn simulate_ber(
    spec: &SweepSpec,
    ctx: &Context,
    channel: &MimoChannel,
    p: crate::CMatrix,
    cfg: &SystemConfig,
    r: usize,
    s: usize,
) -> Result<BerEstimate> {
    let noise = ctx.noise.with_n0(cfg.n0);
    let link = Link::new(channel.h_mimo_dd.clone(), p, noise, spec.constellation, cfg.sigma_x2)?;
    let mut bits = stream(cfg.seed, Purpose::Bits, r as u64, s as u64);
    let mut z = stream(cfg.seed, Purpose::Noise, r as u64, s as u64);
    link.measure_ber(spec.frames, &mut bits, &mut z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::build_siso_channel;

    fn small() -> SystemConfig {
        SystemConfig {
            m: 4,
            n: 2,
            alpha: 0.9,
            beta: 0.9,
            seed: 11,
            ..Default::default()
        }
    }

    #[test]
    fn degenerate_sweep_matches_direct_call() {
        let mut spec = SweepSpec::new(small(), vec![10.0], vec![Scheme::SisoPa], Metric::Capacity);
        spec.realizations = 1;
        let res = run_sweep(&spec).unwrap();
        assert_eq!(res.points.len(), 1);

        let cfg = small().at_snr_db(10.0);
        let pulse = RrcPulse::new(cfg.theta, cfg.t0).unwrap();
        let gram = build_gram(&cfg, &pulse).unwrap();
        let ch = build_siso_channel(&cfg, 0, &pulse).unwrap();
        let want = SisoPrecoder::for_channel(&gram, &ch.h_dd, &cfg, PowerMode::WaterFilling)
            .unwrap()
            .capacity(&cfg)
            .unwrap();
        assert_eq!(res.points[0].mean, want);
        assert_eq!(res.points[0].stderr, 0.0);
        assert_eq!(res.digests, vec![ch.digest()]);
    }

    #[test]
    fn deterministic_and_paired() {
        let mut spec = SweepSpec::new(
            small(),
            vec![0.0, 10.0],
            vec![Scheme::SisoPa, Scheme::SisoNopa],
            Metric::Capacity,
        );
        spec.realizations = 12;
        let a = run_sweep(&spec).unwrap();
        let b = run_sweep(&spec).unwrap();
        assert_eq!(a, b);
        for snr in [0.0, 10.0] {
            let pa = a.point(snr, Scheme::SisoPa).unwrap();
            let nopa = a.point(snr, Scheme::SisoNopa).unwrap();
            assert_eq!(pa.count, 12);
            for (x, y) in pa.samples.iter().zip(&nopa.samples) {
                assert!(x - y >= -1e-9);
            }
        }
    }

    #[test]
    fn ber_sweep_pools_bits() {
        let mut spec = SweepSpec::new(small(), vec![0.0, 20.0], vec![Scheme::SisoNopa], Metric::Ber);
        spec.realizations = 3;
        spec.frames = 4;
        let res = run_sweep(&spec).unwrap();
        for p in &res.points {
            let b = p.ber.unwrap();
            assert_eq!(b.bits, 3 * 4 * 8);
            assert!((p.mean - p.samples.iter().sum::<f64>() / 3.0).abs() < 1e-12);
        }
        let series = res.series(Scheme::SisoNopa);
        assert!(series[1].mean <= series[0].mean);
    }

    #[test]
    fn validation() {
        let ok = SweepSpec::new(small(), vec![0.0], vec![Scheme::Sic], Metric::Capacity);
        assert!(ok.validate().is_ok());
        let mut bad = ok.clone();
        bad.snr_db = vec![5.0, 5.0];
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.realizations = 0;
        assert!(bad.validate().is_err());
        let mut bad = ok.clone();
        bad.base.n_t = 2;
        bad.schemes = vec![Scheme::SisoPa];
        assert!(bad.validate().is_err());
    }

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("nope".parse::<Scheme>().is_err());
    }

    #[test]
    fn mean_stderr_formula() {
        let (m, s) = mean_stderr(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m, 2.5);
        assert!((s - (5.0f64 / 3.0 / 4.0).sqrt()).abs() < 1e-15);
    }
}

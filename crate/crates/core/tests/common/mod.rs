//! Independent reference computations shared by the integration tests.
//!
//! Everything here works in the time domain, straight from the defining
//! integrals and sums, with its own RRC formula. None of it calls the
//! library's pulse, Gram, channel or transform code.

#![allow(dead_code)]

use mcftn_core::quadrature::GaussLegendre;
use mcftn_core::{CMatrix, SystemConfig};
use num_complex::Complex64;
use std::f64::consts::{PI, SQRT_2};

/// Unit-energy RRC impulse response with roll-off `theta` and period `t0`.
pub fn rrc(t: f64, theta: f64, t0: f64) -> f64 {
    let x = t / t0;
    let scale = 1.0 / t0.sqrt();
    if x == 0.0 {
        return scale * (1.0 - theta + 4.0 * theta / PI);
    }
    if theta == 0.0 {
        return scale * (PI * x).sin() / (PI * x);
    }
    let edge = 1.0 / (4.0 * theta);
    if (x.abs() - edge).abs() < 1e-12 {
        let a = PI / (4.0 * theta);
        return scale * theta / SQRT_2 * ((1.0 + 2.0 / PI) * a.sin() + (1.0 - 2.0 / PI) * a.cos());
    }
    let num = (PI * x * (1.0 - theta)).sin() + 4.0 * theta * x * (PI * x * (1.0 + theta)).cos();
    let den = PI * x * (1.0 - (4.0 * theta * x).powi(2));
    scale * num / den
}

/// Points where `rrc` switches to its limit form.
pub fn rrc_singular_points(theta: f64, t0: f64) -> Vec<f64> {
    if theta == 0.0 {
        vec![0.0]
    } else {
        let e = t0 / (4.0 * theta);
        vec![-e, 0.0, e]
    }
}

/// Integral of `f` over `[lo, hi]` by composite Gauss-Legendre on panels of
/// width at most `panel`, split at every point of `breaks`.
pub fn integrate(
    f: impl Fn(f64) -> Complex64,
    lo: f64,
    hi: f64,
    panel: f64,
    breaks: &[f64],
    rule: &GaussLegendre,
) -> Complex64 {
    let mut cuts: Vec<f64> = vec![lo, hi];
    let count = ((hi - lo) / panel).ceil() as usize;
    cuts.extend((1..count).map(|i| lo + i as f64 * panel));
    cuts.extend(breaks.iter().copied().filter(|b| *b > lo && *b < hi));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
    let mut total = Complex64::new(0.0, 0.0);
    for w in cuts.windows(2) {
        for (x, wt) in rule.mapped(w[0], w[1]) {
            total += f(x) * wt;
        }
    }
    total
}

/// Half-width of the time window, in units of `t0`, over which pulse
/// products are integrated. The RRC product tail beyond it is below 1e-11.
pub const TIME_SPAN: f64 = 2000.0;

/// `E[Z[m1,n1] Z*[m2,n2]] / N0` by direct quadrature of the matched-filter
/// noise correlation integral.
pub fn noise_correlation(cfg: &SystemConfig, (m1, n1): (usize, usize), (m2, n2): (usize, usize)) -> Complex64 {
    let (theta, t0) = (cfg.theta, cfg.t0);
    let df = cfg.beta / t0;
    let dt = cfg.alpha * t0;
    let dm = m1 as f64 - m2 as f64;
    let lag = (n1 as f64 - n2 as f64) * dt;
    let integrand = |t: f64| {
        let g = rrc(t - lag, theta, t0) * rrc(t, theta, t0);
        Complex64::from_polar(g, -2.0 * PI * dm * df * (t - lag))
    };
    let mut breaks = Vec::new();
    for s in rrc_singular_points(theta, t0) {
        breaks.push(s);
        breaks.push(s + lag);
    }
    let rule = GaussLegendre::new(24);
    let span = TIME_SPAN * t0;
    let value = integrate(integrand, -span + lag.min(0.0), span + lag.max(0.0), t0, &breaks, &rule);
    value * Complex64::from_polar(1.0, 2.0 * PI * m2 as f64 * df * (n1 as f64 - n2 as f64) * dt)
}

/// Full `G` from [`noise_correlation`], rows and columns in flat order `n M + m`.
pub fn gram_oracle(cfg: &SystemConfig) -> CMatrix {
    let m = cfg.m;
    let dim = cfg.m * cfg.n;
    CMatrix::from_fn(dim, dim, |r, c| noise_correlation(cfg, (r % m, r / m), (c % m, c / m)))
}

/// One path of a delay-Doppler channel.
#[derive(Debug, Clone, Copy)]
pub struct Path {
    pub gain: Complex64,
    pub delay: f64,
    pub doppler: f64,
}

/// `H_{m,n}[m', n']` by integrating the matched-filter output of one
/// transmitted basis pulse through the channel directly:
///
/// `h ∫ g(t' - t) g(t' - tau - n' alpha T0) exp(j2π m' beta df0 (t' - tau - n' alpha T0))
///    exp(j2π nu (t' - tau)) exp(-j2π f (t' - t)) dt'` at `f = m beta df0`, `t = n alpha T0`.
pub fn tf_entry_oracle(cfg: &SystemConfig, paths: &[Path], (m, n): (usize, usize), (mp, np): (usize, usize)) -> Complex64 {
    let (theta, t0) = (cfg.theta, cfg.t0);
    let df = cfg.beta / t0;
    let dt = cfg.alpha * t0;
    let rule = GaussLegendre::new(24);
    let t = n as f64 * dt;
    let f = m as f64 * df;
    paths
        .iter()
        .map(|p| {
            let shift = p.delay + np as f64 * dt;
            let integrand = |tp: f64| {
                let g = rrc(tp - t, theta, t0) * rrc(tp - shift, theta, t0);
                let phase = 2.0 * PI * (mp as f64 * df * (tp - shift) + p.doppler * (tp - p.delay) - f * (tp - t));
                Complex64::from_polar(g, phase)
            };
            let mut breaks = Vec::new();
            for s in rrc_singular_points(theta, t0) {
                breaks.push(s + t);
                breaks.push(s + shift);
            }
            let span = TIME_SPAN * t0;
            let lo = t.min(shift) - span;
            let hi = t.max(shift) + span;
            p.gain * integrate(integrand, lo, hi, t0, &breaks, &rule)
        })
        .sum()
}

/// Full `H_tf` from [`tf_entry_oracle`].
pub fn tf_channel_oracle(cfg: &SystemConfig, paths: &[Path]) -> CMatrix {
    let m = cfg.m;
    let dim = cfg.m * cfg.n;
    CMatrix::from_fn(dim, dim, |r, c| tf_entry_oracle(cfg, paths, (r % m, r / m), (c % m, c / m)))
}

/// `H_dd[(l,k),(l',k')] = 1/(NM) Σ_{n,m,n',m'} H_{m,n}[m',n']
///   exp(-j2π(nk/N - ml/M)) exp(j2π(n'k'/N - m'l'/M))`, literally.
pub fn dd_channel_quadruple_sum(h_tf: &CMatrix, m_bins: usize, n_bins: usize) -> CMatrix {
    let dim = m_bins * n_bins;
    let (mf, nf) = (m_bins as f64, n_bins as f64);
    CMatrix::from_fn(dim, dim, |row, col| {
        let (l, k) = (row % m_bins, row / m_bins);
        let (lp, kp) = (col % m_bins, col / m_bins);
        let mut acc = Complex64::new(0.0, 0.0);
        for n in 0..n_bins {
            for m in 0..m_bins {
                for np in 0..n_bins {
                    for mp in 0..m_bins {
                        let h = h_tf[(n * m_bins + m, np * m_bins + mp)];
                        let phase = -2.0 * PI * ((n * k) as f64 / nf - (m * l) as f64 / mf)
                            + 2.0 * PI * ((np * kp) as f64 / nf - (mp * lp) as f64 / mf);
                        acc += h * Complex64::from_polar(1.0, phase);
                    }
                }
            }
        }
        acc / (mf * nf)
    })
}

/// ISFFT by its double sum: `X[m,n] = 1/sqrt(NM) Σ_k Σ_l x[l,k] exp(j2π(nk/N - ml/M))`.
/// Grids are indexed `[l][k]` and `[m][n]`.
pub fn isfft_double_sum(x: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let m_bins = x.len();
    let n_bins = x[0].len();
    let norm = 1.0 / ((m_bins * n_bins) as f64).sqrt();
    (0..m_bins)
        .map(|m| {
            (0..n_bins)
                .map(|n| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (l, row) in x.iter().enumerate() {
                        for (k, v) in row.iter().enumerate() {
                            let phase = 2.0 * PI
                                * ((n * k) as f64 / n_bins as f64 - (m * l) as f64 / m_bins as f64);
                            acc += v * Complex64::from_polar(1.0, phase);
                        }
                    }
                    acc * norm
                })
                .collect()
        })
        .collect()
}

/// SFFT by its double sum: `y[l,k] = 1/sqrt(NM) Σ_n Σ_m Y[m,n] exp(-j2π(nk/N - ml/M))`.
pub fn sfft_double_sum(y: &[Vec<Complex64>]) -> Vec<Vec<Complex64>> {
    let m_bins = y.len();
    let n_bins = y[0].len();
    let norm = 1.0 / ((m_bins * n_bins) as f64).sqrt();
    (0..m_bins)
        .map(|l| {
            (0..n_bins)
                .map(|k| {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (m, row) in y.iter().enumerate() {
                        for (n, v) in row.iter().enumerate() {
                            let phase = -2.0 * PI
                                * ((n * k) as f64 / n_bins as f64 - (m * l) as f64 / m_bins as f64);
                            acc += v * Complex64::from_polar(1.0, phase);
                        }
                    }
                    acc * norm
                })
                .collect()
        })
        .collect()
}

/// Column-major flattening `k M + l`.
pub fn flatten(grid: &[Vec<Complex64>]) -> Vec<Complex64> {
    let m_bins = grid.len();
    let n_bins = grid[0].len();
    (0..m_bins * n_bins).map(|i| grid[i % m_bins][i / m_bins]).collect()
}

/// Gaussian tail `Q(x)`.
pub fn q_function(x: f64) -> f64 {
    0.5 * libm::erfc(x / SQRT_2)
}

/// Maximizes `Σ log2(1 + s g_k p_k)` over `Σ w_k p_k <= budget`, `p >= 0`, by
/// projected gradient ascent in the variables `e_k = w_k p_k`, with exact
/// Euclidean projection onto the scaled simplex.
pub fn projected_gradient_waterfill(gains: &[f64], weights: &[f64], snr: f64, budget: f64) -> Vec<f64> {
    let k = gains.len();
    // Effective gain per unit energy.
    let a: Vec<f64> = gains.iter().zip(weights).map(|(g, w)| snr * g / w).collect();
    let mut e = vec![budget / k as f64; k];
    let amax = a.iter().copied().fold(0.0, f64::max);
    // Lipschitz constant of the gradient is max a^2 / ln2 at e = 0.
    let mut step = std::f64::consts::LN_2 / (amax * amax).max(1e-300);
    let objective = |e: &[f64]| -> f64 { e.iter().zip(&a).map(|(x, ai)| (1.0 + ai * x).log2()).sum() };
    let mut value = objective(&e);
    for _ in 0..200_000 {
        let grad: Vec<f64> = e
            .iter()
            .zip(&a)
            .map(|(x, ai)| ai / ((1.0 + ai * x) * std::f64::consts::LN_2))
            .collect();
        let trial: Vec<f64> = e.iter().zip(&grad).map(|(x, g)| x + step * g).collect();
        let next = project_simplex(&trial, budget);
        let next_value = objective(&next);
        let moved: f64 = next.iter().zip(&e).map(|(x, y)| (x - y).abs()).sum();
        if next_value + 1e-15 < value {
            step *= 0.5;
            continue;
        }
        e = next;
        value = next_value;
        step *= 1.5;
        if moved < 1e-15 * budget {
            break;
        }
    }
    e.iter().zip(weights).map(|(x, w)| x / w).collect()
}

/// Euclidean projection of `v` onto `{x >= 0, Σ x = total}`.
pub fn project_simplex(v: &[f64], total: f64) -> Vec<f64> {
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut shift = 0.0;
    for (i, ui) in u.iter().enumerate() {
        cumsum += ui;
        let candidate = (cumsum - total) / (i + 1) as f64;
        if ui - candidate > 0.0 {
            shift = candidate;
        }
    }
    v.iter().map(|x| (x - shift).max(0.0)).collect()
}

pub fn sum_rate(gains: &[f64], power: &[f64], snr: f64) -> f64 {
    gains.iter().zip(power).map(|(g, p)| (1.0 + snr * g * p).log2()).sum()
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

//! Weighted water-filling.
//!
//! Solves
//!
//! ```text
//! max  sum_k log2(1 + snr * p_k * gain_k)
//! s.t. sum_k p_k * weight_k <= budget,  p_k >= 0
//! ```
//!
//! whose KKT solution is `p_k = max(1/(xi weight_k ln2) - 1/(snr gain_k), 0)`.
//! The multiplier `xi` is located by bisection on `log xi`; the budget is
//! strictly decreasing in `xi` wherever any mode is on, so the bracket always
//! collapses onto the unique root. The result is then polished in closed form
//! on the identified active set.

/// Weights at or below this are treated as round-off of a true zero and the
/// mode is switched off.
pub const WEIGHT_FLOOR: f64 = 1e-12;
/// Gains below this fraction of the largest gain are treated as null modes.
pub const GAIN_FLOOR_REL: f64 = 1e-12;

const LOG_XI_MIN: f64 = -12.0 * std::f64::consts::LN_10;
const LOG_XI_MAX: f64 = 12.0 * std::f64::consts::LN_10;
const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct WaterFill {
    /// Allocated power per mode, `p_k >= 0`.
    pub power: Vec<f64>,
    /// Lagrange multiplier; `None` when every mode is null.
    pub xi: Option<f64>,
}

impl WaterFill {
    pub fn active(&self) -> usize {
        self.power.iter().filter(|&&p| p > 0.0).count()
    }
}

/// Water-fills `budget` over modes with channel gains `gains` and cost weights
/// `weights` at linear SNR `snr = sigma_x2 / N0`.
pub fn waterfill(gains: &[f64], weights: &[f64], snr: f64, budget: f64) -> WaterFill {
    assert_eq!(gains.len(), weights.len(), "gains and weights differ in length");
    assert!(budget >= 0.0 && snr >= 0.0);
    let max_gain = gains.iter().copied().fold(0.0, f64::max);
    // Water level at which mode k switches on, scaled by its weight: c_k = w_k / (snr g_k).
    let thresholds: Vec<Option<f64>> = gains
        .iter()
        .zip(weights)
        .map(|(&g, &w)| {
            let usable = g > GAIN_FLOOR_REL * max_gain && g > 0.0 && w > WEIGHT_FLOOR && snr > 0.0;
            usable.then(|| w / (snr * g))
        })
        .collect();
    let zero = WaterFill {
        power: vec![0.0; gains.len()],
        xi: None,
    };
    if budget == 0.0 || thresholds.iter().all(Option::is_none) {
        return zero;
    }

    // Budget consumed at level mu = 1/(xi ln2), in the weighted form sum (mu - c_k)^+.
    let spent = |mu: f64| -> f64 {
        thresholds
            .iter()
            .flatten()
            .map(|&c| (mu - c).max(0.0))
            .sum()
    };
    let level = |log_xi: f64| 1.0 / (log_xi.exp() * std::f64::consts::LN_2);

    let (mut lo, mut hi) = (LOG_XI_MIN, LOG_XI_MAX);
    // Widen the bracket if the extreme budgets still lie on one side.
    while spent(level(lo)) < budget && lo > -700.0 {
        lo -= 10.0;
    }
    while spent(level(hi)) > budget && hi < 700.0 {
        hi += 10.0;
    }
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if spent(level(mid)) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let mu_bisect = level(0.5 * (lo + hi));

    // Closed form on the active set: |S| mu - sum_S c = budget.
    let mut active: Vec<f64> = thresholds
        .iter()
        .flatten()
        .copied()
        .filter(|&c| c < mu_bisect)
        .collect();
    if active.is_empty() {
        // Bisection stopped just below the smallest threshold.
        let min = thresholds.iter().flatten().copied().fold(f64::INFINITY, f64::min);
        active.push(min);
    }
    let mu = (budget + active.iter().sum::<f64>()) / active.len() as f64;

    let power = thresholds
        .iter()
        .zip(weights)
        .map(|(c, &w)| match c {
            Some(c) if *c < mu => (mu - c) / w,
            _ => 0.0,
        })
        .collect();
    WaterFill {
        power,
        xi: Some(1.0 / (mu * std::f64::consts::LN_2)),
    }
}

/// `sum_k log2(1 + snr p_k g_k)`.
pub fn sum_rate(gains: &[f64], power: &[f64], snr: f64) -> f64 {
    gains
        .iter()
        .zip(power)
        .map(|(&g, &p)| (1.0 + snr * p * g.max(0.0)).log2())
        .sum()
}

//! Optimal discrimination thresholds for the two fluorescence states.

use super::AnalysisError;
use crate::math::{poisson_pmf, poisson_sf};

/// Total misclassification probability at integer threshold `n`:
/// `P(dark >= n) + P(bright < n)`.
pub fn misclassification(n: u32, mean_bright: f64, mean_dark: f64) -> f64 {
    let below_bright: f64 = (0..n).map(|k| poisson_pmf(u64::from(k), mean_bright)).sum();
    poisson_sf(u64::from(n), mean_dark) + below_bright
}

/// Optimal per-bin count threshold: the integer in `(mean_dark,
/// mean_bright]` minimizing the summed Poisson misclassification
/// probabilities, ties broken toward smaller counts.
#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN inputs must land in the error arm
pub fn optimal_count_threshold(mean_bright: f64, mean_dark: f64) -> Result<u32, AnalysisError> {
    if !(mean_bright > mean_dark) || mean_dark < 0.0 {
        return Err(AnalysisError::MeansOutOfOrder {
            bright: mean_bright,
            dark: mean_dark,
        });
    }
    let lo = (mean_dark.floor() as u32) + 1;
    let hi = mean_bright.floor() as u32;
    if hi < lo {
        return Err(AnalysisError::NoThresholdCandidate);
    }
    let mut best = lo;
    let mut best_cost = misclassification(lo, mean_bright, mean_dark);
    for n in (lo + 1)..=hi {
        let cost = misclassification(n, mean_bright, mean_dark);
        if cost < best_cost {
            best = n;
            best_cost = cost;
        }
    }
    Ok(best)
}

/// Optimal delay threshold separating bright-state photon gaps from dark
/// stretches: the maximizer of
/// `p_det(tau) = exp(-r_off tau) (1 - exp(-r_on tau))`,
/// in closed form `ln(1 + r_on/r_off) / r_on`.
pub fn optimal_delay_threshold(r_on: f64, r_off: f64) -> Result<f64, AnalysisError> {
    if r_on <= 0.0 || r_off <= 0.0 {
        return Err(AnalysisError::NonPositiveRate { r_on, r_off });
    }
    Ok((1.0 + r_on / r_off).ln() / r_on)
}

/// The detection probability the delay threshold maximizes.
pub fn detection_probability(tau: f64, r_on: f64, r_off: f64) -> f64 {
    (-r_off * tau).exp() * (1.0 - (-r_on * tau).exp())
}

//! Two-component Poisson mixture fit of the fluorescence count histogram.

use super::{AnalysisError, FluorescenceTrace};
use crate::math::{ln_factorial, poisson_pmf};

const MAX_ITERATIONS: usize = 500;
const RELATIVE_TOL: f64 = 1e-10;

/// Estimate the bright and dark per-bin means from a fluorescence trace by
/// expectation-maximization over a two-Poisson mixture.
///
/// Initialization takes the lower and upper quartiles of the observed count
/// support. Returns `(mean_bright, mean_dark)`, sorted descending.
pub fn estimate_state_means(trace: &FluorescenceTrace) -> Result<(f64, f64), AnalysisError> {
    // Collapse the trace to (count value, frequency).
    let mut histogram: Vec<(u32, f64)> = Vec::new();
    {
        let mut sorted: Vec<u32> = trace.counts.clone();
        sorted.sort_unstable();
        for &c in &sorted {
            match histogram.last_mut() {
                Some((value, freq)) if *value == c => *freq += 1.0,
                _ => histogram.push((c, 1.0)),
            }
        }
    }
    if histogram.len() < 2 {
        return Err(AnalysisError::DegenerateMixture);
    }
    let support: Vec<u32> = histogram.iter().map(|(v, _)| *v).collect();
    let mut lambda_dark = f64::from(support[support.len() / 4]).max(1e-3);
    let mut lambda_bright = f64::from(support[3 * support.len() / 4]).max(lambda_dark + 1e-3);
    let mut weight_bright = 0.5f64;
    let total: f64 = histogram.iter().map(|(_, f)| f).sum();

    for _ in 0..MAX_ITERATIONS {
        // E step in log space.
        let mut resp_sum = 0.0; // total responsibility of the bright component
        let mut bright_counts = 0.0;
        let mut dark_counts = 0.0;
        let mut dark_resp = 0.0;
        for &(value, freq) in &histogram {
            let k = u64::from(value);
            let log_b = weight_bright.ln() + k as f64 * lambda_bright.ln()
                - lambda_bright
                - ln_factorial(k);
            let log_d = (1.0 - weight_bright).ln() + k as f64 * lambda_dark.ln()
                - lambda_dark
                - ln_factorial(k);
            let m = log_b.max(log_d);
            let wb = (log_b - m).exp();
            let wd = (log_d - m).exp();
            let gamma = wb / (wb + wd);
            resp_sum += gamma * freq;
            dark_resp += (1.0 - gamma) * freq;
            bright_counts += gamma * freq * f64::from(value);
            dark_counts += (1.0 - gamma) * freq * f64::from(value);
        }
        if resp_sum < 1e-12 || dark_resp < 1e-12 {
            return Err(AnalysisError::DegenerateMixture);
        }
        let new_bright = bright_counts / resp_sum;
        let new_dark = dark_counts / dark_resp;
        let new_weight = resp_sum / total;

        let delta = rel_change(lambda_bright, new_bright)
            .max(rel_change(lambda_dark, new_dark))
            .max((weight_bright - new_weight).abs());
        lambda_bright = new_bright;
        lambda_dark = new_dark;
        weight_bright = new_weight;
        if delta < RELATIVE_TOL {
            let (hi, lo) = if lambda_bright >= lambda_dark {
                (lambda_bright, lambda_dark)
            } else {
                (lambda_dark, lambda_bright)
            };
            // Components closer than twice the Poisson counting width are
            // not two resolvable states; a single-state histogram lands
            // here with a spurious sub-width split.
            if hi - lo < 2.0 * hi.sqrt() || !(1e-4..=1.0 - 1e-4).contains(&weight_bright) {
                return Err(AnalysisError::DegenerateMixture);
            }
            return Ok((hi, lo));
        }
    }
    // EM keeps drifting on data a single Poisson already explains; report
    // that as a degenerate mixture rather than a generic iteration cap.
    if lambda_bright.max(lambda_dark) - lambda_bright.min(lambda_dark)
        < 2.0 * lambda_bright.max(lambda_dark).sqrt()
    {
        return Err(AnalysisError::DegenerateMixture);
    }
    Err(AnalysisError::EmNonConvergence(MAX_ITERATIONS))
}

fn rel_change(old: f64, new: f64) -> f64 {
    (new - old).abs() / old.max(1e-12)
}

/// Log-likelihood of a fitted mixture, for diagnostics and tests.
pub fn mixture_log_likelihood(
    trace: &FluorescenceTrace,
    mean_bright: f64,
    mean_dark: f64,
    weight_bright: f64,
) -> f64 {
    trace
        .counts
        .iter()
        .map(|&c| {
            let k = u64::from(c);
            (weight_bright * poisson_pmf(k, mean_bright)
                + (1.0 - weight_bright) * poisson_pmf(k, mean_dark))
            .max(1e-300)
            .ln()
        })
        .sum()
}

//! Time-tag analysis pipeline: fluorescence binning, on/off thresholds,
//! quantum-jump extraction, correlation histograms and model fits.
//!
//! The jump analysis runs in three steps: an optimal per-bin count
//! threshold discriminates the bright and dark states, a moving average
//! over the binned trace localizes the jumps and buffers the nearby
//! detection times, and a gap scan over the buffered times assigns the
//! first (or last) fluorescence photon as the jump instant.

mod binning;
mod correlation;
mod fit;
mod jumps;
mod mixture;
mod threshold;

pub use binning::{bin_counts, FluorescenceTrace};
pub use correlation::{g2, peak_significance, CorrelationHistogram};
pub use fit::{
    derived_absorption_rate, evaluate, fit_exponential, fit_lorentzian, fit_sinusoid_fixed_period,
    r_squared, weighted_line_slope, weighted_mean, FitModel, FitResult, SinusoidFit,
};
pub use jumps::{
    dark_period_durations, detect_jumps, extract_transition_photon, JumpDirection, JumpEvent,
};
pub use mixture::{estimate_state_means, mixture_log_likelihood};
pub use threshold::{
    detection_probability, misclassification, optimal_count_threshold, optimal_delay_threshold,
};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum AnalysisError {
    #[error("bin size must be positive, got {0}")]
    NonPositiveBin(f64),
    #[error("bright mean {bright} must exceed dark mean {dark}")]
    MeansOutOfOrder { bright: f64, dark: f64 },
    #[error("no integer threshold lies between the state means")]
    NoThresholdCandidate,
    #[error("rates must be positive, got r_on = {r_on}, r_off = {r_off}")]
    NonPositiveRate { r_on: f64, r_off: f64 },
    #[error("EM did not converge within {0} iterations")]
    EmNonConvergence(usize),
    #[error("count histogram does not resolve two states")]
    DegenerateMixture,
    #[error("window contains no detection times")]
    EmptyWindow,
    #[error("no gap in the window satisfies the delay-threshold condition")]
    AmbiguousWindow,
    #[error("correlation background is zero")]
    ZeroBackground,
    #[error("need at least {needed} points, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("point uncertainties must be positive")]
    NonPositiveUncertainty,
    #[error("fit did not converge within {0} iterations")]
    FitNonConvergence(usize),
    #[error("design matrix is singular")]
    DegenerateDesign,
    #[error("points must span at least one period")]
    InsufficientSpan,
    #[error("need tau_on <= tau_off, got {tau_on} > {tau_off}")]
    TauOrder { tau_on: f64, tau_off: f64 },
    #[error("durations must be positive")]
    NonPositiveDuration,
}

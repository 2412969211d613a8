//! Detector timing jitter: truncated Gaussian delay plus a fixed offset.

use rand::RngExt;

use crate::rng::truncated_normal_sample;

/// FWHM of a Gaussian in units of its standard deviation, `2 sqrt(2 ln 2)`.
pub const FWHM_TO_SIGMA: f64 = 2.354_820_045_030_949;

const TRUNCATION_SIGMA: f64 = 5.0;

/// Gaussian delay model, truncated at ±5 sigma. The fixed offset (cable and
/// optical path delay) defaults to 5 sigma so sampled delays are never
/// negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JitterModel {
    pub fwhm_s: f64,
    pub offset_s: f64,
}

impl JitterModel {
    pub fn new(fwhm_s: f64) -> Self {
        let sigma = fwhm_s / FWHM_TO_SIGMA;
        JitterModel {
            fwhm_s,
            offset_s: TRUNCATION_SIGMA * sigma,
        }
    }

    /// No jitter, no offset.
    pub fn off() -> Self {
        JitterModel {
            fwhm_s: 0.0,
            offset_s: 0.0,
        }
    }

    pub fn sigma_s(&self) -> f64 {
        self.fwhm_s / FWHM_TO_SIGMA
    }
}

impl Default for JitterModel {
    /// 1 ns FWHM, the class of timing resolution of the counting hardware.
    fn default() -> Self {
        JitterModel::new(1e-9)
    }
}

/// Sample one detector delay.
pub fn detector_jitter(model: &JitterModel, rng: &mut impl RngExt) -> f64 {
    if model.fwhm_s <= 0.0 {
        return model.offset_s;
    }
    model.offset_s + model.sigma_s() * truncated_normal_sample(rng, TRUNCATION_SIGMA)
}

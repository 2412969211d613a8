//! SPDC photon-pair source model: Poissonian pair emission with strict
//! frequency anticorrelation, narrowband herald filtering, polarization
//! analysis and splitter configuration.

mod analyzer;
mod pair_state;

pub use analyzer::{hwp_matrix, qwp_matrix, qwp_prepared, AnalyzerSetting, PolarizerAxis};
pub use pair_state::{BellState, PairPolarizationState, PartnerState};

use rand::RngExt;
use thiserror::Error;

use crate::atom::PolarizationState;
use crate::math::lorentzian_peak;
use crate::rng::{exp_sample, truncated_lorentzian_sample};

/// The raw idler spectrum is sampled on `±TRUNCATION_FWHM` times its FWHM.
pub const TRUNCATION_FWHM: f64 = 5.0;

#[derive(Debug, Error, PartialEq)]
pub enum SourceError {
    #[error("pair rate must be nonnegative, got {0}")]
    NegativeRate(f64),
    #[error("bandwidth must be positive, got {0}")]
    NonPositiveBandwidth(f64),
    #[error("efficiency must lie in [0, 1], got {0}")]
    EfficiencyOutOfRange(f64),
    #[error("Werner visibility must lie in [0, 1], got {0}")]
    VisibilityOutOfRange(f64),
    #[error("density matrix is not Hermitian")]
    NotHermitian,
    #[error("density matrix has trace {0}, expected 1")]
    TraceNotOne(f64),
    #[error("density matrix is not positive semidefinite")]
    NotPositive,
    #[error("herald setting is incompatible with the pair state (zero projection probability)")]
    IncompatibleHeraldSetting,
}

/// How the pair is split between the ion arm and the herald arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Splitter {
    /// Polarizing beam splitter: the type-II pair is sorted
    /// deterministically into fixed orthogonal polarizations (signal H to
    /// the ion, idler V to the herald) and the entanglement is destroyed.
    Pbs,
    /// Non-polarizing beam splitter: conditioned on the pair splitting, the
    /// polarization state is preserved; the 50% loss to same-port events is
    /// folded into `herald_efficiency`.
    Npbs,
}

/// Source configuration.
#[derive(Debug, Clone)]
pub struct SourceConfig {
    /// Generated pairs per second.
    pub pair_rate: f64,
    /// Raw SPDC bandwidth (FWHM), GHz.
    pub raw_bandwidth_fwhm_ghz: f64,
    /// Herald filter-cavity transmission FWHM, MHz.
    pub filter_fwhm_mhz: f64,
    /// Filter center relative to the atomic line, MHz.
    pub filter_detuning_mhz: f64,
    /// Herald-arm detection efficiency (coupling, filter losses, detector).
    pub herald_efficiency: f64,
    /// Pump offset from twice the atomic line center, MHz.
    pub pump_offset_mhz: f64,
    pub splitter: Splitter,
    pub pair_state: PairPolarizationState,
    pub herald_analyzer: AnalyzerSetting,
}

impl Default for SourceConfig {
    fn default() -> Self {
        SourceConfig {
            pair_rate: 2.0e4,
            raw_bandwidth_fwhm_ghz: 200.0,
            filter_fwhm_mhz: 22.0,
            filter_detuning_mhz: 0.0,
            herald_efficiency: 1.0,
            pump_offset_mhz: 0.0,
            splitter: Splitter::Pbs,
            pair_state: PairPolarizationState::product(
                &PolarizationState::horizontal(),
                &PolarizationState::vertical(),
            ),
            herald_analyzer: AnalyzerSetting::open(),
        }
    }
}

impl SourceConfig {
    pub fn validate(&self) -> Result<(), SourceError> {
        if self.pair_rate < 0.0 {
            return Err(SourceError::NegativeRate(self.pair_rate));
        }
        if self.raw_bandwidth_fwhm_ghz <= 0.0 {
            return Err(SourceError::NonPositiveBandwidth(
                self.raw_bandwidth_fwhm_ghz,
            ));
        }
        if self.filter_fwhm_mhz <= 0.0 {
            return Err(SourceError::NonPositiveBandwidth(self.filter_fwhm_mhz));
        }
        if !(0.0..=1.0).contains(&self.herald_efficiency) {
            return Err(SourceError::EfficiencyOutOfRange(self.herald_efficiency));
        }
        Ok(())
    }

    /// The pair state after the splitter; a PBS forces a fixed product
    /// state regardless of what the crystal produced.
    pub fn effective_pair_state(&self) -> PairPolarizationState {
        match self.splitter {
            Splitter::Pbs => PairPolarizationState::product(
                &PolarizationState::horizontal(),
                &PolarizationState::vertical(),
            ),
            Splitter::Npbs => self.pair_state.clone(),
        }
    }
}

/// One generated pair.
#[derive(Debug, Clone)]
pub struct PairEvent {
    pub time_s: f64,
    /// Signal (ion-arm) detuning from the atomic line, MHz.
    pub signal_detuning_mhz: f64,
    /// Idler (herald-arm) detuning from the atomic line, MHz.
    pub idler_detuning_mhz: f64,
    pub herald_detected: bool,
    /// Pure signal polarization after the herald-arm polarizer collapsed
    /// the pair (sampled from the conditional eigen-ensemble when mixed).
    pub signal_polarization: PolarizationState,
}

impl PairEvent {
    /// The heralded partner polarization; defined exactly when the herald
    /// fired.
    pub fn conditional_signal_polarization(&self) -> Option<&PolarizationState> {
        self.herald_detected.then_some(&self.signal_polarization)
    }
}

/// Peak-normalized transmission of the herald filter cavity.
pub fn filter_transmission(detuning_mhz: f64, fwhm_mhz: f64) -> f64 {
    lorentzian_peak(detuning_mhz, fwhm_mhz)
}

/// Born-rule projection of the pair onto a herald analyzer outcome; returns
/// the outcome probability and the conditional partner state.
pub fn project_pair(
    state: &PairPolarizationState,
    herald_outcome: &AnalyzerSetting,
) -> Result<(f64, PartnerState), SourceError> {
    match herald_outcome.projector() {
        Some(a) => state.project_idler(&a),
        None => Ok((1.0, state.signal_marginal())),
    }
}

/// Precomputed per-pair sampling data: analyzer pass probability and the
/// pure-state ensembles for both branches.
struct CollapseTable {
    pass_prob: f64,
    pass: Vec<(f64, PolarizationState)>,
    fail: Vec<(f64, PolarizationState)>,
}

impl CollapseTable {
    fn build(cfg: &SourceConfig) -> Result<Self, SourceError> {
        let state = cfg.effective_pair_state();
        match cfg.herald_analyzer.projector() {
            None => {
                let marginal = state.signal_marginal();
                Ok(CollapseTable {
                    pass_prob: 1.0,
                    pass: marginal.eigen_ensemble(),
                    fail: Vec::new(),
                })
            }
            Some(a) => {
                let (p_pass, conditional) = match state.project_idler(&a) {
                    Ok(x) => x,
                    Err(SourceError::IncompatibleHeraldSetting) => {
                        // Analyzer never fires; all pairs take the fail branch.
                        let marginal = state.signal_marginal();
                        return Ok(CollapseTable {
                            pass_prob: 0.0,
                            pass: Vec::new(),
                            fail: marginal.eigen_ensemble(),
                        });
                    }
                    Err(e) => return Err(e),
                };
                let orth = PolarizationState::new(-a.v.conj(), a.h.conj())
                    .expect("orthogonal state of a unit vector");
                let fail = match state.project_idler(&orth) {
                    Ok((_, partner)) => partner.eigen_ensemble(),
                    Err(_) => Vec::new(),
                };
                Ok(CollapseTable {
                    pass_prob: p_pass,
                    pass: conditional.eigen_ensemble(),
                    fail,
                })
            }
        }
    }

    fn sample(&self, rng: &mut impl RngExt) -> (bool, PolarizationState) {
        let pass = self.pass_prob > 0.0 && rng.random::<f64>() < self.pass_prob;
        let ensemble = if pass { &self.pass } else { &self.fail };
        debug_assert!(!ensemble.is_empty());
        let state = if ensemble.len() == 1 {
            ensemble[0].1
        } else {
            let u = rng.random::<f64>();
            let mut acc = 0.0;
            let mut chosen = ensemble[ensemble.len() - 1].1;
            for (w, s) in ensemble {
                acc += w;
                if u < acc {
                    chosen = *s;
                    break;
                }
            }
            chosen
        };
        (pass, state)
    }
}

/// Lazy stream of pair events; the event-driven simulator consumes this
/// without materializing the whole list.
pub struct PairIter<R: RngExt> {
    cfg: SourceConfig,
    collapse: CollapseTable,
    rng: R,
    t: f64,
    duration_s: f64,
}

impl<R: RngExt> PairIter<R> {
    pub fn new(cfg: &SourceConfig, duration_s: f64, rng: R) -> Result<Self, SourceError> {
        cfg.validate()?;
        let collapse = CollapseTable::build(cfg)?;
        Ok(PairIter {
            cfg: cfg.clone(),
            collapse,
            rng,
            t: 0.0,
            duration_s,
        })
    }
}

impl<R: RngExt> Iterator for PairIter<R> {
    type Item = PairEvent;

    fn next(&mut self) -> Option<PairEvent> {
        if self.cfg.pair_rate <= 0.0 {
            return None;
        }
        self.t += exp_sample(&mut self.rng, self.cfg.pair_rate);
        if self.t >= self.duration_s {
            return None;
        }
        let raw_fwhm_mhz = self.cfg.raw_bandwidth_fwhm_ghz * 1e3;
        let idler = truncated_lorentzian_sample(&mut self.rng, raw_fwhm_mhz, TRUNCATION_FWHM);
        let signal = -2.0 * self.cfg.pump_offset_mhz - idler;
        let (analyzer_pass, signal_polarization) = self.collapse.sample(&mut self.rng);
        let herald_detected = if analyzer_pass {
            let t_filter = filter_transmission(
                idler - self.cfg.filter_detuning_mhz,
                self.cfg.filter_fwhm_mhz,
            );
            self.rng.random::<f64>() < t_filter * self.cfg.herald_efficiency
        } else {
            false
        };
        Some(PairEvent {
            time_s: self.t,
            signal_detuning_mhz: signal,
            idler_detuning_mhz: idler,
            herald_detected,
            signal_polarization,
        })
    }
}

/// Generate the full ordered pair list for a finite duration.
pub fn generate_pairs(
    cfg: &SourceConfig,
    duration_s: f64,
    rng: impl RngExt,
) -> Result<Vec<PairEvent>, SourceError> {
    Ok(PairIter::new(cfg, duration_s, rng)?.collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream;

    /// Numeric oracle: mean herald probability over the truncated raw
    /// spectrum, `∫ T_filter(δ - Δ) ρ_raw(δ) dδ` by Simpson's rule.
    fn herald_fraction_oracle(cfg: &SourceConfig) -> f64 {
        let raw = cfg.raw_bandwidth_fwhm_ghz * 1e3;
        let lim = TRUNCATION_FWHM * raw;
        let n = 400_001usize; // odd number of points for Simpson
        let dx = 2.0 * lim / (n - 1) as f64;
        let gamma = raw / 2.0;
        let density = |x: f64| gamma / (std::f64::consts::PI * (x * x + gamma * gamma));
        let mass: f64 = 2.0 / std::f64::consts::PI * (2.0 * TRUNCATION_FWHM).atan();
        let mut acc = 0.0;
        for i in 0..n {
            let x = -lim + i as f64 * dx;
            let w = if i == 0 || i == n - 1 {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            acc += w
                * filter_transmission(x - cfg.filter_detuning_mhz, cfg.filter_fwhm_mhz)
                * density(x);
        }
        acc * dx / 3.0 / mass
    }

    #[test]
    fn filter_transmission_values() {
        assert!((filter_transmission(0.0, 22.0) - 1.0).abs() < 1e-15);
        assert!((filter_transmission(11.0, 22.0) - 0.5).abs() < 1e-15);
        assert!((filter_transmission(110.0, 22.0) - 1.0 / 101.0).abs() < 1e-15);
    }

    #[test]
    fn zero_rate_produces_nothing() {
        let cfg = SourceConfig {
            pair_rate: 0.0,
            ..SourceConfig::default()
        };
        let pairs = generate_pairs(&cfg, 10.0, stream(1, 1)).unwrap();
        assert!(pairs.is_empty());
    }

    #[test]
    fn pair_times_are_ordered_and_poissonian() {
        let cfg = SourceConfig::default();
        let pairs = generate_pairs(&cfg, 5.0, stream(2, 1)).unwrap();
        assert!(pairs.windows(2).all(|w| w[0].time_s <= w[1].time_s));
        let n = pairs.len() as f64;
        let expect = cfg.pair_rate * 5.0;
        assert!((n - expect).abs() < 4.0 * expect.sqrt(), "{n} vs {expect}");
    }

    #[test]
    fn interarrival_times_pass_ks_test() {
        // Kolmogorov-Smirnov against the exponential law at the 1% level.
        let cfg = SourceConfig {
            pair_rate: 1.0e5,
            ..SourceConfig::default()
        };
        let pairs = generate_pairs(&cfg, 1.0, stream(3, 1)).unwrap();
        assert!(pairs.len() > 90_000);
        let mut gaps: Vec<f64> = pairs
            .windows(2)
            .map(|w| w[1].time_s - w[0].time_s)
            .collect();
        gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = gaps.len() as f64;
        let mean: f64 = gaps.iter().sum::<f64>() / n;
        let mut d: f64 = 0.0;
        for (i, g) in gaps.iter().enumerate() {
            let cdf = 1.0 - (-g / mean).exp();
            let emp_hi = (i as f64 + 1.0) / n;
            let emp_lo = i as f64 / n;
            d = d.max((cdf - emp_lo).abs()).max((emp_hi - cdf).abs());
        }
        // 1% critical value for large n.
        let critical = 1.63 / n.sqrt();
        assert!(d < critical, "KS statistic {d} vs {critical}");
    }

    #[test]
    fn frequency_anticorrelation_holds() {
        let cfg = SourceConfig {
            pump_offset_mhz: 7.5,
            ..SourceConfig::default()
        };
        let pairs = generate_pairs(&cfg, 0.1, stream(4, 1)).unwrap();
        for p in &pairs {
            let sum = p.signal_detuning_mhz + p.idler_detuning_mhz;
            assert!((sum + 2.0 * cfg.pump_offset_mhz).abs() < 1e-9);
        }
    }

    #[test]
    fn herald_fraction_matches_numeric_integral() {
        let cfg = SourceConfig {
            pair_rate: 1.0e6,
            herald_efficiency: 1.0,
            ..SourceConfig::default()
        };
        let expect = herald_fraction_oracle(&cfg);
        // The analytic ballpark: fwhm_filter / (fwhm_filter + fwhm_raw),
        // corrected for the ±5 FWHM truncation of the sampled spectrum.
        let a = cfg.filter_fwhm_mhz;
        let b = cfg.raw_bandwidth_fwhm_ghz * 1e3;
        let trunc_mass = 2.0 / std::f64::consts::PI * (2.0 * TRUNCATION_FWHM).atan();
        let analytic = a / (a + b) / trunc_mass;
        assert!(
            (expect - analytic).abs() / analytic < 1e-3,
            "{expect} vs {analytic}"
        );

        let pairs = generate_pairs(&cfg, 20.0, stream(5, 1)).unwrap();
        let n = pairs.len() as f64;
        let heralds = pairs.iter().filter(|p| p.herald_detected).count() as f64;
        let frac = heralds / n;
        let sigma = (expect / n).sqrt();
        assert!(
            (frac - expect).abs() < 4.0 * sigma,
            "observed {frac:e}, expected {expect:e} ± {sigma:e}"
        );
    }

    #[test]
    fn heralded_signal_detunings_center_at_minus_filter_detuning() {
        let detuning = 60.0;
        let cfg = SourceConfig {
            pair_rate: 2.0e6,
            filter_detuning_mhz: detuning,
            herald_efficiency: 1.0,
            ..SourceConfig::default()
        };
        let pairs = generate_pairs(&cfg, 10.0, stream(6, 1)).unwrap();
        let mut heralded: Vec<f64> = pairs
            .iter()
            .filter(|p| p.herald_detected)
            .map(|p| p.signal_detuning_mhz)
            .collect();
        assert!(heralded.len() > 1000, "{}", heralded.len());
        // The heralded detunings are Lorentzian-distributed, so locate the
        // center by the median rather than the heavy-tailed mean.
        heralded.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let median = heralded[heralded.len() / 2];
        assert!(
            (median + detuning).abs() < 3.0,
            "heralded signal detunings center at {median}, expected {}",
            -detuning
        );
    }

    #[test]
    fn pbs_mode_forces_fixed_product_polarizations() {
        let cfg = SourceConfig {
            pair_state: PairPolarizationState::bell(BellState::PsiPlus),
            splitter: Splitter::Pbs,
            pair_rate: 1e4,
            ..SourceConfig::default()
        };
        let pairs = generate_pairs(&cfg, 0.1, stream(7, 1)).unwrap();
        let h = PolarizationState::horizontal();
        for p in &pairs {
            assert!((p.signal_polarization.overlap(&h) - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn npbs_mode_preserves_entangled_correlations() {
        // Heralding PsiPlus on H forces the partner to V.
        let cfg = SourceConfig {
            pair_state: PairPolarizationState::bell(BellState::PsiPlus),
            splitter: Splitter::Npbs,
            herald_analyzer: AnalyzerSetting::polarizer(PolarizerAxis::Horizontal),
            pair_rate: 1e5,
            herald_efficiency: 1.0,
            filter_fwhm_mhz: 1e9, // far wider than the sampled spectrum
            ..SourceConfig::default()
        };
        let pairs = generate_pairs(&cfg, 0.1, stream(8, 1)).unwrap();
        let v = PolarizationState::vertical();
        let heralded: Vec<_> = pairs.iter().filter(|p| p.herald_detected).collect();
        assert!(heralded.len() > 1000);
        for p in heralded {
            assert!((p.signal_polarization.overlap(&v) - 1.0).abs() < 1e-9);
        }
        // Roughly half of all pairs pass the H analyzer.
        let passed = pairs.iter().filter(|p| p.herald_detected).count() as f64;
        let frac = passed / pairs.len() as f64;
        assert!((frac - 0.5).abs() < 0.02, "pass fraction {frac}");
    }

    #[test]
    fn config_validation() {
        let cfg = SourceConfig {
            herald_efficiency: 1.5,
            ..SourceConfig::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(SourceError::EfficiencyOutOfRange(_))
        ));
        let cfg = SourceConfig {
            filter_fwhm_mhz: 0.0,
            ..SourceConfig::default()
        };
        assert!(matches!(
            cfg.validate(),
            Err(SourceError::NonPositiveBandwidth(_))
        ));
    }
}

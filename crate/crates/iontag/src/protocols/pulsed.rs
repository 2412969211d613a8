//! Pulsed coincidence experiments: cool/pump/detect cycles in which the
//! prepared ion absorbs from the source during a gated exposure window and
//! the fluorescence onset is correlated against the herald channel.
//!
//! The engine works at the event level: the bulk fluorescence stream is
//! never generated, only the onset marker of each cycle (the first
//! detected fluorescence photon trails the transition by an exponential
//! delay of mean `1/r_on`, exactly the latency the full pipeline would
//! recover). Pairs are generated inside the exposure windows, i.e. the
//! detectors are gated.

use rand::RngExt;

use super::ProtocolError;
use crate::analysis::{
    fit_lorentzian, fit_sinusoid_fixed_period, g2, CorrelationHistogram, FitResult, SinusoidFit,
};
use crate::atom::{
    absorption_polarization_overlap, MagneticField, PolarizationState, TransitionTable,
};
use crate::rng::{exp_sample, stream, stream_id};
use crate::sim::{
    detector_jitter, AbsorptionModel, Acceptance, JitterModel, Scheme, TrajectoryConfig,
};
use crate::source::{AnalyzerSetting, PairIter, SourceConfig, Splitter};

/// One pulsed run: preparation acceptance + source + cycle structure.
#[derive(Debug, Clone)]
pub struct PulsedConfig {
    pub source: SourceConfig,
    pub acceptance: Acceptance,
    pub field: MagneticField,
    /// Atomic absorption linewidth (FWHM), MHz.
    pub atom_fwhm_mhz: f64,
    /// Absorption rate at resonance and matched polarization, 1/s.
    pub absorption_peak_rate: f64,
    /// Prepared-state lifetime, s.
    pub tau0_s: f64,
    /// Detected fluorescence rate once bright; sets the onset latency.
    pub r_on: f64,
    /// Full cycle period (cooling + pumping + exposure), s.
    pub cycle_period_s: f64,
    /// Gated exposure window per cycle, s.
    pub exposure_s: f64,
    pub cycles: usize,
    /// Correlation grid, s.
    pub g2_bin_s: f64,
    pub g2_max_lag_s: f64,
    pub jitter: JitterModel,
    pub master_seed: u64,
}

impl Default for PulsedConfig {
    fn default() -> Self {
        PulsedConfig {
            source: SourceConfig::default(),
            acceptance: Acceptance::PumpedOuter { upper: true },
            field: MagneticField::default_lab(),
            atom_fwhm_mhz: 22.0,
            absorption_peak_rate: 0.0,
            tau0_s: 1.11,
            r_on: 2.0e5,
            cycle_period_s: 20e-3,
            exposure_s: 5e-3,
            cycles: 10_000,
            g2_bin_s: 10e-6,
            g2_max_lag_s: 2e-3,
            jitter: JitterModel::default(),
            master_seed: 0,
        }
    }
}

impl PulsedConfig {
    fn validate(&self) -> Result<(), ProtocolError> {
        if self.exposure_s <= 0.0 || self.cycle_period_s < self.exposure_s {
            return Err(ProtocolError::InvalidConfig(
                "need 0 < exposure <= cycle period".into(),
            ));
        }
        if self.cycles == 0 {
            return Err(ProtocolError::InvalidConfig(
                "need at least one cycle".into(),
            ));
        }
        if self.r_on <= 0.0 || self.tau0_s <= 0.0 {
            return Err(ProtocolError::InvalidConfig(
                "rates must be positive".into(),
            ));
        }
        self.source.validate()?;
        Ok(())
    }

    /// Trajectory-shaped view used to build the absorption model.
    fn as_trajectory(&self) -> TrajectoryConfig {
        TrajectoryConfig {
            scheme: Scheme::B,
            duration_s: self.cycles as f64 * self.cycle_period_s,
            r_on: self.r_on,
            tau0_s: self.tau0_s,
            source: self.source.clone(),
            absorption_peak_rate: self.absorption_peak_rate,
            field: self.field,
            acceptance: self.acceptance.clone(),
            atom_fwhm_mhz: self.atom_fwhm_mhz,
            jitter: self.jitter,
            master_seed: self.master_seed,
            ..TrajectoryConfig::default()
        }
    }
}

/// Coincidence result of one pulsed run.
#[derive(Debug, Clone)]
pub struct PulsedOutcome {
    pub histogram: CorrelationHistogram,
    pub peak_counts: u64,
    pub background: f64,
    pub heralds: usize,
    pub onsets: usize,
}

/// Run `cycles` pulse cycles; returns the herald-onset correlation.
///
/// `seed_offset` separates the RNG streams of scan points sharing one
/// master seed.
pub fn run_pulsed_coincidence(
    cfg: &PulsedConfig,
    seed_offset: u64,
) -> Result<PulsedOutcome, ProtocolError> {
    cfg.validate()?;
    let table = TransitionTable::default();
    let absorption = AbsorptionModel::build(&cfg.as_trajectory(), &table)?;
    let seed = cfg.master_seed.wrapping_add(seed_offset);
    let mut rng_ion = stream(seed, stream_id::ION);
    let mut rng_jitter = stream(seed, stream_id::JITTER);
    let rng_pairs = stream(seed, stream_id::PAIRS);

    // Pairs are generated over the concatenated exposure time and mapped
    // into the per-cycle windows (gated detection).
    let exposure_total = cfg.cycles as f64 * cfg.exposure_s;
    let cool_offset = cfg.cycle_period_s - cfg.exposure_s;
    let mut pairs = PairIter::new(&cfg.source, exposure_total, rng_pairs)?.peekable();

    let mut heralds: Vec<f64> = Vec::new();
    let mut onsets: Vec<f64> = Vec::new();
    let decay_rate = 1.0 / cfg.tau0_s;

    for cycle in 0..cfg.cycles {
        let warp0 = cycle as f64 * cfg.exposure_s;
        let warp1 = warp0 + cfg.exposure_s;
        let t0 = cycle as f64 * cfg.cycle_period_s + cool_offset;
        // Spontaneous decay competes with absorption inside the window.
        let mut sensitive_until = warp0 + exp_sample(&mut rng_ion, decay_rate);
        let mut onset: Option<f64> = None;
        if sensitive_until < warp1 {
            onset = Some(sensitive_until - warp0);
        } else {
            sensitive_until = warp1;
        }
        while let Some(pair) = pairs.peek() {
            if pair.time_s >= warp1 {
                break;
            }
            let pair = pairs.next().expect("peeked");
            let local = pair.time_s - warp0;
            if pair.herald_detected {
                heralds.push(t0 + local + detector_jitter(&cfg.jitter, &mut rng_jitter));
            }
            if pair.time_s < sensitive_until
                && onset.is_none_or(|o| local < o)
                && rng_ion.random::<f64>() < absorption.probability(&pair)
            {
                onset = Some(local);
            }
        }
        if let Some(local) = onset {
            let latency = exp_sample(&mut rng_ion, cfg.r_on);
            onsets.push(t0 + local + latency + detector_jitter(&cfg.jitter, &mut rng_jitter));
        }
    }
    heralds.sort_by(|a, b| a.partial_cmp(b).unwrap());
    onsets.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let histogram = g2(&heralds, &onsets, cfg.g2_bin_s, cfg.g2_max_lag_s)?;
    // The physical peak sits at small positive lag (the onset latency); at
    // the default grid that is the zero-lag bin.
    let peak_counts = histogram.peak_counts();
    Ok(PulsedOutcome {
        background: histogram.background,
        peak_counts,
        heralds: heralds.len(),
        onsets: onsets.len(),
        histogram,
    })
}

/// Coincidence peak height versus input photon polarization.
#[derive(Debug, Clone)]
pub struct PolarizationScanPoint {
    pub setting_index: usize,
    /// Squared overlap of the photon setting with the accepted state.
    pub overlap: f64,
    pub peak_counts: u64,
    pub peak_error: f64,
    pub background: f64,
}

#[derive(Debug, Clone)]
pub struct PolarizationScan {
    pub points: Vec<PolarizationScanPoint>,
}

/// Sweep the input photon polarization at fixed ion preparation; the
/// source is PBS-split (product pairs), the waveplates sit in the ion arm.
pub fn run_polarization_scan(
    cfg: &PulsedConfig,
    settings: &[PolarizationState],
) -> Result<PolarizationScan, ProtocolError> {
    let accepted = match &cfg.acceptance {
        Acceptance::PumpedOuter { upper } => {
            if *upper {
                PolarizationState::sigma_minus()
            } else {
                PolarizationState::sigma_plus()
            }
        }
        Acceptance::Pure { accepted } => *accepted,
        Acceptance::Unpolarized => {
            return Err(ProtocolError::InvalidConfig(
                "polarization scans need a polarized ion preparation".into(),
            ))
        }
    };
    let mut points = Vec::with_capacity(settings.len());
    for (i, setting) in settings.iter().enumerate() {
        let mut point_cfg = cfg.clone();
        point_cfg.source.splitter = Splitter::Pbs;
        point_cfg.source.pair_state =
            crate::source::PairPolarizationState::product(setting, &PolarizationState::vertical());
        // The PBS normally pins the product state; here the scan waveplates
        // re-prepare the ion-arm photon, so bypass the override.
        point_cfg.source.splitter = Splitter::Npbs;
        point_cfg.source.herald_analyzer = AnalyzerSetting::open();
        let outcome = run_pulsed_coincidence(&point_cfg, 1000 + i as u64)?;
        points.push(PolarizationScanPoint {
            setting_index: i,
            overlap: absorption_polarization_overlap(setting, &accepted),
            peak_counts: outcome.peak_counts,
            peak_error: (outcome.peak_counts as f64).sqrt().max(1.0),
            background: outcome.background,
        });
    }
    Ok(PolarizationScan { points })
}

/// One branch of the coincidence spectroscopy: pumping direction plus its
/// fitted line.
#[derive(Debug, Clone)]
pub struct ScanBranch {
    pub upper: bool,
    /// (filter detuning MHz, peak counts, Poisson error)
    pub points: Vec<(f64, f64, f64)>,
    pub fit: FitResult,
}

#[derive(Debug, Clone)]
pub struct SpectroscopyScan {
    pub branches: [ScanBranch; 2],
}

impl SpectroscopyScan {
    pub fn centers(&self) -> [(f64, f64); 2] {
        [
            (
                self.branches[0].fit.params[0],
                self.branches[0].fit.uncertainties[0],
            ),
            (
                self.branches[1].fit.params[0],
                self.branches[1].fit.uncertainties[0],
            ),
        ]
    }

    pub fn widths(&self) -> [(f64, f64); 2] {
        [
            (
                self.branches[0].fit.params[1],
                self.branches[0].fit.uncertainties[1],
            ),
            (
                self.branches[1].fit.params[1],
                self.branches[1].fit.uncertainties[1],
            ),
        ]
    }
}

/// Herald-filter detuning scan for both pumping directions: the heralded
/// partner frequency tracks the filter, so the coincidence rate maps the
/// atomic line convolved with the filter passband.
pub fn run_spectroscopy_scan(
    cfg: &PulsedConfig,
    detunings_mhz: &[f64],
) -> Result<SpectroscopyScan, ProtocolError> {
    if detunings_mhz.len() < 5 {
        return Err(ProtocolError::InvalidConfig(
            "a spectroscopy scan needs at least 5 detunings".into(),
        ));
    }
    let mut branches = Vec::with_capacity(2);
    for (b, upper) in [true, false].into_iter().enumerate() {
        let mut points = Vec::with_capacity(detunings_mhz.len());
        for (i, &detuning) in detunings_mhz.iter().enumerate() {
            let mut point_cfg = cfg.clone();
            point_cfg.acceptance = Acceptance::PumpedOuter { upper };
            point_cfg.source.filter_detuning_mhz = detuning;
            let outcome =
                run_pulsed_coincidence(&point_cfg, 2000 + (b * detunings_mhz.len() + i) as u64)?;
            points.push((
                detuning,
                outcome.peak_counts as f64,
                (outcome.peak_counts as f64).sqrt().max(1.0),
            ));
        }
        let fit = fit_lorentzian(&points)?;
        branches.push(ScanBranch { upper, points, fit });
    }
    let [a, b] = <[ScanBranch; 2]>::try_from(branches).expect("two branches");
    Ok(SpectroscopyScan { branches: [a, b] })
}

/// Goodness of the Malus-law prediction: R^2 of the weighted straight line
/// `peak = a + b * overlap` through the scan points.
pub fn malus_r_squared(scan: &PolarizationScan) -> Result<f64, ProtocolError> {
    let points: Vec<(f64, f64, f64)> = scan
        .points
        .iter()
        .map(|p| (p.overlap, p.peak_counts as f64, p.peak_error))
        .collect();
    let (slope, _) = crate::analysis::weighted_line_slope(&points)?;
    // Recover the intercept from the weighted means.
    let wsum: f64 = points.iter().map(|p| 1.0 / (p.2 * p.2)).sum();
    let xbar: f64 = points.iter().map(|p| p.0 / (p.2 * p.2)).sum::<f64>() / wsum;
    let ybar: f64 = points.iter().map(|p| p.1 / (p.2 * p.2)).sum::<f64>() / wsum;
    let intercept = ybar - slope * xbar;
    Ok(crate::analysis::r_squared(&points, |x| {
        intercept + slope * x
    }))
}

/// Measurement bases of the entanglement scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntanglementBasis {
    /// Right/left circular.
    Rl,
    /// Horizontal/vertical linear.
    Hv,
    /// Diagonal/antidiagonal linear.
    Da,
}

impl EntanglementBasis {
    /// The polarization the ion is made sensitive to.
    pub fn accepted(self) -> PolarizationState {
        match self {
            EntanglementBasis::Rl => PolarizationState::right(),
            EntanglementBasis::Hv => PolarizationState::horizontal(),
            EntanglementBasis::Da => PolarizationState::diagonal(),
        }
    }

    /// Herald analyzer for a given half-wave-plate angle (radians).
    pub fn analyzer(self, hwp: f64) -> AnalyzerSetting {
        match self {
            EntanglementBasis::Rl => AnalyzerSetting::circular_sweep(hwp),
            EntanglementBasis::Hv | EntanglementBasis::Da => AnalyzerSetting::linear_sweep(hwp),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EntanglementScan {
    pub basis: EntanglementBasis,
    /// (HWP angle degrees, peak counts, Poisson error)
    pub points: Vec<(f64, f64, f64)>,
    pub fit: SinusoidFit,
}

/// Rotate the herald HWP with the ion fixed in one basis; entangled pairs
/// give a sinusoidal coincidence curve with a 90 degree period in the HWP
/// angle.
pub fn run_entanglement_scan(
    cfg: &PulsedConfig,
    basis: EntanglementBasis,
    hwp_angles_deg: &[f64],
) -> Result<EntanglementScan, ProtocolError> {
    if cfg.source.splitter != Splitter::Npbs {
        return Err(ProtocolError::InvalidConfig(
            "entanglement scans need the non-polarizing splitter".into(),
        ));
    }
    let mut points = Vec::with_capacity(hwp_angles_deg.len());
    for (i, &deg) in hwp_angles_deg.iter().enumerate() {
        let mut point_cfg = cfg.clone();
        point_cfg.acceptance = Acceptance::Pure {
            accepted: basis.accepted(),
        };
        point_cfg.source.herald_analyzer = basis.analyzer(deg.to_radians());
        let outcome = run_pulsed_coincidence(&point_cfg, 3000 + i as u64)?;
        points.push((
            deg,
            outcome.peak_counts as f64,
            (outcome.peak_counts as f64).sqrt().max(1.0),
        ));
    }
    let fit = fit_sinusoid_fixed_period(&points, 90.0)?;
    Ok(EntanglementScan { basis, points, fit })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::source::{BellState, PairPolarizationState};

    fn scan_source(pair_rate: f64) -> SourceConfig {
        SourceConfig {
            pair_rate,
            // Narrowed raw spectrum: same physics near the line, far better
            // desk-scale statistics.
            raw_bandwidth_fwhm_ghz: 2.0,
            herald_efficiency: 1.0,
            ..SourceConfig::default()
        }
    }

    fn base_cfg() -> PulsedConfig {
        PulsedConfig {
            source: scan_source(2000.0),
            absorption_peak_rate: 2000.0,
            field: MagneticField::new(0.0, [0.0, 0.0, 1.0]).unwrap(),
            cycles: 40_000,
            master_seed: 7,
            ..PulsedConfig::default()
        }
    }

    #[test]
    fn matched_polarization_beats_orthogonal() {
        let cfg = base_cfg();
        let settings = [
            PolarizationState::sigma_minus(),
            PolarizationState::horizontal(),
            PolarizationState::sigma_plus(),
        ];
        let scan = run_polarization_scan(&cfg, &settings).unwrap();
        let matched = scan.points[0].peak_counts as f64;
        let linear = scan.points[1].peak_counts as f64;
        let orthogonal = scan.points[2].peak_counts as f64;
        assert!(matched > 100.0, "matched {matched}");
        // Orthogonal input is consistent with the accidental background.
        let bg = scan.points[2].background;
        assert!(
            orthogonal <= bg + 2.0 * bg.sqrt() + 2.0,
            "orthogonal {orthogonal} bg {bg}"
        );
        // Linear input decomposes equally into the circular basis.
        assert!((linear - 0.5 * matched).abs() < 4.0 * (matched * 0.25).sqrt() + 4.0);
    }

    #[test]
    fn entanglement_scan_reaches_high_visibility() {
        let mut cfg = base_cfg();
        cfg.source.splitter = Splitter::Npbs;
        cfg.source.pair_state = PairPolarizationState::bell(BellState::PsiPlus);
        cfg.cycles = 60_000;
        let angles: Vec<f64> = (0..12).map(|i| i as f64 * 15.0).collect();
        let scan = run_entanglement_scan(&cfg, EntanglementBasis::Hv, &angles).unwrap();
        assert!(
            scan.fit.visibility > 0.95,
            "visibility {} ± {}",
            scan.fit.visibility,
            scan.fit.visibility_sigma
        );
    }

    #[test]
    fn pbs_splitter_is_rejected_for_entanglement() {
        let cfg = base_cfg();
        assert!(run_entanglement_scan(&cfg, EntanglementBasis::Hv, &[0.0, 15.0, 30.0]).is_err());
    }

    /// A product pair cannot fake circular-basis fringes: the herald
    /// analyzer sweep stays equidistant from the fixed idler polarization
    /// and the partner overlaps the accepted state at a constant 1/2, so
    /// the curve is flat where the Bell pair reaches full visibility.
    #[test]
    fn product_pair_is_flat_in_the_circular_basis() {
        let mut cfg = base_cfg();
        cfg.source.splitter = Splitter::Npbs;
        cfg.source.pair_state = PairPolarizationState::product(
            &crate::atom::PolarizationState::horizontal(),
            &crate::atom::PolarizationState::vertical(),
        );
        cfg.cycles = 60_000;
        let angles: Vec<f64> = (0..12).map(|i| i as f64 * 15.0).collect();
        let scan = run_entanglement_scan(&cfg, EntanglementBasis::Rl, &angles).unwrap();
        assert!(
            scan.fit.visibility < 0.1,
            "product-state RL visibility {}",
            scan.fit.visibility
        );
        let mut bell = cfg.clone();
        bell.source.pair_state = PairPolarizationState::bell(BellState::PsiPlus);
        let scan = run_entanglement_scan(&bell, EntanglementBasis::Rl, &angles).unwrap();
        assert!(
            scan.fit.visibility > 0.95,
            "Bell RL visibility {}",
            scan.fit.visibility
        );
    }

    /// The fringe visibility tracks the Werner mixing parameter.
    #[test]
    fn werner_visibility_matches_mixing_parameter() {
        let mut cfg = base_cfg();
        cfg.source.splitter = Splitter::Npbs;
        cfg.cycles = 120_000;
        let angles: Vec<f64> = (0..12).map(|i| i as f64 * 15.0).collect();
        for p in [0.5, 0.7] {
            cfg.source.pair_state = PairPolarizationState::werner(BellState::PsiPlus, p).unwrap();
            let scan = run_entanglement_scan(&cfg, EntanglementBasis::Hv, &angles).unwrap();
            let v = scan.fit.visibility;
            assert!(
                (v - p).abs() < 0.05,
                "Werner p = {p}: visibility {v} ± {}",
                scan.fit.visibility_sigma
            );
        }
    }
}

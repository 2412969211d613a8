//! Experiment configuration: a TOML schema with full defaults, strict
//! unknown-key rejection and constraint validation.
//!
//! Every default is documented at its field. Values marked "measured" are
//! the published constants of the Ca-40+ system (lifetimes, branching
//! fractions, linewidths); the remaining defaults are apparatus choices.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::atom::{BranchingConstants, MagneticField, PolarizationState};
use crate::protocols::{PulsedConfig, QuantumJumpConfig, TransferConfig};
use crate::sim::{Acceptance, JitterModel, Scheme, TrajectoryConfig};
use crate::source::{
    AnalyzerSetting, BellState, PairPolarizationState, PolarizerAxis, SourceConfig, Splitter,
};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config constraint violated: {0}")]
    Constraint(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which composed experiment `report`-style subcommands should run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    #[default]
    QuantumJumps,
    PolarizationScan,
    Spectroscopy,
    EntanglementScan,
    Transfer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SchemeName {
    A,
    B,
    C,
    D,
}

impl From<SchemeName> for Scheme {
    fn from(s: SchemeName) -> Scheme {
        match s {
            SchemeName::A => Scheme::A,
            SchemeName::B => Scheme::B,
            SchemeName::C => Scheme::C,
            SchemeName::D => Scheme::D,
        }
    }
}

/// Ion preparation / polarization acceptance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum AcceptanceName {
    #[default]
    #[serde(rename = "unpolarized")]
    Unpolarized,
    #[serde(rename = "pumped-upper")]
    PumpedUpper,
    #[serde(rename = "pumped-lower")]
    PumpedLower,
    #[serde(rename = "sigma+")]
    SigmaPlus,
    #[serde(rename = "sigma-")]
    SigmaMinus,
    #[serde(rename = "h")]
    Horizontal,
    #[serde(rename = "v")]
    Vertical,
    #[serde(rename = "d")]
    Diagonal,
    #[serde(rename = "a")]
    Antidiagonal,
}

impl From<AcceptanceName> for Acceptance {
    fn from(a: AcceptanceName) -> Acceptance {
        match a {
            AcceptanceName::Unpolarized => Acceptance::Unpolarized,
            AcceptanceName::PumpedUpper => Acceptance::PumpedOuter { upper: true },
            AcceptanceName::PumpedLower => Acceptance::PumpedOuter { upper: false },
            AcceptanceName::SigmaPlus => Acceptance::Pure {
                accepted: PolarizationState::sigma_plus(),
            },
            AcceptanceName::SigmaMinus => Acceptance::Pure {
                accepted: PolarizationState::sigma_minus(),
            },
            AcceptanceName::Horizontal => Acceptance::Pure {
                accepted: PolarizationState::horizontal(),
            },
            AcceptanceName::Vertical => Acceptance::Pure {
                accepted: PolarizationState::vertical(),
            },
            AcceptanceName::Diagonal => Acceptance::Pure {
                accepted: PolarizationState::diagonal(),
            },
            AcceptanceName::Antidiagonal => Acceptance::Pure {
                accepted: PolarizationState::antidiagonal(),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum SplitterName {
    #[default]
    Pbs,
    Npbs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PairStateName {
    /// Product |H⟩ signal, |V⟩ idler (the PBS-sorted type-II pair).
    #[default]
    #[serde(rename = "product-hv")]
    ProductHv,
    #[serde(rename = "bell-phi+")]
    BellPhiPlus,
    #[serde(rename = "bell-phi-")]
    BellPhiMinus,
    #[serde(rename = "bell-psi+")]
    BellPsiPlus,
    #[serde(rename = "bell-psi-")]
    BellPsiMinus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum BasisName {
    Rl,
    #[default]
    Hv,
    Da,
}

fn d_duration() -> f64 {
    10.0
}
fn d_r_on() -> f64 {
    5.0e4
}
fn d_r_dark() -> f64 {
    100.0
}
fn d_pump() -> f64 {
    1.0
}
fn d_tau0() -> f64 {
    1.11
}
fn d_eff() -> f64 {
    1.0
}
fn d_atom_fwhm() -> f64 {
    22.0
}
fn d_cycle() -> f64 {
    0.02
}
fn d_tick() -> u32 {
    1000
}
fn d_jitter() -> f64 {
    1e-9
}
fn d_field_gauss() -> f64 {
    3.0
}
fn d_field_axis() -> [f64; 3] {
    [0.0, 0.0, 1.0]
}

/// Trajectory section; defaults follow the continuous scheme-B experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrajectorySection {
    /// Detection scheme (default "b": dark-to-bright jumps on the 854 line).
    pub scheme: SchemeName,
    /// Acquisition length, s.
    pub duration_s: f64,
    /// Detected fluorescence rate when bright, counts/s.
    pub r_on: f64,
    /// Detector dark counts on the fluorescence channel, counts/s.
    pub r_dark: f64,
    /// Bright-to-dark pumping rate of the weak 850 nm laser, 1/s (the
    /// experiment pumps on a ~1 s timescale).
    pub pump_rate_850: f64,
    /// Metastable-state lifetime, s; 1.11 s is the measured D5/2 value.
    pub tau0_s: f64,
    /// Absorption rate at resonance and matched polarization, 1/s.
    pub absorption_peak_rate: f64,
    /// 393 nm Raman-photon detection efficiency (schemes C/D).
    pub detection_efficiency_393: f64,
    /// Atomic absorption linewidth (FWHM), MHz; ~22 MHz for D5/2-P3/2.
    pub atom_fwhm_mhz: f64,
    /// Preparation cycle period for the pulsed schemes, s.
    pub cycle_period_s: f64,
    /// Timestamp resolution, ps (1000 = 1 ns, counting-hardware class).
    pub tick_ps: u32,
    /// Detector timing jitter FWHM, s.
    pub jitter_fwhm_s: f64,
    /// Ion preparation; "unpolarized" is the continuous-scheme mixture.
    pub acceptance: AcceptanceName,
    /// Quantization field magnitude, gauss (apparatus choice; enters only
    /// through the Zeeman shifts).
    pub field_gauss: f64,
    pub field_axis: [f64; 3],
}

impl Default for TrajectorySection {
    fn default() -> Self {
        TrajectorySection {
            scheme: SchemeName::B,
            duration_s: d_duration(),
            r_on: d_r_on(),
            r_dark: d_r_dark(),
            pump_rate_850: d_pump(),
            tau0_s: d_tau0(),
            absorption_peak_rate: 0.0,
            detection_efficiency_393: d_eff(),
            atom_fwhm_mhz: d_atom_fwhm(),
            cycle_period_s: d_cycle(),
            tick_ps: d_tick(),
            jitter_fwhm_s: d_jitter(),
            acceptance: AcceptanceName::Unpolarized,
            field_gauss: d_field_gauss(),
            field_axis: d_field_axis(),
        }
    }
}

/// Source section; bandwidth defaults are the published source figures
/// (200 GHz raw, 22 MHz filter).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SourceSection {
    pub pair_rate: f64,
    pub raw_bandwidth_ghz: f64,
    pub filter_fwhm_mhz: f64,
    pub filter_detuning_mhz: f64,
    pub herald_efficiency: f64,
    pub pump_offset_mhz: f64,
    pub splitter: SplitterName,
    pub pair_state: PairStateName,
    /// Werner visibility applied to a Bell pair_state (1 = pure).
    pub werner_p: f64,
    pub analyzer_qwp_deg: Option<f64>,
    pub analyzer_hwp_deg: Option<f64>,
    /// "h", "v" or omitted for an open herald arm.
    pub analyzer_polarizer: Option<String>,
}

impl Default for SourceSection {
    fn default() -> Self {
        SourceSection {
            pair_rate: 2.0e4,
            raw_bandwidth_ghz: 200.0,
            filter_fwhm_mhz: 22.0,
            filter_detuning_mhz: 0.0,
            herald_efficiency: 1.0,
            pump_offset_mhz: 0.0,
            splitter: SplitterName::Pbs,
            pair_state: PairStateName::ProductHv,
            werner_p: 1.0,
            analyzer_qwp_deg: None,
            analyzer_hwp_deg: None,
            analyzer_polarizer: None,
        }
    }
}

/// Analysis knobs; the 1 ms trace bin matches the published trace figure.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisSection {
    pub bin_s: f64,
    /// Moving-average window / buffered detections per jump.
    pub window_tags: usize,
    pub g2_bin_s: f64,
    pub g2_max_lag_s: f64,
    pub g2_channel_a: u8,
    pub g2_channel_b: u8,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            bin_s: 1e-3,
            window_tags: 10,
            g2_bin_s: 16e-3,
            g2_max_lag_s: 0.4,
            g2_channel_a: 0,
            g2_channel_b: 1,
        }
    }
}

/// Protocol-specific knobs for the scan and transfer experiments.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProtocolSection {
    pub cycles: usize,
    pub exposure_s: f64,
    /// Fluorescence-onset grid of the pulsed correlations, s.
    pub g2_bin_s: f64,
    pub g2_max_lag_s: f64,
    /// HWP angles for the entanglement scan, degrees.
    pub hwp_angles_deg: Vec<f64>,
    /// QWP angles preparing the photon settings of the polarization scan.
    pub qwp_angles_deg: Vec<f64>,
    /// Herald-filter detunings of the spectroscopy scan, MHz.
    pub detunings_mhz: Vec<f64>,
    /// Bases of the entanglement scan.
    pub bases: Vec<BasisName>,
    /// Haar-random inputs of the transfer experiment.
    pub n_inputs: usize,
    /// Qubit Zeeman splitting, MHz.
    pub zeeman_mhz: f64,
    /// Fractional pulse-area miscalibration.
    pub pulse_area_error: f64,
    /// Absorption probability per transfer attempt at full overlap.
    pub absorption_prob: f64,
    pub phase_tracking: bool,
    /// Detection efficiencies to sweep in the transfer experiment.
    pub efficiencies: Vec<f64>,
}

impl Default for ProtocolSection {
    fn default() -> Self {
        ProtocolSection {
            cycles: 40_000,
            exposure_s: 5e-3,
            g2_bin_s: 10e-6,
            g2_max_lag_s: 2e-3,
            hwp_angles_deg: (0..12).map(|i| f64::from(i) * 15.0).collect(),
            qwp_angles_deg: (-4..=4).map(|i| f64::from(i) * 11.25).collect(),
            detunings_mhz: (-6..=6).map(|i| f64::from(i) * 11.0).collect(),
            bases: vec![BasisName::Rl, BasisName::Hv, BasisName::Da],
            n_inputs: 1000,
            zeeman_mhz: 10.0,
            pulse_area_error: 0.0,
            absorption_prob: 0.5,
            phase_tracking: true,
            efficiencies: vec![1.0],
        }
    }
}

/// Optional overrides of the tabulated branching fractions.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BranchingSection {
    pub p32_to_s12: f64,
    pub p32_to_d52: f64,
    pub p32_to_d32: f64,
    pub p12_to_s12: f64,
    pub p12_to_d32: f64,
    pub strength_ratio_854_over_850: f64,
}

impl Default for BranchingSection {
    fn default() -> Self {
        let c = BranchingConstants::default();
        BranchingSection {
            p32_to_s12: c.p32_to_s12,
            p32_to_d52: c.p32_to_d52,
            p32_to_d32: c.p32_to_d32,
            p12_to_s12: c.p12_to_s12,
            p12_to_d32: c.p12_to_d32,
            strength_ratio_854_over_850: c.strength_ratio_854_over_850,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        OutputSection {
            dir: PathBuf::from("out"),
        }
    }
}

/// The full experiment configuration file.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub master_seed: u64,
    pub trajectory: TrajectorySection,
    pub source: SourceSection,
    pub analysis: AnalysisSection,
    pub protocol: ProtocolSection,
    pub branching: BranchingSection,
    pub output: OutputSection,
}

impl ExperimentConfig {
    pub fn source_config(&self) -> Result<SourceConfig, ConfigError> {
        let s = &self.source;
        let pair_state = match s.pair_state {
            PairStateName::ProductHv => PairPolarizationState::product(
                &PolarizationState::horizontal(),
                &PolarizationState::vertical(),
            ),
            bell => {
                let which = match bell {
                    PairStateName::BellPhiPlus => BellState::PhiPlus,
                    PairStateName::BellPhiMinus => BellState::PhiMinus,
                    PairStateName::BellPsiPlus => BellState::PsiPlus,
                    PairStateName::BellPsiMinus => BellState::PsiMinus,
                    PairStateName::ProductHv => unreachable!(),
                };
                PairPolarizationState::werner(which, s.werner_p)
                    .map_err(|e| ConfigError::Constraint(e.to_string()))?
            }
        };
        let polarizer = match s.analyzer_polarizer.as_deref() {
            None => None,
            Some("h") | Some("H") => Some(PolarizerAxis::Horizontal),
            Some("v") | Some("V") => Some(PolarizerAxis::Vertical),
            Some(other) => {
                return Err(ConfigError::Constraint(format!(
                    "analyzer_polarizer must be \"h\" or \"v\", got {other:?}"
                )))
            }
        };
        let cfg = SourceConfig {
            pair_rate: s.pair_rate,
            raw_bandwidth_fwhm_ghz: s.raw_bandwidth_ghz,
            filter_fwhm_mhz: s.filter_fwhm_mhz,
            filter_detuning_mhz: s.filter_detuning_mhz,
            herald_efficiency: s.herald_efficiency,
            pump_offset_mhz: s.pump_offset_mhz,
            splitter: match s.splitter {
                SplitterName::Pbs => Splitter::Pbs,
                SplitterName::Npbs => Splitter::Npbs,
            },
            pair_state,
            herald_analyzer: AnalyzerSetting {
                qwp: s.analyzer_qwp_deg.map(f64::to_radians),
                hwp: s.analyzer_hwp_deg.map(f64::to_radians),
                polarizer,
            },
        };
        cfg.validate()
            .map_err(|e| ConfigError::Constraint(e.to_string()))?;
        Ok(cfg)
    }

    pub fn branching_constants(&self) -> BranchingConstants {
        let b = &self.branching;
        BranchingConstants {
            p32_to_s12: b.p32_to_s12,
            p32_to_d52: b.p32_to_d52,
            p32_to_d32: b.p32_to_d32,
            p12_to_s12: b.p12_to_s12,
            p12_to_d32: b.p12_to_d32,
            strength_ratio_854_over_850: b.strength_ratio_854_over_850,
        }
    }

    pub fn trajectory_config(&self) -> Result<TrajectoryConfig, ConfigError> {
        let t = &self.trajectory;
        let field = MagneticField::new(t.field_gauss, t.field_axis)
            .map_err(|e| ConfigError::Constraint(e.to_string()))?;
        let cfg = TrajectoryConfig {
            scheme: t.scheme.into(),
            duration_s: t.duration_s,
            r_on: t.r_on,
            r_dark: t.r_dark,
            pump_rate_850: t.pump_rate_850,
            tau0_s: t.tau0_s,
            source: self.source_config()?,
            absorption_peak_rate: t.absorption_peak_rate,
            detection_efficiency_393: t.detection_efficiency_393,
            field,
            acceptance: t.acceptance.into(),
            atom_fwhm_mhz: t.atom_fwhm_mhz,
            cycle_period_s: t.cycle_period_s,
            branching: self.branching_constants(),
            tick_ps: t.tick_ps,
            jitter: JitterModel::new(t.jitter_fwhm_s),
            master_seed: self.master_seed,
            trajectory_index: 0,
        };
        cfg.validate()
            .map_err(|e| ConfigError::Constraint(e.to_string()))?;
        Ok(cfg)
    }

    pub fn quantum_jump_config(&self) -> Result<QuantumJumpConfig, ConfigError> {
        Ok(QuantumJumpConfig {
            trajectory: self.trajectory_config()?,
            bin_s: self.analysis.bin_s,
            window_tags: self.analysis.window_tags,
            g2_bin_s: self.analysis.g2_bin_s,
            g2_max_lag_s: self.analysis.g2_max_lag_s,
        })
    }

    pub fn pulsed_config(&self) -> Result<PulsedConfig, ConfigError> {
        let t = &self.trajectory;
        let field = MagneticField::new(t.field_gauss, t.field_axis)
            .map_err(|e| ConfigError::Constraint(e.to_string()))?;
        Ok(PulsedConfig {
            source: self.source_config()?,
            acceptance: t.acceptance.into(),
            field,
            atom_fwhm_mhz: t.atom_fwhm_mhz,
            absorption_peak_rate: t.absorption_peak_rate,
            tau0_s: t.tau0_s,
            r_on: t.r_on,
            cycle_period_s: t.cycle_period_s,
            exposure_s: self.protocol.exposure_s,
            cycles: self.protocol.cycles,
            g2_bin_s: self.protocol.g2_bin_s,
            g2_max_lag_s: self.protocol.g2_max_lag_s,
            jitter: JitterModel::new(t.jitter_fwhm_s),
            master_seed: self.master_seed,
        })
    }

    pub fn transfer_config(&self) -> Result<TransferConfig, ConfigError> {
        let p = &self.protocol;
        if p.n_inputs == 0 {
            return Err(ConfigError::Constraint(
                "protocol.n_inputs must be positive".into(),
            ));
        }
        Ok(TransferConfig {
            zeeman_splitting_mhz: p.zeeman_mhz,
            pulse_area_error: p.pulse_area_error,
            jitter: JitterModel::new(self.trajectory.jitter_fwhm_s),
            detection_efficiency_393: self.trajectory.detection_efficiency_393,
            branching_s: self.branching.p32_to_s12,
            absorption_prob: p.absorption_prob,
            exposure_s: self.protocol.exposure_s.min(1e-3),
            phase_tracking: p.phase_tracking,
            master_seed: self.master_seed,
        })
    }
}

/// Parse and validate a config from TOML text; parse errors carry line
/// numbers, constraint errors name the offending field.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let cfg: ExperimentConfig = toml::from_str(text)?;
    // Surface constraint violations now rather than at first use.
    cfg.trajectory_config()?;
    Ok(cfg)
}

/// Resolve a config path: absolute and existing paths win; otherwise the
/// `IONTAG_CONFIG_DIR` environment variable names the directory to search.
pub fn resolve_config_path(path: &Path) -> PathBuf {
    if path.is_absolute() || path.exists() {
        return path.to_path_buf();
    }
    match std::env::var_os("IONTAG_CONFIG_DIR") {
        Some(dir) => Path::new(&dir).join(path),
        None => path.to_path_buf(),
    }
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig, ConfigError> {
    let resolved = resolve_config_path(path);
    let text = fs::read_to_string(resolved)?;
    parse_config(&text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_is_all_defaults() {
        let cfg = parse_config("").unwrap();
        assert_eq!(cfg.master_seed, 0);
        assert_eq!(cfg.trajectory.tau0_s, 1.11);
        assert_eq!(cfg.source.raw_bandwidth_ghz, 200.0);
        assert_eq!(cfg.source.filter_fwhm_mhz, 22.0);
        assert_eq!(cfg.analysis.bin_s, 1e-3);
        let t = cfg.trajectory_config().unwrap();
        assert_eq!(t.r_on, 5.0e4);
    }

    #[test]
    fn unknown_keys_are_rejected_with_line_numbers() {
        let err = parse_config("master_seed = 1\nbogus_key = 2\n").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("bogus_key"), "{msg}");
        assert!(msg.contains("line 2"), "{msg}");
        let err = parse_config("[trajectory]\nnot_a_field = 1\n").unwrap_err();
        assert!(err.to_string().contains("not_a_field"));
    }

    #[test]
    fn constraint_violations_are_reported() {
        let err = parse_config("[trajectory]\ntau0_s = -1.0\n").unwrap_err();
        assert!(matches!(err, ConfigError::Constraint(_)), "{err}");
        let err = parse_config("[source]\nherald_efficiency = 1.5\n").unwrap_err();
        assert!(matches!(err, ConfigError::Constraint(_)));
    }

    #[test]
    fn enums_parse_from_kebab_names() {
        let cfg = parse_config(
            "[trajectory]\nscheme = \"d\"\nacceptance = \"pumped-upper\"\n\n[source]\nsplitter = \"npbs\"\npair_state = \"bell-psi+\"\nwerner_p = 0.9\n",
        )
        .unwrap();
        let t = cfg.trajectory_config().unwrap();
        assert_eq!(t.scheme, Scheme::D);
        assert!(matches!(
            t.acceptance,
            Acceptance::PumpedOuter { upper: true }
        ));
        assert_eq!(t.source.splitter, Splitter::Npbs);
    }

    #[test]
    fn werner_out_of_range_is_a_constraint_error() {
        let err =
            parse_config("[source]\npair_state = \"bell-psi+\"\nwerner_p = 1.4\n").unwrap_err();
        assert!(matches!(err, ConfigError::Constraint(_)));
    }

    #[test]
    fn roundtrips_through_toml() {
        let cfg = ExperimentConfig::default();
        let text = toml::to_string(&cfg).unwrap();
        let back = parse_config(&text).unwrap();
        assert_eq!(back.trajectory.r_on, cfg.trajectory.r_on);
        assert_eq!(back.protocol.hwp_angles_deg, cfg.protocol.hwp_angles_deg);
    }
}

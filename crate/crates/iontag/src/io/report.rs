//! Machine-readable reports (JSON) and plot-ready curves (CSV).

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::analysis::CorrelationHistogram;
use crate::protocols::{
    EntanglementScan, PolarizationScan, QuantumJumpReport, SpectroscopyScan, TransferReport,
};

/// Summary of a composed quantum-jump experiment.
#[derive(Debug, Clone, Serialize)]
pub struct QuantumJumpSummary {
    pub tau_on_s: f64,
    pub tau_on_sigma_s: f64,
    pub tau_off_s: f64,
    pub tau_off_sigma_s: f64,
    pub absorption_rate_per_s: f64,
    pub absorption_rate_sigma_per_s: f64,
    pub n_jumps_on: usize,
    pub n_jumps_off: usize,
    pub g2_peak_counts: u64,
    pub g2_background: f64,
    pub g2_peak_lag_bins: i64,
    pub significance_sigma: f64,
}

impl From<&QuantumJumpReport> for QuantumJumpSummary {
    fn from(r: &QuantumJumpReport) -> Self {
        QuantumJumpSummary {
            tau_on_s: r.tau_on.params[0],
            tau_on_sigma_s: r.tau_on.uncertainties[0],
            tau_off_s: r.tau_off.params[0],
            tau_off_sigma_s: r.tau_off.uncertainties[0],
            absorption_rate_per_s: r.absorption_rate,
            absorption_rate_sigma_per_s: r.absorption_rate_sigma,
            n_jumps_on: r.n_jumps_on,
            n_jumps_off: r.n_jumps_off,
            g2_peak_counts: r.histogram.peak_counts(),
            g2_background: r.histogram.background,
            g2_peak_lag_bins: r.peak_lag_bins,
            significance_sigma: r.significance,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct G2Summary {
    pub bin_width_s: f64,
    pub n_bins: usize,
    pub peak_counts: u64,
    pub peak_lag_bins: i64,
    pub background: f64,
    pub significance_sigma: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PolarizationSummary {
    pub peaks: Vec<u64>,
    pub overlaps: Vec<f64>,
    pub backgrounds: Vec<f64>,
    pub malus_r_squared: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectroscopySummary {
    pub center_upper_mhz: f64,
    pub center_upper_sigma_mhz: f64,
    pub center_lower_mhz: f64,
    pub center_lower_sigma_mhz: f64,
    pub fwhm_upper_mhz: f64,
    pub fwhm_upper_sigma_mhz: f64,
    pub fwhm_lower_mhz: f64,
    pub fwhm_lower_sigma_mhz: f64,
}

impl From<&SpectroscopyScan> for SpectroscopySummary {
    fn from(scan: &SpectroscopyScan) -> Self {
        let [c_up, c_lo] = scan.centers();
        let [w_up, w_lo] = scan.widths();
        SpectroscopySummary {
            center_upper_mhz: c_up.0,
            center_upper_sigma_mhz: c_up.1,
            center_lower_mhz: c_lo.0,
            center_lower_sigma_mhz: c_lo.1,
            fwhm_upper_mhz: w_up.0,
            fwhm_upper_sigma_mhz: w_up.1,
            fwhm_lower_mhz: w_lo.0,
            fwhm_lower_sigma_mhz: w_lo.1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EntanglementSummary {
    pub basis: String,
    pub visibility: f64,
    pub visibility_sigma: f64,
    pub amplitude: f64,
    pub phase_rad: f64,
    pub offset: f64,
}

impl From<&EntanglementScan> for EntanglementSummary {
    fn from(scan: &EntanglementScan) -> Self {
        EntanglementSummary {
            basis: format!("{:?}", scan.basis).to_lowercase(),
            visibility: scan.fit.visibility,
            visibility_sigma: scan.fit.visibility_sigma,
            amplitude: scan.fit.result.params[0],
            phase_rad: scan.fit.result.params[1],
            offset: scan.fit.result.params[2],
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferSummary {
    pub detection_efficiency: f64,
    pub mean_fidelity: f64,
    pub fidelity_se: f64,
    pub success_probability: f64,
    pub n_inputs: usize,
    pub attempts: usize,
}

impl TransferSummary {
    pub fn new(efficiency: f64, report: &TransferReport) -> Self {
        TransferSummary {
            detection_efficiency: efficiency,
            mean_fidelity: report.mean_fidelity,
            fidelity_se: report.fidelity_se,
            success_probability: report.success_probability,
            n_inputs: report.n_inputs,
            attempts: report.attempts,
        }
    }
}

pub fn write_json(value: &impl Serialize, path: impl AsRef<Path>) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()
}

/// CSV of a correlation histogram: `lag_s,counts`.
pub fn write_histogram_csv(
    hist: &CorrelationHistogram,
    path: impl AsRef<Path>,
) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "lag_s,counts")?;
    for (i, &c) in hist.counts.iter().enumerate() {
        writeln!(w, "{:.9e},{}", hist.lag_of(i), c)?;
    }
    w.flush()
}

/// CSV of `(x, y, error)` points under the given column names.
pub fn write_curve_csv(
    header: &str,
    points: &[(f64, f64, f64)],
    path: impl AsRef<Path>,
) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{header}")?;
    for &(x, y, e) in points {
        writeln!(w, "{x:.9e},{y:.9e},{e:.9e}")?;
    }
    w.flush()
}

/// CSV of a polarization scan: setting index, overlap, peak, error,
/// background.
pub fn write_polarization_csv(
    scan: &PolarizationScan,
    path: impl AsRef<Path>,
) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "setting,overlap,peak_counts,peak_error,background")?;
    for p in &scan.points {
        writeln!(
            w,
            "{},{:.9e},{},{:.9e},{:.9e}",
            p.setting_index, p.overlap, p.peak_counts, p.peak_error, p.background
        )?;
    }
    w.flush()
}

/// CSV of pair events for debugging: time, detunings, herald flag.
pub fn write_pairs_csv(
    pairs: &[crate::source::PairEvent],
    path: impl AsRef<Path>,
) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "time_s,signal_detuning_mhz,idler_detuning_mhz,herald_detected"
    )?;
    for p in pairs {
        writeln!(
            w,
            "{:.9e},{:.6e},{:.6e},{}",
            p.time_s,
            p.signal_detuning_mhz,
            p.idler_detuning_mhz,
            u8::from(p.herald_detected)
        )?;
    }
    w.flush()
}

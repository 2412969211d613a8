//! Subcommand implementations behind the thin `iontag` binary.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::analysis::{fit_exponential, g2, peak_significance};
use crate::io::{
    self, load_config, ConfigError, EntanglementSummary, ExperimentConfig, FormatError, G2Summary,
    PolarizationSummary, QuantumJumpSummary, SpectroscopySummary, TransferSummary,
};
use crate::protocols::{
    malus_r_squared, run_entanglement_scan, run_polarization_scan, run_quantum_jump_experiment,
    run_spectroscopy_scan, transfer_fidelity_experiment, EntanglementBasis, ProtocolError,
};
use crate::sim::simulate;
use crate::source::qwp_prepared;

#[derive(Parser)]
#[command(
    name = "iontag",
    version,
    about = "Simulate single-photon absorption experiments on a trapped Ca-40+ ion and analyze the time-tag streams"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args)]
pub struct CommonArgs {
    /// Experiment config (TOML); relative paths also resolve under
    /// $IONTAG_CONFIG_DIR. Omit for all defaults.
    #[arg(long, short)]
    pub config: Option<PathBuf>,
    /// Override the config's master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the config's output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct InputArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Input time-tag stream (.ttag).
    #[arg(long, short)]
    pub input: PathBuf,
}

#[derive(Subcommand)]
pub enum Command {
    /// Run the trajectory simulator; writes stream.ttag and ground_truth.csv.
    Simulate(CommonArgs),
    /// Recover quantum jumps from a time-tag stream.
    Jumps(InputArgs),
    /// Delay histogram between two channels of a stream.
    G2(InputArgs),
    /// Coincidence peak versus input photon polarization.
    PolarScan(CommonArgs),
    /// Coincidence spectroscopy versus herald-filter detuning.
    Spectrum(CommonArgs),
    /// Entanglement scan over the configured bases.
    EntangleScan(CommonArgs),
    /// Heralded photon-to-qubit transfer fidelity.
    Transfer(CommonArgs),
    /// Composed quantum-jump experiment report.
    Report(CommonArgs),
}

/// Error with its process exit code: 2 for parse errors, 3 for numeric or
/// statistical failures.
#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
    #[error(transparent)]
    Analysis(#[from] crate::analysis::AnalysisError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Format(_) => 2,
            CliError::Protocol(_) | CliError::Sim(_) | CliError::Analysis(_) => 3,
            CliError::Io(_) => 2,
        }
    }
}

fn load(common: &CommonArgs) -> Result<ExperimentConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => load_config(path)?,
        None => ExperimentConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.master_seed = seed;
    }
    if let Some(out) = &common.out {
        cfg.output.dir = out.clone();
    }
    std::fs::create_dir_all(&cfg.output.dir)?;
    Ok(cfg)
}

fn out_path(cfg: &ExperimentConfig, name: &str) -> PathBuf {
    cfg.output.dir.join(name)
}

impl Cli {
    pub fn run(&self) -> Result<(), CliError> {
        match &self.command {
            Command::Simulate(common) => cmd_simulate(common),
            Command::Jumps(args) => cmd_jumps(args),
            Command::G2(args) => cmd_g2(args),
            Command::PolarScan(common) => cmd_polar_scan(common),
            Command::Spectrum(common) => cmd_spectrum(common),
            Command::EntangleScan(common) => cmd_entangle_scan(common),
            Command::Transfer(common) => cmd_transfer(common),
            Command::Report(common) => cmd_report(common),
        }
    }
}

#[derive(Serialize)]
struct SimulateSummary {
    master_seed: u64,
    duration_s: f64,
    total_tags: usize,
    herald_tags: usize,
    fluorescence_tags: usize,
    raman_tags: usize,
    marker_tags: usize,
    state_transitions: usize,
}

fn cmd_simulate(common: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(common)?;
    let trajectory = cfg.trajectory_config()?;
    let (stream, truth) = simulate(&trajectory)?;
    let stream_path = out_path(&cfg, "stream.ttag");
    io::write_stream_to_path(&stream, &stream_path)?;
    let truth_path = out_path(&cfg, "ground_truth.csv");
    let mut w = std::io::BufWriter::new(std::fs::File::create(&truth_path)?);
    truth.write_csv(&mut w)?;
    drop(w);
    let summary = SimulateSummary {
        master_seed: trajectory.master_seed,
        duration_s: trajectory.duration_s,
        total_tags: stream.len(),
        herald_tags: stream.counts_in_channel(crate::sim::channel::HERALD),
        fluorescence_tags: stream.counts_in_channel(crate::sim::channel::FLUORESCENCE),
        raman_tags: stream.counts_in_channel(crate::sim::channel::RAMAN_393),
        marker_tags: stream.counts_in_channel(crate::sim::channel::MARKER),
        state_transitions: truth.transitions().len(),
    };
    io::write_json(&summary, out_path(&cfg, "simulate.json"))?;
    println!(
        "wrote {} and {}",
        stream_path.display(),
        truth_path.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct JumpsSummary {
    mean_bright_per_bin: f64,
    mean_dark_per_bin: f64,
    count_threshold: u32,
    delay_threshold_s: f64,
    n_events: usize,
    n_dark_periods: usize,
    dropped_windows: usize,
    tau_s: Option<f64>,
    tau_sigma_s: Option<f64>,
}

fn cmd_jumps(args: &InputArgs) -> Result<(), CliError> {
    let cfg = load(&args.common)?;
    let stream = io::read_stream_from_path(&args.input)?;
    let analysis = crate::protocols::analyze_jump_stream(
        &stream,
        cfg.analysis.bin_s,
        cfg.analysis.window_tags,
    )?;
    // Event list.
    let events_path = out_path(&cfg, "jumps.csv");
    {
        use std::io::Write;
        let mut w = std::io::BufWriter::new(std::fs::File::create(&events_path)?);
        writeln!(w, "time_s,direction")?;
        for (t, d) in &analysis.events {
            let name = match d {
                crate::analysis::JumpDirection::DarkToBright => "dark_to_bright",
                crate::analysis::JumpDirection::BrightToDark => "bright_to_dark",
            };
            writeln!(w, "{t:.9},{name}")?;
        }
        w.flush()?;
    }
    let durations_path = out_path(&cfg, "durations.csv");
    {
        use std::io::Write;
        let mut w = std::io::BufWriter::new(std::fs::File::create(&durations_path)?);
        writeln!(w, "duration_s")?;
        for d in &analysis.dark_durations {
            writeln!(w, "{d:.9}")?;
        }
        w.flush()?;
    }
    let fit = if analysis.dark_durations.len() >= 2 {
        Some(fit_exponential(&analysis.dark_durations)?)
    } else {
        None
    };
    let summary = JumpsSummary {
        mean_bright_per_bin: analysis.mean_bright,
        mean_dark_per_bin: analysis.mean_dark,
        count_threshold: analysis.count_threshold,
        delay_threshold_s: analysis.delay_threshold_s,
        n_events: analysis.events.len(),
        n_dark_periods: analysis.dark_durations.len(),
        dropped_windows: analysis.dropped_windows,
        tau_s: fit.as_ref().map(|f| f.params[0]),
        tau_sigma_s: fit.as_ref().map(|f| f.uncertainties[0]),
    };
    io::write_json(&summary, out_path(&cfg, "jumps.json"))?;
    println!(
        "wrote {} and {}",
        events_path.display(),
        durations_path.display()
    );
    Ok(())
}

fn cmd_g2(args: &InputArgs) -> Result<(), CliError> {
    let cfg = load(&args.common)?;
    let stream = io::read_stream_from_path(&args.input)?;
    let a = stream.channel_times(cfg.analysis.g2_channel_a);
    let b = stream.channel_times(cfg.analysis.g2_channel_b);
    let hist = g2(&a, &b, cfg.analysis.g2_bin_s, cfg.analysis.g2_max_lag_s)?;
    let csv_path = out_path(&cfg, "g2.csv");
    io::write_histogram_csv(&hist, &csv_path)?;
    let summary = G2Summary {
        bin_width_s: hist.bin_width_s,
        n_bins: hist.counts.len(),
        peak_counts: hist.peak_counts(),
        peak_lag_bins: hist.peak_bin,
        background: hist.background,
        significance_sigma: peak_significance(&hist).ok(),
    };
    io::write_json(&summary, out_path(&cfg, "g2.json"))?;
    println!("wrote {}", csv_path.display());
    Ok(())
}

fn cmd_polar_scan(common: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(common)?;
    let pulsed = cfg.pulsed_config()?;
    let settings: Vec<_> = cfg
        .protocol
        .qwp_angles_deg
        .iter()
        .map(|deg| qwp_prepared(deg.to_radians()))
        .collect();
    let scan = run_polarization_scan(&pulsed, &settings)?;
    let csv_path = out_path(&cfg, "polar_scan.csv");
    io::write_polarization_csv(&scan, &csv_path)?;
    let summary = PolarizationSummary {
        peaks: scan.points.iter().map(|p| p.peak_counts).collect(),
        overlaps: scan.points.iter().map(|p| p.overlap).collect(),
        backgrounds: scan.points.iter().map(|p| p.background).collect(),
        malus_r_squared: malus_r_squared(&scan)?,
    };
    io::write_json(&summary, out_path(&cfg, "polar_scan.json"))?;
    println!("wrote {}", csv_path.display());
    Ok(())
}

fn cmd_spectrum(common: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(common)?;
    let pulsed = cfg.pulsed_config()?;
    let scan = run_spectroscopy_scan(&pulsed, &cfg.protocol.detunings_mhz)?;
    let csv_path = out_path(&cfg, "spectrum.csv");
    {
        use std::io::Write;
        let mut w = std::io::BufWriter::new(std::fs::File::create(&csv_path)?);
        writeln!(w, "branch,detuning_mhz,counts,error")?;
        for branch in &scan.branches {
            let name = if branch.upper { "upper" } else { "lower" };
            for &(x, y, e) in &branch.points {
                writeln!(w, "{name},{x:.6e},{y:.6e},{e:.6e}")?;
            }
        }
        w.flush()?;
    }
    let summary = SpectroscopySummary::from(&scan);
    io::write_json(&summary, out_path(&cfg, "spectrum.json"))?;
    println!("wrote {}", csv_path.display());
    Ok(())
}

fn cmd_entangle_scan(common: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(common)?;
    let pulsed = cfg.pulsed_config()?;
    let mut summaries = Vec::new();
    for basis_name in &cfg.protocol.bases {
        let basis = match basis_name {
            io::BasisName::Rl => EntanglementBasis::Rl,
            io::BasisName::Hv => EntanglementBasis::Hv,
            io::BasisName::Da => EntanglementBasis::Da,
        };
        let scan = run_entanglement_scan(&pulsed, basis, &cfg.protocol.hwp_angles_deg)?;
        let name = format!("entangle_{:?}.csv", basis).to_lowercase();
        io::write_curve_csv("hwp_deg,counts,error", &scan.points, out_path(&cfg, &name))?;
        summaries.push(EntanglementSummary::from(&scan));
    }
    io::write_json(&summaries, out_path(&cfg, "entangle.json"))?;
    println!(
        "wrote {} bases to {}",
        summaries.len(),
        cfg.output.dir.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct TransferScanSummary {
    runs: Vec<TransferSummary>,
    fidelity_slope_per_efficiency: Option<f64>,
    fidelity_slope_sigma: Option<f64>,
}

fn cmd_transfer(common: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(common)?;
    let mut runs = Vec::new();
    let mut slope_points = Vec::new();
    for &eta in &cfg.protocol.efficiencies {
        let mut transfer = cfg.transfer_config()?;
        transfer.detection_efficiency_393 = eta;
        let report = transfer_fidelity_experiment(&transfer, cfg.protocol.n_inputs)?;
        slope_points.push((eta, report.mean_fidelity, report.fidelity_se.max(1e-9)));
        runs.push(TransferSummary::new(eta, &report));
    }
    let (slope, slope_sigma) = if slope_points.len() >= 2 {
        let (m, s) = crate::analysis::weighted_line_slope(&slope_points)?;
        (Some(m), Some(s))
    } else {
        (None, None)
    };
    io::write_curve_csv(
        "detection_efficiency,mean_fidelity,fidelity_se",
        &slope_points,
        out_path(&cfg, "transfer.csv"),
    )?;
    let summary = TransferScanSummary {
        runs,
        fidelity_slope_per_efficiency: slope,
        fidelity_slope_sigma: slope_sigma,
    };
    io::write_json(&summary, out_path(&cfg, "transfer.json"))?;
    println!("wrote {}", out_path(&cfg, "transfer.json").display());
    Ok(())
}

fn cmd_report(common: &CommonArgs) -> Result<(), CliError> {
    let cfg = load(common)?;
    let qj = cfg.quantum_jump_config()?;
    let report = run_quantum_jump_experiment(&qj)?;
    io::write_histogram_csv(&report.histogram, out_path(&cfg, "report_g2.csv"))?;
    let summary = QuantumJumpSummary::from(&report);
    io::write_json(&summary, out_path(&cfg, "report.json"))?;
    println!(
        "tau_off {:.4} s, tau_on {:.4} s, rate {:.4} /s, significance {:.1} sigma",
        summary.tau_off_s,
        summary.tau_on_s,
        summary.absorption_rate_per_s,
        summary.significance_sigma
    );
    println!("wrote {}", out_path(&cfg, "report.json").display());
    Ok(())
}

/// Entry point used by the binary: parse, run, map exit codes
/// (0 ok, 1 usage, 2 parse, 3 numeric).
pub fn main_entry() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version requests are success, not usage errors.
            let benign = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            let _ = e.print();
            return if benign { 0 } else { 1 };
        }
    };
    match cli.run() {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[allow(dead_code)]
fn _assert_paths_are_used(p: &Path) -> &Path {
    p
}

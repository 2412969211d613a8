//! End-to-end quantum-jump experiment: simulate, recover the jumps with
//! the three-step pipeline, fit the dwell times, and correlate the
//! recovered absorption instants against the herald channel.

use super::ProtocolError;
use crate::analysis::{
    bin_counts, dark_period_durations, detect_jumps, estimate_state_means, fit_exponential, g2,
    optimal_count_threshold, optimal_delay_threshold, peak_significance, CorrelationHistogram,
    FitResult, JumpDirection,
};
use crate::sim::{channel, simulate, TimeTagStream, TrajectoryConfig};

/// Configuration of the composed experiment; the analysis knobs come on
/// top of the trajectory config.
#[derive(Debug, Clone)]
pub struct QuantumJumpConfig {
    pub trajectory: TrajectoryConfig,
    /// Fluorescence trace bin size, s.
    pub bin_s: f64,
    /// Moving-average window / buffered detections per jump.
    pub window_tags: usize,
    /// Correlation bin width, s.
    pub g2_bin_s: f64,
    /// Correlation lag range (one-sided), s.
    pub g2_max_lag_s: f64,
}

impl Default for QuantumJumpConfig {
    fn default() -> Self {
        QuantumJumpConfig {
            trajectory: TrajectoryConfig::default(),
            bin_s: 1e-3,
            window_tags: 10,
            g2_bin_s: 16e-3,
            g2_max_lag_s: 0.4,
        }
    }
}

/// Jump recovery on one stream: thresholds, windows and transition times.
#[derive(Debug, Clone)]
pub struct JumpAnalysis {
    pub mean_bright: f64,
    pub mean_dark: f64,
    pub count_threshold: u32,
    pub delay_threshold_s: f64,
    /// Recovered transition instants, time-ordered.
    pub events: Vec<(f64, JumpDirection)>,
    pub dark_durations: Vec<f64>,
    /// Windows that did not yield a transition photon.
    pub dropped_windows: usize,
}

/// Run the full three-step pipeline on a fluorescence stream.
pub fn analyze_jump_stream(
    stream: &TimeTagStream,
    bin_s: f64,
    window_tags: usize,
) -> Result<JumpAnalysis, ProtocolError> {
    let trace = bin_counts(stream, channel::FLUORESCENCE, bin_s)?;
    let (mean_bright, mean_dark) = estimate_state_means(&trace)?;
    let count_threshold = optimal_count_threshold(mean_bright, mean_dark)?;
    let r_on = mean_bright / bin_s;
    let r_off = (mean_dark / bin_s).max(1e-3);
    let delay_threshold_s = optimal_delay_threshold(r_on, r_off)?;

    let mut events = Vec::new();
    let mut dropped = 0usize;
    for direction in [JumpDirection::DarkToBright, JumpDirection::BrightToDark] {
        let windows = detect_jumps(
            stream,
            channel::FLUORESCENCE,
            count_threshold,
            bin_s,
            window_tags,
            direction,
        )?;
        for w in windows {
            match w.extract(delay_threshold_s) {
                Ok(t) => events.push((t, direction)),
                Err(_) => dropped += 1,
            }
        }
    }
    events.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let dark_durations = dark_period_durations(&events);
    Ok(JumpAnalysis {
        mean_bright,
        mean_dark,
        count_threshold,
        delay_threshold_s,
        events,
        dark_durations,
        dropped_windows: dropped,
    })
}

#[derive(Debug, Clone)]
pub struct QuantumJumpReport {
    pub tau_on: FitResult,
    pub tau_off: FitResult,
    pub absorption_rate: f64,
    pub absorption_rate_sigma: f64,
    pub histogram: CorrelationHistogram,
    pub significance: f64,
    pub peak_lag_bins: i64,
    pub n_jumps_on: usize,
    pub n_jumps_off: usize,
    pub analysis_on: JumpAnalysis,
}

/// Compose simulate -> jump recovery -> dwell-time fits -> herald
/// correlation. The source-off reference run reuses the same trajectory
/// with the pair rate set to zero and a shifted seed.
pub fn run_quantum_jump_experiment(
    cfg: &QuantumJumpConfig,
) -> Result<QuantumJumpReport, ProtocolError> {
    let (stream_on, _truth_on) = simulate(&cfg.trajectory)?;
    let analysis_on = analyze_jump_stream(&stream_on, cfg.bin_s, cfg.window_tags)?;
    let tau_on = fit_exponential(&analysis_on.dark_durations)?;

    let mut off_trajectory = cfg.trajectory.clone();
    off_trajectory.source.pair_rate = 0.0;
    off_trajectory.master_seed = cfg.trajectory.master_seed.wrapping_add(1);
    let (stream_off, _) = simulate(&off_trajectory)?;
    let analysis_off = analyze_jump_stream(&stream_off, cfg.bin_s, cfg.window_tags)?;
    let tau_off = fit_exponential(&analysis_off.dark_durations)?;

    // The rate estimator 1/tau_on - 1/tau_off may fluctuate slightly
    // negative when the source adds nothing, so the report computes it
    // directly rather than through the order-checked helper.
    let absorption_rate = 1.0 / tau_on.params[0] - 1.0 / tau_off.params[0];
    let absorption_rate_sigma = ((tau_on.uncertainties[0] / (tau_on.params[0] * tau_on.params[0]))
        .powi(2)
        + (tau_off.uncertainties[0] / (tau_off.params[0] * tau_off.params[0])).powi(2))
    .sqrt();

    // Correlate herald detections against the recovered absorption instants
    // (the first fluorescence photon of each dark-to-bright jump).
    let heralds = stream_on.channel_times(channel::HERALD);
    let onsets: Vec<f64> = analysis_on
        .events
        .iter()
        .filter(|(_, d)| *d == JumpDirection::DarkToBright)
        .map(|(t, _)| *t)
        .collect();
    let histogram = g2(&heralds, &onsets, cfg.g2_bin_s, cfg.g2_max_lag_s)?;
    let significance = peak_significance(&histogram)?;
    let peak_lag_bins = histogram.peak_bin;
    let (n_on, n_off) = (
        analysis_on.dark_durations.len(),
        analysis_off.dark_durations.len(),
    );

    Ok(QuantumJumpReport {
        tau_on,
        tau_off,
        absorption_rate,
        absorption_rate_sigma,
        histogram,
        significance,
        peak_lag_bins,
        n_jumps_on: n_on,
        n_jumps_off: n_off,
        analysis_on,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{GroundTruthLog, IonState};

    fn pipeline_config(duration_s: f64, seed: u64) -> QuantumJumpConfig {
        let mut trajectory = TrajectoryConfig {
            duration_s,
            r_on: 3.0e4,
            r_dark: 100.0,
            // Slow pumping keeps dwell periods long against the N-bin
            // moving-average resolution.
            pump_rate_850: 1.0,
            tau0_s: 1.11,
            master_seed: seed,
            ..TrajectoryConfig::default()
        };
        trajectory.source.pair_rate = 0.0;
        QuantumJumpConfig {
            trajectory,
            ..QuantumJumpConfig::default()
        }
    }

    fn match_fraction(
        truth: &GroundTruthLog,
        events: &[(f64, JumpDirection)],
        direction: JumpDirection,
        tolerance_s: f64,
    ) -> (usize, usize) {
        let into = match direction {
            JumpDirection::DarkToBright => IonState::Bright,
            JumpDirection::BrightToDark => IonState::Dark,
        };
        let true_times = truth.times_into(into);
        let recovered: Vec<f64> = events
            .iter()
            .filter(|(_, d)| *d == direction)
            .map(|(t, _)| *t)
            .collect();
        let mut matched = 0usize;
        for &t in &true_times {
            let i = recovered.partition_point(|&r| r < t - tolerance_s);
            if i < recovered.len() && (recovered[i] - t).abs() <= tolerance_s {
                matched += 1;
            }
        }
        (matched, true_times.len())
    }

    #[test]
    fn pipeline_recovers_jumps_from_ground_truth() {
        let mut cfg = pipeline_config(440.0, 91);
        // Fine binning: dwell periods shorter than the N-bin smoothing
        // scale are invisible to the moving average, so push that scale
        // well below the dwell-time distribution.
        cfg.bin_s = 0.25e-3;
        let (stream, truth) = simulate(&cfg.trajectory).unwrap();
        let analysis = analyze_jump_stream(&stream, cfg.bin_s, cfg.window_tags).unwrap();
        assert!(
            (analysis.mean_bright - 7.5).abs() < 1.0,
            "{}",
            analysis.mean_bright
        );
        assert!(analysis.mean_dark < 0.2);

        // Nearly every true jump is matched within the window span.
        let tol = cfg.window_tags as f64 * cfg.bin_s;
        for dir in [JumpDirection::DarkToBright, JumpDirection::BrightToDark] {
            let (matched, total) = match_fraction(&truth, &analysis.events, dir, tol);
            assert!(total >= 200, "{total} true jumps");
            assert!(
                matched as f64 >= 0.99 * total as f64,
                "{dir:?}: {matched}/{total}"
            );
        }

        // The extracted instant is the true first detected photon after the
        // jump for nearly all jumps. (The photon itself trails the jump by
        // an exponential delay of mean 1/r_on, so identity with the first
        // photon is the sharp notion of accuracy here.)
        let fluor = stream.channel_times(crate::sim::channel::FLUORESCENCE);
        let recovered: Vec<f64> = analysis
            .events
            .iter()
            .filter(|(_, d)| *d == JumpDirection::DarkToBright)
            .map(|(t, _)| *t)
            .collect();
        let mut exact = 0usize;
        let mut total_true = 0usize;
        for &t in &truth.times_into(IonState::Bright) {
            total_true += 1;
            let first_photon = fluor[fluor.partition_point(|&x| x < t)];
            let i = recovered.partition_point(|&r| r < first_photon - 2e-6);
            if i < recovered.len() && (recovered[i] - first_photon).abs() <= 2e-6 {
                exact += 1;
            }
        }
        assert!(
            exact as f64 >= 0.95 * total_true as f64,
            "first-photon identity {exact}/{total_true}"
        );
    }

    #[test]
    fn source_off_report_recovers_tau0_and_zero_rate() {
        let mut cfg = pipeline_config(520.0, 92);
        // A tiny pair rate with zero absorption: heralds exist, no jumps
        // caused by the source, so the derived rate is consistent with 0.
        cfg.trajectory.source.pair_rate = 100.0;
        cfg.trajectory.absorption_peak_rate = 0.0;
        let report = run_quantum_jump_experiment(&cfg).unwrap();
        let tau = report.tau_on.params[0];
        let se = report.tau_on.uncertainties[0];
        assert!(report.n_jumps_on > 200);
        assert!((tau - 1.11).abs() < 4.0 * se, "tau {tau} ± {se}");
        assert!(
            report.absorption_rate.abs() <= 3.0 * report.absorption_rate_sigma,
            "rate {} ± {}",
            report.absorption_rate,
            report.absorption_rate_sigma
        );
    }
}

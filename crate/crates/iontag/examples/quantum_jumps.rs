//! Quantum jumps on the fluorescence trace: simulate the continuous
//! scheme-B experiment, render a slice of the binned trace, and run the
//! three-step jump analysis (count threshold, moving-average windows,
//! first/last-photon extraction).
//!
//! ```bash
//! cargo run --release --example quantum_jumps
//! ```

use iontag::analysis::{bin_counts, fit_exponential};
use iontag::protocols::analyze_jump_stream;
use iontag::sim::{channel, simulate, TrajectoryConfig};
use iontag::source::SourceConfig;

fn main() {
    let cfg = TrajectoryConfig {
        duration_s: 400.0,
        r_on: 2.0e4,
        r_dark: 100.0,
        pump_rate_850: 1.0,
        tau0_s: 1.11,
        source: SourceConfig {
            pair_rate: 0.0,
            ..SourceConfig::default()
        },
        master_seed: 11,
        ..TrajectoryConfig::default()
    };
    println!(
        "simulating {} s of scheme-B fluorescence ...",
        cfg.duration_s
    );
    let (stream, truth) = simulate(&cfg).unwrap();
    println!("{} detection records", stream.len());

    // A strip of the trace around the first pump event, 5 ms bins.
    let trace = bin_counts(&stream, channel::FLUORESCENCE, 5e-3).unwrap();
    let first_dark = truth.transitions().first().map_or(1.0, |t| t.time_s);
    let start = ((first_dark - 0.05) / trace.bin_s).max(0.0) as usize;
    println!("\nfluorescence trace around t = {first_dark:.2} s (5 ms bins, 60 columns):");
    let peak = f64::from(cfg.r_on as u32) * trace.bin_s;
    for row in (0..5).rev() {
        let level = peak * f64::from(row as u32) / 5.0;
        let line: String = trace.counts[start..(start + 60).min(trace.len())]
            .iter()
            .map(|&c| if f64::from(c) > level { '#' } else { ' ' })
            .collect();
        println!("  |{line}");
    }
    println!("  +{}", "-".repeat(60));

    // The full pipeline on 1 ms bins.
    let analysis = analyze_jump_stream(&stream, 1e-3, 10).unwrap();
    println!(
        "\nstate means: bright {:.1}, dark {:.3} counts/bin",
        analysis.mean_bright, analysis.mean_dark
    );
    println!(
        "count threshold n = {}, delay threshold {:.1} us",
        analysis.count_threshold,
        analysis.delay_threshold_s * 1e6
    );
    println!(
        "{} jump events recovered ({} windows dropped)",
        analysis.events.len(),
        analysis.dropped_windows
    );

    let fit = fit_exponential(&analysis.dark_durations).unwrap();
    println!(
        "dark-period lifetime: {:.3} ± {:.3} s over {} periods (simulated with {:.2} s)",
        fit.params[0],
        fit.uncertainties[0],
        analysis.dark_durations.len(),
        cfg.tau0_s
    );
}

//! Heralded single-photon absorption: the calibrated 50-minute run in
//! which absorption events (first photon of each dark-to-bright jump)
//! correlate with herald detections at zero delay.
//!
//! ```bash
//! cargo run --release --example heralded_coincidences
//! ```

use iontag::protocols::run_quantum_jump_experiment;

fn main() {
    let preset = concat!(env!("CARGO_MANIFEST_DIR"), "/presets/quantum-jumps.toml");
    let cfg = iontag::io::parse_config(&std::fs::read_to_string(preset).unwrap()).unwrap();
    let qj = cfg.quantum_jump_config().unwrap();
    println!(
        "simulating {} s with the source on, then a source-off reference ...",
        qj.trajectory.duration_s
    );
    let report = run_quantum_jump_experiment(&qj).unwrap();

    println!(
        "\ndark-period lifetimes: source off {:.3} ± {:.3} s, on {:.3} ± {:.3} s",
        report.tau_off.params[0],
        report.tau_off.uncertainties[0],
        report.tau_on.params[0],
        report.tau_on.uncertainties[0],
    );
    println!(
        "derived absorption rate: {:.3} ± {:.3} /s",
        report.absorption_rate, report.absorption_rate_sigma
    );

    // The delay histogram around zero.
    let hist = &report.histogram;
    println!(
        "\ndelay histogram (lag bins of {:.0} ms):",
        hist.bin_width_s * 1e3
    );
    let half = hist.half_bins();
    for k in -6..=6i64 {
        let c = hist.counts_at_lag_bin(k);
        let bar = "#".repeat((c / 2) as usize);
        println!(
            "  {:>6.0} ms | {c:>4} {bar}",
            (k as f64) * hist.bin_width_s * 1e3
        );
    }
    let _ = half;
    println!(
        "\npeak {} counts at lag bin {}, background {:.1} per bin: {:.1} sigma",
        hist.peak_counts(),
        report.peak_lag_bins,
        hist.background,
        report.significance
    );
}

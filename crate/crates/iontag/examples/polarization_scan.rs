//! Polarization control of the absorption: the ion is pumped to the upper
//! outer Zeeman sublevels (sensitive to sigma-) and the photon setting is
//! swept from one circular pole through linear to the other.
//!
//! ```bash
//! cargo run --release --example polarization_scan
//! ```

use iontag::protocols::{malus_r_squared, run_polarization_scan};
use iontag::source::qwp_prepared;

fn main() {
    let preset = concat!(
        env!("CARGO_MANIFEST_DIR"),
        "/presets/polarization-scan.toml"
    );
    let cfg = iontag::io::parse_config(&std::fs::read_to_string(preset).unwrap()).unwrap();
    let pulsed = cfg.pulsed_config().unwrap();
    let angles = &cfg.protocol.qwp_angles_deg;
    let settings: Vec<_> = angles
        .iter()
        .map(|d| qwp_prepared(d.to_radians()))
        .collect();
    println!(
        "sweeping {} photon polarizations over {} cycles each ...",
        settings.len(),
        pulsed.cycles
    );
    let scan = run_polarization_scan(&pulsed, &settings).unwrap();

    println!("\n  qwp angle   overlap   peak counts");
    let max = scan
        .points
        .iter()
        .map(|p| p.peak_counts)
        .max()
        .unwrap_or(1)
        .max(1);
    for (angle, p) in angles.iter().zip(&scan.points) {
        let bar = "#".repeat((p.peak_counts * 40 / max) as usize);
        println!(
            "  {angle:>8.2}   {:>6.3}   {:>6} {bar}",
            p.overlap, p.peak_counts
        );
    }
    println!("\nMalus-law R^2: {:.4}", malus_r_squared(&scan).unwrap());
    println!(
        "accidental background per bin: {:.3}",
        scan.points[0].background
    );
}

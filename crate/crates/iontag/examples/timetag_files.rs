//! The binary time-tag format: write a simulated stream, read it back,
//! and show the parse-error taxonomy on corrupted files.
//!
//! ```bash
//! cargo run --release --example timetag_files
//! ```

use iontag::io::{read_stream, write_stream};
use iontag::sim::{simulate, TrajectoryConfig};
use iontag::source::SourceConfig;

fn main() {
    let cfg = TrajectoryConfig {
        duration_s: 2.0,
        r_on: 5000.0,
        pump_rate_850: 2.0,
        tau0_s: 0.3,
        source: SourceConfig {
            pair_rate: 1000.0,
            ..SourceConfig::default()
        },
        master_seed: 99,
        ..TrajectoryConfig::default()
    };
    let (stream, _) = simulate(&cfg).unwrap();

    let mut bytes = Vec::new();
    write_stream(&stream, &mut bytes).unwrap();
    println!(
        "{} records -> {} bytes (16-byte header + 9 bytes per record)",
        stream.len(),
        bytes.len()
    );

    let back = read_stream(bytes.as_slice()).unwrap();
    assert_eq!(back, stream);
    println!(
        "round trip: bit-identical, tick resolution {} ps",
        back.tick_ps()
    );

    println!("\ncorruption taxonomy:");
    let mut bad = bytes.clone();
    bad[0] = b'Z';
    println!(
        "  flipped magic     -> {}",
        read_stream(bad.as_slice()).unwrap_err()
    );
    let mut bad = bytes.clone();
    bad[4] = 3;
    println!(
        "  wrong version     -> {}",
        read_stream(bad.as_slice()).unwrap_err()
    );
    let bad = &bytes[..bytes.len() - 4];
    println!("  truncated record  -> {}", read_stream(bad).unwrap_err());
    let mut bad = bytes.clone();
    // Swap the first two records to break the ordering invariant.
    for i in 0..9 {
        bad.swap(16 + i, 25 + i);
    }
    println!(
        "  reordered records -> {}",
        read_stream(bad.as_slice()).unwrap_err()
    );
}

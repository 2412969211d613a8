//! Print the Ca-40+ constants table, Zeeman shifts at the default field,
//! and the relative efficiency of the four detection schemes.
//!
//! ```bash
//! cargo run --release --example atomic_constants
//! ```

use iontag::atom::{zeeman_shift, MagneticField, Term, TransitionTable};
use iontag::sim::relative_scheme_efficiency;

fn main() {
    let table = TransitionTable::default();
    table
        .validate()
        .expect("tabulated constants are consistent");
    println!("{}", table.report());

    let field = MagneticField::default_lab();
    println!("Zeeman shifts at {} G (MHz):", field.gauss);
    for term in [Term::S12, Term::D52, Term::P32] {
        print!("  {:<5}", term.label());
        for sub in term.sublevels() {
            print!(
                "  m={:>4}: {:+.3}",
                sub.m.to_string(),
                zeeman_shift(sub, &field)
            );
        }
        println!();
    }

    println!();
    let ratio = relative_scheme_efficiency(&table);
    println!("detection-scheme efficiency, 854 nm jumps over 850 nm jumps: {ratio:.1}");
    println!("  (relative line strength 6 x branching 0.9344/0.0590)");
}

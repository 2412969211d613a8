//! Simulator and analysis toolkit for single-photon absorption experiments
//! on a single trapped Ca-40+ ion.
//!
//! The crate has two halves that meet at a common time-tag stream format:
//!
//! * a deterministic Monte Carlo event engine ([`sim`]) driven by an SPDC
//!   pair-source model ([`source`]) and the static atomic physics of
//!   Ca-40+ ([`atom`]), producing photon detection records exactly as a
//!   time-tagged counting system would;
//! * an analysis pipeline ([`analysis`]) that recovers quantum jumps from
//!   fluorescence tag streams, correlates them with herald detections,
//!   and fits the resulting statistics.
//!
//! Higher-level experiment recipes (polarization scans, coincidence
//! spectroscopy, entanglement scans, heralded state transfer) live in
//! [`protocols`]; file formats, the experiment configuration schema and
//! report emission live in [`io`].
//!
//! Start with the `examples/` directory: each example is a runnable,
//! self-contained version of one experiment.

pub mod analysis;
pub mod atom;
pub mod cli;
pub mod half;
pub mod io;
pub mod math;
pub mod protocols;
pub mod rng;
pub mod sim;
pub mod source;

pub use half::Half;

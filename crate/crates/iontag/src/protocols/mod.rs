//! Experiment recipes composing source, atom, simulator and analysis:
//! continuous quantum-jump runs, pulsed polarization and spectroscopy
//! scans, three-basis entanglement scans, and the heralded photon-to-qubit
//! state transfer.

mod pulsed;
mod quantum_jump;
mod transfer;

pub use pulsed::{
    malus_r_squared, run_entanglement_scan, run_polarization_scan, run_pulsed_coincidence,
    run_spectroscopy_scan, EntanglementBasis, EntanglementScan, PolarizationScan,
    PolarizationScanPoint, PulsedConfig, PulsedOutcome, ScanBranch, SpectroscopyScan,
};
pub use quantum_jump::{
    analyze_jump_stream, run_quantum_jump_experiment, JumpAnalysis, QuantumJumpConfig,
    QuantumJumpReport,
};
pub use transfer::{
    absorb_and_herald, prepare_transfer_state, transfer_fidelity_experiment, DManifoldState,
    IonQubitState, PhaseOp, PulsePhase, PulseSequence, TransferConfig, TransferOutcome,
    TransferReport,
};

use thiserror::Error;

use crate::analysis::AnalysisError;
use crate::atom::AtomError;
use crate::sim::SimError;
use crate::source::SourceError;

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("invalid protocol config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Source(#[from] SourceError),
    #[error(transparent)]
    Atom(#[from] AtomError),
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

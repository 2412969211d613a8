//! File formats, the experiment configuration schema and report emission.

mod config;
mod format;
mod report;

pub use config::{
    load_config, parse_config, resolve_config_path, AcceptanceName, AnalysisSection, BasisName,
    BranchingSection, ConfigError, ExperimentConfig, ExperimentKind, OutputSection, PairStateName,
    ProtocolSection, SchemeName, SourceSection, SplitterName, TrajectorySection,
};
pub use format::{
    read_stream, read_stream_from_path, write_stream, write_stream_to_path, FormatError,
    TimeTagFileHeader, HEADER_LEN, MAGIC, RECORD_LEN, VERSION,
};
pub use report::{
    write_curve_csv, write_histogram_csv, write_json, write_pairs_csv, write_polarization_csv,
    EntanglementSummary, G2Summary, PolarizationSummary, QuantumJumpSummary, SpectroscopySummary,
    TransferSummary,
};

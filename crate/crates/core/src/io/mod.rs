//! File formats: scenarios, adjacency sequences, result tables and manifests.

pub mod adjacency;
pub mod manifest;
pub mod scenario;
pub mod tables;

pub use adjacency::{
    decode_sequence, encode_bitset, encode_triples, read_sequence, write_bitset, write_triples,
};
pub use manifest::{sha256_hex, to_json_pretty, write_atomic, FileDigest, Manifest};
pub use scenario::{HardInstanceSpec, ScenarioFile, SegmentSpec, SCENARIO_SCHEMA};
pub use tables::{cells_csv, detections_csv, read_estimates, refinements_csv, trials_csv};

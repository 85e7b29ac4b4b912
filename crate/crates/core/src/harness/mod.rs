//! Experiment orchestration: configuration, seed derivation and the
//! gen → train → eval → bop → account → report stages.
//!
//! Every stage seed is derived from the master seed as the first eight bytes
//! (little-endian) of `SHA-256(master_seed LE ‖ module name ‖ index LE)`.

mod config;
mod manifest;
mod stages;

use sha2::{Digest, Sha256};

pub use config::{ChannelConfig, ChannelModel, ExperimentConfig, ModelConfig};
pub use manifest::{ManifestEntry, RunManifest, MANIFEST_FILE};
pub use stages::{Pipeline, ReportRow, Stage};

use crate::error::Error;

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn child_seed(master_seed: u64, module: &str, index: u64) -> u64 {
    let mut h = Sha256::new();
    h.update(master_seed.to_le_bytes());
    h.update(module.as_bytes());
    h.update(index.to_le_bytes());
    let d = h.finalize();
    u64::from_le_bytes(d[..8].try_into().unwrap())
}

/// Process exit status for a failed run: 2 configuration, 3 missing
/// artifact, 4 numeric failure, 1 anything else.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) => 2,
        Error::MissingArtifact(_) => 3,
        Error::ZeroSample { .. }
        | Error::NotUnitary { .. }
        | Error::DegenerateTarget { .. }
        | Error::SingularEffectiveChannel { .. }
        | Error::Infeasible { .. } => 4,
        _ => 1,
    }
}

//! File formats, dataset manifests, subject-disjoint splits and frame
//! sampling.

mod cloud_format;
mod manifest;
mod split;

pub use cloud_format::{
    decode_cloud, encode_cloud, load_cloud, read_labeled_cloud, read_ply, record_len,
    write_labeled_cloud, write_ply, FLAG_PROVENANCE, HEADER_LEN, MAGIC,
};
pub use manifest::{
    BodyRecord, CloudRecord, DatasetManifest, RejectedCloud, SceneEntry, SceneStatus,
    MANIFEST_FILE, MANIFEST_VERSION,
};
pub use split::{
    check_subject_disjoint, sample_frames, subject_components, subject_disjoint_split,
    SequenceRecord, SplitOptions, SplitSpec, SplitTargets, UnmetTarget, REFERENCE_SPLIT_TARGETS,
};

use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("bad magic {0:?}, expected HCK1")]
    BadMagic([u8; 4]),
    #[error("truncated cloud file: expected {expected} bytes, got {got}")]
    Truncated { expected: usize, got: usize },
    #[error("header flags {0:#x} do not match the file body")]
    FlagMismatch(u32),
    #[error("{0} trailing bytes after the last record")]
    TrailingBytes(usize),
    #[error("invalid cloud: {0}")]
    Cloud(#[from] GeometryError),
    #[error("ply: {0}")]
    Ply(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("split: {0}")]
    Split(String),
    #[error("frame sampling: {0}")]
    Sampling(String),
}

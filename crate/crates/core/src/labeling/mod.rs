//! Pseudo ground-truth extraction from fitted body meshes.

mod pseudo;
mod taxonomy;

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{GeometryError, TriangleMesh};

pub use pseudo::{
    assign_and_merge_parts, pseudo_label, refine_with_released_masks, segment_human_points,
    BodyIndex, FittedBody, LabelConfig, PointLabels,
};
pub use taxonomy::{BodyModelFamily, BodyPart, BodyPartTaxonomy};

#[derive(Debug, Error)]
pub enum LabelError {
    #[error("distance threshold must be positive, got {0}")]
    InvalidThreshold(f64),
    #[error("invalid instance id {0}")]
    InvalidInstance(u32),
    #[error("duplicate instance id {0}")]
    DuplicateInstance(u32),
    #[error("unknown instance id {0}")]
    UnknownInstance(u32),
    #[error("unlabeled face {face} on body {instance}")]
    UnlabeledFace { instance: u32, face: usize },
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("taxonomy: {0}")]
    Taxonomy(String),
    #[error("part sidecar: {0}")]
    Sidecar(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

/// Sidecar mapping half-open face index ranges to source part names.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartSidecar {
    pub ranges: Vec<PartRange>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartRange {
    pub start: usize,
    pub end: usize,
    pub part: String,
}

impl PartSidecar {
    /// Per-face source ids; every face must be covered exactly once.
    pub fn face_parts(&self, face_count: usize, taxonomy: &BodyPartTaxonomy) -> Result<Vec<u16>, LabelError> {
        let mut parts = vec![0u16; face_count];
        for r in &self.ranges {
            let id = taxonomy
                .source_id(&r.part)
                .ok_or_else(|| LabelError::Sidecar(format!("unknown part {:?}", r.part)))?;
            if r.start > r.end || r.end > face_count {
                return Err(LabelError::Sidecar(format!(
                    "range {}..{} outside {face_count} faces",
                    r.start, r.end
                )));
            }
            for slot in &mut parts[r.start..r.end] {
                if *slot != 0 {
                    return Err(LabelError::Sidecar("overlapping ranges".into()));
                }
                *slot = id;
            }
        }
        if let Some(face) = parts.iter().position(|&p| p == 0) {
            return Err(LabelError::Sidecar(format!("face {face} is not covered")));
        }
        Ok(parts)
    }

    /// Compresses per-face ids into runs.
    pub fn from_face_parts(parts: &[u16], taxonomy: &BodyPartTaxonomy) -> Result<Self, LabelError> {
        let mut ranges: Vec<PartRange> = Vec::new();
        for (face, &id) in parts.iter().enumerate() {
            let name = taxonomy
                .source_name(id)
                .ok_or(LabelError::UnlabeledFace { instance: 0, face })?;
            match ranges.last_mut() {
                Some(last) if last.part == name && last.end == face => last.end = face + 1,
                _ => ranges.push(PartRange {
                    start: face,
                    end: face + 1,
                    part: name.to_string(),
                }),
            }
        }
        Ok(Self { ranges })
    }
}

/// Loads an OBJ body mesh and its part sidecar.
pub fn load_fitted_body(
    obj_path: &Path,
    sidecar_path: &Path,
    instance_id: u32,
    taxonomy: &BodyPartTaxonomy,
) -> Result<FittedBody, LabelError> {
    let file = std::fs::File::open(obj_path).map_err(GeometryError::from)?;
    let (vertices, faces) = TriangleMesh::read_obj(std::io::BufReader::new(file))?;
    let sidecar: PartSidecar = serde_json::from_reader(std::io::BufReader::new(
        std::fs::File::open(sidecar_path).map_err(GeometryError::from)?,
    ))?;
    let parts = sidecar.face_parts(faces.len(), taxonomy)?;
    let mesh = TriangleMesh::new(vertices, faces, Some(parts))?;
    let body = FittedBody::new(mesh, instance_id, taxonomy.family())?;
    body.validate(taxonomy)?;
    Ok(body)
}

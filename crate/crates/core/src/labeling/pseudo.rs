//! Pseudo ground truth from fitted body meshes: distance-thresholded human
//! masks, nearest-face body parts, and refinement with external masks.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{BodyModelFamily, BodyPartTaxonomy, LabelError};
use crate::geometry::{
    DistanceAccelerator, LabeledPointCloud, TriangleMesh, SEMANTIC_BACKGROUND, SEMANTIC_HUMAN,
};

/// A registered body surface with per-face source-part ids.
#[derive(Clone, Debug)]
pub struct FittedBody {
    pub mesh: TriangleMesh,
    pub instance_id: u32,
    pub family: BodyModelFamily,
}

impl FittedBody {
    /// Face part ids are not checked here; see [`FittedBody::validate`].
    pub fn new(mesh: TriangleMesh, instance_id: u32, family: BodyModelFamily) -> Result<Self, LabelError> {
        if instance_id == 0 {
            return Err(LabelError::InvalidInstance(0));
        }
        if mesh.is_empty() {
            return Err(LabelError::Geometry(crate::geometry::GeometryError::EmptyMesh));
        }
        Ok(Self {
            mesh,
            instance_id,
            family,
        })
    }

    /// Every face must carry a source id valid in `taxonomy`.
    pub fn validate(&self, taxonomy: &BodyPartTaxonomy) -> Result<(), LabelError> {
        let parts = self.mesh.face_part();
        for face in 0..self.mesh.face_count() {
            let id = parts.map_or(0, |p| p[face]);
            if taxonomy.merge_source(id).is_none() {
                return Err(LabelError::UnlabeledFace {
                    instance: self.instance_id,
                    face,
                });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LabelConfig {
    /// Points strictly closer than this (m) to a body are human.
    pub distance_threshold: f64,
}

impl Default for LabelConfig {
    fn default() -> Self {
        Self {
            distance_threshold: 0.05,
        }
    }
}

impl LabelConfig {
    pub fn validate(&self) -> Result<(), LabelError> {
        if self.distance_threshold > 0.0 && self.distance_threshold.is_finite() {
            Ok(())
        } else {
            Err(LabelError::InvalidThreshold(self.distance_threshold))
        }
    }
}

/// Per-point labels produced by the pseudo-labeling steps.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct PointLabels {
    pub semantic: Vec<u8>,
    pub instance: Vec<u32>,
    pub part: Vec<u8>,
}

impl PointLabels {
    pub fn background(n: usize) -> Self {
        Self {
            semantic: vec![SEMANTIC_BACKGROUND; n],
            instance: vec![0; n],
            part: vec![0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.semantic.len()
    }

    pub fn is_empty(&self) -> bool {
        self.semantic.is_empty()
    }

    pub fn human_count(&self) -> usize {
        self.semantic.iter().filter(|&&s| s == SEMANTIC_HUMAN).count()
    }

    /// Writes the labels into `cloud`.
    pub fn apply_to(&self, cloud: &mut LabeledPointCloud) -> Result<(), LabelError> {
        check_len(cloud.len(), self.len())?;
        cloud.semantic.clone_from(&self.semantic);
        cloud.instance.clone_from(&self.instance);
        cloud.part.clone_from(&self.part);
        Ok(())
    }
}

/// Bodies with their distance accelerators, sorted by instance id.
pub struct BodyIndex<'a> {
    bodies: Vec<(&'a FittedBody, DistanceAccelerator)>,
}

impl<'a> BodyIndex<'a> {
    pub fn build(bodies: &'a [FittedBody]) -> Result<Self, LabelError> {
        let mut seen = std::collections::BTreeSet::new();
        for b in bodies {
            if !seen.insert(b.instance_id) {
                return Err(LabelError::DuplicateInstance(b.instance_id));
            }
        }
        let mut built = bodies
            .par_iter()
            .map(|b| Ok((b, DistanceAccelerator::build(&b.mesh)?)))
            .collect::<Result<Vec<_>, LabelError>>()?;
        built.sort_by_key(|(b, _)| b.instance_id);
        Ok(Self { bodies: built })
    }

    pub fn len(&self) -> usize {
        self.bodies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bodies.is_empty()
    }

    fn get(&self, instance: u32) -> Option<&(&'a FittedBody, DistanceAccelerator)> {
        self.bodies
            .binary_search_by_key(&instance, |(b, _)| b.instance_id)
            .ok()
            .map(|i| &self.bodies[i])
    }

    /// Nearest body strictly within `threshold`; ties go to the lower id.
    pub fn nearest_body(&self, p: &nalgebra::Point3<f64>, threshold: f64) -> Option<(u32, f64)> {
        let mut best: Option<(u32, f64)> = None;
        for (body, accel) in &self.bodies {
            let limit = best.map_or(threshold, |(_, d)| d);
            if accel.bounds().distance_squared(p) > limit * limit {
                continue;
            }
            if let Some(hit) = accel.nearest_within(p, limit) {
                let closer = hit.distance < threshold && best.is_none_or(|(_, d)| hit.distance < d);
                if closer {
                    best = Some((body.instance_id, hit.distance));
                }
            }
        }
        best
    }
}

/// Human/background and instance labels by distance thresholding.
///
/// A point is human iff it lies strictly within `cfg.distance_threshold` of
/// some body; it takes the instance id of the nearest such body. Part ids are
/// left at 0.
pub fn segment_human_points(
    cloud: &LabeledPointCloud,
    index: &BodyIndex<'_>,
    cfg: &LabelConfig,
) -> Result<PointLabels, LabelError> {
    cfg.validate()?;
    let n = cloud.len();
    let mut labels = PointLabels::background(n);
    if index.is_empty() {
        return Ok(labels);
    }
    let nearest: Vec<Option<(u32, f64)>> = cloud
        .positions
        .par_iter()
        .map(|p| index.nearest_body(p, cfg.distance_threshold))
        .collect();
    for (i, hit) in nearest.into_iter().enumerate() {
        if let Some((id, _)) = hit {
            labels.semantic[i] = SEMANTIC_HUMAN;
            labels.instance[i] = id;
        }
    }
    Ok(labels)
}

/// Final part id of each human point from the nearest face of its own body.
pub fn assign_and_merge_parts(
    cloud: &LabeledPointCloud,
    index: &BodyIndex<'_>,
    labels: &PointLabels,
    taxonomy: &BodyPartTaxonomy,
) -> Result<Vec<u8>, LabelError> {
    check_len(cloud.len(), labels.len())?;
    cloud
        .positions
        .par_iter()
        .zip(labels.instance.par_iter())
        .map(|(p, &inst)| {
            if inst == 0 {
                return Ok(0);
            }
            let (body, accel) = index.get(inst).ok_or(LabelError::UnknownInstance(inst))?;
            let hit = accel.nearest(p);
            let source = body.mesh.face_part().map_or(0, |parts| parts[hit.face]);
            taxonomy
                .merge_source(source)
                .map(|part| part.id())
                .ok_or(LabelError::UnlabeledFace {
                    instance: inst,
                    face: hit.face,
                })
        })
        .collect()
}

/// Keeps human labels only where `external_mask` agrees.
pub fn refine_with_released_masks(
    labels: &PointLabels,
    external_mask: &[bool],
) -> Result<PointLabels, LabelError> {
    check_len(labels.len(), external_mask.len())?;
    let mut out = labels.clone();
    for (i, &keep) in external_mask.iter().enumerate() {
        if !keep {
            out.semantic[i] = SEMANTIC_BACKGROUND;
            out.instance[i] = 0;
            out.part[i] = 0;
        }
    }
    Ok(out)
}

/// Human mask, instances and parts in one call.
pub fn pseudo_label(
    cloud: &LabeledPointCloud,
    bodies: &[FittedBody],
    taxonomy: &BodyPartTaxonomy,
    cfg: &LabelConfig,
) -> Result<PointLabels, LabelError> {
    let index = BodyIndex::build(bodies)?;
    let mut labels = segment_human_points(cloud, &index, cfg)?;
    labels.part = assign_and_merge_parts(cloud, &index, &labels, taxonomy)?;
    Ok(labels)
}

fn check_len(expected: usize, got: usize) -> Result<(), LabelError> {
    if expected == got {
        Ok(())
    } else {
        Err(LabelError::LengthMismatch { expected, got })
    }
}

use nalgebra::Point3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::geometry::{rasterize_meshes, CameraModel, LabeledPointCloud, RenderItem, TriangleMesh};
use crate::labeling::FittedBody;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OcclusionConfig {
    /// Visibility at or above this is low occlusion.
    pub low_min_visibility: f64,
    /// Visibility at or above this (and below the low bound) is medium.
    pub medium_min_visibility: f64,
    /// Half-width in pixels of the square drawn per annotated point.
    pub splat_radius: usize,
}

impl Default for OcclusionConfig {
    fn default() -> Self {
        Self {
            low_min_visibility: 0.8,
            medium_min_visibility: 0.5,
            splat_radius: 1,
        }
    }
}

impl OcclusionConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        let (lo, med) = (self.low_min_visibility, self.medium_min_visibility);
        if !(0.0 < med && med < lo && lo < 1.0) {
            return Err(EvalError::InvalidConfig(format!(
                "visibility bounds must satisfy 0 < {med} < {lo} < 1"
            )));
        }
        Ok(())
    }

    pub fn level(&self, visibility: f64) -> OcclusionLevel {
        if visibility >= self.low_min_visibility {
            OcclusionLevel::Low
        } else if visibility >= self.medium_min_visibility {
            OcclusionLevel::Medium
        } else {
            OcclusionLevel::High
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OcclusionLevel {
    Low,
    Medium,
    High,
}

/// A fitted mesh and the annotated points of the same person.
#[derive(Clone, Debug)]
pub struct AnnotatedHuman {
    pub instance: u32,
    pub mesh: TriangleMesh,
    pub points: Vec<Point3<f64>>,
}

#[derive(Clone, Debug)]
pub struct OcclusionScene {
    pub scene_id: String,
    pub camera: CameraModel,
    pub humans: Vec<AnnotatedHuman>,
}

impl OcclusionScene {
    /// Pairs every fitted body with the cloud points carrying its instance id.
    pub fn from_cloud(
        scene_id: impl Into<String>,
        camera: CameraModel,
        bodies: &[FittedBody],
        cloud: &LabeledPointCloud,
    ) -> Self {
        let humans = bodies
            .iter()
            .map(|b| AnnotatedHuman {
                instance: b.instance_id,
                mesh: b.mesh.clone(),
                points: cloud
                    .positions
                    .iter()
                    .zip(&cloud.instance)
                    .filter(|(_, &id)| id == b.instance_id)
                    .map(|(p, _)| *p)
                    .collect(),
            })
            .collect();
        Self {
            scene_id: scene_id.into(),
            camera,
            humans,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HumanVisibility {
    pub instance: u32,
    pub mesh_pixels: usize,
    pub mask_pixels: usize,
    pub visibility: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneOcclusion {
    pub scene_id: String,
    pub humans: Vec<HumanVisibility>,
    /// Visibility of the most occluded person.
    pub min_visibility: f64,
    pub level: OcclusionLevel,
}

/// Pixels covered by the splatted projections of `points`.
pub fn splat_pixel_count(points: &[Point3<f64>], cam: &CameraModel, radius: usize) -> usize {
    let (w, h) = (cam.width(), cam.height());
    let mut covered = vec![false; w * h];
    for p in points {
        let Some(px) = cam.project(p) else { continue };
        let rows = px.row.saturating_sub(radius)..=(px.row + radius).min(h - 1);
        for r in rows {
            let cols = px.col.saturating_sub(radius)..=(px.col + radius).min(w - 1);
            for c in cols {
                covered[r * w + c] = true;
            }
        }
    }
    covered.iter().filter(|&&c| c).count()
}

pub fn human_visibility(
    human: &AnnotatedHuman,
    cam: &CameraModel,
    cfg: &OcclusionConfig,
) -> Result<HumanVisibility, EvalError> {
    let render = rasterize_meshes(&[RenderItem::new(&human.mesh, 1)], cam);
    let mesh_pixels = render.depth.valid_count();
    if mesh_pixels == 0 {
        return Err(EvalError::DegenerateRender {
            instance: human.instance,
        });
    }
    let mask_pixels = splat_pixel_count(&human.points, cam, cfg.splat_radius);
    Ok(HumanVisibility {
        instance: human.instance,
        mesh_pixels,
        mask_pixels,
        visibility: (mask_pixels as f64 / mesh_pixels as f64).min(1.0),
    })
}

/// Buckets each scene by the visibility of its most occluded person.
/// Output is ordered by scene id.
pub fn occlusion_levels(
    scenes: &[OcclusionScene],
    cfg: &OcclusionConfig,
) -> Result<Vec<SceneOcclusion>, EvalError> {
    cfg.validate()?;
    let mut out = scenes
        .par_iter()
        .map(|s| {
            let humans = s
                .humans
                .iter()
                .map(|h| human_visibility(h, &s.camera, cfg))
                .collect::<Result<Vec<_>, _>>()?;
            if humans.is_empty() {
                return Err(EvalError::InvalidConfig(format!(
                    "scene {} has no annotated humans",
                    s.scene_id
                )));
            }
            let min_visibility = humans
                .iter()
                .map(|h| h.visibility)
                .fold(f64::INFINITY, f64::min);
            Ok(SceneOcclusion {
                scene_id: s.scene_id.clone(),
                humans,
                min_visibility,
                level: cfg.level(min_visibility),
            })
        })
        .collect::<Result<Vec<_>, EvalError>>()?;
    out.sort_by(|a, b| a.scene_id.cmp(&b.scene_id));
    Ok(out)
}

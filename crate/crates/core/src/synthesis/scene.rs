use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::noise::{simulate_kinect_noise_labeled, NoiseConfig};
use super::placement::ComposedScene;
use super::SynthError;
use crate::geometry::{
    backproject_depth, rasterize_meshes, CameraModel, DepthImage, LabelChannels, LabeledPointCloud, RenderItem,
    RenderOutput,
};
use crate::labeling::BodyPartTaxonomy;

/// One camera's labeled cloud.
#[derive(Clone, Debug)]
pub struct LabeledView {
    pub camera_id: u32,
    pub camera: CameraModel,
    pub cloud: LabeledPointCloud,
    /// Depth after noise; every point comes from one of its valid pixels.
    pub depth: DepthImage,
    /// Valid pixels before noise.
    pub rendered_pixels: usize,
}

/// Depth, instance and final-part images of the composed scene.
pub fn render_scene(composed: &ComposedScene, cam: &CameraModel) -> RenderOutput {
    let luts: Vec<Vec<u32>> = composed
        .bodies
        .iter()
        .map(|b| BodyPartTaxonomy::build(b.family).part_lut())
        .collect();
    let mut items = vec![RenderItem::new(&composed.scene, 0)];
    for (b, lut) in composed.bodies.iter().zip(&luts) {
        items.push(RenderItem::new(&b.mesh, b.instance_id).with_part_map(lut));
    }
    rasterize_meshes(&items, cam)
}

/// Renders every camera, applies sensor noise and backprojects the
/// surviving pixels with their labels. Each camera draws its own noise
/// stream from a seed taken from `rng` in camera order.
pub fn generate_labeled_scene<R: Rng + ?Sized>(
    composed: &ComposedScene,
    noise: &NoiseConfig,
    rng: &mut R,
) -> Result<Vec<LabeledView>, SynthError> {
    noise.validate()?;
    let seeds: Vec<u64> = composed.cameras.iter().map(|_| rng.gen()).collect();
    composed
        .cameras
        .par_iter()
        .zip(seeds)
        .enumerate()
        .map(|(id, (cam, seed))| {
            let render = render_scene(composed, cam);
            let mut cam_rng = ChaCha8Rng::seed_from_u64(seed);
            let (depth, labels) = simulate_kinect_noise_labeled(
                &render.depth,
                &[&render.instance, &render.part],
                cam,
                noise,
                &mut cam_rng,
            )?;
            let channels = LabelChannels {
                instance: Some(&labels[0]),
                part: Some(&labels[1]),
            };
            let cloud = backproject_depth(&depth, channels, cam, id as u32)?;
            Ok(LabeledView {
                camera_id: id as u32,
                camera: cam.clone(),
                cloud,
                depth,
                rendered_pixels: render.depth.valid_count(),
            })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rejection {
    pub index: usize,
    pub point_count: usize,
}

/// Drops clouds with fewer than `min_points` points.
pub fn filter_sparse(
    clouds: Vec<LabeledPointCloud>,
    min_points: usize,
) -> (Vec<LabeledPointCloud>, Vec<Rejection>) {
    let mut kept = Vec::with_capacity(clouds.len());
    let mut rejected = Vec::new();
    for (index, c) in clouds.into_iter().enumerate() {
        if c.len() < min_points {
            log::info!("rejecting cloud {index}: {} < {min_points} points", c.len());
            rejected.push(Rejection {
                index,
                point_count: c.len(),
            });
        } else {
            kept.push(c);
        }
    }
    (kept, rejected)
}

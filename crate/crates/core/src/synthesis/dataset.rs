use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::assets::AssetLibrary;
use super::noise::NoiseConfig;
use super::placement::{place_humans, sample_cameras, CameraRigConfig, ComposedScene, PlacementConfig};
use super::scene::{filter_sparse, generate_labeled_scene, LabeledView};
use super::SynthError;
use crate::io::{
    write_labeled_cloud, BodyRecord, CloudRecord, DatasetManifest, RejectedCloud, SceneEntry,
    SceneStatus,
};
use crate::labeling::{BodyModelFamily, BodyPartTaxonomy, PartSidecar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    /// Clouds with fewer points are dropped.
    pub min_points: usize,
    /// Inclusive range of people per scene.
    pub humans_per_scene: [usize; 2],
    pub cameras_per_scene: usize,
    pub rng_seed: u64,
    pub family: BodyModelFamily,
    pub placement: PlacementConfig,
    pub camera: CameraRigConfig,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            min_points: 20_000,
            humans_per_scene: [1, 10],
            cameras_per_scene: 1,
            rng_seed: 0,
            family: BodyModelFamily::SmplX,
            placement: PlacementConfig::default(),
            camera: CameraRigConfig::default(),
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), SynthError> {
        let [lo, hi] = self.humans_per_scene;
        if hi < lo {
            return Err(SynthError::InvalidConfig(format!(
                "humans_per_scene upper bound {hi} is below {lo}"
            )));
        }
        Ok(())
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of scene `index`'s private RNG stream. The first draw of that
/// stream is the scene's human count.
pub fn scene_seed(seed: u64, index: usize) -> u64 {
    splitmix64(seed ^ splitmix64(index as u64))
}

pub fn scene_id(index: usize) -> String {
    format!("scene_{index:05}")
}

/// A scene that was composed and rendered.
#[derive(Clone, Debug)]
pub struct GeneratedScene {
    pub composed: ComposedScene,
    /// One per camera, before sparse filtering.
    pub views: Vec<LabeledView>,
}

#[derive(Debug)]
pub struct SceneOutcome {
    pub index: usize,
    pub human_count: usize,
    pub result: Result<GeneratedScene, SynthError>,
}

/// Samples, places, renders and noises scene `index` from its own stream.
pub fn generate_scene(
    assets: &AssetLibrary,
    cfg: &SynthConfig,
    noise: &NoiseConfig,
    index: usize,
) -> SceneOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(scene_seed(cfg.rng_seed, index));
    let [lo, hi] = cfg.humans_per_scene;
    let human_count = rng.gen_range(lo..=hi);
    let result = (|| {
        if assets.rooms.is_empty() || (human_count > 0 && assets.humans.is_empty()) {
            return Err(SynthError::InvalidConfig("asset library is empty".into()));
        }
        let room = &assets.rooms[rng.gen_range(0..assets.rooms.len())];
        let humans: Vec<_> = (0..human_count)
            .map(|_| assets.humans[rng.gen_range(0..assets.humans.len())].clone())
            .collect();
        let mut composed = place_humans(room, &humans, &cfg.placement, &mut rng)?;
        sample_cameras(
            &mut composed,
            cfg.cameras_per_scene,
            &cfg.camera,
            cfg.placement.wall_margin,
            &mut rng,
        )?;
        let views = generate_labeled_scene(&composed, noise, &mut rng)?;
        Ok(GeneratedScene { composed, views })
    })();
    SceneOutcome {
        index,
        human_count,
        result,
    }
}

struct WrittenScene {
    entry: SceneEntry,
    clouds: Vec<CloudRecord>,
}

fn write_scene(outcome: SceneOutcome, cfg: &SynthConfig, out: &Path) -> Result<WrittenScene, SynthError> {
    let id = scene_id(outcome.index);
    let generated = match outcome.result {
        Ok(g) => g,
        Err(e @ (SynthError::PlacementFailed { .. } | SynthError::CameraPlacementFailed)) => {
            log::warn!("{id}: {e}; skipped");
            return Ok(WrittenScene {
                entry: SceneEntry {
                    scene_id: id,
                    status: SceneStatus::PlacementFailed,
                    human_count: outcome.human_count,
                    message: Some(e.to_string()),
                    cameras: Vec::new(),
                    bodies: Vec::new(),
                    rejected: Vec::new(),
                },
                clouds: Vec::new(),
            });
        }
        Err(e) => return Err(e),
    };
    let mut bodies = Vec::new();
    for b in &generated.composed.bodies {
        let stem = format!("{id}_human_{:02}", b.instance_id);
        let mesh_path = format!("bodies/{stem}.obj");
        let parts_path = format!("bodies/{stem}.parts.json");
        let mut obj = Vec::new();
        b.mesh.write_obj(&mut obj)?;
        std::fs::write(out.join(&mesh_path), obj)?;
        let taxonomy = BodyPartTaxonomy::build(b.family);
        let parts = b.mesh.face_part().unwrap_or(&[]);
        let sidecar = PartSidecar::from_face_parts(parts, &taxonomy)?;
        std::fs::write(out.join(&parts_path), serde_json::to_string_pretty(&sidecar)? + "\n")?;
        bodies.push(BodyRecord {
            instance_id: b.instance_id,
            mesh_path,
            parts_path,
        });
    }
    let cameras: Vec<_> = generated.views.iter().map(|v| v.camera.clone()).collect();
    let camera_ids: Vec<u32> = generated.views.iter().map(|v| v.camera_id).collect();
    let (kept, rejections) = filter_sparse(
        generated.views.into_iter().map(|v| v.cloud).collect(),
        cfg.min_points,
    );
    let rejected_idx: Vec<usize> = rejections.iter().map(|r| r.index).collect();
    let kept_ids = camera_ids
        .iter()
        .enumerate()
        .filter(|(i, _)| !rejected_idx.contains(i))
        .map(|(_, &c)| c);
    let mut clouds = Vec::new();
    for (cloud, cam_id) in kept.iter().zip(kept_ids) {
        let path = format!("clouds/{id}_cam_{cam_id:02}.hck");
        write_labeled_cloud(&out.join(&path), cloud)?;
        clouds.push(CloudRecord {
            path,
            point_count: cloud.len(),
            scene_id: id.clone(),
            camera_id: cam_id,
        });
    }
    Ok(WrittenScene {
        entry: SceneEntry {
            scene_id: id,
            status: SceneStatus::Generated,
            human_count: outcome.human_count,
            message: None,
            cameras,
            bodies,
            rejected: rejections
                .iter()
                .map(|r| RejectedCloud {
                    camera_id: camera_ids[r.index],
                    point_count: r.point_count,
                })
                .collect(),
        },
        clouds,
    })
}

/// Generates `scenes` scenes into `out` (`clouds/`, `bodies/` and
/// `manifest.json`). Output bytes depend only on the assets, configs and
/// seed.
pub fn generate_dataset(
    assets: &AssetLibrary,
    cfg: &SynthConfig,
    noise: &NoiseConfig,
    scenes: usize,
    out: &Path,
) -> Result<DatasetManifest, SynthError> {
    cfg.validate()?;
    noise.validate()?;
    std::fs::create_dir_all(out.join("clouds"))?;
    std::fs::create_dir_all(out.join("bodies"))?;
    let written = (0..scenes)
        .into_par_iter()
        .map(|i| write_scene(generate_scene(assets, cfg, noise, i), cfg, out))
        .collect::<Result<Vec<_>, SynthError>>()?;
    let mut manifest = DatasetManifest::new(cfg.rng_seed);
    manifest.record_config("synth", cfg)?;
    manifest.record_config("noise", noise)?;
    for w in written {
        manifest.clouds.extend(w.clouds);
        manifest.scenes.push(w.entry);
    }
    manifest.write(out)?;
    Ok(manifest)
}

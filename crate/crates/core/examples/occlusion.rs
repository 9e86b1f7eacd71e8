//! Buckets synthetic scenes by how much of their most hidden person the
//! camera sees.
//!
//! `cargo run --release --example occlusion -- [scenes]`

use hck::evaluation::{occlusion_levels, OcclusionConfig, OcclusionScene};
use hck::labeling::BodyModelFamily;
use hck::synthesis::{generate_scene, scene_id, AssetLibrary, NoiseConfig, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let scenes = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(4);
    let assets = AssetLibrary::procedural(BodyModelFamily::SmplX);
    let cfg = SynthConfig { humans_per_scene: [2, 6], ..SynthConfig::default() };
    let mut annotated = Vec::new();
    for i in 0..scenes {
        let Ok(scene) = generate_scene(&assets, &cfg, &NoiseConfig::default(), i).result else {
            continue;
        };
        let view = &scene.views[0];
        let mut s = OcclusionScene::from_cloud(scene_id(i), view.camera.clone(), &scene.composed.bodies, &view.cloud);
        // People entirely out of view have nothing to compare against.
        s.humans.retain(|h| !h.points.is_empty());
        if !s.humans.is_empty() {
            annotated.push(s);
        }
    }
    for s in occlusion_levels(&annotated, &OcclusionConfig::default())? {
        let ratios: Vec<String> = s.humans.iter().map(|h| format!("{:.2}", h.visibility)).collect();
        println!("{}: {:?} (visibility {})", s.scene_id, s.level, ratios.join(" "));
    }
    Ok(())
}

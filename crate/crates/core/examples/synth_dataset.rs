//! Generates a small synthetic dataset on disk.
//!
//! `cargo run --release --example synth_dataset -- [out_dir] [scenes] [seed]`

use hck::labeling::BodyModelFamily;
use hck::synthesis::{generate_dataset, AssetLibrary, NoiseConfig, SynthConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let out: std::path::PathBuf = args.next().map(Into::into).unwrap_or_else(|| std::env::temp_dir().join("hck_synth"));
    let scenes = args.next().map(|s| s.parse()).transpose()?.unwrap_or(3);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(0);
    let cfg = SynthConfig { rng_seed: seed, humans_per_scene: [1, 4], ..SynthConfig::default() };
    let assets = AssetLibrary::procedural(BodyModelFamily::SmplX);
    let manifest = generate_dataset(&assets, &cfg, &NoiseConfig::default(), scenes, &out)?;
    for scene in &manifest.scenes {
        println!("{} {:?}: {} humans, {} rejected views", scene.scene_id, scene.status, scene.human_count, scene.rejected.len());
    }
    for c in &manifest.clouds {
        println!("  {} ({} points)", c.path, c.point_count);
    }
    println!("written to {}", out.display());
    Ok(())
}

//! Writes a labeled cloud as binary and as ASCII PLY, then reads both back.
//!
//! `cargo run --example cloud_format -- [dir]`

use hck::geometry::{LabeledPointCloud, SEMANTIC_HUMAN};
use hck::io::{encode_cloud, load_cloud, write_labeled_cloud, write_ply};
use nalgebra::Point3;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map(Into::into).unwrap_or_else(std::env::temp_dir);
    let mut cloud = LabeledPointCloud::from_positions(
        (0..8).map(|i| Point3::new(i as f64 * 0.25, 0.0, 1.0)).collect(),
    );
    for i in 4..8 {
        cloud.semantic[i] = SEMANTIC_HUMAN;
        cloud.instance[i] = 1;
        cloud.part[i] = 2;
    }
    let bin = dir.join("example.hck");
    let ply = dir.join("example.ply");
    write_labeled_cloud(&bin, &cloud)?;
    write_ply(std::fs::File::create(&ply)?, &cloud)?;
    println!("{}: {} bytes", bin.display(), encode_cloud(&cloud)?.len());
    for path in [&bin, &ply] {
        let back = load_cloud(path)?;
        println!("{}: {} points, {} human, identical {}", path.display(), back.len(), back.semantic.iter().filter(|&&s| s == SEMANTIC_HUMAN).count(), back == cloud);
    }
    Ok(())
}

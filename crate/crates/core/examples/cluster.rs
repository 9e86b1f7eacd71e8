//! Splits the human points of two nearby blobs into instances.
//!
//! `cargo run --release --example cluster -- [min_samples] [min_cluster_size]`

use hck::clustering::{cluster_mask, HdbscanParams};
use hck::geometry::SEMANTIC_HUMAN;
use nalgebra::Point3;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let min_samples = args.next().map(|s| s.parse()).transpose()?.unwrap_or(15);
    let min_cluster_size = args.next().map(|s| s.parse()).transpose()?.unwrap_or(300);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let spread = Normal::new(0.0, 0.15)?;
    let mut points = Vec::new();
    for cx in [0.0, 1.5] {
        for _ in 0..1500 {
            points.push(Point3::new(
                cx + spread.sample(&mut rng),
                spread.sample(&mut rng),
                0.9 + 3.0 * spread.sample(&mut rng),
            ));
        }
    }
    let mask = vec![true; points.len()];
    let params = HdbscanParams::new(min_samples, min_cluster_size);
    let instances = cluster_mask(&points, &mask, &params, SEMANTIC_HUMAN)?;
    println!("{} instances", instances.len());
    for (k, inst) in instances.iter().enumerate() {
        let members: Vec<usize> = (0..points.len()).filter(|&i| inst.mask[i] > 0.5).collect();
        let from_first = members.iter().filter(|&&i| i < 1500).count();
        println!(
            "instance {k}: {} points ({from_first} from the first blob), confidence {}",
            members.len(),
            inst.confidence
        );
    }
    Ok(())
}

//! Applies the depth sensor model to a rendered plane with a box in front.
//!
//! `cargo run --example noise -- [seed]`

use hck::geometry::{rasterize_meshes, CameraModel, RenderItem, RigidTransform, TriangleMesh};
use hck::synthesis::{disparity, simulate_kinect_noise, NoiseConfig};
use nalgebra::{Point3, Vector3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(0);
    let pose = RigidTransform::look_at(&Point3::new(0.0, -4.0, 1.0), &Point3::new(0.0, 0.0, 1.0), &Vector3::z())?;
    let cam = CameraModel::new(262.5, 262.5, 160.0, 120.0, 320, 240, pose)?;
    let wall = TriangleMesh::cuboid(Point3::new(-5.0, 2.0, -2.0), Point3::new(5.0, 2.1, 4.0));
    let block = TriangleMesh::cuboid(Point3::new(-0.4, -0.4, 0.6), Point3::new(0.4, 0.4, 1.4));
    let clean = rasterize_meshes(&[RenderItem::new(&wall, 0), RenderItem::new(&block, 1)], &cam).depth;
    let cfg = NoiseConfig::default();
    let noisy = simulate_kinect_noise(&clean, &cam, &cfg, &mut ChaCha8Rng::seed_from_u64(seed))?;
    println!("valid pixels: {} clean, {} noisy", clean.valid_count(), noisy.valid_count());
    let (w, h) = noisy.dims();
    let mut off_grid = 0;
    for i in 0..w * h {
        if let Some(z) = noisy.get_index(i) {
            let d = disparity(z, cam.fx(), cfg.baseline) * cfg.scale_factor;
            if (d - d.round()).abs() > 1e-6 {
                off_grid += 1;
            }
        }
    }
    println!("disparities off the 1/{} grid: {off_grid}", cfg.scale_factor);
    Ok(())
}

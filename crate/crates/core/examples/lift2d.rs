//! Lifts a 2D mask onto the cloud of a depth image with a step edge and
//! shows the far points a dilated mask drags in.
//!
//! `cargo run --example lift2d -- [dilate]`

use hck::geometry::{backproject_depth, project_2d_mask_to_3d, CameraModel, DepthImage, IndexImage, LabelChannels, RigidTransform};
use nalgebra::{Point3, Vector3};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dilate = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(1);
    let (w, h) = (40, 30);
    let pose = RigidTransform::look_at(&Point3::origin(), &Point3::new(0.0, 1.0, 0.0), &Vector3::z())?;
    let cam = CameraModel::new(40.0, 40.0, 20.0, 15.0, w, h, pose)?;
    // A person-like slab at 2 m on the left half, a wall at 6 m behind.
    let samples: Vec<f64> = (0..w * h).map(|i| if i % w < 20 { 2.0 } else { 6.0 }).collect();
    let depth = DepthImage::from_samples(w, h, &samples)?;
    let cloud = backproject_depth(&depth, LabelChannels::default(), &cam, 0)?;
    let mut mask = IndexImage::zeros(w, h);
    for row in 0..h {
        for col in 0..20 {
            mask.set(row, col, 1);
        }
    }
    for (name, m) in [("exact", mask.clone()), ("dilated", mask.dilate(dilate))] {
        let labels = project_2d_mask_to_3d(&m, &depth, &cam, &cloud, 0)?;
        let far = labels
            .iter()
            .zip(&cloud.positions)
            .filter(|(&l, p)| l == 1 && cam.to_camera(p).z > 4.0)
            .count();
        println!("{name} mask: {} labeled points, {far} of them on the far wall", labels.iter().filter(|&&l| l == 1).count());
    }
    Ok(())
}

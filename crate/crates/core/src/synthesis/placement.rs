use std::f64::consts::TAU;

use nalgebra::{Point3, Vector3};
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::geometry::{Aabb, CameraModel, RigidTransform, TriangleMesh};
use crate::labeling::FittedBody;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PlacementConfig {
    /// Keep-out band along the floor boundary, metres.
    pub wall_margin: f64,
    /// Gap between the lowest body vertex and the floor, metres.
    pub contact_clearance: f64,
    /// Rejection-sampling attempts per human.
    pub max_attempts: usize,
}

impl Default for PlacementConfig {
    fn default() -> Self {
        Self {
            wall_margin: 0.3,
            contact_clearance: 0.0,
            max_attempts: 500,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Intrinsics {
    pub fx: f64,
    pub fy: f64,
    pub cx: f64,
    pub cy: f64,
    pub width: usize,
    pub height: usize,
}

impl Default for Intrinsics {
    fn default() -> Self {
        Self {
            fx: 525.0,
            fy: 525.0,
            cx: 320.0,
            cy: 240.0,
            width: 640,
            height: 480,
        }
    }
}

impl Intrinsics {
    pub fn camera(&self, pose: RigidTransform) -> Result<CameraModel, SynthError> {
        Ok(CameraModel::new(
            self.fx,
            self.fy,
            self.cx,
            self.cy,
            self.width,
            self.height,
            pose,
        )?)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraRigConfig {
    pub intrinsics: Intrinsics,
    /// Camera height above the floor, metres.
    pub height_range: [f64; 2],
    /// Minimum horizontal distance to any human's bounding box, metres.
    pub min_distance: f64,
    pub max_attempts: usize,
}

impl Default for CameraRigConfig {
    fn default() -> Self {
        Self {
            intrinsics: Intrinsics::default(),
            height_range: [1.2, 2.2],
            min_distance: 0.5,
            max_attempts: 200,
        }
    }
}

/// Scene geometry with placed bodies and cameras.
#[derive(Clone, Debug)]
pub struct ComposedScene {
    pub scene: TriangleMesh,
    /// World-frame bodies with instance ids `1..=N`.
    pub bodies: Vec<FittedBody>,
    pub cameras: Vec<CameraModel>,
}

/// The supporting floor: lowest group of horizontal faces.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FloorSupport {
    pub height: f64,
    pub min: [f64; 2],
    pub max: [f64; 2],
}

const HORIZONTAL_TOL: f64 = 1e-9;
const HEIGHT_TOL: f64 = 1e-6;

pub fn floor_support(scene: &TriangleMesh) -> Result<FloorSupport, SynthError> {
    let mut horizontal: Vec<(f64, usize)> = (0..scene.face_count())
        .filter(|&f| scene.face_normal(f).z.abs() >= 1.0 - HORIZONTAL_TOL)
        .map(|f| {
            let t = scene.triangle(f);
            ((t[0].z + t[1].z + t[2].z) / 3.0, f)
        })
        .collect();
    if horizontal.is_empty() {
        return Err(SynthError::NoFloor);
    }
    horizontal.sort_by(|a, b| a.0.total_cmp(&b.0));
    let height = horizontal[0].0;
    let mut bounds = Aabb::empty();
    for &(z, f) in &horizontal {
        if z - height > HEIGHT_TOL {
            break;
        }
        for p in scene.triangle(f) {
            bounds.grow(&p);
        }
    }
    Ok(FloorSupport {
        height,
        min: [bounds.min.x, bounds.min.y],
        max: [bounds.max.x, bounds.max.y],
    })
}

/// Stands every template on the floor at a random position and heading so
/// that no two bodies' bounding boxes meet.
pub fn place_humans<R: Rng + ?Sized>(
    scene: &TriangleMesh,
    humans: &[FittedBody],
    cfg: &PlacementConfig,
    rng: &mut R,
) -> Result<ComposedScene, SynthError> {
    let mut composed = ComposedScene {
        scene: scene.clone(),
        bodies: Vec::with_capacity(humans.len()),
        cameras: Vec::new(),
    };
    if humans.is_empty() {
        return Ok(composed);
    }
    let floor = floor_support(scene)?;
    let mut boxes: Vec<Aabb> = Vec::with_capacity(humans.len());
    for (k, template) in humans.iter().enumerate() {
        let tb = template.mesh.aabb();
        let centre = tb.center();
        let ext = tb.extent();
        // footprint radius under any heading
        let radius = 0.5 * (ext.x * ext.x + ext.y * ext.y).sqrt();
        let pad = cfg.wall_margin + radius;
        let (x0, x1) = (floor.min[0] + pad, floor.max[0] - pad);
        let (y0, y1) = (floor.min[1] + pad, floor.max[1] - pad);
        if x0 > x1 || y0 > y1 {
            return Err(SynthError::PlacementFailed { human: k });
        }
        let to_origin = RigidTransform::from_translation(Vector3::new(-centre.x, -centre.y, -tb.min.z));
        let mut placed = None;
        for _ in 0..cfg.max_attempts {
            let yaw = rng.gen_range(0.0..TAU);
            let x = rng.gen_range(x0..=x1);
            let y = rng.gen_range(y0..=y1);
            let t = RigidTransform::from_axis_angle(
                Vector3::z(),
                yaw,
                Vector3::new(x, y, floor.height + cfg.contact_clearance),
            )
            .compose(&to_origin);
            let mesh = template.mesh.transformed(&t);
            let bb = mesh.aabb();
            if boxes.iter().all(|b| !b.intersects(&bb)) {
                placed = Some((mesh, bb));
                break;
            }
        }
        let (mesh, bb) = placed.ok_or(SynthError::PlacementFailed { human: k })?;
        boxes.push(bb);
        composed.bodies.push(FittedBody {
            mesh,
            instance_id: k as u32 + 1,
            family: template.family,
        });
    }
    Ok(composed)
}

fn horizontal_box_distance(b: &Aabb, p: &Point3<f64>) -> f64 {
    let dx = (b.min.x - p.x).max(0.0).max(p.x - b.max.x);
    let dy = (b.min.y - p.y).max(0.0).max(p.y - b.max.y);
    (dx * dx + dy * dy).sqrt()
}

/// Adds `count` cameras inside the floor area, aimed at the bodies' centroid.
pub fn sample_cameras<R: Rng + ?Sized>(
    composed: &mut ComposedScene,
    count: usize,
    rig: &CameraRigConfig,
    wall_margin: f64,
    rng: &mut R,
) -> Result<(), SynthError> {
    if count == 0 {
        return Ok(());
    }
    let floor = floor_support(&composed.scene)?;
    let boxes: Vec<Aabb> = composed.bodies.iter().map(|b| b.mesh.aabb()).collect();
    let target = if boxes.is_empty() {
        Point3::new(
            0.5 * (floor.min[0] + floor.max[0]),
            0.5 * (floor.min[1] + floor.max[1]),
            floor.height + 1.0,
        )
    } else {
        let sum = boxes.iter().fold(Vector3::zeros(), |acc, b| acc + b.center().coords);
        Point3::from(sum / boxes.len() as f64)
    };
    let (x0, x1) = (floor.min[0] + wall_margin, floor.max[0] - wall_margin);
    let (y0, y1) = (floor.min[1] + wall_margin, floor.max[1] - wall_margin);
    let [h0, h1] = rig.height_range;
    if x0 > x1 || y0 > y1 || !(h0 <= h1) {
        return Err(SynthError::CameraPlacementFailed);
    }
    for _ in 0..count {
        let mut pose = None;
        for _ in 0..rig.max_attempts {
            let eye = Point3::new(
                rng.gen_range(x0..=x1),
                rng.gen_range(y0..=y1),
                floor.height + rng.gen_range(h0..=h1),
            );
            if boxes.iter().any(|b| horizontal_box_distance(b, &eye) < rig.min_distance) {
                continue;
            }
            if let Ok(p) = RigidTransform::look_at(&eye, &target, &Vector3::z()) {
                pose = Some(p);
                break;
            }
        }
        let pose = pose.ok_or(SynthError::CameraPlacementFailed)?;
        composed.cameras.push(rig.intrinsics.camera(pose)?);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::{BodyModelFamily, BodyPartTaxonomy};
    use crate::synthesis::assets::{mannequin, procedural_room, MannequinPose};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn template() -> FittedBody {
        let tax = BodyPartTaxonomy::build(BodyModelFamily::SmplX);
        FittedBody::new(mannequin(&tax, &MannequinPose::standing()).unwrap(), 1, BodyModelFamily::SmplX).unwrap()
    }

    #[test]
    fn zero_humans_is_scene_only() {
        let room = procedural_room(4.0, 4.0, 3.0);
        let c = place_humans(&room, &[], &PlacementConfig::default(), &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
        assert!(c.bodies.is_empty() && c.cameras.is_empty());
        assert_eq!(c.scene, room);
    }

    #[test]
    fn ten_people_fit_a_large_room() {
        let room = procedural_room(10.0, 10.0, 3.0);
        let humans = vec![template(); 10];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let c = place_humans(&room, &humans, &PlacementConfig::default(), &mut rng).unwrap();
        assert_eq!(c.bodies.len(), 10);
        let boxes: Vec<Aabb> = c.bodies.iter().map(|b| b.mesh.aabb()).collect();
        let room_box = room.aabb();
        for (i, a) in boxes.iter().enumerate() {
            assert!(room_box.contains_box(a));
            assert!(a.min.z.abs() < 1e-9, "feet on the floor");
            assert_eq!(c.bodies[i].instance_id, i as u32 + 1);
            for b in &boxes[i + 1..] {
                assert!(!a.intersects(b));
            }
        }
    }

    #[test]
    fn overcrowding_fails_with_the_human_index() {
        let room = procedural_room(2.0, 2.0, 3.0);
        let humans = vec![template(); 6];
        let cfg = PlacementConfig { max_attempts: 50, ..Default::default() };
        let err = place_humans(&room, &humans, &cfg, &mut ChaCha8Rng::seed_from_u64(2)).unwrap_err();
        assert!(matches!(err, SynthError::PlacementFailed { .. }));
        assert!(err.to_string().contains("placement failed"));
    }

    #[test]
    fn floor_is_the_lowest_horizontal_group() {
        let room = procedural_room(6.0, 4.0, 2.5);
        let table = TriangleMesh::cuboid(Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 1.0, 0.7));
        let f = floor_support(&TriangleMesh::merge([&room, &table])).unwrap();
        assert_eq!(f.height, 0.0);
        assert_eq!((f.min, f.max), ([-3.0, -2.0], [3.0, 2.0]));
        let wall = TriangleMesh::new(
            vec![Point3::new(0.0, 0.0, 0.0), Point3::new(1.0, 0.0, 0.0), Point3::new(0.0, 0.0, 1.0)],
            vec![[0, 1, 2]],
            None,
        )
        .unwrap();
        assert!(matches!(floor_support(&wall), Err(SynthError::NoFloor)));
    }

    #[test]
    fn cameras_keep_their_distance() {
        let room = procedural_room(8.0, 7.0, 3.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let mut c = place_humans(&room, &vec![template(); 3], &PlacementConfig::default(), &mut rng).unwrap();
        let rig = CameraRigConfig::default();
        sample_cameras(&mut c, 2, &rig, 0.3, &mut rng).unwrap();
        assert_eq!(c.cameras.len(), 2);
        for cam in &c.cameras {
            for b in &c.bodies {
                assert!(horizontal_box_distance(&b.mesh.aabb(), &cam.center()) >= rig.min_distance - 1e-9);
            }
        }
    }
}

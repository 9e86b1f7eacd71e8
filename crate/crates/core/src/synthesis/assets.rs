//! Procedural rooms and articulated box mannequins, plus loading of mesh
//! assets from disk.

use std::path::Path;

use nalgebra::{Point3, Vector3};
use serde::{Deserialize, Serialize};

use super::SynthError;
use crate::geometry::{RigidTransform, TriangleMesh};
use crate::labeling::{load_fitted_body, BodyModelFamily, BodyPartTaxonomy, FittedBody};

/// Closed box room with the floor at `z = 0`, centred on the origin.
pub fn procedural_room(width: f64, depth: f64, height: f64) -> TriangleMesh {
    let (hx, hy) = (width / 2.0, depth / 2.0);
    let quad = |a: [f64; 3], b: [f64; 3], c: [f64; 3], d: [f64; 3]| {
        TriangleMesh::new(
            [a, b, c, d].iter().map(|p| Point3::new(p[0], p[1], p[2])).collect(),
            vec![[0, 1, 2], [0, 2, 3]],
            None,
        )
        .expect("valid quad")
    };
    let walls = [
        TriangleMesh::horizontal_quad(-hx, hx, -hy, hy, 0.0),
        TriangleMesh::horizontal_quad(-hx, hx, -hy, hy, height),
        quad([-hx, -hy, 0.0], [hx, -hy, 0.0], [hx, -hy, height], [-hx, -hy, height]),
        quad([-hx, hy, 0.0], [hx, hy, 0.0], [hx, hy, height], [-hx, hy, height]),
        quad([-hx, -hy, 0.0], [-hx, hy, 0.0], [-hx, hy, height], [-hx, -hy, height]),
        quad([hx, -hy, 0.0], [hx, hy, 0.0], [hx, hy, height], [hx, -hy, height]),
    ];
    TriangleMesh::merge(walls.iter())
}

/// Joint angles of the mannequin, radians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MannequinPose {
    /// Sideways lift of both arms.
    pub arm_abduction: f64,
    /// Forward lift of both arms.
    pub arm_raise: f64,
    /// Left leg forward, right leg back.
    pub leg_stride: f64,
    /// Uniform size factor.
    pub scale: f64,
}

impl Default for MannequinPose {
    fn default() -> Self {
        Self {
            arm_abduction: 0.0,
            arm_raise: 0.0,
            leg_stride: 0.0,
            scale: 1.0,
        }
    }
}

impl MannequinPose {
    pub fn standing() -> Self {
        Self::default()
    }

    /// A handful of distinct poses and sizes.
    pub fn presets() -> Vec<Self> {
        vec![
            Self::standing(),
            Self { arm_abduction: 0.5, scale: 0.95, ..Self::standing() },
            Self { arm_raise: 0.9, leg_stride: 0.25, ..Self::standing() },
            Self { arm_abduction: 1.2, leg_stride: -0.2, scale: 1.05, ..Self::standing() },
            Self { arm_raise: 0.4, arm_abduction: 0.2, scale: 0.85, ..Self::standing() },
        ]
    }
}

#[derive(Clone, Copy)]
enum Chain {
    Trunk,
    LeftArm,
    RightArm,
    LeftLeg,
    RightLeg,
}

/// `(part, chain, min, max)` in the body frame: facing -y, up +z, feet at 0.
/// The mannequin's left side is +x.
const PARTS: &[(&str, Chain, [f64; 3], [f64; 3])] = &[
    ("hips", Chain::Trunk, [-0.17, -0.1, 0.85], [0.17, 0.1, 1.0]),
    ("spine", Chain::Trunk, [-0.16, -0.09, 1.0], [0.16, 0.09, 1.12]),
    ("spine1", Chain::Trunk, [-0.17, -0.1, 1.12], [0.17, 0.1, 1.25]),
    ("spine2", Chain::Trunk, [-0.18, -0.11, 1.25], [0.18, 0.11, 1.42]),
    ("neck", Chain::Trunk, [-0.05, -0.05, 1.42], [0.05, 0.05, 1.52]),
    ("head", Chain::Trunk, [-0.09, -0.1, 1.52], [0.09, 0.1, 1.75]),
    ("leftEye", Chain::Trunk, [0.025, -0.115, 1.63], [0.055, -0.1, 1.66]),
    ("rightEye", Chain::Trunk, [-0.055, -0.115, 1.63], [-0.025, -0.1, 1.66]),
    ("leftShoulder", Chain::Trunk, [0.18, -0.06, 1.34], [0.24, 0.06, 1.42]),
    ("rightShoulder", Chain::Trunk, [-0.24, -0.06, 1.34], [-0.18, 0.06, 1.42]),
    ("leftArm", Chain::LeftArm, [0.24, -0.045, 1.1], [0.32, 0.045, 1.42]),
    ("leftForeArm", Chain::LeftArm, [0.245, -0.04, 0.86], [0.315, 0.04, 1.1]),
    ("leftHand", Chain::LeftArm, [0.25, -0.035, 0.74], [0.31, 0.035, 0.86]),
    ("leftHandIndex1", Chain::LeftArm, [0.255, -0.03, 0.68], [0.305, 0.03, 0.74]),
    ("rightArm", Chain::RightArm, [-0.32, -0.045, 1.1], [-0.24, 0.045, 1.42]),
    ("rightForeArm", Chain::RightArm, [-0.315, -0.04, 0.86], [-0.245, 0.04, 1.1]),
    ("rightHand", Chain::RightArm, [-0.31, -0.035, 0.74], [-0.25, 0.035, 0.86]),
    ("rightHandIndex1", Chain::RightArm, [-0.305, -0.03, 0.68], [-0.255, 0.03, 0.74]),
    ("leftUpLeg", Chain::LeftLeg, [0.02, -0.075, 0.5], [0.16, 0.075, 0.85]),
    ("leftLeg", Chain::LeftLeg, [0.03, -0.06, 0.08], [0.15, 0.06, 0.5]),
    ("leftFoot", Chain::LeftLeg, [0.035, -0.14, 0.0], [0.145, 0.07, 0.08]),
    ("leftToeBase", Chain::LeftLeg, [0.04, -0.22, 0.0], [0.14, -0.14, 0.05]),
    ("rightUpLeg", Chain::RightLeg, [-0.16, -0.075, 0.5], [-0.02, 0.075, 0.85]),
    ("rightLeg", Chain::RightLeg, [-0.15, -0.06, 0.08], [-0.03, 0.06, 0.5]),
    ("rightFoot", Chain::RightLeg, [-0.145, -0.14, 0.0], [-0.035, 0.07, 0.08]),
    ("rightToeBase", Chain::RightLeg, [-0.14, -0.22, 0.0], [-0.04, -0.14, 0.05]),
];

fn chain_transform(chain: Chain, pose: &MannequinPose) -> RigidTransform {
    let about = |joint: [f64; 3], rot: RigidTransform| {
        let j = Vector3::from(joint);
        RigidTransform::from_translation(j)
            .compose(&rot)
            .compose(&RigidTransform::from_translation(-j))
    };
    let rot = |axis: Vector3<f64>, angle: f64| RigidTransform::from_axis_angle(axis, angle, Vector3::zeros());
    match chain {
        Chain::Trunk => RigidTransform::identity(),
        // lifting forward turns -z towards -y; lifting sideways turns -z outwards
        Chain::LeftArm => about(
            [0.28, 0.0, 1.4],
            rot(Vector3::y(), -pose.arm_abduction).compose(&rot(Vector3::x(), -pose.arm_raise)),
        ),
        Chain::RightArm => about(
            [-0.28, 0.0, 1.4],
            rot(Vector3::y(), pose.arm_abduction).compose(&rot(Vector3::x(), -pose.arm_raise)),
        ),
        Chain::LeftLeg => about([0.09, 0.0, 0.85], rot(Vector3::x(), -pose.leg_stride)),
        Chain::RightLeg => about([-0.09, 0.0, 0.85], rot(Vector3::x(), pose.leg_stride)),
    }
}

/// Box mannequin with one cuboid per source part of `taxonomy`, faces
/// labelled with source ids.
pub fn mannequin(taxonomy: &BodyPartTaxonomy, pose: &MannequinPose) -> Result<TriangleMesh, SynthError> {
    if !(pose.scale.is_finite() && pose.scale > 0.0) {
        return Err(SynthError::InvalidConfig(format!("mannequin scale {}", pose.scale)));
    }
    let scale = pose.scale;
    let mut pieces = Vec::new();
    for &(name, chain, lo, hi) in PARTS {
        let Some(id) = taxonomy.source_id(name) else { continue };
        let t = chain_transform(chain, pose);
        let cube = TriangleMesh::cuboid(Point3::from(lo), Point3::from(hi)).transformed(&t);
        let faces = cube.face_count();
        pieces.push(cube.with_face_part(vec![id; faces]).expect("one part per face"));
    }
    let merged = TriangleMesh::merge(pieces.iter());
    let scaled: Vec<Point3<f64>> = merged
        .vertices()
        .iter()
        .map(|v| Point3::from(v.coords * scale))
        .collect();
    Ok(TriangleMesh::new(
        scaled,
        merged.faces().to_vec(),
        merged.face_part().map(<[u16]>::to_vec),
    )?)
}

/// Rooms and human templates scenes are composed from.
#[derive(Clone, Debug)]
pub struct AssetLibrary {
    pub rooms: Vec<TriangleMesh>,
    /// Templates in their body frame; instance ids are reassigned on placement.
    pub humans: Vec<FittedBody>,
}

impl AssetLibrary {
    pub fn procedural(family: BodyModelFamily) -> Self {
        let taxonomy = BodyPartTaxonomy::build(family);
        let rooms = vec![
            procedural_room(6.0, 5.0, 2.8),
            procedural_room(8.0, 7.0, 3.0),
            procedural_room(10.0, 10.0, 3.0),
        ];
        let humans = MannequinPose::presets()
            .iter()
            .map(|p| {
                let mesh = mannequin(&taxonomy, p).expect("preset poses are valid");
                FittedBody::new(mesh, 1, family).expect("non-empty")
            })
            .collect();
        Self { rooms, humans }
    }

    /// Loads `rooms/*.obj` and `humans/*.obj` (each with a `.parts.json`
    /// face-part sidecar) from `dir`, in file-name order.
    pub fn load(dir: &Path, family: BodyModelFamily) -> Result<Self, SynthError> {
        let taxonomy = BodyPartTaxonomy::build(family);
        let list = |sub: &str| -> Result<Vec<std::path::PathBuf>, SynthError> {
            let mut v: Vec<_> = std::fs::read_dir(dir.join(sub))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "obj"))
                .collect();
            v.sort();
            Ok(v)
        };
        let mut rooms = Vec::new();
        for path in list("rooms")? {
            let reader = std::io::BufReader::new(std::fs::File::open(&path)?);
            let (v, f) = TriangleMesh::read_obj(reader)?;
            rooms.push(TriangleMesh::new(v, f, None)?);
        }
        let mut humans = Vec::new();
        for path in list("humans")? {
            let sidecar = path.with_extension("parts.json");
            humans.push(load_fitted_body(&path, &sidecar, 1, &taxonomy)?);
        }
        if rooms.is_empty() || humans.is_empty() {
            return Err(SynthError::InvalidConfig(format!(
                "{} needs at least one room and one human asset",
                dir.display()
            )));
        }
        Ok(Self { rooms, humans })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mannequin_covers_every_source_part() {
        for family in [BodyModelFamily::SmplX, BodyModelFamily::Smpl] {
            let tax = BodyPartTaxonomy::build(family);
            let m = mannequin(&tax, &MannequinPose::standing()).unwrap();
            assert_eq!(m.face_count(), 12 * tax.source_count());
            let mut ids: Vec<u16> = m.face_part().unwrap().to_vec();
            ids.sort_unstable();
            ids.dedup();
            assert_eq!(ids.len(), tax.source_count());
            let b = m.aabb();
            assert!(b.min.z.abs() < 1e-12 && (b.max.z - 1.75).abs() < 1e-12);
        }
    }

    #[test]
    fn poses_move_limbs() {
        let tax = BodyPartTaxonomy::build(BodyModelFamily::SmplX);
        let rest = mannequin(&tax, &MannequinPose::standing()).unwrap().aabb();
        let out = mannequin(&tax, &MannequinPose { arm_abduction: 1.2, ..MannequinPose::standing() }).unwrap().aabb();
        assert!(out.max.x > rest.max.x + 0.3);
        let fwd = mannequin(&tax, &MannequinPose { arm_raise: 1.2, ..MannequinPose::standing() }).unwrap().aabb();
        assert!(fwd.min.y < rest.min.y - 0.3);
    }

    #[test]
    fn room_floor_is_lowest() {
        let r = procedural_room(4.0, 3.0, 2.5);
        let b = r.aabb();
        assert_eq!((b.min.z, b.max.z), (0.0, 2.5));
        assert_eq!(r.face_count(), 12);
    }
}

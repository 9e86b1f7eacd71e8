//! Property tests for the library's stated invariants.

mod common;

use hck::clustering::{
    core_distances, hdbscan, mutual_reachability, mutual_reachability_mst, HdbscanParams,
    InstancePrediction, MstStrategy,
};
use hck::evaluation::{ap_suite, average_precision, ApConfig};
use hck::geometry::{
    backproject_depth, point_to_mesh_distance, project_points, rasterize_meshes, CameraModel,
    DepthImage, DistanceAccelerator, LabelChannels, RenderItem, RigidTransform, TriangleMesh,
};
use hck::io::{
    check_subject_disjoint, decode_cloud, encode_cloud, sample_frames, subject_disjoint_split,
    SequenceRecord, SplitOptions, SplitTargets,
};
use hck::labeling::{
    assign_and_merge_parts, segment_human_points, BodyIndex, BodyModelFamily, BodyPart,
    BodyPartTaxonomy, FittedBody, LabelConfig,
};
use hck::matching::{
    bce_cost, dice_cost, hungarian, two_stage_match, GroundTruthHuman, GroundTruthMask,
    MaskCostConfig, QueryBundle,
};
use hck::synthesis::{
    filter_sparse, generate_labeled_scene, place_humans, procedural_room, sample_cameras,
    simulate_kinect_noise, AssetLibrary, CameraRigConfig, Intrinsics, NoiseConfig,
    PlacementConfig,
};
use nalgebra::{Point3, Vector3};
use proptest::prelude::*;
use proptest::test_runner::RngSeed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig {
        cases,
        rng_seed: RngSeed::Fixed(0x5eed),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

fn small_camera(pose: RigidTransform) -> CameraModel {
    CameraModel::new(60.0, 60.0, 20.0, 15.0, 40, 30, pose).unwrap()
}

fn looking_at_origin(eye: Point3<f64>) -> RigidTransform {
    RigidTransform::look_at(&eye, &Point3::origin(), &Vector3::z()).unwrap()
}

fn random_triangles(r: &mut ChaCha8Rng, n: usize, spread: f64) -> TriangleMesh {
    let mut v = Vec::new();
    let mut f = Vec::new();
    for i in 0..n {
        let c = Point3::new(r.gen_range(-spread..spread), r.gen_range(-spread..spread), r.gen_range(-spread..spread));
        for _ in 0..3 {
            v.push(c + Vector3::new(r.gen_range(-0.6..0.6), r.gen_range(-0.6..0.6), r.gen_range(-0.6..0.6)));
        }
        let b = 3 * i as u32;
        f.push([b, b + 1, b + 2]);
    }
    TriangleMesh::new(v, f, None).unwrap()
}

/// Depth of the ray through pixel `(row, col)` hitting triangle `tri`
/// strictly inside (camera-frame z), by direct ray/triangle intersection.
fn fragment_depth(cam: &CameraModel, tri: &[Point3<f64>; 3], row: usize, col: usize) -> Option<f64> {
    let a = cam.to_camera(&tri[0]);
    let b = cam.to_camera(&tri[1]);
    let c = cam.to_camera(&tri[2]);
    let dir = Vector3::new((col as f64 - cam.cx()) / cam.fx(), (row as f64 - cam.cy()) / cam.fy(), 1.0);
    // Moller-Trumbore with the ray from the camera centre.
    let e1 = b - a;
    let e2 = c - a;
    let p = dir.cross(&e2);
    let det = e1.dot(&p);
    if det.abs() < 1e-12 {
        return None;
    }
    let t0 = -a.coords;
    let u = t0.dot(&p) / det;
    let q = t0.cross(&e1);
    let v = dir.dot(&q) / det;
    let t = e2.dot(&q) / det;
    let margin = 1e-6;
    (u > margin && v > margin && u + v < 1.0 - margin && t > 0.0).then_some(t)
}

proptest! {
    #![proptest_config(config(48))]

    #[test]
    fn backprojection_round_trips(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let cam = small_camera(looking_at_origin(Point3::new(r.gen_range(-3.0..3.0), -5.0, r.gen_range(0.0..3.0))));
        let samples: Vec<f64> = (0..40 * 30)
            .map(|_| if r.gen_bool(0.3) { 0.0 } else { r.gen_range(0.2..15.0) })
            .collect();
        let depth = DepthImage::from_samples(40, 30, &samples).unwrap();
        let cloud = backproject_depth(&depth, LabelChannels::default(), &cam, 3).unwrap();
        prop_assert_eq!(cloud.len(), depth.valid_count());
        let prov = cloud.provenance.as_ref().unwrap();
        for (p, px) in project_points(&cloud.positions, &cam).iter().zip(prov) {
            let px_hit = px;
            let proj = p.unwrap();
            prop_assert_eq!((proj.row, proj.col), (px_hit.row as usize, px_hit.col as usize));
            let z = depth.get(proj.row, proj.col).unwrap();
            prop_assert!((proj.depth - z).abs() <= 1e-9);
        }
    }

    #[test]
    fn zbuffer_keeps_the_nearest_fragment(seed in any::<u64>(), faces in 1usize..50) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let mesh = random_triangles(&mut r, faces, 1.5);
        let cam = small_camera(looking_at_origin(Point3::new(0.5, -6.0, 1.0)));
        let out = rasterize_meshes(&[RenderItem::new(&mesh, 1)], &cam);
        for row in 0..30 {
            for col in 0..40 {
                let frags: Vec<f64> = (0..mesh.face_count())
                    .filter_map(|f| fragment_depth(&cam, &mesh.triangle(f), row, col))
                    .collect();
                if frags.is_empty() {
                    continue;
                }
                let z = out.depth.get(row, col);
                prop_assert!(z.is_some(), "covered pixel ({}, {}) left empty", row, col);
                let z = z.unwrap();
                for f in frags {
                    prop_assert!(z <= f + 1e-9, "pixel ({}, {}): {} behind fragment {}", row, col, z, f);
                }
            }
        }
    }

    #[test]
    fn exact_rigid_motion_leaves_renders_bit_identical(
        seed in any::<u64>(),
        flip in any::<bool>(),
        shift in (-8i32..8, -8i32..8, -3i32..3),
    ) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        // Dyadic coordinates, integer shifts and half turns keep every
        // coordinate change exact in floating point.
        let dy = |r: &mut ChaCha8Rng, k: i32| f64::from(r.gen_range(-k..k)) / 16.0;
        let mut v = Vec::new();
        let mut f = Vec::new();
        for i in 0..20u32 {
            let c = Point3::new(dy(&mut r, 24), dy(&mut r, 24), dy(&mut r, 24));
            for _ in 0..3 {
                v.push(c + Vector3::new(dy(&mut r, 8), dy(&mut r, 8), dy(&mut r, 8)));
            }
            f.push([3 * i, 3 * i + 1, 3 * i + 2]);
        }
        let mesh = TriangleMesh::new(v, f, None).unwrap();
        // An axis-aligned camera keeps the world-to-camera map exact too.
        let eye = Point3::new(0.25, -6.0, 0.5);
        let cam = small_camera(RigidTransform::look_at(&eye, &(eye + Vector3::y()), &Vector3::z()).unwrap());
        let half_turn = if flip { -1.0 } else { 1.0 };
        let t = RigidTransform::new(
            nalgebra::Matrix3::new(half_turn, 0.0, 0.0, 0.0, half_turn, 0.0, 0.0, 0.0, 1.0),
            Vector3::new(f64::from(shift.0), f64::from(shift.1), f64::from(shift.2)),
        )
        .unwrap();
        let a = rasterize_meshes(&[RenderItem::new(&mesh, 1)], &cam);
        prop_assert!(a.depth.valid_count() > 0);
        let moved = mesh.transformed(&t);
        let cam2 = cam.with_pose(cam.pose().compose(&t.inverse()));
        let b = rasterize_meshes(&[RenderItem::new(&moved, 1)], &cam2);
        prop_assert_eq!(a.depth.samples(), b.depth.samples());
        prop_assert_eq!(a.instance.values(), b.instance.values());
    }

    #[test]
    fn mesh_distance_matches_exhaustive_scan(seed in any::<u64>(), faces in 1usize..400) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let mesh = random_triangles(&mut r, faces, 2.0);
        let accel = DistanceAccelerator::build(&mesh).unwrap();
        for _ in 0..20 {
            let p = Point3::new(r.gen_range(-4.0..4.0), r.gen_range(-4.0..4.0), r.gen_range(-4.0..4.0));
            let (d, _) = point_to_mesh_distance(&p, &accel);
            prop_assert!((d - common::exhaustive_mesh_distance(&p, &mesh)).abs() <= 1e-9);
        }
    }
}

fn cube_body(center: Point3<f64>, id: u32, tax: &BodyPartTaxonomy, r: &mut ChaCha8Rng) -> FittedBody {
    let h = Vector3::new(0.2, 0.2, 0.2);
    let mesh = TriangleMesh::cuboid(center - h, center + h);
    let parts: Vec<u16> = (0..mesh.face_count())
        .map(|_| r.gen_range(1..=tax.source_count() as u16))
        .collect();
    FittedBody::new(mesh.with_face_part(parts).unwrap(), id, BodyModelFamily::SmplX).unwrap()
}

proptest! {
    #![proptest_config(config(32))]

    #[test]
    fn pseudo_labels_are_consistent_and_monotone(seed in any::<u64>(), t1 in 0.01f64..0.2, t2 in 0.01f64..0.2) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let tax = BodyPartTaxonomy::build(BodyModelFamily::SmplX);
        let bodies: Vec<FittedBody> = (0..3)
            .map(|i| cube_body(Point3::new(f64::from(i) * 0.5, 0.0, 0.0), i as u32 + 1, &tax, &mut r))
            .collect();
        let pts: Vec<Point3<f64>> = (0..400)
            .map(|_| Point3::new(r.gen_range(-0.5..1.5), r.gen_range(-0.5..0.5), r.gen_range(-0.5..0.5)))
            .collect();
        let cloud = hck::geometry::LabeledPointCloud::from_positions(pts.clone());
        let index = BodyIndex::build(&bodies).unwrap();
        let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
        let small = segment_human_points(&cloud, &index, &LabelConfig { distance_threshold: lo }).unwrap();
        let big = segment_human_points(&cloud, &index, &LabelConfig { distance_threshold: hi }).unwrap();
        for i in 0..pts.len() {
            prop_assert_eq!(small.instance[i] != 0, small.semantic[i] == hck::geometry::SEMANTIC_HUMAN);
            if small.instance[i] != 0 {
                prop_assert!(big.instance[i] != 0);
                let body = &bodies[small.instance[i] as usize - 1];
                let d = common::exhaustive_mesh_distance(&pts[i], &body.mesh);
                prop_assert!(d < lo);
                // Nearest body, ties to the lower id.
                for b in &bodies {
                    let other = common::exhaustive_mesh_distance(&pts[i], &b.mesh);
                    prop_assert!(other > d || (other == d && b.instance_id >= body.instance_id));
                }
            }
        }
        let parts = assign_and_merge_parts(&cloud, &index, &big, &tax).unwrap();
        for i in 0..pts.len() {
            prop_assert_eq!(parts[i] != 0, big.instance[i] != 0);
        }
    }
}

#[test]
fn merging_is_total_and_idempotent() {
    for family in [BodyModelFamily::SmplX, BodyModelFamily::Smpl] {
        let tax = BodyPartTaxonomy::build(family);
        for id in 1..=tax.source_count() as u16 {
            assert!(tax.merge_source(id).is_some(), "{family:?} source {id}");
        }
        for part in BodyPart::ALL {
            // A final part name that is also a source name merges to itself.
            if let Some(m) = tax.merge_name(part.name()) {
                assert_eq!(m, part);
            }
        }
    }
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn noise_only_removes_pixels_and_zero_noise_is_identity(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let cam = CameraModel::new(262.5, 262.5, 80.0, 60.0, 160, 120, looking_at_origin(Point3::new(0.0, -4.0, 1.0))).unwrap();
        let samples: Vec<f64> = (0..160 * 120)
            .map(|i| match r.gen_range(0..10) {
                0 => 0.0,
                1 => 25.0,
                _ => 1.0 + f64::from((i % 160) as u32) * 0.01 + r.gen_range(0.0..0.002),
            })
            .collect();
        let depth = DepthImage::from_samples(160, 120, &samples).unwrap();
        let noisy = simulate_kinect_noise(&depth, &cam, &NoiseConfig::default(), &mut r).unwrap();
        for i in 0..samples.len() {
            if noisy.get_index(i).is_some() {
                prop_assert!(depth.get_index(i).is_some());
            }
        }
        let zero = simulate_kinect_noise(&depth, &cam, &NoiseConfig::zero(), &mut r).unwrap();
        for i in 0..samples.len() {
            match depth.get_index(i) {
                Some(z) if (0.01..=20.0).contains(&z) => {
                    let got = zero.get_index(i);
                    prop_assert!(got.is_some());
                    prop_assert!((got.unwrap() - z).abs() <= 1e-6 * z);
                }
                _ => prop_assert!(zero.get_index(i).is_none()),
            }
        }
    }
}

proptest! {
    #![proptest_config(config(6))]

    #[test]
    fn scene_points_come_from_valid_noisy_pixels(seed in any::<u64>(), humans in 0usize..4) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let assets = AssetLibrary::procedural(BodyModelFamily::SmplX);
        let chosen: Vec<FittedBody> = (0..humans).map(|_| assets.humans.choose(&mut r).unwrap().clone()).collect();
        let room = procedural_room(8.0, 7.0, 3.0);
        let mut composed = place_humans(&room, &chosen, &PlacementConfig::default(), &mut r).unwrap();
        let rig = CameraRigConfig {
            intrinsics: Intrinsics { fx: 131.25, fy: 131.25, cx: 80.0, cy: 60.0, width: 160, height: 120 },
            ..CameraRigConfig::default()
        };
        sample_cameras(&mut composed, 2, &rig, 0.3, &mut r).unwrap();
        let views = generate_labeled_scene(&composed, &NoiseConfig::default(), &mut r).unwrap();
        for v in &views {
            let prov = v.cloud.provenance.as_ref().unwrap();
            prop_assert_eq!(v.cloud.len(), v.depth.valid_count());
            for (p, px) in v.cloud.positions.iter().zip(prov) {
                let z = v.depth.get(px.row as usize, px.col as usize);
                prop_assert!(z.is_some());
                prop_assert!((v.camera.to_camera(p).z - z.unwrap()).abs() <= 1e-9);
            }
            prop_assert!(v.cloud.validate().is_ok());
        }
        let sizes: Vec<usize> = views.iter().map(|v| v.cloud.len()).collect();
        let min = sizes.iter().copied().max().unwrap_or(0) / 2;
        let (kept, _) = filter_sparse(views.into_iter().map(|v| v.cloud).collect(), min);
        prop_assert!(kept.iter().all(|c| c.len() >= min));
    }
}

fn canonical_eq(a: &[i32], b: &[i32]) -> bool {
    common::canonical_labels(a) == common::canonical_labels(b)
}

fn blob_points(r: &mut ChaCha8Rng) -> Vec<Point3<f64>> {
    let k = r.gen_range(1..4);
    let centers: Vec<[f64; 3]> = (0..k)
        .map(|_| [r.gen_range(-5.0..5.0), r.gen_range(-5.0..5.0), r.gen_range(-1.0..1.0)])
        .collect();
    let mut pts = common::gaussian_blobs(&centers, r.gen_range(40..120), 0.3, r.gen());
    for _ in 0..20 {
        pts.push(Point3::new(r.gen_range(-8.0..8.0), r.gen_range(-8.0..8.0), r.gen_range(-2.0..2.0)));
    }
    pts
}

proptest! {
    #![proptest_config(config(400))]

    #[test]
    fn hdbscan_invariances(seed in any::<u64>(), min_samples in 2usize..10, mcs in 5usize..40) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let pts = blob_points(&mut r);
        let params = HdbscanParams::new(min_samples, mcs);
        let base = hdbscan(&pts, &params).unwrap();
        for size in base.cluster_sizes() {
            prop_assert!(size >= mcs);
        }
        let mut perm: Vec<usize> = (0..pts.len()).collect();
        perm.shuffle(&mut r);
        let permuted: Vec<_> = perm.iter().map(|&i| pts[i]).collect();
        let lp = hdbscan(&permuted, &params).unwrap().labels;
        let mut back = vec![0; pts.len()];
        for (j, &i) in perm.iter().enumerate() {
            back[i] = lp[j];
        }
        prop_assert!(canonical_eq(&back, &base.labels));
        let t = RigidTransform::from_axis_angle(
            Vector3::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), 1.0),
            r.gen_range(0.0..6.0),
            Vector3::new(r.gen_range(-9.0..9.0), r.gen_range(-9.0..9.0), r.gen_range(-9.0..9.0)),
        );
        let moved: Vec<_> = pts.iter().map(|p| t.apply(p)).collect();
        prop_assert!(canonical_eq(&hdbscan(&moved, &params).unwrap().labels, &base.labels));
    }

    #[test]
    fn mutual_reachability_bounds_and_mst_weight(seed in any::<u64>(), min_samples in 1usize..8) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let n = r.gen_range(10..200);
        let pts: Vec<Point3<f64>> = (0..n)
            .map(|_| Point3::new(r.gen_range(0.0..2.0), r.gen_range(0.0..2.0), r.gen_range(0.0..2.0)))
            .collect();
        let core = core_distances(&pts, min_samples).unwrap();
        for a in 0..n {
            for b in 0..n {
                let mr = mutual_reachability(&pts, &core, a, b);
                prop_assert!(mr >= (pts[a] - pts[b]).norm());
                prop_assert!(mr >= core[a] && mr >= core[b]);
            }
        }
        let want = common::brute_force_mst_weight(&pts, &core);
        for s in [MstStrategy::DensePrim, MstStrategy::KdBoruvka] {
            let mst = mutual_reachability_mst(&pts, &core, s).unwrap();
            prop_assert_eq!(mst.len(), n - 1);
            let got: f64 = mst.iter().map(|e| e.weight).sum();
            prop_assert!((got - want).abs() <= 1e-9);
        }
    }
}

fn int_matrix(max: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        prop::collection::vec(prop::collection::vec((-20i32..20).prop_map(f64::from), c), r)
    })
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn hungarian_is_optimal(costs in int_matrix(7)) {
        let a = hungarian(&costs).unwrap();
        let (best, _) = common::brute_force_assignment(&costs);
        prop_assert_eq!(a.total, best);
        let mut rows: Vec<usize> = a.pairs.iter().map(|p| p.0).collect();
        let mut cols: Vec<usize> = a.pairs.iter().map(|p| p.1).collect();
        rows.dedup();
        cols.sort_unstable();
        cols.dedup();
        prop_assert_eq!(rows.len(), a.pairs.len());
        prop_assert_eq!(cols.len(), a.pairs.len());
    }

    #[test]
    fn constant_shift_keeps_the_pairing(costs in int_matrix(6), shift in -30i32..30) {
        let a = hungarian(&costs).unwrap();
        let shifted: Vec<Vec<f64>> = costs
            .iter()
            .map(|row| row.iter().map(|&c| c + f64::from(shift)).collect())
            .collect();
        let b = hungarian(&shifted).unwrap();
        prop_assert_eq!(&a.pairs, &b.pairs);
        prop_assert_eq!(b.total, a.total + f64::from(shift) * a.pairs.len() as f64);
    }

    #[test]
    fn mask_costs_match_their_formulas(
        pred in prop::collection::vec(0.0f64..=1.0, 1..40),
        seed in any::<u64>(),
    ) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let gt: Vec<bool> = (0..pred.len()).map(|_| r.gen_bool(0.4)).collect();
        let d = dice_cost(&pred, &gt).unwrap();
        let b = bce_cost(&pred, &gt, 1e-6).unwrap();
        prop_assert!((d - common::naive_dice(&pred, &gt)).abs() <= 1e-12);
        prop_assert!((b - common::naive_bce(&pred, &gt, 1e-6)).abs() <= 1e-12);
        prop_assert!((0.0..1.0).contains(&d));
        prop_assert!(b >= 0.0 && b <= -(1e-6f64).ln() + 1e-12);
        prop_assert!(dice_cost(&pred, &gt[..gt.len() - 1]).is_err());
    }
}

fn random_bundle(r: &mut ChaCha8Rng, n: usize, nq: usize, k: usize) -> QueryBundle {
    let soft = |r: &mut ChaCha8Rng| (0..n).map(|_| r.gen::<f64>()).collect::<Vec<_>>();
    let humans = (0..nq).map(|_| InstancePrediction::soft(soft(r), 1, 1.0)).collect();
    let parts = (0..nq)
        .map(|_| {
            (0..k)
                .map(|_| {
                    let probs: Vec<f64> = (0..15).map(|_| r.gen::<f64>()).collect();
                    InstancePrediction::soft(soft(r), 1, 1.0).with_class_probs(probs)
                })
                .collect()
        })
        .collect();
    QueryBundle::new(humans, parts).unwrap()
}

proptest! {
    #![proptest_config(config(100))]

    #[test]
    fn two_stage_respects_parents_and_gt_order(seed in any::<u64>(), nq in 1usize..6, ng in 0usize..5, k in 1usize..6) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let n = 30;
        let bundle = random_bundle(&mut r, n, nq, k);
        let gt: Vec<GroundTruthHuman> = (0..ng)
            .map(|_| GroundTruthHuman {
                mask: (0..n).map(|_| r.gen_bool(0.5)).collect(),
                parts: (1..=r.gen_range(1..5u8))
                    .map(|c| GroundTruthMask { mask: (0..n).map(|_| r.gen_bool(0.3)).collect(), class: c })
                    .collect(),
            })
            .collect();
        let cfg = MaskCostConfig::default();
        let a = two_stage_match(&bundle, &gt, &cfg).unwrap();
        prop_assert_eq!(a.human_pairs.len(), nq.min(ng));
        for m in &a.part_pairs {
            let parent = a.human_pairs.iter().find(|p| p.query == m.human_query).unwrap();
            prop_assert_eq!(parent.target, m.target_human);
            prop_assert!(m.pairs.len() <= k.min(gt[m.target_human].parts.len()));
        }
        let mut perm: Vec<usize> = (0..ng).collect();
        perm.shuffle(&mut r);
        let permuted: Vec<GroundTruthHuman> = perm.iter().map(|&i| gt[i].clone()).collect();
        let b = two_stage_match(&bundle, &permuted, &cfg).unwrap();
        prop_assert!((a.human_cost - b.human_cost).abs() <= 1e-9);
        prop_assert!((a.part_cost - b.part_cost).abs() <= 1e-9);
        for p in &a.human_pairs {
            let q = b.human_pairs.iter().find(|x| x.query == p.query).unwrap();
            prop_assert_eq!(perm[q.target], p.target);
        }
    }
}

/// Disjoint ground-truth instances over `n` points and predictions derived
/// from them.
fn ap_case(r: &mut ChaCha8Rng) -> (Vec<InstancePrediction>, Vec<Vec<bool>>) {
    let n = 60;
    let g = r.gen_range(0..5);
    let owner: Vec<usize> = (0..n).map(|_| r.gen_range(0..=g)).collect();
    let gts: Vec<Vec<bool>> = (1..=g).map(|k| owner.iter().map(|&o| o == k).collect()).collect();
    let preds = (0..r.gen_range(0..12))
        .map(|_| {
            let mask: Vec<bool> = if g > 0 && r.gen_bool(0.8) {
                let base = &gts[r.gen_range(0..g)];
                let flip = r.gen_range(0.0..0.5);
                base.iter().map(|&b| if r.gen_bool(flip) { !b } else { b }).collect()
            } else {
                (0..n).map(|_| r.gen_bool(0.2)).collect()
            };
            InstancePrediction::binary(&mask, 1, r.gen())
        })
        .collect();
    (preds, gts)
}

proptest! {
    #![proptest_config(config(200))]

    #[test]
    fn ap_properties(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (preds, gts) = ap_case(&mut r);
        let grid: Vec<f64> = (5..=19).map(|i| f64::from(i) * 0.05).collect();
        let aps: Vec<f64> = grid.iter().map(|&t| average_precision(&preds, &gts, t).unwrap()).collect();
        for w in aps.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12);
        }
        let conf: Vec<f64> = preds.iter().map(|p| p.confidence).collect();
        let iou: Vec<Vec<f64>> = preds
            .iter()
            .map(|p| gts.iter().map(|g| common::bool_iou(&p.to_binary(), g)).collect())
            .collect();
        for (&t, &ap) in grid.iter().zip(&aps) {
            prop_assert!((ap - common::pr_table_ap(&conf, &iou, gts.len(), t)).abs() <= 1e-9);
        }
        // Order-preserving rescaling of confidences.
        let rescaled: Vec<InstancePrediction> = preds
            .iter()
            .map(|p| InstancePrediction { confidence: 0.1 + 0.5 * p.confidence.powi(3), ..p.clone() })
            .collect();
        let cfg = ApConfig::default();
        prop_assert_eq!(ap_suite(&preds, &gts, &cfg).unwrap(), ap_suite(&rescaled, &gts, &cfg).unwrap());
    }

    #[test]
    fn low_confidence_duplicates_never_help(seed in any::<u64>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let (mut preds, gts) = ap_case(&mut r);
        let cfg = ApConfig::default();
        let before = ap_suite(&preds, &gts, &cfg).unwrap();
        let matched: Vec<usize> = (0..preds.len())
            .filter(|&i| gts.iter().any(|g| common::bool_iou(&preds[i].to_binary(), g) > 0.5))
            .collect();
        prop_assume!(!matched.is_empty());
        let src = preds[matched[r.gen_range(0..matched.len())]].clone();
        let lowest = preds.iter().map(|p| p.confidence).fold(1.0, f64::min);
        preds.push(InstancePrediction { confidence: lowest * 0.5, ..src });
        let after = ap_suite(&preds, &gts, &cfg).unwrap();
        prop_assert!(after.ap <= before.ap + 1e-12);
        prop_assert!(after.ap50 <= before.ap50 + 1e-12);
    }
}

fn sequences(r: &mut ChaCha8Rng) -> Vec<SequenceRecord> {
    let n = r.gen_range(1..14);
    let subjects = r.gen_range(2..10);
    (0..n)
        .map(|i| {
            let mut s: Vec<String> = (0..r.gen_range(1..3)).map(|_| format!("s{}", r.gen_range(0..subjects))).collect();
            s.sort();
            s.dedup();
            SequenceRecord { id: format!("seq{i:02}"), subjects: s, frame_count: r.gen_range(1..500), frame_rate: 30.0 }
        })
        .collect()
}

proptest! {
    #![proptest_config(config(150))]

    #[test]
    fn splits_are_subject_disjoint_and_deterministic(seed in any::<u64>(), tol in prop::option::of(0usize..3)) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let seqs = sequences(&mut r);
        let total = seqs.len();
        let train = r.gen_range(0..=total);
        let val = r.gen_range(0..=total - train);
        let test = r.gen_range(0..=total - train - val);
        let targets = SplitTargets::new(train, val, test);
        let opts = SplitOptions { overshoot_tolerance: tol };
        let spec = subject_disjoint_split(&seqs, targets, &opts).unwrap();
        prop_assert!(check_subject_disjoint(&seqs, &spec).is_ok());
        let placed = spec.train.len() + spec.val.len() + spec.test.len() + spec.removed.len();
        prop_assert_eq!(placed, total);
        prop_assert_eq!(&subject_disjoint_split(&seqs, targets, &opts).unwrap(), &spec);
        let mut shuffled = seqs.clone();
        shuffled.shuffle(&mut r);
        let other = subject_disjoint_split(&shuffled, targets, &opts).unwrap();
        prop_assert!(check_subject_disjoint(&shuffled, &other).is_ok());
        prop_assert_eq!((other.removed.len(), other.deviation), (spec.removed.len(), spec.deviation));
    }

    #[test]
    fn frame_sampling_is_increasing_and_in_range(frames in 0usize..2000, fps in 1u32..120, rate in 1u32..120) {
        let seq = SequenceRecord { id: "s".into(), subjects: vec!["a".into()], frame_count: frames, frame_rate: f64::from(fps) };
        match sample_frames(&seq, f64::from(rate)) {
            Ok(idx) => {
                prop_assert!(rate <= fps);
                prop_assert!(idx.windows(2).all(|w| w[0] < w[1]));
                prop_assert!(idx.iter().all(|&i| i < frames));
            }
            Err(_) => prop_assert!(rate > fps),
        }
    }

    #[test]
    fn cloud_encoding_round_trips(seed in any::<u64>(), n in 0usize..300, provenance in any::<bool>()) {
        let mut r = ChaCha8Rng::seed_from_u64(seed);
        let positions: Vec<Point3<f64>> = (0..n)
            .map(|_| Point3::new(f64::from(r.gen::<f32>()), f64::from(r.gen::<f32>()), f64::from(r.gen::<f32>())))
            .collect();
        let mut cloud = hck::geometry::LabeledPointCloud::from_positions(positions);
        for i in 0..n {
            if r.gen_bool(0.5) {
                cloud.semantic[i] = hck::geometry::SEMANTIC_HUMAN;
                cloud.instance[i] = r.gen_range(1..100);
                cloud.part[i] = r.gen_range(0..=15);
            }
        }
        if provenance {
            cloud.provenance = Some(
                (0..n)
                    .map(|_| hck::geometry::Provenance { camera: r.gen_range(0..4), row: r.gen_range(0..480), col: r.gen_range(0..640) })
                    .collect(),
            );
        }
        let bytes = encode_cloud(&cloud).unwrap();
        let back = decode_cloud(&bytes).unwrap();
        prop_assert_eq!(&back, &cloud);
        prop_assert_eq!(encode_cloud(&back).unwrap(), bytes);
    }
}

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{create_dir, read_file, read_json, write_file, write_json, CliError};
use crate::clustering::{hdbscan, ClusterResult, HdbscanParams};
use crate::evaluation::{
    evaluate_label_sets, instance_masks, labels_as_predictions, occlusion_levels, pr_curve,
    pr_curve_csv, ApConfig, EvalReport, IouTable, OcclusionConfig, OcclusionLevel, OcclusionScene,
    SceneLabels, SceneOcclusion,
};
use crate::geometry::{
    project_2d_mask_to_3d, CameraModel, DepthImage, IndexImage, LabeledPointCloud, SEMANTIC_HUMAN,
};
use crate::io::{
    check_subject_disjoint, load_cloud, read_labeled_cloud, subject_disjoint_split,
    write_labeled_cloud, DatasetManifest, SceneEntry, SequenceRecord, SplitOptions, SplitSpec,
    SplitTargets, REFERENCE_SPLIT_TARGETS,
};
use crate::labeling::{
    load_fitted_body, pseudo_label, BodyModelFamily, BodyPartTaxonomy, FittedBody, LabelConfig,
    PointLabels,
};
use crate::matching::{
    two_stage_match, GroundTruthHuman, MaskCostConfig, QueryBundle, TwoStageAssignment,
};
use crate::synthesis::{
    generate_dataset, simulate_kinect_noise, AssetLibrary, NoiseConfig, SynthConfig,
};

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthJobConfig {
    pub synth: SynthConfig,
    pub noise: NoiseConfig,
    /// Directory with `rooms/*.obj` and `humans/*.obj` + `.parts.json`;
    /// procedural assets when absent.
    pub assets: Option<PathBuf>,
}

/// `--seed` overrides the seed in the config.
pub fn synth_job(
    cfg: &SynthJobConfig,
    scenes: usize,
    seed: Option<u64>,
    out: &Path,
) -> Result<DatasetManifest, CliError> {
    let mut synth = cfg.synth.clone();
    if let Some(s) = seed {
        synth.rng_seed = s;
    }
    let assets = match &cfg.assets {
        Some(dir) => AssetLibrary::load(dir, synth.family)?,
        None => AssetLibrary::procedural(synth.family),
    };
    Ok(generate_dataset(&assets, &synth, &cfg.noise, scenes, out)?)
}

fn dataset_family(manifest: &DatasetManifest) -> BodyModelFamily {
    manifest
        .configs
        .get("synth")
        .and_then(|v| v.get("family"))
        .and_then(|v| serde_json::from_value(v.clone()).ok())
        .unwrap_or(BodyModelFamily::SmplX)
}

/// Fitted bodies of one scene entry, loaded from the dataset directory.
pub fn load_dataset_bodies(
    root: &Path,
    manifest: &DatasetManifest,
    scene: &SceneEntry,
) -> Result<Vec<FittedBody>, CliError> {
    let family = dataset_family(manifest);
    let taxonomy = BodyPartTaxonomy::build(family);
    scene
        .bodies
        .iter()
        .map(|b| {
            Ok(load_fitted_body(
                &root.join(&b.mesh_path),
                &root.join(&b.parts_path),
                b.instance_id,
                &taxonomy,
            )?)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
struct PseudoLabelSummary {
    path: String,
    points: usize,
    human_points: usize,
    instances: usize,
}

/// Writes a copy of the dataset whose cloud labels come from the fitted
/// bodies instead of the renderer.
pub fn pseudo_label_job(cfg: &LabelConfig, dataset: &Path, out: &Path) -> Result<(), CliError> {
    cfg.validate()?;
    let manifest = DatasetManifest::read(dataset)?;
    let taxonomy = BodyPartTaxonomy::build(dataset_family(&manifest));
    let summaries = manifest
        .clouds
        .par_iter()
        .map(|rec| {
            let scene = manifest
                .scenes
                .iter()
                .find(|s| s.scene_id == rec.scene_id)
                .ok_or_else(|| CliError::Usage(format!("cloud {} has no scene entry", rec.path)))?;
            let bodies = load_dataset_bodies(dataset, &manifest, scene)?;
            let mut cloud = read_labeled_cloud(&dataset.join(&rec.path))?;
            let labels = pseudo_label(&cloud, &bodies, &taxonomy, cfg)?;
            labels.apply_to(&mut cloud)?;
            let target = out.join(&rec.path);
            if let Some(dir) = target.parent() {
                create_dir(dir)?;
            }
            write_labeled_cloud(&target, &cloud)?;
            Ok(PseudoLabelSummary {
                path: rec.path.clone(),
                points: cloud.len(),
                human_points: labels.semantic.iter().filter(|&&s| s == SEMANTIC_HUMAN).count(),
                instances: labels.human_count(),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    for scene in &manifest.scenes {
        for b in &scene.bodies {
            for p in [&b.mesh_path, &b.parts_path] {
                write_file(&out.join(p), read_file(&dataset.join(p))?)?;
            }
        }
    }
    let mut relabeled = manifest.clone();
    relabeled.record_config("pseudo_label", cfg)?;
    relabeled.write(out)?;
    write_json(&out.join("pseudo_label.json"), &summaries)
}

#[derive(Clone, Debug, Serialize)]
struct NoiseSummary {
    seed: u64,
    config: NoiseConfig,
    valid_before: usize,
    valid_after: usize,
}

/// Reads a depth dump, applies sensor noise and writes `depth.bin` and
/// `noise.json`.
pub fn noise_job(
    cfg: &NoiseConfig,
    depth: &Path,
    camera: &Path,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    let clean = DepthImage::read_dump(read_file(depth)?.as_slice())?;
    let cam: CameraModel = read_json(camera)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noisy = simulate_kinect_noise(&clean, &cam, cfg, &mut rng)?;
    let mut bytes = Vec::new();
    noisy
        .write_dump(&mut bytes)
        .map_err(crate::geometry::GeometryError::from)?;
    write_file(&out.join("depth.bin"), bytes)?;
    write_json(
        &out.join("noise.json"),
        &NoiseSummary {
            seed,
            config: *cfg,
            valid_before: clean.valid_count(),
            valid_after: noisy.valid_count(),
        },
    )
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
#[derive(Default)]
pub struct ClusterJobConfig {
    pub params: HdbscanParams,
    /// Cluster every point instead of the human-labeled ones.
    pub all_points: bool,
}


#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ClusterOutput {
    pub params: HdbscanParams,
    pub cluster_count: usize,
    pub cluster_sizes: Vec<usize>,
    pub noise_count: usize,
    /// Per input point: instance id (cluster index + 1), 0 for noise and
    /// unselected points.
    pub instance: Vec<u32>,
}

/// Clusters the human points of a cloud and writes `instances.json`.
pub fn cluster_job(cfg: &ClusterJobConfig, input: &Path, out: &Path) -> Result<ClusterOutput, CliError> {
    let cloud = load_cloud(input)?;
    let selected: Vec<usize> = (0..cloud.len())
        .filter(|&i| cfg.all_points || cloud.semantic[i] == SEMANTIC_HUMAN)
        .collect();
    let pts: Vec<_> = selected.iter().map(|&i| cloud.positions[i]).collect();
    let result: ClusterResult = hdbscan(&pts, &cfg.params)?;
    let mut instance = vec![0u32; cloud.len()];
    for (&i, &l) in selected.iter().zip(&result.labels) {
        if l >= 0 {
            instance[i] = l as u32 + 1;
        }
    }
    let output = ClusterOutput {
        params: cfg.params,
        cluster_count: result.cluster_count,
        cluster_sizes: result.cluster_sizes(),
        noise_count: result.noise_count(),
        instance,
    };
    write_json(&out.join("instances.json"), &output)?;
    Ok(output)
}

/// Matches a query bundle against ground-truth humans; writes
/// `assignment.json`.
pub fn match_job(
    cfg: &MaskCostConfig,
    preds: &Path,
    gt: &Path,
    out: &Path,
) -> Result<TwoStageAssignment, CliError> {
    let bundle: QueryBundle = read_json(preds)?;
    let gt: Vec<GroundTruthHuman> = read_json(gt)?;
    let assignment = two_stage_match(&bundle, &gt, cfg)?;
    write_json(&out.join("assignment.json"), &assignment)?;
    Ok(assignment)
}

/// Where labels for evaluation come from.
#[derive(Clone, Debug, PartialEq)]
pub enum EvalInput {
    Cloud(PathBuf),
    Dataset(PathBuf),
}

impl EvalInput {
    pub fn detect(path: &Path) -> Self {
        if path.is_dir() {
            EvalInput::Dataset(path.to_path_buf())
        } else {
            EvalInput::Cloud(path.to_path_buf())
        }
    }

    /// `(scene key, cloud)` pairs sorted by key.
    fn clouds(&self) -> Result<Vec<(String, LabeledPointCloud)>, CliError> {
        match self {
            EvalInput::Cloud(p) => Ok(vec![("cloud".into(), load_cloud(p)?)]),
            EvalInput::Dataset(dir) => {
                let manifest = DatasetManifest::read(dir)?;
                let mut v = manifest
                    .clouds
                    .par_iter()
                    .map(|r| Ok((r.path.clone(), read_labeled_cloud(&dir.join(&r.path))?)))
                    .collect::<Result<Vec<_>, CliError>>()?;
                v.sort_by(|a, b| a.0.cmp(&b.0));
                Ok(v)
            }
        }
    }
}

fn labels_of(cloud: LabeledPointCloud) -> PointLabels {
    PointLabels {
        semantic: cloud.semantic,
        instance: cloud.instance,
        part: cloud.part,
    }
}

/// Writes `report.json`, `report.csv` and optionally `pr_curve.csv`.
pub fn eval_job(
    cfg: &ApConfig,
    pred: &EvalInput,
    gt: &EvalInput,
    write_pr_curve: bool,
    out: &Path,
) -> Result<EvalReport, CliError> {
    let preds = pred.clouds()?;
    let gts = gt.clouds()?;
    let keys = |v: &[(String, LabeledPointCloud)]| v.iter().map(|(k, _)| k.clone()).collect::<Vec<_>>();
    if keys(&preds) != keys(&gts) {
        return Err(CliError::Usage(
            "candidate and reference hold different cloud sets".into(),
        ));
    }
    let scenes: Vec<SceneLabels> = preds
        .into_iter()
        .zip(gts)
        .map(|((scene_id, p), (_, g))| SceneLabels {
            scene_id,
            candidate: labels_of(p),
            reference: labels_of(g),
        })
        .collect();
    let report = evaluate_label_sets(&scenes, cfg, &BodyPartTaxonomy::build(BodyModelFamily::SmplX))?;
    write_json(&out.join("report.json"), &report)?;
    write_file(&out.join("report.csv"), report.to_csv())?;
    if write_pr_curve {
        let tables = scenes
            .iter()
            .map(|s| {
                let gt: Vec<Vec<bool>> = instance_masks(&s.reference.instance)
                    .into_iter()
                    .map(|(_, m)| m)
                    .collect();
                IouTable::new(&labels_as_predictions(&s.candidate.instance), &gt)
            })
            .collect::<Result<Vec<_>, _>>()?;
        write_file(&out.join("pr_curve.csv"), pr_curve_csv(&pr_curve(&tables, cfg.ap50)))?;
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OcclusionOutput {
    pub config: OcclusionConfig,
    /// One record per (scene, camera) cloud, ordered by cloud path.
    pub clouds: Vec<SceneOcclusion>,
    pub low: usize,
    pub medium: usize,
    pub high: usize,
}

/// Occlusion level of each cloud in a dataset, from its instance labels and
/// the scene's fitted bodies. Bodies without labeled points are skipped.
pub fn occlusion_job(cfg: &OcclusionConfig, dataset: &Path, out: &Path) -> Result<OcclusionOutput, CliError> {
    cfg.validate()?;
    let manifest = DatasetManifest::read(dataset)?;
    let mut scenes = Vec::new();
    for rec in &manifest.clouds {
        let Some(entry) = manifest.scenes.iter().find(|s| s.scene_id == rec.scene_id) else {
            continue;
        };
        let Some(cam) = entry.cameras.get(rec.camera_id as usize) else {
            return Err(CliError::Usage(format!("{}: unknown camera {}", rec.path, rec.camera_id)));
        };
        let bodies = load_dataset_bodies(dataset, &manifest, entry)?;
        let cloud = read_labeled_cloud(&dataset.join(&rec.path))?;
        let mut scene = OcclusionScene::from_cloud(rec.path.clone(), cam.clone(), &bodies, &cloud);
        scene.humans.retain(|h| !h.points.is_empty());
        if !scene.humans.is_empty() {
            scenes.push(scene);
        }
    }
    let clouds = occlusion_levels(&scenes, cfg)?;
    let count = |l: OcclusionLevel| clouds.iter().filter(|s| s.level == l).count();
    let output = OcclusionOutput {
        config: *cfg,
        low: count(OcclusionLevel::Low),
        medium: count(OcclusionLevel::Medium),
        high: count(OcclusionLevel::High),
        clouds,
    };
    write_json(&out.join("occlusion.json"), &output)?;
    Ok(output)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SplitJobConfig {
    pub targets: SplitTargets,
    #[serde(flatten)]
    pub options: SplitOptions,
}

impl Default for SplitJobConfig {
    fn default() -> Self {
        Self {
            targets: REFERENCE_SPLIT_TARGETS,
            options: SplitOptions::default(),
        }
    }
}

/// Splits the sequences listed in `input`; writes `split.json`.
pub fn split_job(cfg: &SplitJobConfig, input: &Path, out: &Path) -> Result<SplitSpec, CliError> {
    let sequences: Vec<SequenceRecord> = read_json(input)?;
    let spec = subject_disjoint_split(&sequences, cfg.targets, &cfg.options)?;
    check_subject_disjoint(&sequences, &spec)?;
    write_json(&out.join("split.json"), &spec)?;
    Ok(spec)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Lift2dConfig {
    /// Camera the cloud's provenance must refer to.
    pub camera_id: u32,
    /// Square dilation applied to the mask before lifting.
    pub dilate: usize,
}

/// Lifts an instance mask dump onto a cloud; writes `labels.json` with one
/// instance id per point.
pub fn lift2d_job(
    cfg: &Lift2dConfig,
    mask: &Path,
    depth: &Path,
    camera: &Path,
    cloud: &Path,
    out: &Path,
) -> Result<Vec<u32>, CliError> {
    let mut mask = IndexImage::read_dump(read_file(mask)?.as_slice())?;
    if cfg.dilate > 0 {
        mask = mask.dilate(cfg.dilate);
    }
    let depth = DepthImage::read_dump(read_file(depth)?.as_slice())?;
    let cam: CameraModel = read_json(camera)?;
    let cloud = load_cloud(cloud)?;
    let labels = project_2d_mask_to_3d(&mask, &depth, &cam, &cloud, cfg.camera_id)?;
    write_json(&out.join("labels.json"), &labels)?;
    Ok(labels)
}

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ap::{ap_suite_pooled, ApConfig, ApScores, IouTable};
use super::EvalError;
use crate::clustering::InstancePrediction;
use crate::geometry::MAX_PART_ID;
use crate::labeling::{BodyPart, BodyPartTaxonomy, PointLabels};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartIou {
    pub part: String,
    pub id: u8,
    /// `None` when neither labeling uses the part.
    pub iou: Option<f64>,
    pub present_in_gt: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartIouReport {
    pub parts: Vec<PartIou>,
    /// Mean over parts present in the ground truth.
    pub mean: Option<f64>,
}

/// Per-part intersection and union counts, index = part id.
#[derive(Clone, Debug, Default)]
struct PartCounts {
    inter: [usize; MAX_PART_ID as usize + 1],
    union: [usize; MAX_PART_ID as usize + 1],
    in_gt: [usize; MAX_PART_ID as usize + 1],
}

impl PartCounts {
    fn accumulate(&mut self, pred: &[u8], gt: &[u8]) -> Result<(), EvalError> {
        if pred.len() != gt.len() {
            return Err(EvalError::LengthMismatch {
                expected: gt.len(),
                got: pred.len(),
            });
        }
        for (&p, &g) in pred.iter().zip(gt) {
            for id in [p, g] {
                if id > MAX_PART_ID {
                    return Err(EvalError::UnknownLabel(id));
                }
            }
            if g != 0 {
                self.in_gt[g as usize] += 1;
            }
            if p == g {
                if p != 0 {
                    self.inter[p as usize] += 1;
                    self.union[p as usize] += 1;
                }
            } else {
                if p != 0 {
                    self.union[p as usize] += 1;
                }
                if g != 0 {
                    self.union[g as usize] += 1;
                }
            }
        }
        Ok(())
    }

    fn merge(&mut self, other: &PartCounts) {
        for i in 0..self.inter.len() {
            self.inter[i] += other.inter[i];
            self.union[i] += other.union[i];
            self.in_gt[i] += other.in_gt[i];
        }
    }

    fn report(&self, parts: &[BodyPart]) -> PartIouReport {
        let parts: Vec<PartIou> = parts
            .iter()
            .map(|&bp| {
                let i = bp.id() as usize;
                PartIou {
                    part: bp.name().to_string(),
                    id: bp.id(),
                    iou: (self.union[i] > 0).then(|| self.inter[i] as f64 / self.union[i] as f64),
                    present_in_gt: self.in_gt[i] > 0,
                }
            })
            .collect();
        let present: Vec<f64> = parts
            .iter()
            .filter(|p| p.present_in_gt)
            .filter_map(|p| p.iou)
            .collect();
        let mean = (!present.is_empty()).then(|| present.iter().sum::<f64>() / present.len() as f64);
        PartIouReport { parts, mean }
    }
}

/// Per-part IoU over the final part vocabulary (0 = background).
pub fn semantic_part_miou(
    pred: &[u8],
    gt: &[u8],
    taxonomy: &BodyPartTaxonomy,
) -> Result<PartIouReport, EvalError> {
    let mut counts = PartCounts::default();
    counts.accumulate(pred, gt)?;
    Ok(counts.report(&taxonomy.final_parts()))
}

/// Binary masks of every non-zero instance id, ordered by id.
pub fn instance_masks(instance: &[u32]) -> Vec<(u32, Vec<bool>)> {
    let mut ids: Vec<u32> = instance.iter().copied().filter(|&i| i != 0).collect();
    ids.sort_unstable();
    ids.dedup();
    ids.into_iter()
        .map(|id| (id, instance.iter().map(|&v| v == id).collect()))
        .collect()
}

/// Drops `fraction` of every instance's points (rounded to the nearest
/// count), chosen uniformly; dropped points become background (id 0).
pub fn erode_instances<R: Rng + ?Sized>(
    instance: &[u32],
    fraction: f64,
    rng: &mut R,
) -> Result<Vec<u32>, EvalError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(EvalError::InvalidConfig(format!(
            "erosion fraction {fraction} outside [0, 1]"
        )));
    }
    let mut out = instance.to_vec();
    for (id, _) in instance_masks(instance) {
        let members: Vec<usize> = (0..instance.len()).filter(|&i| instance[i] == id).collect();
        let drop = (fraction * members.len() as f64).round() as usize;
        for i in rand::seq::index::sample(rng, members.len(), drop) {
            out[members[i]] = 0;
        }
    }
    Ok(out)
}

/// Every instance of a labeling as a prediction with confidence 1.
pub fn labels_as_predictions(instance: &[u32]) -> Vec<InstancePrediction> {
    instance_masks(instance)
        .into_iter()
        .map(|(_, m)| InstancePrediction::binary(&m, 1, 1.0))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassScores {
    pub class: String,
    #[serde(flatten)]
    pub scores: ApScores,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneRecord {
    pub scene_id: String,
    pub candidate_instances: usize,
    pub reference_instances: usize,
    #[serde(flatten)]
    pub scores: ApScores,
    pub mean_part_iou: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub config: ApConfig,
    pub classes: Vec<ClassScores>,
    pub parts: PartIouReport,
    /// Ordered by scene id.
    pub scenes: Vec<SceneRecord>,
}

impl EvalReport {
    pub fn human(&self) -> ApScores {
        self.classes[0].scores
    }

    /// Per-class and per-part tables as CSV.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,name,ap,ap50,ap25,iou\n");
        for c in &self.classes {
            out.push_str(&format!(
                "class,{},{:.6},{:.6},{:.6},\n",
                c.class, c.scores.ap, c.scores.ap50, c.scores.ap25
            ));
        }
        for p in &self.parts.parts {
            let iou = p.iou.map(|v| format!("{v:.6}")).unwrap_or_default();
            out.push_str(&format!("part,{},,,,{iou}\n", p.part));
        }
        for s in &self.scenes {
            out.push_str(&format!(
                "scene,{},{:.6},{:.6},{:.6},{}\n",
                s.scene_id,
                s.scores.ap,
                s.scores.ap50,
                s.scores.ap25,
                s.mean_part_iou.map(|v| format!("{v:.6}")).unwrap_or_default()
            ));
        }
        out
    }
}

/// Candidate and reference labels over one scene's points.
#[derive(Clone, Debug)]
pub struct SceneLabels {
    pub scene_id: String,
    pub candidate: PointLabels,
    pub reference: PointLabels,
}

/// Candidate instances (confidence 1) against reference instances, pooled
/// over scenes, plus body-part IoU.
pub fn evaluate_label_sets(
    scenes: &[SceneLabels],
    cfg: &ApConfig,
    taxonomy: &BodyPartTaxonomy,
) -> Result<EvalReport, EvalError> {
    cfg.validate()?;
    let mut sorted: Vec<&SceneLabels> = scenes.iter().collect();
    sorted.sort_by(|a, b| a.scene_id.cmp(&b.scene_id));
    let per_scene = sorted
        .par_iter()
        .map(|s| {
            if s.candidate.len() != s.reference.len() {
                return Err(EvalError::LengthMismatch {
                    expected: s.reference.len(),
                    got: s.candidate.len(),
                });
            }
            let preds = labels_as_predictions(&s.candidate.instance);
            let gts: Vec<Vec<bool>> = instance_masks(&s.reference.instance)
                .into_iter()
                .map(|(_, m)| m)
                .collect();
            let table = IouTable::new(&preds, &gts)?;
            let scores = ap_suite_pooled(std::slice::from_ref(&table), cfg)?;
            let mut counts = PartCounts::default();
            counts.accumulate(&s.candidate.part, &s.reference.part)?;
            let record = SceneRecord {
                scene_id: s.scene_id.clone(),
                candidate_instances: preds.len(),
                reference_instances: gts.len(),
                scores,
                mean_part_iou: counts.report(&taxonomy.final_parts()).mean,
            };
            Ok((table, counts, record))
        })
        .collect::<Result<Vec<_>, EvalError>>()?;

    let tables: Vec<IouTable> = per_scene.iter().map(|(t, _, _)| t.clone()).collect();
    let mut counts = PartCounts::default();
    for (_, c, _) in &per_scene {
        counts.merge(c);
    }
    Ok(EvalReport {
        config: cfg.clone(),
        classes: vec![ClassScores {
            class: "human".into(),
            scores: ap_suite_pooled(&tables, cfg)?,
        }],
        parts: counts.report(&taxonomy.final_parts()),
        scenes: per_scene.into_iter().map(|(_, _, r)| r).collect(),
    })
}

/// Single-scene comparison of two labelings of the same points.
pub fn compare_label_sets(
    candidate: &PointLabels,
    reference: &PointLabels,
    cfg: &ApConfig,
    taxonomy: &BodyPartTaxonomy,
) -> Result<EvalReport, EvalError> {
    evaluate_label_sets(
        &[SceneLabels {
            scene_id: "scene".into(),
            candidate: candidate.clone(),
            reference: reference.clone(),
        }],
        cfg,
        taxonomy,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::labeling::BodyModelFamily;

    fn tax() -> BodyPartTaxonomy {
        BodyPartTaxonomy::build(BodyModelFamily::SmplX)
    }

    #[test]
    fn identical_parts() {
        let gt: Vec<u8> = (0..200).map(|i| (i % 16) as u8).collect();
        let r = semantic_part_miou(&gt, &gt, &tax()).unwrap();
        assert_eq!(r.mean, Some(1.0));
        assert!(r.parts.iter().all(|p| p.iou == Some(1.0)));
    }

    #[test]
    fn head_torso_swap() {
        let head = BodyPart::Head.id();
        let torso = BodyPart::Torso.id();
        let gt: Vec<u8> = (0..150).map(|i| (i % 15 + 1) as u8).collect();
        let pred: Vec<u8> = gt
            .iter()
            .map(|&g| match g {
                g if g == head => torso,
                g if g == torso => head,
                g => g,
            })
            .collect();
        let r = semantic_part_miou(&pred, &gt, &tax()).unwrap();
        for p in &r.parts {
            let expect = if p.id == head || p.id == torso { 0.0 } else { 1.0 };
            assert_eq!(p.iou, Some(expect), "{}", p.part);
        }
        assert!((r.mean.unwrap() - 13.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn unknown_part_is_an_error() {
        assert!(matches!(
            semantic_part_miou(&[16], &[0], &tax()),
            Err(EvalError::UnknownLabel(16))
        ));
    }

    #[test]
    fn identical_label_sets_score_100() {
        let mut labels = PointLabels::background(30);
        for i in 0..30 {
            labels.instance[i] = (i / 10) as u32;
            labels.semantic[i] = u8::from(i >= 10);
            labels.part[i] = if i >= 10 { 1 + (i % 3) as u8 } else { 0 };
        }
        let r = compare_label_sets(&labels, &labels, &ApConfig::default(), &tax()).unwrap();
        let s = r.human();
        assert_eq!((s.ap, s.ap50, s.ap25), (100.0, 100.0, 100.0));
        assert_eq!(r.parts.mean, Some(1.0));
        assert!(r.to_csv().starts_with("kind,name"));
    }

    #[test]
    fn erosion_drops_the_requested_share() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let inst: Vec<u32> = (0..1000).map(|i| (i % 4) as u32).collect();
        let eroded = erode_instances(&inst, 0.3, &mut rng).unwrap();
        for id in 1..4 {
            let kept = eroded.iter().filter(|&&v| v == id).count();
            assert_eq!(kept, 250 - 75);
        }
        assert!(eroded.iter().zip(&inst).all(|(&e, &o)| e == o || e == 0));
        assert!(erode_instances(&inst, 1.5, &mut rng).is_err());

        let reference = PointLabels {
            semantic: inst.iter().map(|&v| u8::from(v != 0)).collect(),
            instance: inst.clone(),
            part: inst.iter().map(|&v| if v == 0 { 0 } else { 8 }).collect(),
        };
        let candidate = PointLabels {
            semantic: eroded.iter().map(|&v| u8::from(v != 0)).collect(),
            instance: eroded.clone(),
            part: eroded.iter().map(|&v| if v == 0 { 0 } else { 8 }).collect(),
        };
        let h = compare_label_sets(&candidate, &reference, &ApConfig::default(), &tax())
            .unwrap()
            .human();
        assert!(h.ap < 100.0);
        assert!(h.ap25 >= h.ap50 && h.ap50 >= h.ap);
    }
}

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::costs::{mask_cost_matrix, GroundTruthMask, MaskCostConfig};
use super::hungarian::hungarian;
use super::MatchError;
use crate::clustering::InstancePrediction;
use crate::labeling::BodyPart;

pub const DEFAULT_HUMAN_QUERIES: usize = 5;
pub const DEFAULT_PART_QUERIES: usize = 16;

/// Human queries and the part queries owned by each of them.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryBundle {
    pub human_preds: Vec<InstancePrediction>,
    /// `part_preds[h]` are the K part queries of human query `h`.
    pub part_preds: Vec<Vec<InstancePrediction>>,
}

impl QueryBundle {
    pub fn new(
        human_preds: Vec<InstancePrediction>,
        part_preds: Vec<Vec<InstancePrediction>>,
    ) -> Result<Self, MatchError> {
        let b = Self {
            human_preds,
            part_preds,
        };
        b.validate()?;
        Ok(b)
    }

    pub fn human_queries(&self) -> usize {
        self.human_preds.len()
    }

    pub fn part_queries(&self) -> usize {
        self.part_preds.first().map_or(0, Vec::len)
    }

    pub fn point_count(&self) -> Option<usize> {
        self.human_preds.first().map(InstancePrediction::len)
    }

    pub fn validate(&self) -> Result<(), MatchError> {
        if self.part_preds.len() != self.human_preds.len() {
            return Err(MatchError::InvalidBundle(format!(
                "{} part groups for {} human queries",
                self.part_preds.len(),
                self.human_preds.len()
            )));
        }
        let k = self.part_queries();
        if self.part_preds.iter().any(|g| g.len() != k) {
            return Err(MatchError::InvalidBundle(
                "part query groups differ in size".into(),
            ));
        }
        let n = self.point_count().unwrap_or(0);
        let all = self.human_preds.iter().chain(self.part_preds.iter().flatten());
        for p in all {
            if p.len() != n {
                return Err(MatchError::InvalidBundle(format!(
                    "mask of {} points, expected {n}",
                    p.len()
                )));
            }
            if !p.is_valid() {
                return Err(MatchError::InvalidMask);
            }
        }
        for p in self.part_preds.iter().flatten() {
            match &p.class_probs {
                Some(probs) if probs.len() == BodyPart::ALL.len() => {}
                _ => {
                    return Err(MatchError::InvalidBundle(format!(
                        "part queries need a distribution over {} parts",
                        BodyPart::ALL.len()
                    )))
                }
            }
        }
        Ok(())
    }
}

/// A ground-truth human with its body-part masks.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthHuman {
    pub mask: Vec<bool>,
    /// Part masks; `class` is the final part id.
    pub parts: Vec<GroundTruthMask>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub query: usize,
    pub target: usize,
    pub cost: f64,
}

/// Part pairs found under one matched human pair.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PartMatching {
    pub human_query: usize,
    pub target_human: usize,
    pub pairs: Vec<MatchedPair>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TwoStageAssignment {
    pub human_pairs: Vec<MatchedPair>,
    /// One entry per human pair, same order.
    pub part_pairs: Vec<PartMatching>,
    pub human_cost: f64,
    pub part_cost: f64,
    pub config: MaskCostConfig,
}

impl TwoStageAssignment {
    pub fn total_cost(&self) -> f64 {
        self.human_cost + self.part_cost
    }

    /// Target of a part query `(h, k)`: `(gt human, gt part)`.
    pub fn part_target(&self, human_query: usize, part_query: usize) -> Option<(usize, usize)> {
        let m = self.part_pairs.iter().find(|m| m.human_query == human_query)?;
        let p = m.pairs.iter().find(|p| p.query == part_query)?;
        Some((m.target_human, p.target))
    }
}

/// Human queries are matched to ground-truth humans first; the part queries
/// of each matched query are then matched only against that human's parts.
pub fn two_stage_match(
    bundle: &QueryBundle,
    gt: &[GroundTruthHuman],
    cfg: &MaskCostConfig,
) -> Result<TwoStageAssignment, MatchError> {
    bundle.validate()?;
    cfg.validate()?;
    let n = bundle.point_count().unwrap_or(0);
    for h in gt {
        if h.mask.len() != n || h.parts.iter().any(|p| p.mask.len() != n) {
            return Err(MatchError::LengthMismatch {
                pred: n,
                gt: h.mask.len(),
            });
        }
    }
    let gt_humans: Vec<GroundTruthMask> = gt
        .iter()
        .map(|h| GroundTruthMask::new(h.mask.clone(), 1))
        .collect();
    let human_costs = mask_cost_matrix(&bundle.human_preds, &gt_humans, cfg)?;
    let stage1 = hungarian(&human_costs)?;
    let human_pairs: Vec<MatchedPair> = stage1
        .pairs
        .iter()
        .map(|&(q, t)| MatchedPair {
            query: q,
            target: t,
            cost: human_costs[q][t],
        })
        .collect();

    let part_pairs = human_pairs
        .par_iter()
        .map(|hp| {
            let costs = mask_cost_matrix(&bundle.part_preds[hp.query], &gt[hp.target].parts, cfg)?;
            let a = hungarian(&costs)?;
            Ok(PartMatching {
                human_query: hp.query,
                target_human: hp.target,
                pairs: a
                    .pairs
                    .iter()
                    .map(|&(q, t)| MatchedPair {
                        query: q,
                        target: t,
                        cost: costs[q][t],
                    })
                    .collect(),
            })
        })
        .collect::<Result<Vec<_>, MatchError>>()?;

    let part_cost = part_pairs
        .iter()
        .flat_map(|m| m.pairs.iter().map(|p| p.cost))
        .sum();
    Ok(TwoStageAssignment {
        human_cost: stage1.total,
        human_pairs,
        part_pairs,
        part_cost,
        config: *cfg,
    })
}

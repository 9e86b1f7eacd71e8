//! Instance average precision with greedy confidence-ordered matching and
//! all-point interpolation.

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::clustering::InstancePrediction;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ApConfig {
    /// Grid averaged into AP.
    pub ap_thresholds: Vec<f64>,
    pub ap50: f64,
    pub ap25: f64,
}

impl Default for ApConfig {
    fn default() -> Self {
        Self {
            // 0.50, 0.55, ..., 0.95 as correctly rounded decimals
            ap_thresholds: (0..10).map(|i| f64::from(50 + 5 * i) / 100.0).collect(),
            ap50: 0.5,
            ap25: 0.25,
        }
    }
}

impl ApConfig {
    pub fn validate(&self) -> Result<(), EvalError> {
        let in_range = |t: f64| t > 0.0 && t <= 1.0;
        if self.ap_thresholds.is_empty()
            || !self.ap_thresholds.iter().all(|&t| in_range(t))
            || self.ap_thresholds.windows(2).any(|w| w[0] >= w[1])
            || !in_range(self.ap50)
            || !in_range(self.ap25)
        {
            return Err(EvalError::InvalidConfig(
                "IoU thresholds must be sorted and lie in (0, 1]".into(),
            ));
        }
        Ok(())
    }
}

/// `(AP, AP50, AP25)` on the `[0, 100]` scale.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApScores {
    pub ap: f64,
    pub ap50: f64,
    pub ap25: f64,
}

/// IoU of two binary masks; 1 when both are empty.
pub fn mask_iou(a: &[bool], b: &[bool]) -> Result<f64, EvalError> {
    if a.len() != b.len() {
        return Err(EvalError::LengthMismatch {
            expected: a.len(),
            got: b.len(),
        });
    }
    let mut inter = 0usize;
    let mut union = 0usize;
    for (&x, &y) in a.iter().zip(b) {
        inter += usize::from(x && y);
        union += usize::from(x || y);
    }
    Ok(if union == 0 {
        1.0
    } else {
        inter as f64 / union as f64
    })
}

/// Predictions of one scene reduced to confidences and IoUs against its
/// ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct IouTable {
    confidence: Vec<f64>,
    /// `iou[p][g]`
    iou: Vec<Vec<f64>>,
    gt_count: usize,
}

impl IouTable {
    /// Soft predictions are thresholded at 0.5.
    pub fn new(preds: &[InstancePrediction], gts: &[Vec<bool>]) -> Result<Self, EvalError> {
        let n = gts.first().map(Vec::len).or(preds.first().map(|p| p.len()));
        if let Some(n) = n {
            for len in gts.iter().map(Vec::len).chain(preds.iter().map(|p| p.len())) {
                if len != n {
                    return Err(EvalError::LengthMismatch { expected: n, got: len });
                }
            }
        }
        if let Some(p) = preds.iter().find(|p| !p.confidence.is_finite()) {
            return Err(EvalError::NonFinite(format!("confidence {}", p.confidence)));
        }
        let bins: Vec<Vec<bool>> = preds.iter().map(InstancePrediction::to_binary).collect();
        let iou = bins
            .iter()
            .map(|p| gts.iter().map(|g| mask_iou(p, g)).collect())
            .collect::<Result<Vec<Vec<f64>>, _>>()?;
        Ok(Self {
            confidence: preds.iter().map(|p| p.confidence).collect(),
            iou,
            gt_count: gts.len(),
        })
    }

    pub fn from_ious(confidence: Vec<f64>, iou: Vec<Vec<f64>>, gt_count: usize) -> Result<Self, EvalError> {
        if iou.len() != confidence.len() || iou.iter().any(|r| r.len() != gt_count) {
            return Err(EvalError::LengthMismatch {
                expected: confidence.len(),
                got: iou.len(),
            });
        }
        Ok(Self {
            confidence,
            iou,
            gt_count,
        })
    }

    pub fn prediction_count(&self) -> usize {
        self.confidence.len()
    }

    pub fn gt_count(&self) -> usize {
        self.gt_count
    }
}

/// One row of the precision-recall table.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrPoint {
    pub confidence: f64,
    pub true_positive: bool,
    pub precision: f64,
    pub recall: f64,
}

/// Confidence-ordered TP/FP decisions pooled over scenes.
fn ranked_decisions(tables: &[IouTable], threshold: f64) -> Vec<(f64, bool)> {
    let mut order: Vec<(usize, usize)> = tables
        .iter()
        .enumerate()
        .flat_map(|(s, t)| (0..t.prediction_count()).map(move |p| (s, p)))
        .collect();
    // stable: equal confidences keep scene then index order
    order.sort_by(|a, b| {
        tables[b.0].confidence[b.1].total_cmp(&tables[a.0].confidence[a.1])
    });
    let mut matched: Vec<Vec<bool>> = tables.iter().map(|t| vec![false; t.gt_count]).collect();
    order
        .into_iter()
        .map(|(s, p)| {
            let row = &tables[s].iou[p];
            let mut best: Option<(usize, f64)> = None;
            for (g, &v) in row.iter().enumerate() {
                if !matched[s][g] && best.is_none_or(|(_, b)| v > b) {
                    best = Some((g, v));
                }
            }
            let tp = match best {
                Some((g, v)) if v >= threshold => {
                    matched[s][g] = true;
                    true
                }
                _ => false,
            };
            (tables[s].confidence[p], tp)
        })
        .collect()
}

/// Precision and recall after every ranked prediction.
pub fn pr_curve(tables: &[IouTable], threshold: f64) -> Vec<PrPoint> {
    let total_gt: usize = tables.iter().map(|t| t.gt_count).sum();
    let mut tp = 0usize;
    ranked_decisions(tables, threshold)
        .into_iter()
        .enumerate()
        .map(|(k, (confidence, hit))| {
            tp += usize::from(hit);
            PrPoint {
                confidence,
                true_positive: hit,
                precision: tp as f64 / (k + 1) as f64,
                recall: if total_gt == 0 {
                    0.0
                } else {
                    tp as f64 / total_gt as f64
                },
            }
        })
        .collect()
}

/// Pooled AP over several scenes at one IoU threshold, scaled to `[0, 100]`.
pub fn average_precision_pooled(tables: &[IouTable], threshold: f64) -> f64 {
    let total_gt: usize = tables.iter().map(|t| t.gt_count).sum();
    let total_pred: usize = tables.iter().map(IouTable::prediction_count).sum();
    if total_gt == 0 {
        return if total_pred == 0 { 100.0 } else { 0.0 };
    }
    let curve = pr_curve(tables, threshold);
    // precision envelope from the right
    let mut envelope: Vec<f64> = curve.iter().map(|p| p.precision).collect();
    for k in (0..envelope.len().saturating_sub(1)).rev() {
        envelope[k] = envelope[k].max(envelope[k + 1]);
    }
    let mut area = 0.0;
    let mut prev_recall = 0.0;
    for (p, env) in curve.iter().zip(&envelope) {
        area += (p.recall - prev_recall) * env;
        prev_recall = p.recall;
    }
    100.0 * area
}

pub fn average_precision(
    preds: &[InstancePrediction],
    gts: &[Vec<bool>],
    iou_threshold: f64,
) -> Result<f64, EvalError> {
    Ok(average_precision_pooled(&[IouTable::new(preds, gts)?], iou_threshold))
}

pub fn ap_suite_pooled(tables: &[IouTable], cfg: &ApConfig) -> Result<ApScores, EvalError> {
    cfg.validate()?;
    let grid: Vec<f64> = cfg
        .ap_thresholds
        .iter()
        .map(|&t| average_precision_pooled(tables, t))
        .collect();
    let (lo, hi) = grid
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    // The rounded mean can step one ulp outside the values it averages.
    let mean = (grid.iter().sum::<f64>() / grid.len() as f64).clamp(lo, hi);
    Ok(ApScores {
        ap: mean,
        ap50: average_precision_pooled(tables, cfg.ap50),
        ap25: average_precision_pooled(tables, cfg.ap25),
    })
}

pub fn ap_suite(
    preds: &[InstancePrediction],
    gts: &[Vec<bool>],
    cfg: &ApConfig,
) -> Result<ApScores, EvalError> {
    ap_suite_pooled(&[IouTable::new(preds, gts)?], cfg)
}

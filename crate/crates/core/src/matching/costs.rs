use serde::{Deserialize, Serialize};

use super::MatchError;
use crate::clustering::InstancePrediction;

/// Weights of the matching cost. Recorded alongside every assignment.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MaskCostConfig {
    pub w_bce: f64,
    pub w_dice: f64,
    pub w_cls: f64,
    pub eps: f64,
}

impl Default for MaskCostConfig {
    fn default() -> Self {
        Self {
            w_bce: 5.0,
            w_dice: 2.0,
            w_cls: 2.0,
            eps: 1e-6,
        }
    }
}

impl MaskCostConfig {
    pub fn new(w_bce: f64, w_dice: f64, w_cls: f64) -> Self {
        Self {
            w_bce,
            w_dice,
            w_cls,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<(), MatchError> {
        let weights = [self.w_bce, self.w_dice, self.w_cls];
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(MatchError::InvalidConfig(format!(
                "weights must be finite and non-negative, got {weights:?}"
            )));
        }
        if !(self.eps > 0.0 && self.eps < 0.5) {
            return Err(MatchError::InvalidConfig(format!(
                "eps must lie in (0, 0.5), got {}",
                self.eps
            )));
        }
        Ok(())
    }
}

/// A binary target mask with its class (1 = human, or a final part id).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthMask {
    pub mask: Vec<bool>,
    pub class: u8,
}

impl GroundTruthMask {
    pub fn new(mask: Vec<bool>, class: u8) -> Self {
        Self { mask, class }
    }
}

fn check_pair(pred: &[f64], gt: &[bool]) -> Result<(), MatchError> {
    if pred.len() != gt.len() {
        return Err(MatchError::LengthMismatch {
            pred: pred.len(),
            gt: gt.len(),
        });
    }
    if pred.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(MatchError::InvalidMask);
    }
    Ok(())
}

/// Smoothed dice cost `1 - (2 Σ p g + 1) / (Σ p + Σ g + 1)`.
pub fn dice_cost(pred: &[f64], gt: &[bool]) -> Result<f64, MatchError> {
    check_pair(pred, gt)?;
    let mut inter = 0.0;
    let mut sp = 0.0;
    let mut sg = 0.0;
    for (&p, &g) in pred.iter().zip(gt) {
        sp += p;
        if g {
            sg += 1.0;
            inter += p;
        }
    }
    Ok(1.0 - (2.0 * inter + 1.0) / (sp + sg + 1.0))
}

/// Mean binary cross-entropy with the prediction clamped to `[eps, 1 - eps]`.
pub fn bce_cost(pred: &[f64], gt: &[bool], eps: f64) -> Result<f64, MatchError> {
    check_pair(pred, gt)?;
    if pred.is_empty() {
        return Ok(0.0);
    }
    let sum: f64 = pred
        .iter()
        .zip(gt)
        .map(|(&p, &g)| {
            let p = p.clamp(eps, 1.0 - eps);
            if g {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    Ok(sum / pred.len() as f64)
}

/// Class term `1 - p[class - 1]`, or `None` when the prediction carries no
/// distribution covering the class.
fn class_cost(pred: &InstancePrediction, class: u8) -> Option<f64> {
    let probs = pred.class_probs.as_ref()?;
    let p = *probs.get(usize::from(class).checked_sub(1)?)?;
    Some(1.0 - p)
}

/// Single matching cost between one prediction and one target.
pub fn pair_cost(
    pred: &InstancePrediction,
    gt: &GroundTruthMask,
    cfg: &MaskCostConfig,
) -> Result<f64, MatchError> {
    let mut cost = cfg.w_bce * bce_cost(&pred.mask, &gt.mask, cfg.eps)?
        + cfg.w_dice * dice_cost(&pred.mask, &gt.mask)?;
    if let Some(c) = class_cost(pred, gt.class) {
        cost += cfg.w_cls * c;
    }
    Ok(cost)
}

/// `preds × gts` cost matrix.
pub fn mask_cost_matrix(
    preds: &[InstancePrediction],
    gts: &[GroundTruthMask],
    cfg: &MaskCostConfig,
) -> Result<Vec<Vec<f64>>, MatchError> {
    cfg.validate()?;
    preds
        .iter()
        .map(|p| gts.iter().map(|g| pair_cost(p, g, cfg)).collect())
        .collect()
}

/// Points each part query may attend to: its parent's mask at `threshold`,
/// or every point when that set is empty.
pub fn attention_scope_mask(human_masks: &[Vec<f64>], threshold: f64) -> Vec<Vec<usize>> {
    human_masks
        .iter()
        .map(|m| {
            let allowed: Vec<usize> = (0..m.len()).filter(|&i| m[i] >= threshold).collect();
            if allowed.is_empty() {
                (0..m.len()).collect()
            } else {
                allowed
            }
        })
        .collect()
}

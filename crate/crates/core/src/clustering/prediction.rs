use serde::{Deserialize, Serialize};

/// A predicted instance: per-point membership plus class and confidence.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstancePrediction {
    /// Membership per point, binary `{0, 1}` or soft in `[0, 1]`.
    pub mask: Vec<f64>,
    /// Semantic class id (1 = human) or final part id for part queries.
    pub class: u8,
    pub confidence: f64,
    /// Optional class distribution (for part queries: 15 entries, index
    /// `part_id - 1`).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub class_probs: Option<Vec<f64>>,
}

impl InstancePrediction {
    pub fn binary(mask: &[bool], class: u8, confidence: f64) -> Self {
        Self {
            mask: mask.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect(),
            class,
            confidence,
            class_probs: None,
        }
    }

    pub fn soft(mask: Vec<f64>, class: u8, confidence: f64) -> Self {
        Self {
            mask,
            class,
            confidence,
            class_probs: None,
        }
    }

    pub fn with_class_probs(mut self, probs: Vec<f64>) -> Self {
        self.class_probs = Some(probs);
        self
    }

    pub fn len(&self) -> usize {
        self.mask.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }

    pub fn is_binary(&self) -> bool {
        self.mask.iter().all(|&v| v == 0.0 || v == 1.0)
    }

    pub fn is_valid(&self) -> bool {
        self.mask.iter().all(|&v| (0.0..=1.0).contains(&v))
            && (0.0..=1.0).contains(&self.confidence)
    }

    /// Membership thresholded at 0.5.
    pub fn to_binary(&self) -> Vec<bool> {
        self.mask.iter().map(|&v| v >= 0.5).collect()
    }

    pub fn support(&self) -> usize {
        self.mask.iter().filter(|&&v| v >= 0.5).count()
    }
}

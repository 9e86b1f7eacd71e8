//! Instance AP, body-part IoU, label-set comparison and occlusion levels.

mod ap;
mod labels;
mod occlusion;

pub use ap::{
    ap_suite, ap_suite_pooled, average_precision, average_precision_pooled, mask_iou, pr_curve,
    ApConfig, ApScores, IouTable, PrPoint,
};
pub use labels::{
    compare_label_sets, erode_instances, evaluate_label_sets, instance_masks, labels_as_predictions,
    semantic_part_miou, ClassScores, EvalReport, PartIou, PartIouReport, SceneLabels, SceneRecord,
};
pub use occlusion::{
    human_visibility, occlusion_levels, splat_pixel_count, AnnotatedHuman, HumanVisibility,
    OcclusionConfig, OcclusionLevel, OcclusionScene, SceneOcclusion,
};

use thiserror::Error;

use crate::geometry::GeometryError;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("unknown part label {0}")]
    UnknownLabel(u8),
    #[error("invalid evaluation config: {0}")]
    InvalidConfig(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("degenerate render: fitted mesh of instance {instance} covers no pixels")]
    DegenerateRender { instance: u32 },
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// PR samples as CSV.
pub fn pr_curve_csv(points: &[PrPoint]) -> String {
    let mut out = String::from("rank,confidence,true_positive,precision,recall\n");
    for (i, p) in points.iter().enumerate() {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            i,
            p.confidence,
            u8::from(p.true_positive),
            p.precision,
            p.recall
        ));
    }
    out
}

//! Mask matching costs, exact assignment and the hierarchical
//! human-then-part matcher.

mod costs;
mod hungarian;
mod two_stage;

pub use costs::{
    attention_scope_mask, bce_cost, dice_cost, mask_cost_matrix, pair_cost, GroundTruthMask,
    MaskCostConfig,
};
pub use hungarian::{hungarian, Assignment};
pub use two_stage::{
    two_stage_match, GroundTruthHuman, MatchedPair, PartMatching, QueryBundle,
    TwoStageAssignment, DEFAULT_HUMAN_QUERIES, DEFAULT_PART_QUERIES,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum MatchError {
    #[error("mask length mismatch: prediction has {pred} points, target has {gt}")]
    LengthMismatch { pred: usize, gt: usize },
    #[error("mask values must lie in [0, 1]")]
    InvalidMask,
    #[error("cost matrix has a non-finite entry")]
    NonFinite,
    #[error("cost matrix rows differ in length")]
    Ragged,
    #[error("invalid cost config: {0}")]
    InvalidConfig(String),
    #[error("invalid query bundle: {0}")]
    InvalidBundle(String),
}

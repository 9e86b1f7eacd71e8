//! Density-based clustering of semantic masks into instances.

mod hdbscan;
mod kdtree;
mod prediction;

pub use hdbscan::{
    condense_tree, core_distances, hdbscan, hdbscan_with, labels_from_mst, mutual_reachability,
    mutual_reachability_mst, select_clusters, ClusterResult, CondensedCluster, CondensedTree,
    HdbscanParams, MstEdge, MstStrategy, DENSE_MST_LIMIT, NOISE,
};
pub use prediction::InstancePrediction;

use nalgebra::Point3;
use thiserror::Error;

use crate::geometry::{LabeledPointCloud, SEMANTIC_HUMAN};

#[derive(Debug, Error)]
pub enum ClusterError {
    #[error("invalid clustering parameters: {0}")]
    InvalidParams(String),
    #[error("non-finite point coordinate")]
    NonFinite,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Clusters the points selected by `mask`; each cluster becomes a binary
/// instance over the full point set with confidence 1.
pub fn cluster_mask(
    positions: &[Point3<f64>],
    mask: &[bool],
    params: &HdbscanParams,
    class: u8,
) -> Result<Vec<InstancePrediction>, ClusterError> {
    if mask.len() != positions.len() {
        return Err(ClusterError::LengthMismatch {
            expected: positions.len(),
            got: mask.len(),
        });
    }
    let selected: Vec<usize> = (0..mask.len()).filter(|&i| mask[i]).collect();
    if selected.is_empty() {
        return Ok(Vec::new());
    }
    let pts: Vec<Point3<f64>> = selected.iter().map(|&i| positions[i]).collect();
    let result = hdbscan(&pts, params)?;
    let mut masks = vec![vec![false; positions.len()]; result.cluster_count];
    for (&i, &l) in selected.iter().zip(&result.labels) {
        if l >= 0 {
            masks[l as usize][i] = true;
        }
    }
    Ok(masks
        .iter()
        .map(|m| InstancePrediction::binary(m, class, 1.0))
        .collect())
}

/// Human instances from a per-point human mask.
pub fn semantic_to_instances(
    cloud: &LabeledPointCloud,
    mask: &[bool],
    params: &HdbscanParams,
) -> Result<Vec<InstancePrediction>, ClusterError> {
    cluster_mask(&cloud.positions, mask, params, SEMANTIC_HUMAN)
}

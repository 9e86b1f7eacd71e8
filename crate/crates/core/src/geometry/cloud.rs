use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use super::GeometryError;

pub const SEMANTIC_BACKGROUND: u8 = 0;
pub const SEMANTIC_HUMAN: u8 = 1;
/// Largest final body-part id.
pub const MAX_PART_ID: u8 = 15;

/// Which camera pixel a point came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub camera: u32,
    pub row: u32,
    pub col: u32,
}

/// Points with per-point semantic, instance and body-part labels.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct LabeledPointCloud {
    pub positions: Vec<Point3<f64>>,
    pub semantic: Vec<u8>,
    pub instance: Vec<u32>,
    pub part: Vec<u8>,
    pub provenance: Option<Vec<Provenance>>,
}

impl LabeledPointCloud {
    /// Unlabeled (all background) cloud.
    pub fn from_positions(positions: Vec<Point3<f64>>) -> Self {
        let n = positions.len();
        Self {
            positions,
            semantic: vec![SEMANTIC_BACKGROUND; n],
            instance: vec![0; n],
            part: vec![0; n],
            provenance: None,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn human_mask(&self) -> Vec<bool> {
        self.semantic.iter().map(|&s| s == SEMANTIC_HUMAN).collect()
    }

    /// Sorted distinct non-zero instance ids.
    pub fn instance_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.instance.iter().copied().filter(|&i| i != 0).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Checks label lengths and the label implications.
    pub fn validate(&self) -> Result<(), GeometryError> {
        let n = self.positions.len();
        let lens = [
            ("semantic", self.semantic.len()),
            ("instance", self.instance.len()),
            ("part", self.part.len()),
            (
                "provenance",
                self.provenance.as_ref().map_or(n, |p| p.len()),
            ),
        ];
        for (name, len) in lens {
            if len != n {
                return Err(GeometryError::InvalidCloud(format!(
                    "{name} has {len} entries for {n} points"
                )));
            }
        }
        for i in 0..n {
            let s = self.semantic[i];
            if s > SEMANTIC_HUMAN {
                return Err(GeometryError::InvalidCloud(format!("point {i}: unknown semantic class {s}")));
            }
            if self.part[i] > MAX_PART_ID {
                return Err(GeometryError::InvalidCloud(format!("point {i}: unknown part id {}", self.part[i])));
            }
            if (self.part[i] != 0 || self.instance[i] != 0) && s != SEMANTIC_HUMAN {
                return Err(GeometryError::InvalidCloud(format!(
                    "point {i}: part/instance label on a non-human point"
                )));
            }
        }
        Ok(())
    }
}

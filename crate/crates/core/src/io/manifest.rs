use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::cloud_format::read_labeled_cloud;
use super::IoError;
use crate::geometry::CameraModel;

pub const MANIFEST_VERSION: u32 = 1;
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudRecord {
    /// Relative to the manifest directory.
    pub path: String,
    pub point_count: usize,
    pub scene_id: String,
    pub camera_id: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BodyRecord {
    pub instance_id: u32,
    pub mesh_path: String,
    pub parts_path: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SceneStatus {
    Generated,
    PlacementFailed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RejectedCloud {
    pub camera_id: u32,
    pub point_count: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneEntry {
    pub scene_id: String,
    pub status: SceneStatus,
    pub human_count: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub message: Option<String>,
    #[serde(default)]
    pub cameras: Vec<CameraModel>,
    #[serde(default)]
    pub bodies: Vec<BodyRecord>,
    #[serde(default)]
    pub rejected: Vec<RejectedCloud>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub seed: u64,
    /// Snapshots of every configuration that shaped the data.
    pub configs: serde_json::Map<String, serde_json::Value>,
    pub clouds: Vec<CloudRecord>,
    #[serde(default)]
    pub scenes: Vec<SceneEntry>,
}

impl DatasetManifest {
    pub fn new(seed: u64) -> Self {
        Self {
            format_version: MANIFEST_VERSION,
            seed,
            configs: serde_json::Map::new(),
            clouds: Vec::new(),
            scenes: Vec::new(),
        }
    }

    pub fn record_config<T: Serialize>(&mut self, name: &str, cfg: &T) -> Result<(), IoError> {
        self.configs.insert(name.to_string(), serde_json::to_value(cfg)?);
        Ok(())
    }

    /// Checks unique paths and, when `root` is given, that every file exists
    /// and holds the recorded number of points.
    pub fn validate(&self, root: Option<&Path>) -> Result<(), IoError> {
        if self.format_version != MANIFEST_VERSION {
            return Err(IoError::Manifest(format!(
                "unsupported manifest version {}",
                self.format_version
            )));
        }
        let mut seen = HashSet::new();
        for c in &self.clouds {
            if !seen.insert(c.path.as_str()) {
                return Err(IoError::Manifest(format!("duplicate path {}", c.path)));
            }
        }
        if let Some(root) = root {
            for c in &self.clouds {
                let path = root.join(&c.path);
                let cloud = read_labeled_cloud(&path)?;
                if cloud.len() != c.point_count {
                    return Err(IoError::Manifest(format!(
                        "{} holds {} points, manifest says {}",
                        c.path,
                        cloud.len(),
                        c.point_count
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String, IoError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, dir: &Path) -> Result<(), IoError> {
        std::fs::write(dir.join(MANIFEST_FILE), self.to_json()? + "\n")?;
        Ok(())
    }

    pub fn read(dir: &Path) -> Result<Self, IoError> {
        let text = std::fs::read_to_string(dir.join(MANIFEST_FILE))?;
        Ok(serde_json::from_str(&text)?)
    }
}

//! Synthetic scenes: rooms with placed people, rendered per camera, passed
//! through a depth-sensor noise model and backprojected into labeled clouds.

mod assets;
mod dataset;
mod noise;
mod placement;
mod scene;

pub use assets::{mannequin, procedural_room, AssetLibrary, MannequinPose};
pub use dataset::{
    generate_dataset, generate_scene, scene_id, scene_seed, GeneratedScene, SceneOutcome,
    SynthConfig,
};
pub use noise::{
    discontinuity_mask, disparity, simulate_kinect_noise, simulate_kinect_noise_labeled,
    NoiseConfig, NoiseDomain,
};
pub use placement::{
    floor_support, place_humans, sample_cameras, CameraRigConfig, ComposedScene, FloorSupport,
    Intrinsics, PlacementConfig,
};
pub use scene::{filter_sparse, generate_labeled_scene, render_scene, LabeledView, Rejection};

use thiserror::Error;

use crate::geometry::GeometryError;
use crate::io::IoError;
use crate::labeling::LabelError;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid synthesis config: {0}")]
    InvalidConfig(String),
    #[error("scene has no horizontal floor faces")]
    NoFloor,
    #[error("placement failed for human {human}: retry budget exhausted")]
    PlacementFailed { human: usize },
    #[error("camera placement failed: retry budget exhausted")]
    CameraPlacementFailed,
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Label(#[from] LabelError),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    File(#[from] std::io::Error),
}

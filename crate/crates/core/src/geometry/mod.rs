//! Meshes, cameras, images, nearest-surface queries, rasterization and the
//! pixel/point lifting primitives used by every other module.

mod bvh;
mod camera;
mod cloud;
mod image;
mod lift;
mod mesh;
mod raster;
mod transform;

use thiserror::Error;

pub use bvh::{closest_point_on_triangle, point_to_mesh_distance, DistanceAccelerator, SurfaceHit};
pub use camera::{project_points, CameraModel, PixelProjection};
pub use cloud::{LabeledPointCloud, Provenance, MAX_PART_ID, SEMANTIC_BACKGROUND, SEMANTIC_HUMAN};
pub use image::{DepthImage, IndexImage};
pub use lift::{backproject_depth, project_2d_mask_to_3d, LabelChannels};
pub use mesh::{triangle_area, Aabb, TriangleMesh, DEGENERATE_AREA};
pub use raster::{rasterize_meshes, RenderItem, RenderOutput};
pub use transform::RigidTransform;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("empty mesh")]
    EmptyMesh,
    #[error("face {face} references vertex {index} but the mesh has {count} vertices")]
    FaceIndexOutOfRange { face: usize, index: u32, count: usize },
    #[error("face_part has {got} entries for {expected} faces")]
    PartCountMismatch { expected: usize, got: usize },
    #[error("non-finite geometry: {0}")]
    NonFinite(String),
    #[error("rotation is not orthonormal with determinant +1")]
    InvalidRotation,
    #[error("invalid camera: {0}")]
    InvalidCamera(String),
    #[error("dimension mismatch: expected {expected:?}, got {got:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("camera mismatch: point {point} comes from camera {found}, expected {expected}")]
    CameraMismatch { point: usize, found: u32, expected: u32 },
    #[error("invalid cloud: {0}")]
    InvalidCloud(String),
    #[error("mesh parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("image format: {0}")]
    ImageFormat(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

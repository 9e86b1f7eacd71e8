use nalgebra::Point3;
use serde::{Deserialize, Serialize};

use super::{GeometryError, RigidTransform};

/// Pinhole camera with a world-to-camera pose.
///
/// Pixel convention: pixel `(row, col)` samples the ray through the
/// continuous image point `(col + 0.5, row + 0.5)`; the principal point
/// `(cx, cy)` is given in pixel-index units, so the optical axis passes
/// through the center of pixel `(cy, cx)`. Depth is camera-frame `z`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CameraRepr", into = "CameraRepr")]
pub struct CameraModel {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
    pose: RigidTransform,
}

#[derive(Serialize, Deserialize)]
struct CameraRepr {
    fx: f64,
    fy: f64,
    cx: f64,
    cy: f64,
    width: usize,
    height: usize,
    #[serde(default)]
    pose: RigidTransform,
}

impl TryFrom<CameraRepr> for CameraModel {
    type Error = GeometryError;

    fn try_from(r: CameraRepr) -> Result<Self, Self::Error> {
        CameraModel::new(r.fx, r.fy, r.cx, r.cy, r.width, r.height, r.pose)
    }
}

impl From<CameraModel> for CameraRepr {
    fn from(c: CameraModel) -> Self {
        CameraRepr {
            fx: c.fx,
            fy: c.fy,
            cx: c.cx,
            cy: c.cy,
            width: c.width,
            height: c.height,
            pose: c.pose,
        }
    }
}

/// Pixel hit by a projected point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PixelProjection {
    pub row: usize,
    pub col: usize,
    /// Camera-frame z.
    pub depth: f64,
}

impl CameraModel {
    pub fn new(
        fx: f64,
        fy: f64,
        cx: f64,
        cy: f64,
        width: usize,
        height: usize,
        pose: RigidTransform,
    ) -> Result<Self, GeometryError> {
        let bad = |m: &str| Err(GeometryError::InvalidCamera(m.to_string()));
        if !(fx > 0.0 && fy > 0.0 && fx.is_finite() && fy.is_finite()) {
            return bad("focal lengths must be positive");
        }
        if width == 0 || height == 0 {
            return bad("image must be non-empty");
        }
        if !(cx >= 0.0 && cx < width as f64 && cy >= 0.0 && cy < height as f64) {
            return bad("principal point outside the image");
        }
        // re-check the pose, which may come from an unchecked source
        let pose = RigidTransform::new(*pose.rotation(), *pose.translation())?;
        Ok(Self {
            fx,
            fy,
            cx,
            cy,
            width,
            height,
            pose,
        })
    }

    /// Kinect-like defaults: 640×480, fx = fy = 525, principal point at the center.
    pub fn kinect_like(pose: RigidTransform) -> Self {
        Self::new(525.0, 525.0, 320.0, 240.0, 640, 480, pose).expect("valid defaults")
    }

    pub fn fx(&self) -> f64 {
        self.fx
    }
    pub fn fy(&self) -> f64 {
        self.fy
    }
    pub fn cx(&self) -> f64 {
        self.cx
    }
    pub fn cy(&self) -> f64 {
        self.cy
    }
    pub fn width(&self) -> usize {
        self.width
    }
    pub fn height(&self) -> usize {
        self.height
    }
    pub fn pose(&self) -> &RigidTransform {
        &self.pose
    }

    pub fn with_pose(&self, pose: RigidTransform) -> Self {
        Self { pose, ..self.clone() }
    }

    /// Camera center in world coordinates.
    pub fn center(&self) -> Point3<f64> {
        self.pose.inverse().apply(&Point3::origin())
    }

    #[inline]
    pub fn to_camera(&self, p: &Point3<f64>) -> Point3<f64> {
        self.pose.apply(p)
    }

    /// Image coordinates in pixel-index units (pixel `c` is centred at `u = c`).
    #[inline]
    pub fn image_coords(&self, pc: &Point3<f64>) -> (f64, f64) {
        (self.fx * pc.x / pc.z + self.cx, self.fy * pc.y / pc.z + self.cy)
    }

    /// Pixel containing image coordinates `(u, v)`, if inside the frame.
    #[inline]
    pub fn pixel_of(&self, u: f64, v: f64) -> Option<(usize, usize)> {
        let col = (u + 0.5).floor();
        let row = (v + 0.5).floor();
        if col >= 0.0 && row >= 0.0 && col < self.width as f64 && row < self.height as f64 {
            Some((row as usize, col as usize))
        } else {
            None
        }
    }

    /// Projects a world point; `None` when behind the camera or out of frame.
    pub fn project(&self, p: &Point3<f64>) -> Option<PixelProjection> {
        let pc = self.to_camera(p);
        if !(pc.z > 0.0) {
            return None;
        }
        let (u, v) = self.image_coords(&pc);
        self.pixel_of(u, v).map(|(row, col)| PixelProjection {
            row,
            col,
            depth: pc.z,
        })
    }

    /// Camera-frame point at depth `z` on the ray of pixel `(row, col)`.
    #[inline]
    pub fn unproject_camera(&self, row: usize, col: usize, z: f64) -> Point3<f64> {
        Point3::new(
            (col as f64 - self.cx) * z / self.fx,
            (row as f64 - self.cy) * z / self.fy,
            z,
        )
    }

    /// World point at depth `z` on the ray of pixel `(row, col)`.
    pub fn unproject(&self, row: usize, col: usize, z: f64) -> Point3<f64> {
        self.pose.inverse().apply(&self.unproject_camera(row, col, z))
    }
}

/// Projects every point; out-of-frame points map to `None`.
pub fn project_points(points: &[Point3<f64>], cam: &CameraModel) -> Vec<Option<PixelProjection>> {
    points.iter().map(|p| cam.project(p)).collect()
}

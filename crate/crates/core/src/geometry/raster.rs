//! Z-buffer triangle rasterization into depth, instance and part channels.
//!
//! A pixel is covered when its center lies inside the projected triangle,
//! with the top-left rule on shared edges. Depth is the exact intersection
//! of the pixel ray with the triangle's plane (perspective-correct). Nearest
//! surface wins; equal depths keep the earlier fragment (mesh order, then
//! face order).

use nalgebra::Point3;

use super::{CameraModel, DepthImage, IndexImage, TriangleMesh};

/// Triangles are clipped against this camera-frame plane before projection.
const NEAR_CLIP: f64 = 1e-6;

/// One mesh to draw.
#[derive(Clone, Copy, Debug)]
pub struct RenderItem<'a> {
    pub mesh: &'a TriangleMesh,
    /// Written to the instance channel; 0 for background geometry.
    pub instance: u32,
    /// Maps the mesh's per-face part ids to the value written to the part
    /// channel. Without a map the raw per-face id is written.
    pub part_map: Option<&'a [u32]>,
}

impl<'a> RenderItem<'a> {
    pub fn new(mesh: &'a TriangleMesh, instance: u32) -> Self {
        Self {
            mesh,
            instance,
            part_map: None,
        }
    }

    pub fn with_part_map(mut self, map: &'a [u32]) -> Self {
        self.part_map = Some(map);
        self
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenderOutput {
    pub depth: DepthImage,
    pub instance: IndexImage,
    pub part: IndexImage,
}

pub fn rasterize_meshes(items: &[RenderItem<'_>], cam: &CameraModel) -> RenderOutput {
    let (w, h) = (cam.width(), cam.height());
    let mut depth = DepthImage::invalid(w, h);
    let mut zbuf = vec![f64::INFINITY; w * h];
    let mut instance = IndexImage::zeros(w, h);
    let mut part = IndexImage::zeros(w, h);

    for item in items {
        let mesh = item.mesh;
        let cam_verts: Vec<Point3<f64>> = mesh.vertices().iter().map(|v| cam.to_camera(v)).collect();
        let face_part = mesh.face_part();
        for (f, tri) in mesh.faces().iter().enumerate() {
            let part_value = match (face_part, item.part_map) {
                (Some(parts), Some(map)) => map.get(parts[f] as usize).copied().unwrap_or(0),
                (Some(parts), None) => parts[f] as u32,
                (None, _) => 0,
            };
            let verts = tri.map(|k| cam_verts[k as usize]);
            let normal = (verts[1] - verts[0]).cross(&(verts[2] - verts[0]));
            let plane = Plane {
                normal: [normal.x, normal.y, normal.z],
                offset: normal.dot(&verts[0].coords),
            };
            let mut poly = [Point3::origin(); 4];
            let n = clip_near(&verts, &mut poly);
            for k in 1..n.saturating_sub(1) {
                let sub = [poly[0], poly[k], poly[k + 1]];
                draw_triangle(&sub, &plane, cam, |idx, z| {
                    if z < zbuf[idx] {
                        zbuf[idx] = z;
                        depth.set_index(idx, z);
                        let (row, col) = (idx / w, idx % w);
                        instance.set(row, col, item.instance);
                        part.set(row, col, part_value);
                    }
                });
            }
        }
    }
    RenderOutput {
        depth,
        instance,
        part,
    }
}

/// Sutherland–Hodgman against `z >= NEAR_CLIP`; returns the vertex count.
fn clip_near(tri: &[Point3<f64>; 3], out: &mut [Point3<f64>; 4]) -> usize {
    if tri.iter().all(|v| v.z >= NEAR_CLIP) {
        out[..3].copy_from_slice(tri);
        return 3;
    }
    let mut n = 0;
    for i in 0..3 {
        let a = tri[i];
        let b = tri[(i + 1) % 3];
        let a_in = a.z >= NEAR_CLIP;
        let b_in = b.z >= NEAR_CLIP;
        if a_in {
            out[n] = a;
            n += 1;
        }
        if a_in != b_in {
            let t = (NEAR_CLIP - a.z) / (b.z - a.z);
            let mut p = a + (b - a) * t;
            p.z = NEAR_CLIP;
            out[n] = p;
            n += 1;
        }
    }
    n
}

#[inline]
fn edge(ax: f64, ay: f64, bx: f64, by: f64, px: f64, py: f64) -> f64 {
    (bx - ax) * (py - ay) - (by - ay) * (px - ax)
}

/// With the interior on the positive side (image y pointing down), an edge
/// is a left edge when it goes up and a top edge when it is horizontal and
/// goes right.
#[inline]
fn is_top_left(ax: f64, ay: f64, bx: f64, by: f64) -> bool {
    let dy = by - ay;
    let dx = bx - ax;
    dy < 0.0 || (dy == 0.0 && dx > 0.0)
}

/// Camera-frame plane `normal · p = offset`.
struct Plane {
    normal: [f64; 3],
    offset: f64,
}

fn draw_triangle(
    tri: &[Point3<f64>; 3],
    plane: &Plane,
    cam: &CameraModel,
    mut write: impl FnMut(usize, f64),
) {
    let mut uv = tri.map(|p| cam.image_coords(&p));
    let area = edge(uv[0].0, uv[0].1, uv[1].0, uv[1].1, uv[2].0, uv[2].1);
    if area == 0.0 || !area.is_finite() {
        return;
    }
    if area < 0.0 {
        uv.swap(1, 2);
    }
    let (w, h) = (cam.width() as f64, cam.height() as f64);
    let min_u = uv.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let max_u = uv.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let min_v = uv.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let max_v = uv.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    // pixel c is centred at u = c
    let c0 = min_u.ceil().max(0.0);
    let c1 = max_u.floor().min(w - 1.0);
    let r0 = min_v.ceil().max(0.0);
    let r1 = max_v.floor().min(h - 1.0);
    if c0 > c1 || r0 > r1 {
        return;
    }
    let edges = [(1usize, 2usize), (2, 0), (0, 1)];
    let top_left = edges.map(|(a, b)| is_top_left(uv[a].0, uv[a].1, uv[b].0, uv[b].1));
    let width = cam.width();
    let [nx, ny, nz] = plane.normal;
    for row in r0 as usize..=r1 as usize {
        let py = row as f64;
        let ray_y = (py - cam.cy()) / cam.fy();
        for col in c0 as usize..=c1 as usize {
            let px = col as f64;
            let mut inside = true;
            for (k, &(a, b)) in edges.iter().enumerate() {
                let e = edge(uv[a].0, uv[a].1, uv[b].0, uv[b].1, px, py);
                if e < 0.0 || (e == 0.0 && !top_left[k]) {
                    inside = false;
                    break;
                }
            }
            if !inside {
                continue;
            }
            // ray through the pixel center is (x, y, 1) * z
            let ray_x = (px - cam.cx()) / cam.fx();
            let z = plane.offset / (nx * ray_x + ny * ray_y + nz);
            if z.is_finite() && z > 0.0 {
                write(row * width + col, z);
            }
        }
    }
}

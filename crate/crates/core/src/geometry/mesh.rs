use std::io::{BufRead, Write};

use nalgebra::{Point3, Vector3};

use super::{GeometryError, RigidTransform};

/// Faces with area below this (m²) are dropped at construction.
pub const DEGENERATE_AREA: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Aabb {
    pub min: Point3<f64>,
    pub max: Point3<f64>,
}

impl Aabb {
    pub fn empty() -> Self {
        Self {
            min: Point3::new(f64::INFINITY, f64::INFINITY, f64::INFINITY),
            max: Point3::new(f64::NEG_INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        }
    }

    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Point3<f64>>) -> Self {
        let mut b = Self::empty();
        for p in points {
            b.grow(p);
        }
        b
    }

    pub fn is_empty(&self) -> bool {
        (0..3).any(|k| self.min[k] > self.max[k])
    }

    pub fn grow(&mut self, p: &Point3<f64>) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, other: &Aabb) -> Aabb {
        Aabb {
            min: self.min.inf(&other.min),
            max: self.max.sup(&other.max),
        }
    }

    /// Closed-interval overlap test; touching boxes intersect.
    pub fn intersects(&self, other: &Aabb) -> bool {
        (0..3).all(|k| self.min[k] <= other.max[k] && other.min[k] <= self.max[k])
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        (0..3).all(|k| self.min[k] <= other.min[k] && other.max[k] <= self.max[k])
    }

    pub fn extent(&self) -> Vector3<f64> {
        self.max - self.min
    }

    pub fn center(&self) -> Point3<f64> {
        nalgebra::center(&self.min, &self.max)
    }

    pub fn longest_axis(&self) -> usize {
        self.extent().imax()
    }

    /// Squared distance from `p` to the box (0 inside).
    #[inline]
    pub fn distance_squared(&self, p: &Point3<f64>) -> f64 {
        let mut d2 = 0.0;
        for k in 0..3 {
            let v = p[k];
            let d = if v < self.min[k] {
                self.min[k] - v
            } else if v > self.max[k] {
                v - self.max[k]
            } else {
                0.0
            };
            d2 += d * d;
        }
        d2
    }
}

/// Triangle mesh with optional per-face source-part ids.
#[derive(Clone, Debug, PartialEq)]
pub struct TriangleMesh {
    vertices: Vec<Point3<f64>>,
    faces: Vec<[u32; 3]>,
    face_part: Option<Vec<u16>>,
}

impl TriangleMesh {
    /// Validates indices and drops degenerate faces (with a warning).
    pub fn new(
        vertices: Vec<Point3<f64>>,
        faces: Vec<[u32; 3]>,
        face_part: Option<Vec<u16>>,
    ) -> Result<Self, GeometryError> {
        if let Some(parts) = &face_part {
            if parts.len() != faces.len() {
                return Err(GeometryError::PartCountMismatch {
                    expected: faces.len(),
                    got: parts.len(),
                });
            }
        }
        if let Some(v) = vertices.iter().find(|v| !v.iter().all(|c| c.is_finite())) {
            return Err(GeometryError::NonFinite(format!("vertex {v:?}")));
        }
        let count = vertices.len();
        for (face, tri) in faces.iter().enumerate() {
            if let Some(&index) = tri.iter().find(|&&i| i as usize >= count) {
                return Err(GeometryError::FaceIndexOutOfRange { face, index, count });
            }
        }

        let mut kept_faces = Vec::with_capacity(faces.len());
        let mut kept_parts = face_part.as_ref().map(|p| Vec::with_capacity(p.len()));
        let mut dropped = 0usize;
        for (i, tri) in faces.iter().enumerate() {
            let [a, b, c] = tri.map(|k| vertices[k as usize]);
            if triangle_area(&a, &b, &c) < DEGENERATE_AREA {
                dropped += 1;
                continue;
            }
            kept_faces.push(*tri);
            if let (Some(out), Some(src)) = (kept_parts.as_mut(), face_part.as_ref()) {
                out.push(src[i]);
            }
        }
        if dropped > 0 {
            log::warn!("dropped {dropped} degenerate face(s) with area < {DEGENERATE_AREA} m²");
        }
        Ok(Self {
            vertices,
            faces: kept_faces,
            face_part: kept_parts,
        })
    }

    pub fn vertices(&self) -> &[Point3<f64>] {
        &self.vertices
    }

    pub fn faces(&self) -> &[[u32; 3]] {
        &self.faces
    }

    pub fn face_part(&self) -> Option<&[u16]> {
        self.face_part.as_deref()
    }

    pub fn face_count(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    #[inline]
    pub fn triangle(&self, face: usize) -> [Point3<f64>; 3] {
        self.faces[face].map(|k| self.vertices[k as usize])
    }

    pub fn face_normal(&self, face: usize) -> Vector3<f64> {
        let [a, b, c] = self.triangle(face);
        (b - a).cross(&(c - a)).normalize()
    }

    pub fn aabb(&self) -> Aabb {
        let mut b = Aabb::empty();
        for f in &self.faces {
            for &k in f {
                b.grow(&self.vertices[k as usize]);
            }
        }
        b
    }

    pub fn transformed(&self, t: &RigidTransform) -> TriangleMesh {
        TriangleMesh {
            vertices: self.vertices.iter().map(|p| t.apply(p)).collect(),
            faces: self.faces.clone(),
            face_part: self.face_part.clone(),
        }
    }

    /// Replaces the per-face part ids.
    pub fn with_face_part(mut self, parts: Vec<u16>) -> Result<Self, GeometryError> {
        if parts.len() != self.faces.len() {
            return Err(GeometryError::PartCountMismatch {
                expected: self.faces.len(),
                got: parts.len(),
            });
        }
        self.face_part = Some(parts);
        Ok(self)
    }

    /// Concatenates meshes. Part ids are kept only if every input has them.
    pub fn merge<'a>(meshes: impl IntoIterator<Item = &'a TriangleMesh>) -> TriangleMesh {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        let mut parts = Some(Vec::new());
        for m in meshes {
            let base = vertices.len() as u32;
            vertices.extend_from_slice(&m.vertices);
            faces.extend(m.faces.iter().map(|f| f.map(|k| k + base)));
            match (&mut parts, &m.face_part) {
                (Some(out), Some(src)) => out.extend_from_slice(src),
                _ => parts = None,
            }
        }
        if faces.is_empty() {
            parts = None;
        }
        TriangleMesh {
            vertices,
            faces,
            face_part: parts,
        }
    }

    /// Axis-aligned box with 12 triangles.
    pub fn cuboid(min: Point3<f64>, max: Point3<f64>) -> TriangleMesh {
        let v = |x: usize, y: usize, z: usize| {
            Point3::new(
                if x == 0 { min.x } else { max.x },
                if y == 0 { min.y } else { max.y },
                if z == 0 { min.z } else { max.z },
            )
        };
        let vertices = vec![
            v(0, 0, 0),
            v(1, 0, 0),
            v(1, 1, 0),
            v(0, 1, 0),
            v(0, 0, 1),
            v(1, 0, 1),
            v(1, 1, 1),
            v(0, 1, 1),
        ];
        // outward winding
        let faces = vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [1, 2, 6],
            [1, 6, 5],
            [2, 3, 7],
            [2, 7, 6],
            [3, 0, 4],
            [3, 4, 7],
        ];
        TriangleMesh {
            vertices,
            faces,
            face_part: None,
        }
    }

    /// Axis-aligned rectangle `[x0,x1] × [y0,y1]` at height `z`, two triangles.
    pub fn horizontal_quad(x0: f64, x1: f64, y0: f64, y1: f64, z: f64) -> TriangleMesh {
        TriangleMesh {
            vertices: vec![
                Point3::new(x0, y0, z),
                Point3::new(x1, y0, z),
                Point3::new(x1, y1, z),
                Point3::new(x0, y1, z),
            ],
            faces: vec![[0, 1, 2], [0, 2, 3]],
            face_part: None,
        }
    }

    /// Icosphere from a subdivided icosahedron.
    pub fn icosphere(center: Point3<f64>, radius: f64, subdivisions: u32) -> TriangleMesh {
        let t = (1.0 + 5f64.sqrt()) / 2.0;
        let mut verts: Vec<Vector3<f64>> = [
            (-1.0, t, 0.0),
            (1.0, t, 0.0),
            (-1.0, -t, 0.0),
            (1.0, -t, 0.0),
            (0.0, -1.0, t),
            (0.0, 1.0, t),
            (0.0, -1.0, -t),
            (0.0, 1.0, -t),
            (t, 0.0, -1.0),
            (t, 0.0, 1.0),
            (-t, 0.0, -1.0),
            (-t, 0.0, 1.0),
        ]
        .iter()
        .map(|&(x, y, z)| Vector3::new(x, y, z).normalize())
        .collect();
        let mut faces: Vec<[u32; 3]> = vec![
            [0, 11, 5],
            [0, 5, 1],
            [0, 1, 7],
            [0, 7, 10],
            [0, 10, 11],
            [1, 5, 9],
            [5, 11, 4],
            [11, 10, 2],
            [10, 7, 6],
            [7, 1, 8],
            [3, 9, 4],
            [3, 4, 2],
            [3, 2, 6],
            [3, 6, 8],
            [3, 8, 9],
            [4, 9, 5],
            [2, 4, 11],
            [6, 2, 10],
            [8, 6, 7],
            [9, 8, 1],
        ];
        for _ in 0..subdivisions {
            let mut midpoints = std::collections::HashMap::new();
            let mut mid = |a: u32, b: u32, verts: &mut Vec<Vector3<f64>>| -> u32 {
                let key = (a.min(b), a.max(b));
                *midpoints.entry(key).or_insert_with(|| {
                    verts.push(((verts[a as usize] + verts[b as usize]) * 0.5).normalize());
                    (verts.len() - 1) as u32
                })
            };
            let mut next = Vec::with_capacity(faces.len() * 4);
            for [a, b, c] in faces {
                let ab = mid(a, b, &mut verts);
                let bc = mid(b, c, &mut verts);
                let ca = mid(c, a, &mut verts);
                next.extend_from_slice(&[[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]]);
            }
            faces = next;
        }
        TriangleMesh {
            vertices: verts
                .into_iter()
                .map(|v| center + v * radius)
                .collect(),
            faces,
            face_part: None,
        }
    }

    /// Reads the vertex (`v`) and face (`f`) records of a Wavefront OBJ stream.
    ///
    /// Polygons are fan-triangulated; texture/normal indices are ignored.
    pub fn read_obj(reader: impl BufRead) -> Result<(Vec<Point3<f64>>, Vec<[u32; 3]>), GeometryError> {
        let mut vertices = Vec::new();
        let mut faces = Vec::new();
        for (n, line) in reader.lines().enumerate() {
            let line = line?;
            let parse_err = |message: String| GeometryError::Parse {
                line: n + 1,
                message,
            };
            let mut it = line.split_whitespace();
            match it.next() {
                Some("v") => {
                    let mut c = [0.0; 3];
                    for slot in c.iter_mut() {
                        *slot = it
                            .next()
                            .ok_or_else(|| parse_err("vertex needs 3 coordinates".into()))?
                            .parse()
                            .map_err(|e| parse_err(format!("{e}")))?;
                    }
                    vertices.push(Point3::from(c));
                }
                Some("f") => {
                    let idx: Vec<u32> = it
                        .map(|tok| {
                            let first = tok.split('/').next().unwrap_or_default();
                            let raw: i64 = first.parse().map_err(|e| parse_err(format!("{e}")))?;
                            let resolved = if raw < 0 {
                                vertices.len() as i64 + raw
                            } else {
                                raw - 1
                            };
                            u32::try_from(resolved)
                                .map_err(|_| parse_err(format!("bad vertex index {raw}")))
                        })
                        .collect::<Result<_, _>>()?;
                    if idx.len() < 3 {
                        return Err(parse_err("face needs at least 3 vertices".into()));
                    }
                    for k in 1..idx.len() - 1 {
                        faces.push([idx[0], idx[k], idx[k + 1]]);
                    }
                }
                _ => {}
            }
        }
        Ok((vertices, faces))
    }

    pub fn write_obj(&self, mut w: impl Write) -> std::io::Result<()> {
        for v in &self.vertices {
            writeln!(w, "v {} {} {}", v.x, v.y, v.z)?;
        }
        for f in &self.faces {
            writeln!(w, "f {} {} {}", f[0] + 1, f[1] + 1, f[2] + 1)?;
        }
        Ok(())
    }
}

pub fn triangle_area(a: &Point3<f64>, b: &Point3<f64>, c: &Point3<f64>) -> f64 {
    0.5 * (b - a).cross(&(c - a)).norm()
}

//! Bounding-volume hierarchy over triangles for exact nearest-surface queries.

use nalgebra::Point3;

use super::{Aabb, GeometryError, TriangleMesh};

const LEAF_SIZE: usize = 4;

#[derive(Clone, Debug)]
enum NodeKind {
    Leaf { start: u32, count: u32 },
    Inner { left: u32, right: u32 },
}

#[derive(Clone, Debug)]
struct Node {
    bounds: Aabb,
    kind: NodeKind,
}

/// Result of a nearest-triangle query.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceHit {
    pub distance: f64,
    pub face: usize,
    pub closest: Point3<f64>,
}

/// Immutable BVH answering exact point-to-mesh distance queries.
///
/// Shareable across threads; ties in distance resolve to the lowest face index.
#[derive(Clone, Debug)]
pub struct DistanceAccelerator {
    triangles: Vec<[Point3<f64>; 3]>,
    order: Vec<u32>,
    nodes: Vec<Node>,
}

impl DistanceAccelerator {
    pub fn build(mesh: &TriangleMesh) -> Result<Self, GeometryError> {
        if mesh.is_empty() {
            return Err(GeometryError::EmptyMesh);
        }
        let triangles: Vec<_> = (0..mesh.face_count()).map(|f| mesh.triangle(f)).collect();
        let centroids: Vec<Point3<f64>> = triangles
            .iter()
            .map(|[a, b, c]| Point3::from((a.coords + b.coords + c.coords) / 3.0))
            .collect();
        let mut order: Vec<u32> = (0..triangles.len() as u32).collect();
        let mut nodes = Vec::with_capacity(2 * triangles.len() / LEAF_SIZE + 1);
        build_node(&triangles, &centroids, &mut order, 0, triangles.len(), &mut nodes);
        Ok(Self {
            triangles,
            order,
            nodes,
        })
    }

    pub fn face_count(&self) -> usize {
        self.triangles.len()
    }

    pub fn bounds(&self) -> &Aabb {
        &self.nodes[0].bounds
    }

    pub fn leaf_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Leaf { .. }))
            .count()
    }

    /// Exact nearest surface point to `p`.
    pub fn nearest(&self, p: &Point3<f64>) -> SurfaceHit {
        self.nearest_within(p, f64::INFINITY)
            .expect("unbounded query always hits a non-empty mesh")
    }

    /// Nearest surface point if its distance is `<= max_distance`.
    pub fn nearest_within(&self, p: &Point3<f64>, max_distance: f64) -> Option<SurfaceHit> {
        let mut best_d2 = if max_distance.is_finite() {
            max_distance * max_distance
        } else {
            f64::INFINITY
        };
        let mut best: Option<(usize, Point3<f64>)> = None;
        let mut stack: Vec<(u32, f64)> = vec![(0, self.nodes[0].bounds.distance_squared(p))];
        while let Some((idx, lower)) = stack.pop() {
            // strict: equal-distance boxes may still hold a lower face index
            if lower > best_d2 {
                continue;
            }
            match self.nodes[idx as usize].kind {
                NodeKind::Leaf { start, count } => {
                    for &face in &self.order[start as usize..(start + count) as usize] {
                        let face = face as usize;
                        let [a, b, c] = &self.triangles[face];
                        let q = closest_point_on_triangle(p, a, b, c);
                        let d2 = (q - p).norm_squared();
                        let better = match best {
                            None => d2 <= best_d2,
                            Some((bf, _)) => d2 < best_d2 || (d2 == best_d2 && face < bf),
                        };
                        if better {
                            best_d2 = d2;
                            best = Some((face, q));
                        }
                    }
                }
                NodeKind::Inner { left, right } => {
                    let dl = self.nodes[left as usize].bounds.distance_squared(p);
                    let dr = self.nodes[right as usize].bounds.distance_squared(p);
                    // pop the nearer child first
                    if dl <= dr {
                        stack.push((right, dr));
                        stack.push((left, dl));
                    } else {
                        stack.push((left, dl));
                        stack.push((right, dr));
                    }
                }
            }
        }
        best.map(|(face, closest)| SurfaceHit {
            distance: best_d2.sqrt(),
            face,
            closest,
        })
    }
}

fn build_node(
    triangles: &[[Point3<f64>; 3]],
    centroids: &[Point3<f64>],
    order: &mut [u32],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
) -> u32 {
    let mut bounds = Aabb::empty();
    let mut centroid_bounds = Aabb::empty();
    for &f in &order[start..end] {
        for v in &triangles[f as usize] {
            bounds.grow(v);
        }
        centroid_bounds.grow(&centroids[f as usize]);
    }
    let idx = nodes.len() as u32;
    let count = end - start;
    if count <= LEAF_SIZE || centroid_bounds.extent().max() <= 0.0 {
        nodes.push(Node {
            bounds,
            kind: NodeKind::Leaf {
                start: start as u32,
                count: count as u32,
            },
        });
        return idx;
    }
    let axis = centroid_bounds.longest_axis();
    let mid = start + count / 2;
    order[start..end].select_nth_unstable_by(count / 2, |&a, &b| {
        centroids[a as usize][axis]
            .total_cmp(&centroids[b as usize][axis])
            .then(a.cmp(&b))
    });
    nodes.push(Node {
        bounds,
        kind: NodeKind::Leaf { start: 0, count: 0 },
    });
    let left = build_node(triangles, centroids, order, start, mid, nodes);
    let right = build_node(triangles, centroids, order, mid, end, nodes);
    nodes[idx as usize].kind = NodeKind::Inner { left, right };
    idx
}

/// Closest point on triangle `abc` to `p` (Voronoi-region walk).
pub fn closest_point_on_triangle(
    p: &Point3<f64>,
    a: &Point3<f64>,
    b: &Point3<f64>,
    c: &Point3<f64>,
) -> Point3<f64> {
    let ab = b - a;
    let ac = c - a;
    let ap = p - a;
    let d1 = ab.dot(&ap);
    let d2 = ac.dot(&ap);
    if d1 <= 0.0 && d2 <= 0.0 {
        return *a;
    }
    let bp = p - b;
    let d3 = ab.dot(&bp);
    let d4 = ac.dot(&bp);
    if d3 >= 0.0 && d4 <= d3 {
        return *b;
    }
    let vc = d1 * d4 - d3 * d2;
    if vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0 {
        let v = d1 / (d1 - d3);
        return a + ab * v;
    }
    let cp = p - c;
    let d5 = ab.dot(&cp);
    let d6 = ac.dot(&cp);
    if d6 >= 0.0 && d5 <= d6 {
        return *c;
    }
    let vb = d5 * d2 - d1 * d6;
    if vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0 {
        let w = d2 / (d2 - d6);
        return a + ac * w;
    }
    let va = d3 * d6 - d5 * d4;
    if va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0 {
        let w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return b + (c - b) * w;
    }
    let denom = 1.0 / (va + vb + vc);
    let v = vb * denom;
    let w = vc * denom;
    a + ab * v + ac * w
}

/// Distance from `p` to the mesh surface and the face attaining it.
pub fn point_to_mesh_distance(p: &Point3<f64>, accel: &DistanceAccelerator) -> (f64, usize) {
    let hit = accel.nearest(p);
    (hit.distance, hit.face)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tri() -> TriangleMesh {
        TriangleMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2]],
            None,
        )
        .unwrap()
    }

    #[test]
    fn empty_mesh_rejected() {
        let m = TriangleMesh::new(vec![], vec![], None).unwrap();
        assert!(matches!(DistanceAccelerator::build(&m), Err(GeometryError::EmptyMesh)));
    }

    #[test]
    fn single_triangle_single_leaf() {
        let acc = DistanceAccelerator::build(&tri()).unwrap();
        assert_eq!(acc.leaf_count(), 1);
        let (d, f) = point_to_mesh_distance(&Point3::new(2.0, 0.0, 0.0), &acc);
        assert_eq!(f, 0);
        assert!((d - 1.0).abs() < 1e-15);
    }

    #[test]
    fn on_surface_and_above_interior() {
        let acc = DistanceAccelerator::build(&tri()).unwrap();
        assert!(point_to_mesh_distance(&Point3::new(0.2, 0.3, 0.0), &acc).0 < 1e-15);
        let (d, _) = point_to_mesh_distance(&Point3::new(0.2, 0.3, 0.7), &acc);
        assert!((d - 0.7).abs() < 1e-15);
    }

    #[test]
    fn edge_and_vertex_regions() {
        let acc = DistanceAccelerator::build(&tri()).unwrap();
        // beyond the hypotenuse
        let (d, _) = point_to_mesh_distance(&Point3::new(1.0, 1.0, 0.0), &acc);
        assert!((d - 0.5f64.sqrt()).abs() < 1e-15);
        // vertex region of a
        let (d, _) = point_to_mesh_distance(&Point3::new(-3.0, -4.0, 0.0), &acc);
        assert!((d - 5.0).abs() < 1e-15);
    }

    #[test]
    fn ties_resolve_to_lowest_face() {
        // two identical triangles
        let m = TriangleMesh::new(
            vec![
                Point3::new(0.0, 0.0, 0.0),
                Point3::new(1.0, 0.0, 0.0),
                Point3::new(0.0, 1.0, 0.0),
            ],
            vec![[0, 1, 2], [2, 0, 1], [1, 2, 0]],
            None,
        )
        .unwrap();
        let acc = DistanceAccelerator::build(&m).unwrap();
        assert_eq!(point_to_mesh_distance(&Point3::new(0.1, 0.1, 1.0), &acc).1, 0);
    }

    #[test]
    fn bounded_query_misses_far_points() {
        let acc = DistanceAccelerator::build(&tri()).unwrap();
        assert!(acc.nearest_within(&Point3::new(0.2, 0.2, 0.5), 0.4).is_none());
        assert!(acc.nearest_within(&Point3::new(0.2, 0.2, 0.3), 0.4).is_some());
    }
}

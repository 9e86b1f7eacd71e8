//! HDBSCAN over 3D positions.
//!
//! Core distances, the minimum spanning tree of the mutual-reachability
//! graph, single-linkage merging, the condensed tree and excess-of-mass
//! cluster selection. Edge ties are broken by `(weight, min endpoint, max
//! endpoint)` so the spanning tree is unique.

use std::cmp::Ordering;

use nalgebra::Point3;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::kdtree::{dist2, KdTree, P3};
use super::ClusterError;

/// Inputs above this size use the kd-tree Borůvka spanning tree.
pub const DENSE_MST_LIMIT: usize = 5000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct HdbscanParams {
    /// Neighbourhood size for the core distance, counting the point itself.
    pub min_samples: usize,
    pub min_cluster_size: usize,
}

impl Default for HdbscanParams {
    fn default() -> Self {
        Self {
            min_samples: 1200,
            min_cluster_size: 1500,
        }
    }
}

impl HdbscanParams {
    pub fn new(min_samples: usize, min_cluster_size: usize) -> Self {
        Self {
            min_samples,
            min_cluster_size,
        }
    }

    pub fn validate(&self) -> Result<(), ClusterError> {
        if self.min_samples < 1 {
            return Err(ClusterError::InvalidParams("min_samples must be at least 1".into()));
        }
        if self.min_cluster_size < 2 {
            return Err(ClusterError::InvalidParams(
                "min_cluster_size must be at least 2".into(),
            ));
        }
        Ok(())
    }
}

pub const NOISE: i32 = -1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusterResult {
    /// `-1` for noise, otherwise `0..cluster_count`.
    pub labels: Vec<i32>,
    pub cluster_count: usize,
    pub params: HdbscanParams,
}

impl ClusterResult {
    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.cluster_count];
        for &l in &self.labels {
            if l >= 0 {
                sizes[l as usize] += 1;
            }
        }
        sizes
    }

    pub fn noise_count(&self) -> usize {
        self.labels.iter().filter(|&&l| l == NOISE).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MstEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

impl MstEdge {
    fn new(a: usize, b: usize, weight: f64) -> Self {
        Self {
            a: a.min(b),
            b: a.max(b),
            weight,
        }
    }

    /// Total order used everywhere edges are compared.
    pub fn cmp_key(&self, other: &Self) -> Ordering {
        self.weight
            .total_cmp(&other.weight)
            .then(self.a.cmp(&other.a))
            .then(self.b.cmp(&other.b))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MstStrategy {
    Auto,
    DensePrim,
    KdBoruvka,
}

fn to_p3(points: &[Point3<f64>]) -> Result<Vec<P3>, ClusterError> {
    points
        .iter()
        .map(|p| {
            if p.coords.iter().all(|v| v.is_finite()) {
                Ok([p.x, p.y, p.z])
            } else {
                Err(ClusterError::NonFinite)
            }
        })
        .collect()
}

/// Distance of every point to its `min_samples`-th nearest neighbour
/// (the point itself is the first).
pub fn core_distances(points: &[Point3<f64>], min_samples: usize) -> Result<Vec<f64>, ClusterError> {
    let pts = to_p3(points)?;
    if min_samples == 0 || pts.len() < min_samples {
        return Err(ClusterError::InvalidParams(format!(
            "core distance needs {min_samples} samples, have {}",
            pts.len()
        )));
    }
    Ok(core_distances_p3(&KdTree::build(pts), min_samples))
}

fn core_distances_p3(tree: &KdTree, min_samples: usize) -> Vec<f64> {
    tree.points
        .par_iter()
        .map(|p| tree.knn_distances(p, min_samples)[min_samples - 1])
        .collect()
}

#[inline]
fn reach(pts: &[P3], core: &[f64], a: usize, b: usize) -> f64 {
    dist2(&pts[a], &pts[b]).sqrt().max(core[a]).max(core[b])
}

pub fn mutual_reachability(points: &[Point3<f64>], core: &[f64], a: usize, b: usize) -> f64 {
    (points[a] - points[b]).norm().max(core[a]).max(core[b])
}

/// Spanning tree of the mutual-reachability graph, sorted by the edge order.
pub fn mutual_reachability_mst(
    points: &[Point3<f64>],
    core: &[f64],
    strategy: MstStrategy,
) -> Result<Vec<MstEdge>, ClusterError> {
    if core.len() != points.len() {
        return Err(ClusterError::LengthMismatch {
            expected: points.len(),
            got: core.len(),
        });
    }
    let pts = to_p3(points)?;
    let dense = match strategy {
        MstStrategy::Auto => pts.len() <= DENSE_MST_LIMIT,
        MstStrategy::DensePrim => true,
        MstStrategy::KdBoruvka => false,
    };
    let mut edges = if dense {
        prim_dense(&pts, core)
    } else {
        boruvka_kd(&KdTree::build(pts), core)
    };
    edges.sort_by(MstEdge::cmp_key);
    Ok(edges)
}

fn prim_dense(pts: &[P3], core: &[f64]) -> Vec<MstEdge> {
    let n = pts.len();
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best: Vec<Option<MstEdge>> = vec![None; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0usize;
    in_tree[0] = true;
    for _ in 1..n {
        let mut next: Option<MstEdge> = None;
        let mut next_v = 0;
        for v in 0..n {
            if in_tree[v] {
                continue;
            }
            let cand = MstEdge::new(current, v, reach(pts, core, current, v));
            if best[v].is_none_or(|b| cand.cmp_key(&b) == Ordering::Less) {
                best[v] = Some(cand);
            }
            let b = best[v].expect("set above");
            if next.is_none_or(|x| b.cmp_key(&x) == Ordering::Less) {
                next = Some(b);
                next_v = v;
            }
        }
        let e = next.expect("a vertex remains outside the tree");
        edges.push(e);
        in_tree[next_v] = true;
        current = next_v;
    }
    edges
}

struct UnionFind {
    parent: Vec<usize>,
    size: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            size: vec![1; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) -> usize {
        let (mut ra, mut rb) = (self.find(a), self.find(b));
        if ra == rb {
            return ra;
        }
        if self.size[ra] < self.size[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        self.size[ra] += self.size[rb];
        ra
    }
}

const MIXED: usize = usize::MAX;

fn boruvka_kd(tree: &KdTree, core: &[f64]) -> Vec<MstEdge> {
    let n = tree.len();
    let mut uf = UnionFind::new(n);
    let mut edges: Vec<MstEdge> = Vec::with_capacity(n.saturating_sub(1));
    // per node: minimum core distance and minimum point index
    let mut node_min_core = vec![f64::INFINITY; tree.nodes.len()];
    let mut node_min_idx = vec![usize::MAX; tree.nodes.len()];
    for (id, node) in tree.nodes.iter().enumerate() {
        for &i in &tree.order[node.start..node.end] {
            node_min_core[id] = node_min_core[id].min(core[i]);
            node_min_idx[id] = node_min_idx[id].min(i);
        }
    }
    while edges.len() + 1 < n {
        let comp: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
        // component shared by a whole node, or MIXED; children come after parents
        let mut node_comp = vec![MIXED; tree.nodes.len()];
        for id in (0..tree.nodes.len()).rev() {
            let node = &tree.nodes[id];
            node_comp[id] = match node.children {
                Some((l, r)) if node_comp[l] == node_comp[r] => node_comp[l],
                Some(_) => MIXED,
                None => {
                    let first = comp[tree.order[node.start]];
                    if tree.order[node.start..node.end].iter().all(|&i| comp[i] == first) {
                        first
                    } else {
                        MIXED
                    }
                }
            };
        }
        let candidates: Vec<Option<MstEdge>> = (0..n)
            .into_par_iter()
            .map(|p| {
                nearest_foreign(tree, core, &comp, &node_comp, &node_min_core, &node_min_idx, p)
            })
            .collect();
        let mut best: Vec<Option<MstEdge>> = vec![None; n];
        for (p, cand) in candidates.into_iter().enumerate() {
            let Some(e) = cand else { continue };
            let c = comp[p];
            if best[c].is_none_or(|b| e.cmp_key(&b) == Ordering::Less) {
                best[c] = Some(e);
            }
        }
        let mut chosen: Vec<MstEdge> = best.into_iter().flatten().collect();
        chosen.sort_by(MstEdge::cmp_key);
        chosen.dedup_by(|x, y| x.a == y.a && x.b == y.b);
        for e in chosen {
            if uf.find(e.a) != uf.find(e.b) {
                uf.union(e.a, e.b);
                edges.push(e);
            }
        }
    }
    edges
}

/// Smallest edge from `p` to a point of another component.
fn nearest_foreign(
    tree: &KdTree,
    core: &[f64],
    comp: &[usize],
    node_comp: &[usize],
    node_min_core: &[f64],
    node_min_idx: &[usize],
    p: usize,
) -> Option<MstEdge> {
    let q = &tree.points[p];
    let cp = comp[p];
    let mut best: Option<MstEdge> = None;
    let mut stack = vec![0usize];
    while let Some(id) = stack.pop() {
        if node_comp[id] == cp {
            continue;
        }
        let node = &tree.nodes[id];
        if let Some(b) = best {
            let lb = node.box_dist2(q).sqrt().max(core[p]).max(node_min_core[id]);
            // the smallest key this node could still offer
            let bound = MstEdge::new(p, node_min_idx[id], lb);
            if bound.cmp_key(&b) != Ordering::Less {
                continue;
            }
        }
        match node.children {
            None => {
                for &i in &tree.order[node.start..node.end] {
                    if comp[i] == cp {
                        continue;
                    }
                    let e = MstEdge::new(p, i, reach(&tree.points, core, p, i));
                    if best.is_none_or(|b| e.cmp_key(&b) == Ordering::Less) {
                        best = Some(e);
                    }
                }
            }
            Some((l, r)) => {
                if tree.nodes[l].box_dist2(q) <= tree.nodes[r].box_dist2(q) {
                    stack.push(r);
                    stack.push(l);
                } else {
                    stack.push(l);
                    stack.push(r);
                }
            }
        }
    }
    best
}

/// A cluster of the condensed tree. Cluster 0 is the root.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondensedCluster {
    pub parent: Option<usize>,
    pub birth_lambda: f64,
    pub size: usize,
    pub stability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CondensedTree {
    pub clusters: Vec<CondensedCluster>,
    /// Per point: the cluster it falls out of and the lambda at which it does.
    pub point_exit: Vec<(usize, f64)>,
}

#[inline]
fn lambda_of(dist: f64) -> f64 {
    if dist > 0.0 {
        1.0 / dist
    } else {
        f64::INFINITY
    }
}

#[inline]
fn excess(lambda: f64, birth: f64) -> f64 {
    if lambda > birth {
        lambda - birth
    } else {
        0.0
    }
}

/// Single-linkage merge tree: node `n + k` joins `children[k]` at `height[k]`.
struct Dendrogram {
    children: Vec<(usize, usize)>,
    height: Vec<f64>,
    size: Vec<usize>,
}

fn single_linkage(n: usize, mst: &[MstEdge]) -> Dendrogram {
    let mut sorted = mst.to_vec();
    sorted.sort_by(MstEdge::cmp_key);
    let mut uf = UnionFind::new(n);
    // union-find root -> current dendrogram node
    let mut top: Vec<usize> = (0..n).collect();
    let mut d = Dendrogram {
        children: Vec::with_capacity(n.saturating_sub(1)),
        height: Vec::with_capacity(n.saturating_sub(1)),
        size: vec![1; n],
    };
    for e in sorted {
        let (ra, rb) = (uf.find(e.a), uf.find(e.b));
        let (na, nb) = (top[ra], top[rb]);
        let id = n + d.children.len();
        d.children.push((na, nb));
        d.height.push(e.weight);
        d.size.push(d.size[na] + d.size[nb]);
        let r = uf.union(ra, rb);
        top[r] = id;
    }
    d
}

impl Dendrogram {
    fn leaves(&self, n: usize, node: usize, out: &mut Vec<usize>) {
        let mut stack = vec![node];
        while let Some(x) = stack.pop() {
            if x < n {
                out.push(x);
            } else {
                let (l, r) = self.children[x - n];
                stack.push(l);
                stack.push(r);
            }
        }
    }
}

/// Condenses the single-linkage tree of a spanning tree over `n` points.
/// `mst` must connect all points.
pub fn condense_tree(n: usize, mst: &[MstEdge], min_cluster_size: usize) -> CondensedTree {
    let mut tree = CondensedTree {
        clusters: vec![CondensedCluster {
            parent: None,
            birth_lambda: 0.0,
            size: n,
            stability: 0.0,
        }],
        point_exit: vec![(0, 0.0); n],
    };
    if n < 2 {
        for e in tree.point_exit.iter_mut() {
            *e = (0, f64::INFINITY);
        }
        return tree;
    }
    let d = single_linkage(n, mst);
    let root = 2 * n - 2;
    let mut stack = vec![(root, 0usize)];
    let mut buf = Vec::new();
    let mut kids = Vec::new();
    while let Some((node, cluster)) = stack.pop() {
        if node < n {
            // a lone point carrying a cluster label cannot occur for sizes >= 2
            tree.point_exit[node] = (cluster, f64::INFINITY);
            continue;
        }
        let k = node - n;
        let lambda = lambda_of(d.height[k]);
        // Merges at the same height form one multi-way split, so the tree
        // does not depend on the order of tied edges.
        kids.clear();
        let mut open = vec![node];
        while let Some(x) = open.pop() {
            let (l, r) = d.children[x - n];
            for c in [r, l] {
                if c >= n && d.height[c - n] == d.height[k] {
                    open.push(c);
                } else {
                    kids.push(c);
                }
            }
        }
        let big = kids.iter().filter(|&&c| d.size[c] >= min_cluster_size).count();
        for &child in &kids {
            if d.size[child] < min_cluster_size {
                buf.clear();
                d.leaves(n, child, &mut buf);
                for &p in &buf {
                    tree.point_exit[p] = (cluster, lambda);
                }
            } else if big == 1 {
                stack.push((child, cluster));
            } else {
                let id = tree.clusters.len();
                tree.clusters.push(CondensedCluster {
                    parent: Some(cluster),
                    birth_lambda: lambda,
                    size: d.size[child],
                    stability: 0.0,
                });
                stack.push((child, id));
            }
        }
    }
    // stability: points leaving each cluster plus child clusters splitting off
    for &(c, lambda) in &tree.point_exit {
        let birth = tree.clusters[c].birth_lambda;
        tree.clusters[c].stability += excess(lambda, birth);
    }
    for c in 1..tree.clusters.len() {
        let cl = &tree.clusters[c];
        let parent = cl.parent.expect("non-root cluster has a parent");
        let gain = excess(cl.birth_lambda, tree.clusters[parent].birth_lambda) * cl.size as f64;
        tree.clusters[parent].stability += gain;
    }
    tree
}

/// Excess-of-mass selection; the root is never selected.
pub fn select_clusters(tree: &CondensedTree) -> Vec<bool> {
    let m = tree.clusters.len();
    let mut selected = vec![false; m];
    let mut subtree = vec![0.0; m];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); m];
    for c in 1..m {
        children[tree.clusters[c].parent.expect("parent")].push(c);
    }
    // children always have larger ids than their parent
    for c in (1..m).rev() {
        let own = tree.clusters[c].stability;
        let kids: f64 = children[c].iter().map(|&k| subtree[k]).sum();
        if children[c].is_empty() || own >= kids {
            selected[c] = true;
            subtree[c] = own;
            let mut stack = children[c].clone();
            while let Some(k) = stack.pop() {
                selected[k] = false;
                stack.extend(children[k].iter().copied());
            }
        } else {
            subtree[c] = kids;
        }
    }
    selected
}

/// Labels from a spanning tree: condensed tree, selection, and cluster ids
/// ordered by the smallest member index.
pub fn labels_from_mst(n: usize, mst: &[MstEdge], min_cluster_size: usize) -> Vec<i32> {
    let tree = condense_tree(n, mst, min_cluster_size);
    let selected = select_clusters(&tree);
    let m = tree.clusters.len();
    let mut owner: Vec<Option<usize>> = vec![None; m];
    for c in 1..m {
        let parent = tree.clusters[c].parent.expect("parent");
        owner[c] = if selected[c] { Some(c) } else { owner[parent] };
    }
    let raw: Vec<Option<usize>> = tree.point_exit.iter().map(|&(c, _)| owner[c]).collect();
    let mut remap: Vec<Option<i32>> = vec![None; m];
    let mut next = 0;
    raw.iter()
        .map(|o| match o {
            None => NOISE,
            Some(c) => *remap[*c].get_or_insert_with(|| {
                next += 1;
                next - 1
            }),
        })
        .collect()
}

pub fn hdbscan(points: &[Point3<f64>], params: &HdbscanParams) -> Result<ClusterResult, ClusterError> {
    hdbscan_with(points, params, MstStrategy::Auto)
}

pub fn hdbscan_with(
    points: &[Point3<f64>],
    params: &HdbscanParams,
    strategy: MstStrategy,
) -> Result<ClusterResult, ClusterError> {
    params.validate()?;
    let n = points.len();
    if n < params.min_samples || n < 2 {
        to_p3(points)?;
        return Ok(ClusterResult {
            labels: vec![NOISE; n],
            cluster_count: 0,
            params: *params,
        });
    }
    let core = core_distances(points, params.min_samples)?;
    let mst = mutual_reachability_mst(points, &core, strategy)?;
    let labels = labels_from_mst(n, &mst, params.min_cluster_size);
    let cluster_count = labels.iter().map(|&l| (l + 1) as usize).max().unwrap_or(0);
    log::debug!("hdbscan: {n} points, {cluster_count} clusters");
    Ok(ClusterResult {
        labels,
        cluster_count,
        params: *params,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, Normal};

    fn blobs(centers: &[[f64; 3]], per: usize, spread: f64, seed: u64) -> Vec<Point3<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, spread).unwrap();
        centers
            .iter()
            .flat_map(|c| {
                (0..per)
                    .map(|_| {
                        Point3::new(
                            c[0] + noise.sample(&mut rng),
                            c[1] + noise.sample(&mut rng),
                            c[2] + noise.sample(&mut rng),
                        )
                    })
                    .collect::<Vec<_>>()
            })
            .collect()
    }

    #[test]
    fn too_few_points_is_noise() {
        let pts = blobs(&[[0.0; 3]], 10, 0.1, 1);
        let r = hdbscan(&pts, &HdbscanParams::new(20, 5)).unwrap();
        assert_eq!(r.cluster_count, 0);
        assert!(r.labels.iter().all(|&l| l == NOISE));
        assert!(hdbscan(&[], &HdbscanParams::default()).unwrap().labels.is_empty());
    }

    #[test]
    fn separates_two_blobs() {
        let pts = blobs(&[[0.0; 3], [10.0, 0.0, 0.0]], 300, 0.1, 2);
        let r = hdbscan(&pts, &HdbscanParams::new(10, 100)).unwrap();
        assert_eq!(r.cluster_count, 2);
        assert!(r.labels[..300].iter().all(|&l| l == 0));
        assert!(r.labels[300..].iter().all(|&l| l == 1));
    }

    #[test]
    fn both_mst_strategies_agree() {
        let pts = blobs(&[[0.0; 3], [1.0, 0.5, 0.0], [3.0, 0.0, 1.0]], 150, 0.2, 5);
        let core = core_distances(&pts, 6).unwrap();
        let a = mutual_reachability_mst(&pts, &core, MstStrategy::DensePrim).unwrap();
        let b = mutual_reachability_mst(&pts, &core, MstStrategy::KdBoruvka).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn core_distance_counts_the_point_itself() {
        let pts: Vec<Point3<f64>> = (0..5).map(|i| Point3::new(i as f64, 0.0, 0.0)).collect();
        let core = core_distances(&pts, 2).unwrap();
        assert_eq!(core, vec![1.0; 5]);
        assert_eq!(core_distances(&pts, 1).unwrap(), vec![0.0; 5]);
    }

    #[test]
    fn rejects_bad_params() {
        assert!(HdbscanParams::new(0, 5).validate().is_err());
        assert!(HdbscanParams::new(1, 1).validate().is_err());
        assert!(HdbscanParams::default().validate().is_ok());
    }
}

//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use nalgebra::{Point3, Vector3};

/// Every injective map of `min(r, c)` rows onto columns (or columns onto
/// rows when there are fewer columns), as `(row, col)` lists.
pub fn injections(rows: usize, cols: usize) -> Vec<Vec<(usize, usize)>> {
    fn rec(
        i: usize,
        n: usize,
        m: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if i == n {
            out.push(cur.clone());
            return;
        }
        for j in 0..m {
            if !used[j] {
                used[j] = true;
                cur.push(j);
                rec(i + 1, n, m, used, cur, out);
                cur.pop();
                used[j] = false;
            }
        }
    }
    let (n, m, flip) = if rows <= cols { (rows, cols, false) } else { (cols, rows, true) };
    let mut raw = Vec::new();
    rec(0, n, m, &mut vec![false; m], &mut Vec::new(), &mut raw);
    raw.into_iter()
        .map(|v| {
            let mut pairs: Vec<(usize, usize)> = v
                .into_iter()
                .enumerate()
                .map(|(a, b)| if flip { (b, a) } else { (a, b) })
                .collect();
            pairs.sort_unstable();
            pairs
        })
        .collect()
}

/// Minimum total over all injective assignments and one pairing attaining it.
pub fn brute_force_assignment(costs: &[Vec<f64>]) -> (f64, Vec<(usize, usize)>) {
    let rows = costs.len();
    let cols = costs.first().map_or(0, Vec::len);
    let mut best = (f64::INFINITY, Vec::new());
    for pairs in injections(rows, cols) {
        let total: f64 = pairs.iter().map(|&(r, c)| costs[r][c]).sum();
        if total < best.0 {
            best = (total, pairs);
        }
    }
    if best.0.is_infinite() {
        best.0 = 0.0;
    }
    best
}

pub fn naive_dice(pred: &[f64], gt: &[bool]) -> f64 {
    let mut inter = 0.0;
    let mut sp = 0.0;
    let mut sg = 0.0;
    for i in 0..pred.len() {
        let g = if gt[i] { 1.0 } else { 0.0 };
        inter += pred[i] * g;
        sp += pred[i];
        sg += g;
    }
    1.0 - (2.0 * inter + 1.0) / (sp + sg + 1.0)
}

pub fn naive_bce(pred: &[f64], gt: &[bool], eps: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..pred.len() {
        let p = pred[i].max(eps).min(1.0 - eps);
        s -= if gt[i] { p.ln() } else { (1.0 - p).ln() };
    }
    s / pred.len() as f64
}

/// Greedy confidence-ordered matching followed by an explicit precision /
/// recall table over every prefix, interpolated with the running maximum
/// from the right. Scores are on the 0..100 scale.
pub fn pr_table_ap(confidence: &[f64], iou: &[Vec<f64>], gt_count: usize, threshold: f64) -> f64 {
    let n = confidence.len();
    if gt_count == 0 {
        return if n == 0 { 100.0 } else { 0.0 };
    }
    if n == 0 {
        return 0.0;
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| confidence[b].partial_cmp(&confidence[a]).unwrap().then(a.cmp(&b)));
    let mut taken = vec![false; gt_count];
    let mut tp_flags = Vec::with_capacity(n);
    for &p in &order {
        let mut best: Option<(usize, f64)> = None;
        for g in 0..gt_count {
            if taken[g] {
                continue;
            }
            if best.is_none_or(|(_, v)| iou[p][g] > v) {
                best = Some((g, iou[p][g]));
            }
        }
        match best {
            Some((g, v)) if v >= threshold => {
                taken[g] = true;
                tp_flags.push(true);
            }
            _ => tp_flags.push(false),
        }
    }
    let mut rows = Vec::with_capacity(n);
    let (mut tp, mut fp) = (0usize, 0usize);
    for &t in &tp_flags {
        if t {
            tp += 1;
        } else {
            fp += 1;
        }
        rows.push((tp as f64 / (tp + fp) as f64, tp as f64 / gt_count as f64));
    }
    let mut ap = 0.0;
    let mut prev_recall = 0.0;
    for i in 0..rows.len() {
        let (_, r) = rows[i];
        if r > prev_recall {
            let p_interp = rows[i..].iter().map(|x| x.0).fold(0.0, f64::max);
            ap += (r - prev_recall) * p_interp;
            prev_recall = r;
        }
    }
    100.0 * ap
}

pub fn bool_iou(a: &[bool], b: &[bool]) -> f64 {
    let inter = a.iter().zip(b).filter(|(&x, &y)| x && y).count();
    let uni = a.iter().zip(b).filter(|(&x, &y)| x || y).count();
    if uni == 0 {
        1.0
    } else {
        inter as f64 / uni as f64
    }
}

fn segment_distance(p: &Point3<f64>, a: &Point3<f64>, b: &Point3<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.norm_squared();
    let t = if len2 == 0.0 { 0.0 } else { ((p - a).dot(&ab) / len2).clamp(0.0, 1.0) };
    (p - (a + ab * t)).norm()
}

/// Distance from `p` to a triangle: the plane distance when the foot of the
/// perpendicular lies inside, otherwise the nearest edge.
pub fn triangle_distance(p: &Point3<f64>, tri: &[Point3<f64>; 3]) -> f64 {
    let [a, b, c] = tri;
    let n: Vector3<f64> = (b - a).cross(&(c - a));
    let n2 = n.norm_squared();
    if n2 > 0.0 {
        let d = (p - a).dot(&n) / n2;
        let foot = p - n * d;
        let inside = [(a, b), (b, c), (c, a)]
            .iter()
            .all(|(u, v)| (*v - *u).cross(&(foot - *u)).dot(&n) >= 0.0);
        if inside {
            return (p - foot).norm();
        }
    }
    segment_distance(p, a, b)
        .min(segment_distance(p, b, c))
        .min(segment_distance(p, c, a))
}

pub fn exhaustive_mesh_distance(p: &Point3<f64>, mesh: &hck::geometry::TriangleMesh) -> f64 {
    (0..mesh.face_count())
        .map(|f| triangle_distance(p, &mesh.triangle(f)))
        .fold(f64::INFINITY, f64::min)
}

/// Distance to the `k`-th nearest point counting the point itself, by sorting.
pub fn brute_core_distances(points: &[Point3<f64>], k: usize) -> Vec<f64> {
    points
        .iter()
        .map(|p| {
            let mut d: Vec<f64> = points.iter().map(|q| (p - q).norm()).collect();
            d.sort_by(f64::total_cmp);
            d[k - 1]
        })
        .collect()
}

/// Dense Prim over the explicit mutual-reachability matrix; returns the MST
/// weight.
pub fn brute_force_mst_weight(points: &[Point3<f64>], core: &[f64]) -> f64 {
    let n = points.len();
    let mr = |a: usize, b: usize| (points[a] - points[b]).norm().max(core[a]).max(core[b]);
    let matrix: Vec<Vec<f64>> = (0..n).map(|a| (0..n).map(|b| mr(a, b)).collect()).collect();
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    best[0] = 0.0;
    let mut total = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&a, &b| best[a].total_cmp(&best[b]))
            .unwrap();
        in_tree[u] = true;
        total += best[u];
        for v in 0..n {
            if !in_tree[v] && matrix[u][v] < best[v] {
                best[v] = matrix[u][v];
            }
        }
    }
    total
}

/// Top-down condensed-tree construction and excess-of-mass selection over a
/// given MST. All edges of the current maximum weight are cut at once.
/// Returns labels with clusters numbered by their smallest member.
pub fn divisive_hdbscan_labels(n: usize, mst: &[(usize, usize, f64)], mcs: usize) -> Vec<i32> {
    struct Node {
        children: Vec<usize>,
        members: Vec<usize>,
        stability: f64,
    }
    fn components(points: &[usize], edges: &[(usize, usize, f64)], n: usize) -> Vec<Vec<usize>> {
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
        for &(a, b, _) in edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for &s in points {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut i = 0;
            while i < comp.len() {
                for &v in &adj[comp[i]] {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
                i += 1;
            }
            out.push(comp);
        }
        out
    }
    fn grow(
        nodes: &mut Vec<Node>,
        id: usize,
        points: Vec<usize>,
        edges: Vec<(usize, usize, f64)>,
        birth: f64,
        mcs: usize,
        n: usize,
    ) {
        let mut points = points;
        let mut edges = edges;
        loop {
            if edges.is_empty() {
                return;
            }
            let w = edges.iter().map(|e| e.2).fold(f64::NEG_INFINITY, f64::max);
            let lambda = 1.0 / w;
            let kept: Vec<_> = edges.iter().copied().filter(|e| e.2 < w).collect();
            let comps = components(&points, &kept, n);
            let big: Vec<&Vec<usize>> = comps.iter().filter(|c| c.len() >= mcs).collect();
            let fallen: usize = comps.iter().filter(|c| c.len() < mcs).map(Vec::len).sum();
            nodes[id].stability += fallen as f64 * (lambda - birth);
            match big.len() {
                0 => return,
                1 => {
                    let c = big[0].clone();
                    let set: std::collections::HashSet<usize> = c.iter().copied().collect();
                    edges = kept.into_iter().filter(|e| set.contains(&e.0)).collect();
                    points = c;
                }
                _ => {
                    for c in big {
                        nodes[id].stability += c.len() as f64 * (lambda - birth);
                        let set: std::collections::HashSet<usize> = c.iter().copied().collect();
                        let sub: Vec<_> = kept.iter().copied().filter(|e| set.contains(&e.0)).collect();
                        let child = nodes.len();
                        nodes.push(Node {
                            children: Vec::new(),
                            members: c.clone(),
                            stability: 0.0,
                        });
                        nodes[id].children.push(child);
                        grow(nodes, child, c.clone(), sub, lambda, mcs, n);
                    }
                    return;
                }
            }
        }
    }
    let all: Vec<usize> = (0..n).collect();
    let mut nodes = vec![Node {
        children: Vec::new(),
        members: all.clone(),
        stability: 0.0,
    }];
    if n >= mcs {
        grow(&mut nodes, 0, all, mst.to_vec(), 0.0, mcs, n);
    }
    // Bottom-up excess of mass; the root is never selected.
    fn select(nodes: &[Node], id: usize) -> (f64, Vec<usize>) {
        let mut child_sum = 0.0;
        let mut chosen = Vec::new();
        for &c in &nodes[id].children {
            let (s, sel) = select(nodes, c);
            child_sum += s;
            chosen.extend(sel);
        }
        if id != 0 && (nodes[id].children.is_empty() || nodes[id].stability >= child_sum) {
            (nodes[id].stability, vec![id])
        } else {
            (child_sum, chosen)
        }
    }
    let (_, selected) = select(&nodes, 0);
    let mut clusters: Vec<Vec<usize>> = selected.iter().map(|&s| nodes[s].members.clone()).collect();
    clusters.sort_by_key(|c| *c.iter().min().unwrap());
    let mut labels = vec![-1; n];
    for (k, c) in clusters.iter().enumerate() {
        for &p in c {
            labels[p] = k as i32;
        }
    }
    labels
}

/// Renames cluster ids in order of first appearance; noise stays -1.
pub fn canonical_labels(labels: &[i32]) -> Vec<i32> {
    let mut map = std::collections::HashMap::new();
    labels
        .iter()
        .map(|&l| {
            if l < 0 {
                -1
            } else {
                let next = map.len() as i32;
                *map.entry(l).or_insert(next)
            }
        })
        .collect()
}

/// Isotropic Gaussian blobs (Box-Muller on a seeded generator).
pub fn gaussian_blobs(centers: &[[f64; 3]], per: usize, spread: f64, seed: u64) -> Vec<Point3<f64>> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut normal = move || {
        let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
        let u2: f64 = rng.gen();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut pts = Vec::with_capacity(centers.len() * per);
    for c in centers {
        for _ in 0..per {
            pts.push(Point3::new(
                c[0] + spread * normal(),
                c[1] + spread * normal(),
                c[2] + spread * normal(),
            ));
        }
    }
    pts
}

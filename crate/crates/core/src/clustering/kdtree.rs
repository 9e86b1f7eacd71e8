//! Static 3D kd-tree for k-nearest-neighbour and minimum-edge queries.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

const LEAF_SIZE: usize = 16;

pub(crate) type P3 = [f64; 3];

#[inline]
pub(crate) fn dist2(a: &P3, b: &P3) -> f64 {
    let dx = a[0] - b[0];
    let dy = a[1] - b[1];
    let dz = a[2] - b[2];
    dx * dx + dy * dy + dz * dz
}

#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub lo: P3,
    pub hi: P3,
    pub start: usize,
    pub end: usize,
    /// Child node indices, `None` for leaves.
    pub children: Option<(usize, usize)>,
}

impl Node {
    #[inline]
    pub fn box_dist2(&self, p: &P3) -> f64 {
        let mut d = 0.0;
        for k in 0..3 {
            let e = if p[k] < self.lo[k] {
                self.lo[k] - p[k]
            } else if p[k] > self.hi[k] {
                p[k] - self.hi[k]
            } else {
                0.0
            };
            d += e * e;
        }
        d
    }
}

#[derive(Clone, Debug)]
pub(crate) struct KdTree {
    pub points: Vec<P3>,
    /// Point indices, each node owns a contiguous range.
    pub order: Vec<usize>,
    pub nodes: Vec<Node>,
}

#[derive(PartialEq)]
struct HeapItem(f64, usize);

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0).then(self.1.cmp(&other.1))
    }
}

impl KdTree {
    pub fn build(points: Vec<P3>) -> Self {
        let n = points.len();
        let mut tree = Self {
            points,
            order: (0..n).collect(),
            nodes: Vec::new(),
        };
        if n > 0 {
            tree.build_node(0, n);
        }
        tree
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for &i in &self.order[start..end] {
            let p = self.points[i];
            for k in 0..3 {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        let id = self.nodes.len();
        self.nodes.push(Node {
            lo,
            hi,
            start,
            end,
            children: None,
        });
        if end - start > LEAF_SIZE {
            let axis = (0..3)
                .max_by(|&a, &b| (hi[a] - lo[a]).total_cmp(&(hi[b] - lo[b])))
                .unwrap_or(0);
            let mid = start + (end - start) / 2;
            let points = &self.points;
            self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
                points[a][axis].total_cmp(&points[b][axis]).then(a.cmp(&b))
            });
            let left = self.build_node(start, mid);
            let right = self.build_node(mid, end);
            self.nodes[id].children = Some((left, right));
        }
        id
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    /// Distances (not squared) to the `k` nearest points including the
    /// query point itself when it is part of the tree, ascending.
    pub fn knn_distances(&self, q: &P3, k: usize) -> Vec<f64> {
        if k == 0 || self.nodes.is_empty() {
            return Vec::new();
        }
        let mut heap: BinaryHeap<HeapItem> = BinaryHeap::with_capacity(k + 1);
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if heap.len() == k && node.box_dist2(q) > heap.peek().map_or(f64::INFINITY, |h| h.0) {
                continue;
            }
            match node.children {
                None => {
                    for &i in &self.order[node.start..node.end] {
                        let d = dist2(q, &self.points[i]);
                        if heap.len() < k {
                            heap.push(HeapItem(d, i));
                        } else if d < heap.peek().map_or(f64::INFINITY, |h| h.0) {
                            heap.pop();
                            heap.push(HeapItem(d, i));
                        }
                    }
                }
                Some((l, r)) => {
                    let dl = self.nodes[l].box_dist2(q);
                    let dr = self.nodes[r].box_dist2(q);
                    // visit the nearer child first
                    if dl <= dr {
                        stack.push(r);
                        stack.push(l);
                    } else {
                        stack.push(l);
                        stack.push(r);
                    }
                }
            }
        }
        let mut d: Vec<f64> = heap.into_iter().map(|h| h.0.sqrt()).collect();
        d.sort_by(f64::total_cmp);
        d
    }
}

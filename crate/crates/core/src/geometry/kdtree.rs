//! Static k-d tree over a flat coordinate buffer.
//!
//! Median splits, leaves of at most [`LEAF_SIZE`] points scanned by brute
//! force. Queries are deterministic: range results come back in ascending
//! index order and nearest-neighbor ties resolve to the lowest index.

use super::squared_euclidean;

pub const LEAF_SIZE: usize = 32;

#[derive(Clone, Debug)]
enum Node {
    Leaf { start: usize, end: usize },
    Split { axis: usize, value: f64, left: usize, right: usize },
}

#[derive(Clone, Debug)]
pub struct KdTree {
    dim: usize,
    nodes: Vec<Node>,
    order: Vec<usize>,
}

impl KdTree {
    /// Build over `coords`, a row-major buffer of `coords.len() / dim` points.
    pub fn build(coords: &[f64], dim: usize) -> Self {
        let n = coords.len().checked_div(dim).unwrap_or(0);
        let mut tree = KdTree { dim, nodes: Vec::new(), order: (0..n).collect() };
        if n > 0 {
            let mut order = std::mem::take(&mut tree.order);
            tree.build_node(coords, &mut order, 0, n, 0);
            tree.order = order;
        } else {
            tree.nodes.push(Node::Leaf { start: 0, end: 0 });
        }
        tree
    }

    fn build_node(&mut self, coords: &[f64], order: &mut [usize], start: usize, end: usize, depth: usize) -> usize {
        let id = self.nodes.len();
        if end - start <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { start, end });
            return id;
        }
        let dim = self.dim;
        // split on the axis of largest spread
        let slice = &mut order[start..end];
        let mut axis = depth % dim;
        let mut best_spread = -1.0;
        for a in 0..dim {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for &i in slice.iter() {
                let v = coords[i * dim + a];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            if hi - lo > best_spread {
                best_spread = hi - lo;
                axis = a;
            }
        }
        let mid = slice.len() / 2;
        slice.select_nth_unstable_by(mid, |&a, &b| {
            coords[a * dim + axis].total_cmp(&coords[b * dim + axis]).then(a.cmp(&b))
        });
        let value = coords[slice[mid] * dim + axis];
        self.nodes.push(Node::Leaf { start: 0, end: 0 });
        let left = self.build_node(coords, order, start, start + mid, depth + 1);
        let right = self.build_node(coords, order, start + mid, end, depth + 1);
        self.nodes[id] = Node::Split { axis, value, left, right };
        id
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    /// Indices of all points within `radius` of `center` (boundary inclusive),
    /// appended to `out` in tree order. Callers sort if they need ascending order.
    pub fn within(&self, coords: &[f64], center: &[f64], radius: f64, out: &mut Vec<usize>) {
        if self.is_empty() {
            return;
        }
        let r2 = radius * radius;
        let mut stack = vec![0usize];
        while let Some(id) = stack.pop() {
            match self.nodes[id] {
                Node::Leaf { start, end } => {
                    for &i in &self.order[start..end] {
                        if squared_euclidean(&coords[i * self.dim..(i + 1) * self.dim], center) <= r2 {
                            out.push(i);
                        }
                    }
                }
                Node::Split { axis, value, left, right } => {
                    let diff = center[axis] - value;
                    // left holds coords <= value, right holds coords >= value
                    if diff <= radius {
                        stack.push(left);
                    }
                    if -diff <= radius {
                        stack.push(right);
                    }
                }
            }
        }
    }

    /// Nearest point to `query`, skipping `exclude`. Returns `(index, squared distance)`.
    pub fn nearest(&self, coords: &[f64], query: &[f64], exclude: Option<usize>) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        self.nearest_rec(coords, 0, query, exclude, &mut best);
        best
    }

    fn nearest_rec(
        &self,
        coords: &[f64],
        id: usize,
        query: &[f64],
        exclude: Option<usize>,
        best: &mut Option<(usize, f64)>,
    ) {
        match self.nodes[id] {
            Node::Leaf { start, end } => {
                for &i in &self.order[start..end] {
                    if Some(i) == exclude {
                        continue;
                    }
                    let d2 = squared_euclidean(&coords[i * self.dim..(i + 1) * self.dim], query);
                    let better = match *best {
                        None => true,
                        Some((bi, bd)) => d2 < bd || (d2 == bd && i < bi),
                    };
                    if better {
                        *best = Some((i, d2));
                    }
                }
            }
            Node::Split { axis, value, left, right } => {
                let diff = query[axis] - value;
                let (near, far) = if diff <= 0.0 { (left, right) } else { (right, left) };
                self.nearest_rec(coords, near, query, exclude, best);
                let must_visit = match *best {
                    None => true,
                    // equality keeps lowest-index tie-breaking exact
                    Some((_, bd)) => diff * diff <= bd,
                };
                if must_visit {
                    self.nearest_rec(coords, far, query, exclude, best);
                }
            }
        }
    }
}

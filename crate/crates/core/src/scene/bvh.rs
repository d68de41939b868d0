use crate::geometry::{Aabb, Vec3, EPS_GEOM};

const LEAF_SIZE: usize = 2;

#[derive(Debug, Clone)]
enum Node {
    Leaf { bounds: Aabb, first: u32, count: u32 },
    Inner { bounds: Aabb, left: u32, right: u32 },
}

impl Node {
    fn bounds(&self) -> &Aabb {
        match self {
            Node::Leaf { bounds, .. } | Node::Inner { bounds, .. } => bounds,
        }
    }
}

/// Bounding volume hierarchy over the scene's boxes (median split on the
/// widest centroid axis).
#[derive(Debug, Clone, Default)]
pub struct Bvh {
    nodes: Vec<Node>,
    order: Vec<u32>,
}

impl Bvh {
    pub fn build(boxes: &[Aabb]) -> Bvh {
        let mut bvh = Bvh { nodes: Vec::new(), order: (0..boxes.len() as u32).collect() };
        if !boxes.is_empty() {
            bvh.split(boxes, 0, boxes.len());
        }
        bvh
    }

    fn split(&mut self, boxes: &[Aabb], lo: usize, hi: usize) -> u32 {
        let bounds = self.order[lo..hi].iter().fold(Aabb::empty(), |acc, &i| acc.union(&boxes[i as usize]));
        let idx = self.nodes.len() as u32;
        if hi - lo <= LEAF_SIZE {
            self.nodes.push(Node::Leaf { bounds, first: lo as u32, count: (hi - lo) as u32 });
            return idx;
        }
        let centroids = self.order[lo..hi].iter().fold(Aabb::empty(), |acc, &i| {
            let c = boxes[i as usize].center();
            acc.union(&Aabb::new(c, c))
        });
        let ext = centroids.extent();
        let axis = if ext.x >= ext.y && ext.x >= ext.z {
            0
        } else if ext.y >= ext.z {
            1
        } else {
            2
        };
        self.order[lo..hi].sort_by(|&a, &b| {
            let ca = boxes[a as usize].center().get(axis);
            let cb = boxes[b as usize].center().get(axis);
            ca.total_cmp(&cb).then(a.cmp(&b))
        });
        let mid = (lo + hi) / 2;
        // placeholder, patched once children exist
        self.nodes.push(Node::Leaf { bounds, first: 0, count: 0 });
        let left = self.split(boxes, lo, mid);
        let right = self.split(boxes, mid, hi);
        self.nodes[idx as usize] = Node::Inner { bounds, left, right };
        idx
    }

    /// Nearest box entered at `EPS_GEOM ≤ t < t_max`. Returns `(box index, t, entry axis)`.
    /// Ties resolve to the lowest box index.
    pub fn nearest<'a, F>(&self, origin: Vec3, dir: Vec3, t_max: f64, boxes: F) -> Option<(usize, f64, usize)>
    where
        F: Fn(usize) -> &'a Aabb,
    {
        if self.nodes.is_empty() {
            return None;
        }
        let mut best: Option<(usize, f64, usize)> = None;
        let mut limit = t_max;
        let mut stack = vec![0u32];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n as usize];
            match node.bounds().slab(origin, dir) {
                Some(s) if s.t_exit >= EPS_GEOM && s.t_enter <= limit => {}
                _ => continue,
            }
            match *node {
                Node::Leaf { first, count, .. } => {
                    for &bi in &self.order[first as usize..(first + count) as usize] {
                        let bi = bi as usize;
                        if let Some((t, axis)) = super::entry_distance(boxes(bi), origin, dir) {
                            let better = match best {
                                None => t <= limit,
                                Some((b, bt, _)) => t < bt || (t == bt && bi < b),
                            };
                            if better {
                                best = Some((bi, t, axis));
                                limit = t;
                            }
                        }
                    }
                }
                Node::Inner { left, right, .. } => {
                    stack.push(right);
                    stack.push(left);
                }
            }
        }
        best
    }
}

//! Rapidly-exploring random tree over the abstraction space.
//!
//! A deliberately plain RRT: nodes in a growable vector, parent links by
//! index, nearest neighbor by linear scan (the tree stays in the low
//! thousands of nodes, so anything cleverer would be waste). Extensions step
//! at most `rrt_dist` from the nearest existing node toward a candidate and
//! are clamped into the bounding box, which can only shorten the step.

/// One tree node: a point in abstraction space plus its parent index
/// (`None` for the root).
#[derive(Debug, Clone)]
pub struct RrtNode {
    pub point: Vec<f64>,
    pub parent: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct RrtTree {
    nodes: Vec<RrtNode>,
    rrt_dist: f64,
    bounds: Vec<(f64, f64)>,
}

/// Euclidean distance between two points of equal dimension.
fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Step from `from` toward `toward` by at most `rrt_dist`, clamped into
/// `bounds`. Returns `None` when the two points coincide (no direction to
/// step in) — the caller should resample its candidate.
pub fn steer(
    from: &[f64],
    toward: &[f64],
    rrt_dist: f64,
    bounds: &[(f64, f64)],
) -> Option<Vec<f64>> {
    let d = dist(from, toward);
    if d <= 1e-12 {
        return None;
    }
    let scale = rrt_dist.min(d) / d;
    Some(
        from.iter()
            .zip(toward)
            .zip(bounds)
            .map(|((&f, &t), &(lo, hi))| (f + (t - f) * scale).clamp(lo, hi))
            .collect(),
    )
}

impl RrtTree {
    /// Start a tree at `root`, which must lie within `bounds`.
    pub fn new(root: Vec<f64>, rrt_dist: f64, bounds: Vec<(f64, f64)>) -> Self {
        assert_eq!(root.len(), bounds.len(), "root/bounds dimension mismatch");
        assert!(
            root.iter().zip(&bounds).all(|(v, (lo, hi))| v >= lo && v <= hi),
            "root outside bounds"
        );
        Self { nodes: vec![RrtNode { point: root, parent: None }], rrt_dist, bounds }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false // always holds the root
    }

    pub fn nodes(&self) -> &[RrtNode] {
        &self.nodes
    }

    pub fn rrt_dist(&self) -> f64 {
        self.rrt_dist
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// Index of the node nearest to `candidate`; ties go to the earliest
    /// inserted node (strict improvement required to displace the incumbent).
    pub fn nearest(&self, candidate: &[f64]) -> usize {
        let mut best = 0;
        let mut best_d = dist(&self.nodes[0].point, candidate);
        for (i, n) in self.nodes.iter().enumerate().skip(1) {
            let d = dist(&n.point, candidate);
            if d < best_d {
                best = i;
                best_d = d;
            }
        }
        best
    }

    /// Grow toward `candidate`: find the nearest node, steer from it, append
    /// the result. Returns the new node's index, or `None` when the
    /// candidate coincides with its nearest node (resample and try again).
    pub fn extend(&mut self, candidate: &[f64]) -> Option<usize> {
        let parent = self.nearest(candidate);
        let point = steer(&self.nodes[parent].point, candidate, self.rrt_dist, &self.bounds)?;
        self.nodes.push(RrtNode { point, parent: Some(parent) });
        Some(self.nodes.len() - 1)
    }
}

use alloc::vec::Vec;

use super::SparseGraph;
use crate::error::{Error, Result};

/// Degree homogeneity and connectivity summary of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphAudit {
    /// `(1/(n p_n)) Σ_j ξ_ij` per vertex.
    pub normalized_degrees: Vec<f64>,
    pub delta: f64,
    /// Fraction of vertices with `|normalized degree − 1| ≥ δ`.
    pub bad_fraction: f64,
    /// Largest component size over `n`, components taken on the undirected skeleton.
    pub giant_fraction: f64,
    pub giant_size: usize,
    pub component_count: usize,
}

struct DisjointSets {
    parent: Vec<u32>,
    size: Vec<u32>,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets {
            parent: (0..n as u32).collect(),
            size: alloc::vec![1; n],
        }
    }

    fn find(&mut self, mut x: u32) -> u32 {
        while self.parent[x as usize] != x {
            let up = self.parent[self.parent[x as usize] as usize];
            self.parent[x as usize] = up;
            x = up;
        }
        x
    }

    fn union(&mut self, a: u32, b: u32) {
        let (mut a, mut b) = (self.find(a), self.find(b));
        if a == b {
            return;
        }
        if self.size[a as usize] < self.size[b as usize] {
            core::mem::swap(&mut a, &mut b);
        }
        self.parent[b as usize] = a;
        self.size[a as usize] += self.size[b as usize];
    }
}

/// Component label of every vertex, labels numbered `0..count` in order of
/// first appearance.
pub fn components(g: &SparseGraph) -> (Vec<usize>, usize) {
    let n = g.n();
    let mut sets = DisjointSets::new(n);
    for (i, j, _) in g.entries() {
        sets.union(i as u32, j as u32);
    }
    let mut label_of_root = alloc::vec![usize::MAX; n];
    let mut labels = Vec::with_capacity(n);
    let mut count = 0;
    for v in 0..n as u32 {
        let r = sets.find(v) as usize;
        if label_of_root[r] == usize::MAX {
            label_of_root[r] = count;
            count += 1;
        }
        labels.push(label_of_root[r]);
    }
    (labels, count)
}

pub fn audit(g: &SparseGraph, delta: f64) -> Result<GraphAudit> {
    if !(delta > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("δ must be positive, got {delta}")));
    }
    let n = g.n();
    let scale = 1.0 / (n as f64 * g.dilution());
    let normalized_degrees: Vec<f64> = (0..n).map(|i| g.degree(i) as f64 * scale).collect();
    let bad = normalized_degrees
        .iter()
        .filter(|&&d| (d - 1.0).abs() >= delta)
        .count();

    let (labels, component_count) = components(g);
    let mut sizes = alloc::vec![0usize; component_count];
    for &l in &labels {
        sizes[l] += 1;
    }
    let giant_size = sizes.iter().copied().max().unwrap_or(0);

    Ok(GraphAudit {
        normalized_degrees,
        delta,
        bad_fraction: bad as f64 / n as f64,
        giant_fraction: giant_size as f64 / n as f64,
        giant_size,
        component_count,
    })
}

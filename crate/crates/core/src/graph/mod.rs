//! Immutable undirected graphs and the cut primitives built on them.

mod cut;
mod features;
pub mod generate;
mod io;

use std::ops::Range;

use crate::{Error, Ratio, Result};

pub use cut::{conductance, induced_subgraph, sweep_cut, volume};
pub use features::FeatureTable;
pub use io::{load_edge_list, parse_edge_list, write_edge_list, Indexing};

pub type NodeId = usize;

/// Simple undirected graph in compressed adjacency form.
///
/// Neighbor lists are sorted, symmetric, and free of self-loops and
/// duplicates. Each directed adjacency slot also records the slot of its
/// reverse arc, which the diffusion uses to keep per-arc flows antisymmetric.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<NodeId>,
    twins: Vec<usize>,
}

impl Graph {
    /// Builds a graph on `node_count` nodes. Self-loops are dropped and
    /// repeated pairs (in either orientation) collapse to one edge.
    pub fn from_edges<I>(node_count: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut pairs = Vec::new();
        for (u, v) in edges {
            if u >= node_count || v >= node_count {
                return Err(Error::input(format!(
                    "edge ({u}, {v}) references a node outside 0..{node_count}"
                )));
            }
            if u != v {
                pairs.push((u, v));
                pairs.push((v, u));
            }
        }
        pairs.sort_unstable();
        pairs.dedup();

        let mut offsets = vec![0usize; node_count + 1];
        for &(u, _) in &pairs {
            offsets[u + 1] += 1;
        }
        for i in 0..node_count {
            offsets[i + 1] += offsets[i];
        }
        let targets: Vec<NodeId> = pairs.iter().map(|&(_, v)| v).collect();

        let mut twins = vec![0usize; targets.len()];
        for u in 0..node_count {
            for slot in offsets[u]..offsets[u + 1] {
                let v = targets[slot];
                let row = &targets[offsets[v]..offsets[v + 1]];
                let pos = row.binary_search(&u).expect("adjacency is symmetric");
                twins[slot] = offsets[v] + pos;
            }
        }
        Ok(Graph {
            offsets,
            targets,
            twins,
        })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn degree(&self, v: NodeId) -> u64 {
        (self.offsets[v + 1] - self.offsets[v]) as u64
    }

    /// Sum of all degrees, `2 |E|`.
    pub fn total_volume(&self) -> u64 {
        self.targets.len() as u64
    }

    pub fn neighbors(&self, v: NodeId) -> &[NodeId] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    /// Adjacency slots owned by `v`, in ascending neighbor order.
    pub fn slots(&self, v: NodeId) -> Range<usize> {
        self.offsets[v]..self.offsets[v + 1]
    }

    pub fn target(&self, slot: usize) -> NodeId {
        self.targets[slot]
    }

    /// Slot of the reverse arc.
    pub fn twin(&self, slot: usize) -> usize {
        self.twins[slot]
    }

    /// Slot of arc `(v, u)`, if the edge exists.
    pub fn slot_of(&self, v: NodeId, u: NodeId) -> Option<usize> {
        self.neighbors(v)
            .binary_search(&u)
            .ok()
            .map(|pos| self.offsets[v] + pos)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        u < self.node_count() && v < self.node_count() && self.slot_of(u, v).is_some()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        (0..self.node_count()).flat_map(move |u| {
            self.neighbors(u)
                .iter()
                .copied()
                .filter(move |&v| u < v)
                .map(move |v| (u, v))
        })
    }

    pub fn contains_node(&self, v: NodeId) -> bool {
        v < self.node_count()
    }

    pub fn is_connected(&self) -> bool {
        let n = self.node_count();
        if n == 0 {
            return true;
        }
        let mut seen = vec![false; n];
        let mut stack = vec![0];
        seen[0] = true;
        let mut reached = 1;
        while let Some(v) = stack.pop() {
            for &u in self.neighbors(v) {
                if !seen[u] {
                    seen[u] = true;
                    reached += 1;
                    stack.push(u);
                }
            }
        }
        reached == n
    }

    /// Full structural scan; returns a description of the first broken
    /// invariant.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for v in 0..self.node_count() {
            let row = self.neighbors(v);
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return Err(format!("row {v} not strictly increasing"));
                }
            }
            for slot in self.slots(v) {
                let u = self.targets[slot];
                if u == v {
                    return Err(format!("self-loop at {v}"));
                }
                let twin = self.twins[slot];
                if self.targets[twin] != v || !self.slots(u).contains(&twin) {
                    return Err(format!("arc ({v}, {u}) has no matching reverse arc"));
                }
            }
        }
        Ok(())
    }
}

/// A set of node ids, kept sorted and duplicate-free.
#[derive(Clone, Debug, Default)]
pub struct NodeSet {
    members: Vec<NodeId>,
    cached_volume: Option<u64>,
}

impl NodeSet {
    pub fn new<I: IntoIterator<Item = NodeId>>(members: I) -> Self {
        let mut members: Vec<NodeId> = members.into_iter().collect();
        members.sort_unstable();
        members.dedup();
        NodeSet {
            members,
            cached_volume: None,
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.members.binary_search(&v).is_ok()
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.members.iter().copied()
    }

    pub fn as_slice(&self) -> &[NodeId] {
        &self.members
    }

    pub fn cached_volume(&self) -> Option<u64> {
        self.cached_volume
    }

    /// Computes (once) and caches `vol(self)` in `g`.
    pub fn cache_volume(&mut self, g: &Graph) -> Result<u64> {
        if let Some(v) = self.cached_volume {
            return Ok(v);
        }
        let v = volume(g, self)?;
        self.cached_volume = Some(v);
        Ok(v)
    }

    pub fn intersection_len(&self, other: &NodeSet) -> usize {
        self.iter().filter(|&v| other.contains(v)).count()
    }

    /// Nodes of `g` not in this set.
    pub fn complement(&self, g: &Graph) -> NodeSet {
        NodeSet::new((0..g.node_count()).filter(|&v| !self.contains(v)))
    }

    pub(crate) fn validate(&self, g: &Graph) -> Result<()> {
        match self.members.last() {
            Some(&v) if v >= g.node_count() => Err(Error::input(format!(
                "node {v} outside 0..{}",
                g.node_count()
            ))),
            _ => Ok(()),
        }
    }
}

impl PartialEq for NodeSet {
    fn eq(&self, other: &Self) -> bool {
        self.members == other.members
    }
}

impl Eq for NodeSet {}

impl FromIterator<NodeId> for NodeSet {
    fn from_iter<T: IntoIterator<Item = NodeId>>(iter: T) -> Self {
        NodeSet::new(iter)
    }
}

/// One side of a cut with its exact conductance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutResult {
    pub side: NodeSet,
    pub volume: u64,
    pub boundary_edges: u64,
    pub conductance: Ratio,
}

impl CutResult {
    /// Assembles a cut from precomputed counts. `total_volume` is the volume
    /// of the whole graph.
    pub(crate) fn from_counts(
        side: NodeSet,
        volume: u64,
        boundary_edges: u64,
        total_volume: u64,
    ) -> Result<Self> {
        let denom = volume.min(total_volume - volume);
        if denom == 0 {
            return Err(Error::domain("conductance of a cut with an empty side"));
        }
        let mut side = side;
        side.cached_volume = Some(volume);
        Ok(CutResult {
            side,
            volume,
            boundary_edges,
            conductance: Ratio::new(boundary_edges, denom)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builds_sorted_symmetric_adjacency() {
        let g = Graph::from_edges(4, [(2, 0), (0, 1), (1, 0), (3, 3), (1, 2)]).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert_eq!(g.neighbors(0), &[1, 2]);
        assert_eq!(g.neighbors(3), &[] as &[usize]);
        assert_eq!(g.total_volume(), 6);
        g.check_invariants().unwrap();
        for v in 0..4 {
            for s in g.slots(v) {
                assert_eq!(g.twin(g.twin(s)), s);
            }
        }
    }

    #[test]
    fn rejects_out_of_range_edges() {
        assert!(matches!(
            Graph::from_edges(2, [(0, 2)]),
            Err(Error::Input(_))
        ));
    }

    #[test]
    fn node_set_normalizes() {
        let s = NodeSet::new([3, 1, 3, 2]);
        assert_eq!(s.as_slice(), &[1, 2, 3]);
        assert!(s.contains(2) && !s.contains(0));
    }

    #[test]
    fn connectivity() {
        assert!(Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap().is_connected());
        assert!(!Graph::from_edges(3, [(0, 1)]).unwrap().is_connected());
    }
}

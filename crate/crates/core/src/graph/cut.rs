use std::collections::HashSet;

use super::{CutResult, Graph, NodeId, NodeSet};
use crate::{Error, Ratio, Result};

pub fn volume(g: &Graph, s: &NodeSet) -> Result<u64> {
    s.validate(g)?;
    Ok(s.iter().map(|v| g.degree(v)).sum())
}

/// `|E(S, V \ S)| / min(vol(S), vol(V \ S))`, counted exactly.
pub fn conductance(g: &Graph, s: &NodeSet) -> Result<CutResult> {
    s.validate(g)?;
    if s.is_empty() || s.len() == g.node_count() {
        return Err(Error::domain("conductance of an empty or full node set"));
    }
    let vol = volume(g, s)?;
    let total = g.total_volume();
    let mut inside = vec![false; g.node_count()];
    for v in s.iter() {
        inside[v] = true;
    }
    // Scan whichever side has the smaller volume.
    let boundary: u64 = if 2 * vol <= total {
        s.iter()
            .map(|v| g.neighbors(v).iter().filter(|&&u| !inside[u]).count() as u64)
            .sum()
    } else {
        (0..g.node_count())
            .filter(|&v| !inside[v])
            .map(|v| g.neighbors(v).iter().filter(|&&u| inside[u]).count() as u64)
            .sum()
    };
    CutResult::from_counts(s.clone(), vol, boundary, total)
}

/// Subgraph on `s`, with new ids `0..s.len()` in the order of `s`; the
/// returned vector maps new ids back to ids in `g`.
pub fn induced_subgraph(g: &Graph, s: &NodeSet) -> Result<(Graph, Vec<NodeId>)> {
    s.validate(g)?;
    if s.is_empty() {
        return Err(Error::input("induced subgraph of an empty set"));
    }
    let map: Vec<NodeId> = s.as_slice().to_vec();
    let mut edges = Vec::new();
    for (i, &v) in map.iter().enumerate() {
        for &u in g.neighbors(v) {
            if v < u {
                if let Ok(j) = map.binary_search(&u) {
                    edges.push((i, j));
                }
            }
        }
    }
    Ok((Graph::from_edges(map.len(), edges)?, map))
}

/// Minimum-conductance prefix of `order`.
///
/// Prefix conductances are maintained incrementally, so the cost is the total
/// degree of the listed nodes. Ties go to the shorter prefix. A prefix that
/// covers every node, or whose smaller side has zero volume, is skipped.
pub fn sweep_cut(g: &Graph, order: &[NodeId]) -> Result<CutResult> {
    if order.is_empty() {
        return Err(Error::input("sweep over an empty ordering"));
    }
    let total = g.total_volume();
    let mut in_set: HashSet<NodeId> = HashSet::with_capacity(order.len());
    let mut vol = 0u64;
    let mut boundary = 0i64;
    // (conductance, prefix length, volume, boundary)
    let mut best: Option<(Ratio, usize, u64, u64)> = None;
    for (i, &v) in order.iter().enumerate() {
        if !g.contains_node(v) {
            return Err(Error::input(format!("node {v} outside the graph")));
        }
        if !in_set.insert(v) {
            return Err(Error::input(format!("node {v} repeated in sweep order")));
        }
        let internal = g.neighbors(v).iter().filter(|u| in_set.contains(u)).count() as i64;
        let d = g.degree(v);
        boundary += d as i64 - 2 * internal;
        vol += d;
        if i + 1 == g.node_count() {
            break;
        }
        let denom = vol.min(total - vol);
        if denom == 0 {
            continue;
        }
        let phi = Ratio::new(boundary as u64, denom)?;
        if best.is_none_or(|(b, ..)| phi < b) {
            best = Some((phi, i + 1, vol, boundary as u64));
        }
    }
    let (_, len, vol, boundary) =
        best.ok_or_else(|| Error::domain("no sweep prefix has a defined conductance"))?;
    CutResult::from_counts(NodeSet::new(order[..len].iter().copied()), vol, boundary, total)
}

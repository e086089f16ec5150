use crate::graph::{induced_subgraph, Graph, NodeSet};
use crate::{Error, Ratio, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Weighting {
    #[default]
    NodeCount,
    /// Each node counts with its degree.
    Volume,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ClusterMetrics {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub weighting: Weighting,
}

/// Precision and recall of `found` against `truth`; an empty side gives 0 for
/// the value that would divide by it.
pub fn precision_recall(
    found: &NodeSet,
    truth: &NodeSet,
    g: &Graph,
    weighting: Weighting,
) -> ClusterMetrics {
    let weight = |v: usize| match weighting {
        Weighting::NodeCount => 1u64,
        Weighting::Volume => g.degree(v),
    };
    let f: u64 = found.iter().map(weight).sum();
    let t: u64 = truth.iter().map(weight).sum();
    let both: u64 = found.iter().filter(|&v| truth.contains(v)).map(weight).sum();
    let precision = if f > 0 { both as f64 / f as f64 } else { 0.0 };
    let recall = if t > 0 { both as f64 / t as f64 } else { 0.0 };
    let f1 = if precision + recall > 0.0 {
        2.0 * precision * recall / (precision + recall)
    } else {
        0.0
    };
    ClusterMetrics {
        precision,
        recall,
        f1,
        weighting,
    }
}

/// Largest set handled by [`set_conductance_bruteforce`].
pub const BRUTEFORCE_LIMIT: usize = 20;

/// Minimum conductance over all proper cuts of the subgraph induced by `b`,
/// by enumerating subsets. Cuts with a zero-volume side are skipped.
pub fn set_conductance_bruteforce(g: &Graph, b: &NodeSet) -> Result<Ratio> {
    if b.len() > BRUTEFORCE_LIMIT {
        return Err(Error::TooLarge(format!(
            "{} nodes exceeds the enumeration limit of {BRUTEFORCE_LIMIT}; use spectral_gap as a proxy",
            b.len()
        )));
    }
    if b.len() < 2 {
        return Err(Error::domain("set conductance needs at least two nodes"));
    }
    let (sub, _) = induced_subgraph(g, b)?;
    let n = sub.node_count();
    let total = sub.total_volume();
    let edges: Vec<(usize, usize)> = sub.edges().collect();
    let mut best: Option<Ratio> = None;
    // Node n-1 stays outside, so each cut is visited once.
    for mask in 1u32..(1 << (n - 1)) {
        let inside = |v: usize| mask >> v & 1 == 1;
        let vol: u64 = (0..n - 1).filter(|&v| inside(v)).map(|v| sub.degree(v)).sum();
        let denom = vol.min(total - vol);
        if denom == 0 {
            continue;
        }
        let boundary = edges.iter().filter(|&&(u, v)| inside(u) != inside(v)).count() as u64;
        let phi = Ratio::new(boundary, denom)?;
        if best.is_none_or(|b| phi < b) {
            best = Some(phi);
        }
    }
    best.ok_or_else(|| Error::domain("induced subgraph has no edges"))
}

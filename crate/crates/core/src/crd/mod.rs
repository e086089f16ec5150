//! Capacity releasing diffusion.
//!
//! [`crd_inner`] spreads a mass vector by push-relabel with capped labels and
//! capacities, [`crd_outer`] drives it with mass doubling and excess
//! removal, and [`conductance_search`] retries the last step with smaller
//! `phi` values.

mod inner;
mod mass;
mod outer;
mod queue;
mod search;

use std::cmp::Ordering;

pub use inner::{
    crd_inner, label_cap, InnerKind, InnerOutcome, InnerState, Labels, WorkCounters,
};
pub use mass::MassVector;
pub use outer::{
    crd_cluster, crd_outer, crd_outer_observed, default_iterations, CrdParams, CrdRun,
    IterationRecord, OuterObserver, OuterTrace, Termination,
};
pub use search::{conductance_search, SearchParams};

use crate::graph::{Graph, NodeId, NodeSet};

/// Nodes holding at least their degree in mass.
pub fn extract_recovered_set(g: &Graph, m: &MassVector) -> NodeSet {
    m.iter_positive()
        .filter(|&(v, mass)| mass >= g.degree(v))
        .map(|(v, _)| v)
        .collect()
}

/// Ranking fed to the sweep after an inner call: every node with a positive
/// label or positive mass, by label descending, then `m(v)/d(v)` descending,
/// then id ascending.
pub fn sweep_order_from_labels(labels: &Labels, m: &MassVector, g: &Graph) -> Vec<NodeId> {
    let mut nodes: Vec<NodeId> = labels
        .positive()
        .iter()
        .copied()
        .chain(m.iter_positive().map(|(v, _)| v))
        .collect();
    nodes.sort_unstable();
    nodes.dedup();
    nodes.sort_by(|&a, &b| {
        labels
            .get(b)
            .cmp(&labels.get(a))
            .then_with(|| density_cmp(g, m, b, a))
            .then(a.cmp(&b))
    });
    nodes
}

fn density_cmp(g: &Graph, m: &MassVector, a: NodeId, b: NodeId) -> Ordering {
    let lhs = m.get(a) as u128 * g.degree(b) as u128;
    let rhs = m.get(b) as u128 * g.degree(a) as u128;
    lhs.cmp(&rhs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovered_set() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        assert!(extract_recovered_set(&g, &MassVector::zeros(4)).is_empty());
        let full = MassVector::from_dense((0..4).map(|v| g.degree(v)).collect());
        assert_eq!(extract_recovered_set(&g, &full), NodeSet::new(0..4));
        let partial = MassVector::from_dense(vec![1, 1, 2, 0]);
        assert_eq!(extract_recovered_set(&g, &partial), NodeSet::new([0, 2]));
    }

    #[test]
    fn sweep_order_rules() {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3)]).unwrap();
        let labels = Labels::from_dense(vec![0; 4]);
        let m = MassVector::from_dense(vec![0, 2, 0, 0]);
        assert_eq!(sweep_order_from_labels(&labels, &m, &g), vec![1]);

        // Equal labels and equal density: lower id first.
        let m = MassVector::from_dense(vec![1, 2, 2, 1]);
        assert_eq!(sweep_order_from_labels(&labels, &m, &g), vec![0, 1, 2, 3]);

        let labels = Labels::from_dense(vec![0, 0, 3, 1]);
        let m = MassVector::from_dense(vec![1, 1, 4, 1]);
        assert_eq!(sweep_order_from_labels(&labels, &m, &g), vec![2, 3, 0, 1]);
    }

    #[test]
    fn bridged_triangles_order_puts_cut_side_first() {
        let g = Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)])
            .unwrap();
        let out = crd_inner(
            &g,
            MassVector::from_dense(vec![4, 4, 6, 0, 0, 0]),
            crate::Ratio::new(1, 3).unwrap(),
        )
        .unwrap();
        let order = sweep_order_from_labels(&out.labels, &out.mass, &g);
        let mut head = order[..3].to_vec();
        head.sort_unstable();
        assert_eq!(head, vec![0, 1, 2]);
        assert!(order[..3].iter().all(|&v| out.labels.get(v) == out.height));
    }
}

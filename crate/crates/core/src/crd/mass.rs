use crate::graph::{Graph, NodeId};
use crate::{Error, Result};

/// Integer mass per node.
///
/// Storage is dense, but the nodes that have ever held mass are also listed so
/// that whole-vector updates (doubling, truncation) cost time proportional to
/// the support rather than to the graph.
#[derive(Clone, Debug)]
pub struct MassVector {
    mass: Vec<u64>,
    support: Vec<NodeId>,
    listed: Vec<bool>,
    total: u64,
}

impl MassVector {
    pub fn zeros(node_count: usize) -> Self {
        MassVector {
            mass: vec![0; node_count],
            support: Vec::new(),
            listed: vec![false; node_count],
            total: 0,
        }
    }

    pub fn from_dense(mass: Vec<u64>) -> Self {
        let mut out = MassVector::zeros(mass.len());
        for (v, m) in mass.into_iter().enumerate() {
            out.set(v, m);
        }
        out
    }

    pub fn node_count(&self) -> usize {
        self.mass.len()
    }

    pub fn get(&self, v: NodeId) -> u64 {
        self.mass[v]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn set(&mut self, v: NodeId, m: u64) {
        self.total = self.total - self.mass[v] + m;
        self.mass[v] = m;
        if m > 0 {
            self.list(v);
        }
    }

    /// Nodes with positive mass, ascending.
    pub fn support(&self) -> Vec<NodeId> {
        let mut out: Vec<NodeId> = self
            .support
            .iter()
            .copied()
            .filter(|&v| self.mass[v] > 0)
            .collect();
        out.sort_unstable();
        out
    }

    /// `(node, mass)` for every node with positive mass, in no fixed order.
    pub fn iter_positive(&self) -> impl Iterator<Item = (NodeId, u64)> + '_ {
        self.support
            .iter()
            .map(|&v| (v, self.mass[v]))
            .filter(|&(_, m)| m > 0)
    }

    pub fn to_dense(&self) -> Vec<u64> {
        self.mass.clone()
    }

    /// Sum of mass on the given nodes.
    pub fn mass_on<I: IntoIterator<Item = NodeId>>(&self, nodes: I) -> u64 {
        nodes.into_iter().map(|v| self.mass[v]).sum()
    }

    pub(crate) fn add(&mut self, v: NodeId, amount: u64) {
        self.mass[v] += amount;
        self.total += amount;
        self.list(v);
    }

    pub(crate) fn sub(&mut self, v: NodeId, amount: u64) {
        self.mass[v] -= amount;
        self.total -= amount;
    }

    fn list(&mut self, v: NodeId) {
        if !self.listed[v] {
            self.listed[v] = true;
            self.support.push(v);
        }
    }

    pub fn double(&mut self) -> Result<()> {
        let total = self
            .total
            .checked_mul(2)
            .ok_or_else(|| Error::Overflow("doubling total mass".into()))?;
        for &v in &self.support {
            self.mass[v] *= 2;
        }
        self.total = total;
        Ok(())
    }

    /// Sets `m(v) = min(m(v), d(v))` everywhere; returns the mass removed.
    pub fn truncate_to_degree(&mut self, g: &Graph) -> u64 {
        let mut removed = 0;
        for &v in &self.support {
            let d = g.degree(v);
            if self.mass[v] > d {
                removed += self.mass[v] - d;
                self.mass[v] = d;
            }
        }
        self.total -= removed;
        let mass = &self.mass;
        let listed = &mut self.listed;
        self.support.retain(|&v| {
            let keep = mass[v] > 0;
            if !keep {
                listed[v] = false;
            }
            keep
        });
        removed
    }

    /// Checks `m(v) <= 2 d(v)` for every node and `|m| <= vol(G)`.
    pub fn check_admissible(&self, g: &Graph) -> Result<()> {
        if self.mass.len() != g.node_count() {
            return Err(Error::contract(format!(
                "mass vector covers {} nodes, graph has {}",
                self.mass.len(),
                g.node_count()
            )));
        }
        if self.total > g.total_volume() {
            return Err(Error::contract(format!(
                "total mass {} exceeds graph volume {}",
                self.total,
                g.total_volume()
            )));
        }
        if let Some((v, m)) = self.iter_positive().find(|&(v, m)| m > 2 * g.degree(v)) {
            return Err(Error::contract(format!(
                "node {v} holds {m} > 2 d(v) = {}",
                2 * g.degree(v)
            )));
        }
        Ok(())
    }
}

impl PartialEq for MassVector {
    fn eq(&self, other: &Self) -> bool {
        self.mass == other.mass
    }
}

impl Eq for MassVector {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn totals_track_updates() {
        let mut m = MassVector::zeros(4);
        m.set(1, 5);
        m.add(2, 3);
        m.sub(1, 2);
        assert_eq!(m.total(), 6);
        assert_eq!(m.support(), vec![1, 2]);
        m.double().unwrap();
        assert_eq!(m.to_dense(), vec![0, 6, 6, 0]);
        assert_eq!(m.total(), 12);
    }

    #[test]
    fn truncation_removes_excess() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let mut m = MassVector::from_dense(vec![2, 3, 0]);
        assert_eq!(m.truncate_to_degree(&g), 2);
        assert_eq!(m.to_dense(), vec![1, 2, 0]);
        assert_eq!(m.total(), 3);
    }

    #[test]
    fn admissibility() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        assert!(MassVector::from_dense(vec![2, 0]).check_admissible(&g).is_ok());
        assert!(MassVector::from_dense(vec![3, 0]).check_admissible(&g).is_err());
        assert!(MassVector::from_dense(vec![2, 1]).check_admissible(&g).is_err());
    }
}

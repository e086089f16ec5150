use std::collections::VecDeque;

use log::warn;
use rand::seq::SliceRandom;
use rand::Rng;

use super::metrics::{set_conductance_bruteforce, BRUTEFORCE_LIMIT};
use super::spectral::spectral_gap;
use crate::graph::{conductance, induced_subgraph, FeatureTable, Graph, NodeSet};
use crate::rng::stream;
use crate::{Error, Ratio, Result};

#[derive(Clone, Debug)]
pub struct GroundTruthCluster {
    pub feature: String,
    pub value: i64,
    pub members: NodeSet,
    pub volume: u64,
    pub conductance: Ratio,
    /// Spectral gap of the induced subgraph.
    pub spectral_gap: f64,
    /// `spectral_gap / conductance`; infinite for a zero-conductance cluster.
    pub gap: f64,
}

/// Clusters are kept when `volume > min_volume`, `conductance <
/// max_conductance` and `gap > min_gap`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FilterThresholds {
    pub min_volume: u64,
    pub max_conductance: f64,
    pub min_gap: f64,
}

impl Default for FilterThresholds {
    fn default() -> Self {
        FilterThresholds {
            min_volume: 1000,
            max_conductance: 0.5,
            min_gap: 0.5,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Rejection {
    pub feature: String,
    pub value: i64,
    pub reason: String,
}

#[derive(Clone, Debug, Default)]
pub struct FilterReport {
    pub kept: Vec<GroundTruthCluster>,
    pub rejected: Vec<Rejection>,
    /// Groups skipped because their induced subgraph is disconnected.
    pub warnings: Vec<Rejection>,
}

/// Forms one candidate cluster per (feature, value) group and keeps those
/// passing the thresholds. Cheap tests (volume, conductance) run before the
/// eigensolver.
pub fn filter_ground_truth(
    g: &Graph,
    table: &FeatureTable,
    thresholds: &FilterThresholds,
) -> Result<FilterReport> {
    table.validate(g)?;
    let mut report = FilterReport::default();
    for (index, feature) in table.names().iter().enumerate() {
        for (value, nodes) in table.groups(index) {
            let members = NodeSet::new(nodes);
            let reject = |reason: String| Rejection {
                feature: feature.clone(),
                value,
                reason,
            };
            let cut = match conductance(g, &members) {
                Ok(c) => c,
                Err(Error::Domain(msg)) => {
                    report.rejected.push(reject(format!("conductance undefined: {msg}")));
                    continue;
                }
                Err(e) => return Err(e),
            };
            if cut.volume <= thresholds.min_volume {
                report.rejected.push(reject(format!("volume {}", cut.volume)));
                continue;
            }
            if cut.conductance.to_f64() >= thresholds.max_conductance {
                report.rejected.push(reject(format!("conductance {}", cut.conductance.to_f64())));
                continue;
            }
            let (sub, _) = induced_subgraph(g, &members)?;
            let lambda = match spectral_gap(&sub) {
                Ok(l) => l,
                Err(Error::Domain(msg)) => {
                    warn!("skipping {feature}={value}: {msg}");
                    report.warnings.push(reject(msg));
                    continue;
                }
                Err(e) => return Err(e),
            };
            let phi = cut.conductance.to_f64();
            let gap = if phi == 0.0 { f64::INFINITY } else { lambda / phi };
            if gap <= thresholds.min_gap {
                report.rejected.push(reject(format!("gap {gap}")));
                continue;
            }
            report.kept.push(GroundTruthCluster {
                feature: feature.clone(),
                value,
                volume: cut.volume,
                conductance: cut.conductance,
                members,
                spectral_gap: lambda,
                gap,
            });
        }
    }
    Ok(report)
}

/// Advisory estimate of the two cluster-quality ratios.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SigmaEstimate {
    /// `phi_S(B) / phi(B)`; `phi_S` is exact for small `B` and the Cheeger
    /// lower bound `lambda / 2` otherwise.
    pub sigma1: f64,
    /// Smallest sampled value of
    /// `|E(T, B \ T)| / (|E(T, V \ B)| log2 vol(B) log2(1 / phi_S(B)))`, over
    /// breadth-first balls `T` inside `B` with at most half of `B`'s internal
    /// volume. `None` when no sample has an edge leaving `B`.
    pub sigma2_sampled: Option<f64>,
}

impl SigmaEstimate {
    pub fn sigma(&self) -> f64 {
        self.sigma2_sampled.map_or(self.sigma1, |s| s.min(self.sigma1))
    }
}

/// The sampled ratio only bounds the true minimum from above.
pub fn sampled_sigma_estimate(g: &Graph, b: &NodeSet, samples: usize, rng_seed: u64) -> Result<SigmaEstimate> {
    let outer = conductance(g, b)?;
    let (sub, map) = induced_subgraph(g, b)?;
    let phi_s = if b.len() <= BRUTEFORCE_LIMIT {
        set_conductance_bruteforce(g, b)?.to_f64()
    } else {
        spectral_gap(&sub)? / 2.0
    };
    let phi_b = outer.conductance.to_f64();
    let sigma1 = if phi_b == 0.0 { f64::INFINITY } else { phi_s / phi_b };

    let half = sub.total_volume() / 2;
    let scale = (outer.volume as f64).log2() * (1.0 / phi_s).log2();
    let mut rng = stream(rng_seed);
    let mut best: Option<f64> = None;
    let nodes: Vec<usize> = (0..sub.node_count()).collect();
    for _ in 0..samples {
        let start = *nodes.choose(&mut rng).expect("B is non-empty");
        let target = rng.gen_range(1..=half.max(1));
        let mut inside = vec![false; sub.node_count()];
        let mut queue = VecDeque::from([start]);
        inside[start] = true;
        let mut vol = sub.degree(start);
        let mut members = vec![start];
        while let Some(v) = queue.pop_front() {
            for &u in sub.neighbors(v) {
                if !inside[u] && vol + sub.degree(u) <= target {
                    inside[u] = true;
                    vol += sub.degree(u);
                    members.push(u);
                    queue.push_back(u);
                }
            }
        }
        if vol > half {
            continue;
        }
        let internal: u64 = members
            .iter()
            .map(|&v| sub.neighbors(v).iter().filter(|&&u| !inside[u]).count() as u64)
            .sum();
        let leaving: u64 = members
            .iter()
            .map(|&v| g.degree(map[v]) - sub.degree(v))
            .sum();
        if leaving == 0 || scale <= 0.0 {
            continue;
        }
        let ratio = internal as f64 / (leaving as f64 * scale);
        if best.is_none_or(|b| ratio < b) {
            best = Some(ratio);
        }
    }
    Ok(SigmaEstimate {
        sigma1,
        sigma2_sampled: best,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Indexing};

    fn table_for(g: &Graph, labels: &[(usize, i64)]) -> FeatureTable {
        let mut tsv = String::from("node_id\tgroup\n");
        for v in 0..g.node_count() {
            let value = labels.iter().find(|&&(u, _)| u == v).map_or(0, |&(_, x)| x);
            tsv.push_str(&format!("{v}\t{value}\n"));
        }
        FeatureTable::load_tsv(tsv.as_bytes(), Indexing::ZeroBased).unwrap()
    }

    #[test]
    fn planted_clique_is_kept() {
        let (g, b) = generate::planted_clique(10, 10, 10).unwrap();
        let labels: Vec<(usize, i64)> = (0..10).map(|v| (v, 1)).chain((10..20).map(|v| (v, 2))).collect();
        let table = table_for(&g, &labels);
        let th = FilterThresholds { min_volume: 10, ..FilterThresholds::default() };
        let report = filter_ground_truth(&g, &table, &th).unwrap();
        assert_eq!(report.kept.len(), 1);
        let k = &report.kept[0];
        assert_eq!(k.members, b);
        assert_eq!(k.conductance, Ratio::new(1, 91).unwrap());
        assert!((k.spectral_gap - 10.0 / 9.0).abs() < 1e-6);
        assert!((k.gap - 91.0 * 10.0 / 9.0).abs() < 1e-3);
        // The first lattice row passes on conductance (11/29) but its gap is
        // (1 - cos(pi/9)) / (11/29) < 0.5.
        assert_eq!(report.rejected.len(), 1);
    }

    #[test]
    fn whole_graph_group_is_rejected() {
        let g = generate::grid(4, 4, 0.0, 0).unwrap();
        let labels: Vec<(usize, i64)> = (0..16).map(|v| (v, 3)).collect();
        let report =
            filter_ground_truth(&g, &table_for(&g, &labels), &FilterThresholds::default()).unwrap();
        assert!(report.kept.is_empty());
        assert_eq!(report.rejected.len(), 1);
    }

    #[test]
    fn disconnected_group_is_skipped_with_warning() {
        let g = Graph::from_edges(8, (0..8).map(|i| (i, (i + 1) % 8))).unwrap();
        let labels = [(0, 5), (4, 5)];
        let th = FilterThresholds { min_volume: 0, max_conductance: 1.1, min_gap: 0.0 };
        let report = filter_ground_truth(&g, &table_for(&g, &labels), &th).unwrap();
        assert!(report.kept.is_empty());
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn sigma_estimate_on_planted_clique() {
        let (g, b) = generate::planted_clique(10, 10, 10).unwrap();
        let est = sampled_sigma_estimate(&g, &b, 50, 1).unwrap();
        // phi_S(K10) = 25/45 for a 5/5 split; phi(B) = 1/91.
        assert!((est.sigma1 - 91.0 * 25.0 / 45.0).abs() < 1e-9);
        assert!(est.sigma() <= est.sigma1);
    }
}

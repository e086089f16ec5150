//! The noisy-grid and labelled-cluster protocols, ACLopt, quartile
//! summaries, and CSV output.
//!
//! Cells run in parallel on the current rayon pool (see [`with_jobs`]);
//! records are sorted before they are returned, so output does not depend on
//! the number of threads.

mod grid;
mod output;
mod stats;

use std::fmt;
use std::time::Instant;

use log::warn;
use rand::seq::SliceRandom;
use rayon::prelude::*;

pub use grid::{level_means, noise_range, run_grid_experiment, GridConfig, LevelMean, StartSampling};
pub use output::{write_level_means, write_records, write_summary, RECORD_HEADER, SUMMARY_HEADER};
pub use stats::{quartiles, summarize, SummaryRow};

use crate::acl::{acl_grid_candidates, AclRun};
use crate::crd::{crd_outer, CrdParams};
use crate::eval::{precision_recall, GroundTruthCluster, Weighting};
use crate::graph::{Graph, NodeId, NodeSet};
use crate::rng::{derive_seed, stream};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    Crd,
    Acl,
    AclOpt,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Crd => "CRD",
            Algorithm::Acl => "ACL",
            Algorithm::AclOpt => "ACLopt",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentRecord {
    pub graph: String,
    pub cluster: String,
    pub algorithm: Algorithm,
    pub seed_node: NodeId,
    pub trial: u64,
    pub conductance: f64,
    /// Absent when the run has no ground truth (the grid protocol).
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub touched_volume: u64,
    /// Wall-clock time, or 0 when timing is off.
    pub micros: u64,
    /// Noise probability for grid records.
    pub noise: Option<f64>,
    /// The reported node set; not written to CSV.
    pub members: NodeSet,
}

impl ExperimentRecord {
    fn sort_key(&self) -> (&str, &str, Algorithm, u64, NodeId) {
        (&self.graph, &self.cluster, self.algorithm, self.trial, self.seed_node)
    }
}

pub(crate) fn sort_records(records: &mut [ExperimentRecord]) {
    records.sort_by(|a, b| a.sort_key().cmp(&b.sort_key()));
}

/// Runs `f` on a dedicated pool with `jobs` threads (0 means rayon's default).
pub fn with_jobs<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::input(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

pub(crate) fn elapsed_micros(start: Instant, timing: bool) -> u64 {
    if timing {
        start.elapsed().as_micros() as u64
    } else {
        0
    }
}

/// ACL over the `alpha` grid, keeping the cut with the best F1 against
/// `truth` (node-count weighting); ties go to the smaller `alpha`.
pub fn acl_opt(g: &Graph, seed: NodeId, truth: &NodeSet, lambda: f64, eps: f64) -> Result<AclRun> {
    if truth.is_empty() {
        return Err(Error::input("ACLopt needs a non-empty ground truth"));
    }
    let runs = acl_grid_candidates(g, seed, lambda, eps)?;
    Ok(select_best_f1(g, truth, runs))
}

fn select_best_f1(g: &Graph, truth: &NodeSet, runs: Vec<AclRun>) -> AclRun {
    let mut best: Option<(f64, AclRun)> = None;
    for run in runs {
        let f1 = precision_recall(&run.cut.side, truth, g, Weighting::NodeCount).f1;
        if best.as_ref().is_none_or(|(b, _)| f1 > *b) {
            best = Some((f1, run));
        }
    }
    best.expect("alpha grid is non-empty").1
}

fn select_lowest_conductance(runs: &[AclRun]) -> &AclRun {
    let mut best = &runs[0];
    for run in &runs[1..] {
        if run.cut.conductance < best.cut.conductance {
            best = run;
        }
    }
    best
}

#[derive(Clone, Debug)]
pub struct ClusterConfig {
    pub graph_name: String,
    pub sample_fraction: f64,
    pub rng_seed: u64,
    pub crd: CrdParams,
    pub acl_eps: f64,
    pub timing: bool,
}

impl Default for ClusterConfig {
    fn default() -> Self {
        ClusterConfig {
            graph_name: "graph".into(),
            sample_fraction: 0.5,
            rng_seed: 0,
            crd: CrdParams::default(),
            acl_eps: 1e-7,
            timing: false,
        }
    }
}

/// Samples `ceil(fraction |B|)` start nodes per cluster and runs CRD, ACL and
/// ACLopt from each, scoring the reported sets against the cluster.
pub fn run_cluster_experiment(
    g: &Graph,
    clusters: &[GroundTruthCluster],
    config: &ClusterConfig,
) -> Result<Vec<ExperimentRecord>> {
    if clusters.is_empty() {
        return Err(Error::input("no clusters given"));
    }
    if !(config.sample_fraction > 0.0 && config.sample_fraction <= 1.0) {
        return Err(Error::input(format!(
            "sample fraction {} outside (0, 1]",
            config.sample_fraction
        )));
    }
    let mut cells = Vec::new();
    for (ci, cluster) in clusters.iter().enumerate() {
        if cluster.members.len() < 2 {
            warn!("skipping cluster {}={}: fewer than 2 nodes", cluster.feature, cluster.value);
            continue;
        }
        let count = (config.sample_fraction * cluster.members.len() as f64 - 1e-9).ceil() as usize;
        let mut rng = stream(derive_seed(config.rng_seed, &[ci as u64]));
        let mut starts: Vec<NodeId> = cluster
            .members
            .as_slice()
            .choose_multiple(&mut rng, count.max(1))
            .copied()
            .collect();
        starts.sort_unstable();
        cells.extend(starts.into_iter().map(|s| (ci, s)));
    }
    let nested: Vec<Vec<ExperimentRecord>> = cells
        .par_iter()
        .map(|&(ci, seed)| cluster_cell(g, &clusters[ci], seed, config))
        .collect::<Result<_>>()?;
    let mut records: Vec<ExperimentRecord> = nested.into_iter().flatten().collect();
    sort_records(&mut records);
    Ok(records)
}

fn cluster_cell(
    g: &Graph,
    cluster: &GroundTruthCluster,
    seed: NodeId,
    config: &ClusterConfig,
) -> Result<Vec<ExperimentRecord>> {
    let truth = &cluster.members;
    let label = format!("{}={}", cluster.feature, cluster.value);
    let record = |algorithm, side: &NodeSet, conductance: f64, touched: u64, micros| {
        let m = precision_recall(side, truth, g, Weighting::NodeCount);
        ExperimentRecord {
            graph: config.graph_name.clone(),
            cluster: label.clone(),
            algorithm,
            seed_node: seed,
            trial: 0,
            conductance,
            precision: Some(m.precision),
            recall: Some(m.recall),
            f1: Some(m.f1),
            touched_volume: touched,
            micros,
            noise: None,
            members: side.clone(),
        }
    };

    let start = Instant::now();
    let run = crd_outer(g, seed, &config.crd)?;
    let crd_micros = elapsed_micros(start, config.timing);
    let crd_cut = run
        .cluster()
        .ok_or_else(|| Error::domain(format!("CRD from {seed} produced no proper cut")))?;
    let mut out = vec![record(
        Algorithm::Crd,
        &crd_cut.side,
        crd_cut.conductance.to_f64(),
        run.counters.touched_volume,
        crd_micros,
    )];

    let start = Instant::now();
    let runs = acl_grid_candidates(g, seed, cluster.spectral_gap, config.acl_eps)?;
    let acl_micros = elapsed_micros(start, config.timing);
    let touched: u64 = runs.iter().map(|r| r.touched_volume).sum();
    let acl = select_lowest_conductance(&runs);
    out.push(record(
        Algorithm::Acl,
        &acl.cut.side,
        acl.cut.conductance.to_f64(),
        touched,
        acl_micros,
    ));
    let opt = select_best_f1(g, truth, runs);
    out.push(record(
        Algorithm::AclOpt,
        &opt.cut.side,
        opt.cut.conductance.to_f64(),
        touched,
        acl_micros,
    ));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{conductance, generate};

    fn bridged_triangles() -> Graph {
        Graph::from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5), (2, 3)]).unwrap()
    }

    fn clique_cluster(g: &Graph, b: &NodeSet) -> GroundTruthCluster {
        let cut = conductance(g, b).unwrap();
        let (sub, _) = crate::graph::induced_subgraph(g, b).unwrap();
        let lambda = crate::eval::spectral_gap(&sub).unwrap();
        GroundTruthCluster {
            feature: "planted".into(),
            value: 1,
            members: b.clone(),
            volume: cut.volume,
            conductance: cut.conductance,
            spectral_gap: lambda,
            gap: lambda / cut.conductance.to_f64(),
        }
    }

    #[test]
    fn acl_opt_on_triangles() {
        let g = bridged_triangles();
        let truth = NodeSet::new([0, 1, 2]);
        let run = acl_opt(&g, 0, &truth, 1.5, 1e-7).unwrap();
        assert_eq!(run.cut.side, truth);
        assert!(acl_opt(&g, 0, &NodeSet::empty(), 1.5, 1e-7).is_err());
    }

    #[test]
    fn acl_opt_zero_f1_takes_smallest_alpha() {
        let g = bridged_triangles();
        // Node 5 is never in any reported set from seed 0 with these alphas.
        let truth = NodeSet::new([5]);
        let all = acl_grid_candidates(&g, 0, 1.5, 1e-7).unwrap();
        assert!(all
            .iter()
            .all(|r| precision_recall(&r.cut.side, &truth, &g, Weighting::NodeCount).f1 == 0.0));
        let run = acl_opt(&g, 0, &truth, 1.5, 1e-7).unwrap();
        assert_eq!(run.alpha, all[0].alpha);
    }

    #[test]
    fn full_sampling_counts_records() {
        let g = Graph::from_edges(
            8,
            [(0, 1), (1, 2), (2, 3), (3, 0), (0, 2), (3, 4), (4, 5), (5, 6), (6, 7), (7, 4), (4, 6)],
        )
        .unwrap();
        let b = NodeSet::new(0..4);
        let cfg = ClusterConfig { sample_fraction: 1.0, ..ClusterConfig::default() };
        let records = run_cluster_experiment(&g, &[clique_cluster(&g, &b)], &cfg).unwrap();
        for alg in [Algorithm::Crd, Algorithm::Acl, Algorithm::AclOpt] {
            assert_eq!(records.iter().filter(|r| r.algorithm == alg).count(), 4);
        }
    }

    #[test]
    fn planted_clique_cluster_protocol() {
        let (g, b) = generate::planted_clique(10, 10, 10).unwrap();
        let cfg = ClusterConfig { rng_seed: 3, ..ClusterConfig::default() };
        let records = run_cluster_experiment(&g, &[clique_cluster(&g, &b)], &cfg).unwrap();
        let crd: Vec<_> = records.iter().filter(|r| r.algorithm == Algorithm::Crd).collect();
        assert_eq!(crd.len(), 5);
        let summary = summarize(&records);
        let median = |metric: &str| {
            summary
                .iter()
                .find(|s| s.group.ends_with("/CRD") && s.metric == metric)
                .unwrap()
                .median
        };
        assert!(median("precision") >= 0.9);
        assert!(median("recall") >= 0.9);
        for r in &records {
            let c = conductance(&g, &r.members).unwrap().conductance.to_f64();
            assert_eq!(c, r.conductance);
            assert!(r.f1.unwrap() <= 1.0);
        }
        // ACLopt is the F1 argmax over the same candidates ACL chooses from.
        for r in crd {
            let f1 = |a| {
                records
                    .iter()
                    .find(|x| x.algorithm == a && x.seed_node == r.seed_node)
                    .unwrap()
                    .f1
                    .unwrap()
            };
            assert!(f1(Algorithm::AclOpt) >= f1(Algorithm::Acl));
        }
    }

    #[test]
    fn parallelism_does_not_change_output() {
        let (g, b) = generate::planted_clique(8, 6, 6).unwrap();
        let cfg = ClusterConfig { sample_fraction: 1.0, ..ClusterConfig::default() };
        let clusters = [clique_cluster(&g, &b)];
        let one = with_jobs(1, || run_cluster_experiment(&g, &clusters, &cfg)).unwrap().unwrap();
        let four = with_jobs(4, || run_cluster_experiment(&g, &clusters, &cfg)).unwrap().unwrap();
        assert_eq!(one, four);
    }
}

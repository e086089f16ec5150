//! Cluster quality metrics, brute-force oracles, the normalized-Laplacian
//! spectral gap, and ground-truth cluster filtering.

mod metrics;
mod spectral;
mod truth;

pub use metrics::{precision_recall, set_conductance_bruteforce, ClusterMetrics, Weighting};
pub use spectral::{spectral_gap, spectral_gap_with, LanczosOptions};
pub use truth::{
    filter_ground_truth, sampled_sigma_estimate, FilterReport, FilterThresholds,
    GroundTruthCluster, Rejection, SigmaEstimate,
};

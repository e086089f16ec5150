//! Local graph clustering with capacity releasing diffusion (CRD).
//!
//! The crate is organised around one immutable [`Graph`] type that every
//! algorithm borrows:
//!
//! - [`graph`]: compressed adjacency storage, edge-list and feature-table
//!   ingestion, synthetic generators, and the volume / conductance / sweep
//!   primitives.
//! - [`crd`]: the push-relabel style inner diffusion step, the doubling outer
//!   loop, cut certificates, and cluster extraction.
//! - [`acl`]: the approximate personalized PageRank baseline.
//! - [`eval`]: metrics, brute-force oracles, the normalized-Laplacian spectral
//!   gap, and ground-truth cluster filtering.
//! - [`experiments`]: the synthetic-grid and labelled-cluster protocols with CSV
//!   output.

pub mod acl;
pub mod crd;
mod error;
pub mod eval;
pub mod experiments;
pub mod graph;
mod ratio;
pub mod rng;

pub use error::{Error, Result};
pub use graph::{CutResult, Graph, NodeId, NodeSet};
pub use ratio::Ratio;

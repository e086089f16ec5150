//! Approximate personalized PageRank by local pushes, with sweep-cut
//! extraction.
//!
//! The push is the lazy-walk variant: pushing `v` moves `alpha r(v)` into
//! `p(v)`, hands `(1 - alpha) r(v) / (2 d(v))` to every neighbor and keeps
//! `(1 - alpha) r(v) / 2` at `v`. Active nodes (`r(v) >= eps d(v)`) are
//! processed first in, first out.

use std::cmp::Ordering;
use std::collections::VecDeque;

use rayon::prelude::*;

use crate::graph::{sweep_cut, CutResult, Graph, NodeId};
use crate::{Error, Result};

#[derive(Clone, Debug)]
pub struct PprState {
    pub p: Vec<f64>,
    pub r: Vec<f64>,
    pub alpha: f64,
    pub eps: f64,
    pub pushes: u64,
    /// Total degree of the pushed nodes, counted once per node.
    pub touched_volume: u64,
    touched: Vec<NodeId>,
}

impl PprState {
    /// Nodes that ever received residual, in first-touch order.
    pub fn touched(&self) -> &[NodeId] {
        &self.touched
    }

    pub fn p_sum(&self) -> f64 {
        self.touched.iter().map(|&v| self.p[v]).sum()
    }

    pub fn r_sum(&self) -> f64 {
        self.touched.iter().map(|&v| self.r[v]).sum()
    }
}

fn check_args(g: &Graph, seed: NodeId, alpha: f64, eps: f64) -> Result<()> {
    if !g.contains_node(seed) {
        return Err(Error::input(format!("seed {seed} outside the graph")));
    }
    if g.degree(seed) == 0 {
        return Err(Error::input(format!("seed {seed} is isolated")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::input(format!("alpha = {alpha} outside (0, 1]")));
    }
    if !(eps > 0.0 && eps.is_finite()) {
        return Err(Error::input(format!("eps = {eps} must be positive")));
    }
    Ok(())
}

const SEEN: u8 = 1;
const QUEUED: u8 = 2;
const PUSHED: u8 = 4;

pub fn approx_ppr(g: &Graph, seed: NodeId, alpha: f64, eps: f64) -> Result<PprState> {
    check_args(g, seed, alpha, eps)?;
    let n = g.node_count();
    let mut p = vec![0.0; n];
    let mut r = vec![0.0; n];
    // Push threshold eps d(v), filled in on first touch.
    let mut threshold = vec![0.0; n];
    let mut flags = vec![0u8; n];
    let mut touched = vec![seed];
    let mut queue = VecDeque::new();
    r[seed] = 1.0;
    threshold[seed] = eps * g.degree(seed) as f64;
    flags[seed] = SEEN;
    let mut pushes = 0;
    let mut touched_volume = 0;
    if r[seed] >= threshold[seed] {
        queue.push_back(seed);
        flags[seed] |= QUEUED;
    }
    while let Some(v) = queue.pop_front() {
        flags[v] &= !QUEUED;
        let rv = r[v];
        p[v] += alpha * rv;
        let keep = (1.0 - alpha) * rv / 2.0;
        r[v] = keep;
        let neighbors = g.neighbors(v);
        let share = keep / neighbors.len() as f64;
        pushes += 1;
        if flags[v] & PUSHED == 0 {
            flags[v] |= PUSHED;
            touched_volume += neighbors.len() as u64;
        }
        for &u in neighbors {
            r[u] += share;
            let f = flags[u];
            if f & SEEN == 0 {
                flags[u] = f | SEEN;
                threshold[u] = eps * g.degree(u) as f64;
                touched.push(u);
            }
            if f & QUEUED == 0 && r[u] >= threshold[u] {
                flags[u] |= QUEUED;
                queue.push_back(u);
            }
        }
        if flags[v] & QUEUED == 0 && r[v] >= threshold[v] {
            flags[v] |= QUEUED;
            queue.push_back(v);
        }
    }
    Ok(PprState {
        p,
        r,
        alpha,
        eps,
        pushes,
        touched_volume,
        touched,
    })
}

/// Nodes with `p(v) > 0` by `p(v)/d(v)` descending, ties by id.
pub fn ppr_order(g: &Graph, state: &PprState) -> Vec<NodeId> {
    let mut nodes: Vec<NodeId> = state
        .touched
        .iter()
        .copied()
        .filter(|&v| state.p[v] > 0.0)
        .collect();
    nodes.sort_by(|&a, &b| {
        let da = state.p[a] / g.degree(a) as f64;
        let db = state.p[b] / g.degree(b) as f64;
        db.partial_cmp(&da).unwrap_or(Ordering::Equal).then(a.cmp(&b))
    });
    nodes
}

/// Sweep cut over the approximate PageRank ranking.
pub fn acl_cluster(g: &Graph, seed: NodeId, alpha: f64, eps: f64) -> Result<CutResult> {
    Ok(acl_run(g, seed, alpha, eps)?.cut)
}

/// One ACL run with its cut and work.
#[derive(Clone, Debug)]
pub struct AclRun {
    pub alpha: f64,
    pub cut: CutResult,
    pub touched_volume: u64,
    pub pushes: u64,
}

pub fn acl_run(g: &Graph, seed: NodeId, alpha: f64, eps: f64) -> Result<AclRun> {
    let state = approx_ppr(g, seed, alpha, eps)?;
    let order = ppr_order(g, &state);
    if order.is_empty() {
        return Err(Error::domain(format!(
            "no pushes from seed {seed} at eps = {eps}; the ranking is empty"
        )));
    }
    Ok(AclRun {
        alpha,
        cut: sweep_cut(g, &order)?,
        touched_volume: state.touched_volume,
        pushes: state.pushes,
    })
}

/// Four evenly spaced values `lambda/2 + i * 3 lambda / 8` over
/// `[lambda/2, 2 lambda)`, clamped to at most 1.
pub fn alpha_grid(lambda: f64) -> Result<[f64; 4]> {
    if !(lambda > 0.0 && lambda <= 2.0) {
        return Err(Error::input(format!("lambda = {lambda} outside (0, 2]")));
    }
    let step = (2.0 * lambda - lambda / 2.0) / 4.0;
    Ok(std::array::from_fn(|i| (lambda / 2.0 + i as f64 * step).min(1.0)))
}

/// ACL at every distinct grid value, in increasing `alpha`.
pub fn acl_grid_candidates(g: &Graph, seed: NodeId, lambda: f64, eps: f64) -> Result<Vec<AclRun>> {
    let mut alphas = alpha_grid(lambda)?.to_vec();
    alphas.dedup();
    alphas.into_par_iter().map(|a| acl_run(g, seed, a, eps)).collect()
}

/// The lowest-conductance cut over the grid; ties go to the smaller `alpha`.
pub fn acl_grid_runs(g: &Graph, seed: NodeId, lambda: f64, eps: f64) -> Result<AclRun> {
    let runs = acl_grid_candidates(g, seed, lambda, eps)?;
    let mut best: Option<AclRun> = None;
    for run in runs {
        if best.as_ref().is_none_or(|b| run.cut.conductance < b.cut.conductance) {
            best = Some(run);
        }
    }
    Ok(best.expect("grid is non-empty"))
}

//! Synthetic graph families used by the tests and experiments.
//!
//! All randomized generators draw from [`crate::rng::stream`], so a seed fully
//! determines the output.

use std::collections::HashSet;

use rand::Rng;

use super::{Graph, NodeId, NodeSet};
use crate::rng::stream;
use crate::{Error, Result};

/// `width x height` 4-neighbor lattice plus noise edges.
///
/// Node `(row, col)` has id `row * width + col`. After the lattice is built,
/// `floor(noise_prob * width * height)` trials each connect one uniformly
/// random pair of distinct, currently non-adjacent nodes. The trial count is
/// rounded with a `1e-9` guard so that e.g. `0.35 * 3600` yields 1260.
pub fn grid(width: usize, height: usize, noise_prob: f64, rng_seed: u64) -> Result<Graph> {
    if width < 2 || height < 2 {
        return Err(Error::input("grid width and height must be at least 2"));
    }
    if !(0.0..=1.0).contains(&noise_prob) {
        return Err(Error::input(format!("noise probability {noise_prob} outside [0, 1]")));
    }
    let n = width * height;
    let mut edges = Vec::with_capacity(2 * n);
    for r in 0..height {
        for c in 0..width {
            let v = r * width + c;
            if c + 1 < width {
                edges.push((v, v + 1));
            }
            if r + 1 < height {
                edges.push((v, v + width));
            }
        }
    }
    let trials = (noise_prob * n as f64 + 1e-9).floor() as usize;
    add_random_edges(n, &mut edges, trials, rng_seed);
    Graph::from_edges(n, edges)
}

fn add_random_edges(n: usize, edges: &mut Vec<(NodeId, NodeId)>, trials: usize, seed: u64) {
    if trials == 0 {
        return;
    }
    let mut present: HashSet<(NodeId, NodeId)> =
        edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect();
    let capacity = n * (n - 1) / 2;
    let mut rng = stream(seed);
    for _ in 0..trials {
        if present.len() >= capacity {
            break;
        }
        loop {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n);
            if u == v {
                continue;
            }
            let key = (u.min(v), u.max(v));
            if present.insert(key) {
                edges.push(key);
                break;
            }
        }
    }
}

/// `k` paths of `l` nodes joined at a hub, plus one edge from the hub to an
/// outside node of degree `outside_degree` whose other neighbors are fresh
/// pendant nodes.
///
/// Ids: hub `0`; path `i` occupies `1 + i*l ..= (i+1)*l` with its first node
/// adjacent to the hub; the outside node is `1 + k*l`; pendants follow.
/// Returns the cluster `B` (hub and path nodes).
pub fn path_star(k: usize, l: usize, outside_degree: usize) -> Result<(Graph, NodeSet)> {
    if k < 2 || l < 1 || outside_degree < 1 {
        return Err(Error::input("path-star needs k >= 2, l >= 1, outside_degree >= 1"));
    }
    let hub = 0;
    let outside = 1 + k * l;
    let n = outside + outside_degree;
    let mut edges = Vec::with_capacity(n);
    for i in 0..k {
        let first = 1 + i * l;
        edges.push((hub, first));
        for j in 1..l {
            edges.push((first + j - 1, first + j));
        }
    }
    edges.push((hub, outside));
    for p in outside + 1..n {
        edges.push((outside, p));
    }
    Ok((Graph::from_edges(n, edges)?, NodeSet::new(0..outside)))
}

/// A `clique`-node complete graph joined by a single edge to the corner of a
/// `width x height` lattice. Clique nodes are `0..clique`; lattice node
/// `(r, c)` is `clique + r * width + c`; the bridge is `(clique - 1, clique)`.
pub fn planted_clique(clique: usize, width: usize, height: usize) -> Result<(Graph, NodeSet)> {
    if clique < 2 {
        return Err(Error::input("clique needs at least 2 nodes"));
    }
    let lattice = grid(width, height, 0.0, 0)?;
    let mut edges = Vec::new();
    for u in 0..clique {
        for v in u + 1..clique {
            edges.push((u, v));
        }
    }
    edges.extend(lattice.edges().map(|(u, v)| (u + clique, v + clique)));
    edges.push((clique - 1, clique));
    let n = clique + lattice.node_count();
    Ok((Graph::from_edges(n, edges)?, NodeSet::new(0..clique)))
}

/// G(n, p) random graph.
pub fn erdos_renyi(n: usize, p: f64, rng_seed: u64) -> Result<Graph> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::input(format!("edge probability {p} outside [0, 1]")));
    }
    let mut rng = stream(rng_seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges)
}

/// Planted partition: `blocks` groups of `block_size` nodes; pairs inside a
/// group connect with probability `p_in`, across groups with `p_out`.
/// Returns the graph and the groups.
pub fn planted_partition(
    blocks: usize,
    block_size: usize,
    p_in: f64,
    p_out: f64,
    rng_seed: u64,
) -> Result<(Graph, Vec<NodeSet>)> {
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) {
        return Err(Error::input("edge probabilities must lie in [0, 1]"));
    }
    let n = blocks * block_size;
    let mut rng = stream(rng_seed);
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            let p = if u / block_size == v / block_size { p_in } else { p_out };
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    let groups = (0..blocks)
        .map(|b| NodeSet::new(b * block_size..(b + 1) * block_size))
        .collect();
    Ok((Graph::from_edges(n, edges)?, groups))
}

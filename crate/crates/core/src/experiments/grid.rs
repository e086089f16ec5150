use std::collections::BTreeMap;
use std::time::Instant;

use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::{elapsed_micros, sort_records, Algorithm, ExperimentRecord};
use crate::acl::acl_grid_runs;
use crate::crd::{crd_outer, CrdParams};
use crate::graph::{generate, Graph, NodeId};
use crate::rng::{derive_seed, stream};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StartSampling {
    /// Uniform over all nodes, without replacement.
    Uniform,
    /// Uniform over the `rows x cols` block whose top-left node is
    /// `(row, col)`.
    Block {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
}

#[derive(Clone, Debug)]
pub struct GridConfig {
    pub width: usize,
    pub height: usize,
    pub noise_levels: Vec<f64>,
    /// Independent noisy graphs per level.
    pub seeds_per_level: usize,
    pub starts_per_graph: usize,
    pub crd: CrdParams,
    /// Gap estimate that centres the ACL `alpha` grid. `None` uses the CRD
    /// `phi`, so both methods aim at clusters of the same internal
    /// connectivity.
    pub acl_lambda: Option<f64>,
    pub acl_eps: f64,
    pub rng_seed: u64,
    pub start_sampling: StartSampling,
    pub timing: bool,
}

impl GridConfig {
    pub fn lambda(&self) -> f64 {
        self.acl_lambda.unwrap_or_else(|| self.crd.phi.to_f64())
    }
}

/// `0, step, 2 step, ..` up to and including `stop` (within rounding).
pub fn noise_range(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || stop < start {
        return Err(Error::input("noise range needs step > 0 and stop >= start"));
    }
    let count = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=count)
        .map(|i| {
            let x = start + i as f64 * step;
            (x * 1e9).round() / 1e9
        })
        .collect())
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            width: 60,
            height: 60,
            noise_levels: noise_range(0.0, 0.5, 0.05).unwrap(),
            seeds_per_level: 5,
            starts_per_graph: 10,
            crd: CrdParams::default(),
            acl_lambda: None,
            acl_eps: 1e-7,
            rng_seed: 0,
            start_sampling: StartSampling::Uniform,
            timing: false,
        }
    }
}

fn sample_starts(config: &GridConfig, trial: u64) -> Result<Vec<NodeId>> {
    let pool: Vec<NodeId> = match config.start_sampling {
        StartSampling::Uniform => (0..config.width * config.height).collect(),
        StartSampling::Block { row, col, rows, cols } => {
            if row + rows > config.height || col + cols > config.width || rows == 0 || cols == 0 {
                return Err(Error::input("start block outside the grid"));
            }
            (row..row + rows)
                .flat_map(|r| (col..col + cols).map(move |c| r * config.width + c))
                .collect()
        }
    };
    if config.starts_per_graph > pool.len() {
        return Err(Error::input("more starts requested than candidate nodes"));
    }
    let mut rng = stream(derive_seed(config.rng_seed, &[trial, 1]));
    let mut starts: Vec<NodeId> = pool
        .choose_multiple(&mut rng, config.starts_per_graph)
        .copied()
        .collect();
    starts.sort_unstable();
    Ok(starts)
}

/// Noisy grids per (level, trial); CRD and grid-tuned ACL from each start.
///
/// The noise stream and the start nodes depend on the trial only, so every
/// level sees the same starts and nested noise edge sequences.
pub fn run_grid_experiment(config: &GridConfig) -> Result<Vec<ExperimentRecord>> {
    if config.noise_levels.is_empty() || config.seeds_per_level == 0 || config.starts_per_graph == 0 {
        return Err(Error::input("grid experiment needs levels, seeds and starts"));
    }
    if let Some(l) = config.acl_lambda {
        if !(l > 0.0 && l <= 2.0) {
            return Err(Error::input(format!("lambda = {l} outside (0, 2]")));
        }
    }
    let mut graphs: Vec<(f64, u64)> = Vec::new();
    for &noise in &config.noise_levels {
        for trial in 0..config.seeds_per_level as u64 {
            graphs.push((noise, trial));
        }
    }
    let nested: Vec<Vec<ExperimentRecord>> = graphs
        .par_iter()
        .map(|&(noise, trial)| -> Result<Vec<ExperimentRecord>> {
            let g = generate::grid(
                config.width,
                config.height,
                noise,
                derive_seed(config.rng_seed, &[trial, 0]),
            )?;
            let starts = sample_starts(config, trial)?;
            let cells: Vec<Vec<ExperimentRecord>> = starts
                .par_iter()
                .map(|&s| grid_cell(&g, noise, trial, s, config))
                .collect::<Result<_>>()?;
            Ok(cells.into_iter().flatten().collect())
        })
        .collect::<Result<_>>()?;
    let mut records: Vec<ExperimentRecord> = nested.into_iter().flatten().collect();
    sort_records(&mut records);
    Ok(records)
}

fn grid_cell(
    g: &Graph,
    noise: f64,
    trial: u64,
    seed: NodeId,
    config: &GridConfig,
) -> Result<Vec<ExperimentRecord>> {
    let record = |algorithm, conductance: f64, touched, micros, members| ExperimentRecord {
        graph: format!("grid{}x{}-noise{noise:.3}", config.width, config.height),
        cluster: format!("noise={noise:.3}"),
        algorithm,
        seed_node: seed,
        trial,
        conductance,
        precision: None,
        recall: None,
        f1: None,
        touched_volume: touched,
        micros,
        noise: Some(noise),
        members,
    };
    let start = Instant::now();
    let run = crd_outer(g, seed, &config.crd)?;
    let micros = elapsed_micros(start, config.timing);
    let cut = run
        .cluster()
        .ok_or_else(|| Error::domain(format!("CRD from {seed} produced no proper cut")))?;
    let crd = record(
        Algorithm::Crd,
        cut.conductance.to_f64(),
        run.counters.touched_volume,
        micros,
        cut.side.clone(),
    );
    let start = Instant::now();
    let acl = acl_grid_runs(g, seed, config.lambda(), config.acl_eps)?;
    let micros = elapsed_micros(start, config.timing);
    let acl = record(
        Algorithm::Acl,
        acl.cut.conductance.to_f64(),
        acl.touched_volume,
        micros,
        acl.cut.side,
    );
    Ok(vec![crd, acl])
}

#[derive(Clone, Debug, PartialEq)]
pub struct LevelMean {
    pub noise: f64,
    pub algorithm: Algorithm,
    pub mean_conductance: f64,
    /// Number of (trial, start) cells averaged.
    pub cells: usize,
}

/// Mean conductance per (noise level, algorithm), averaged over graphs and
/// start nodes together.
pub fn level_means(records: &[ExperimentRecord]) -> Vec<LevelMean> {
    let mut sums: BTreeMap<(u64, Algorithm), (f64, usize)> = BTreeMap::new();
    for r in records {
        if let Some(noise) = r.noise {
            let e = sums.entry((noise.to_bits(), r.algorithm)).or_insert((0.0, 0));
            e.0 += r.conductance;
            e.1 += 1;
        }
    }
    let mut out: Vec<LevelMean> = sums
        .into_iter()
        .map(|((bits, algorithm), (sum, n))| LevelMean {
            noise: f64::from_bits(bits),
            algorithm,
            mean_conductance: sum / n as f64,
            cells: n,
        })
        .collect();
    out.sort_by(|a, b| a.noise.total_cmp(&b.noise).then(a.algorithm.cmp(&b.algorithm)));
    out
}

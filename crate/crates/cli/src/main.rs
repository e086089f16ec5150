use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use crd_core::acl::{acl_grid_runs, acl_run};
use crd_core::crd::{crd_outer, extract_recovered_set, CrdParams, Termination};
use crd_core::eval::{
    filter_ground_truth, precision_recall, spectral_gap, FilterThresholds, Weighting,
};
use crd_core::experiments::{
    level_means, noise_range, run_cluster_experiment, run_grid_experiment, summarize, with_jobs,
    write_level_means, write_records, write_summary, ClusterConfig, GridConfig, StartSampling,
};
use crd_core::graph::{
    conductance, generate, induced_subgraph, load_edge_list, write_edge_list, FeatureTable,
    Indexing,
};
use crd_core::{CutResult, Error, Graph, NodeId, NodeSet, Ratio};

#[derive(Parser)]
#[command(name = "crd", version, about = "Local graph clustering with capacity releasing diffusion")]
struct Cli {
    /// Worker threads for experiments (0 = one per core).
    #[arg(long, global = true, env = "CRD_JOBS", default_value_t = 0)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a width x height lattice with random noise edges as an edge list.
    GenGrid(GenGridArgs),
    /// Write the path-star graph as an edge list.
    GenPathstar(GenPathstarArgs),
    /// Run CRD from one seed node and print the cluster.
    Crd(CrdArgs),
    /// Run ACL from one seed node and print the cluster.
    Acl(AclArgs),
    /// Conductance of a node set, with precision and recall against a reference set.
    Eval(EvalArgs),
    /// Mean conductance of CRD and ACL on noisy grids.
    ExperimentGrid(ExperimentGridArgs),
    /// CRD, ACL and ACLopt from sampled members of labelled clusters.
    ExperimentClusters(ExperimentClustersArgs),
    /// List the feature groups that pass the ground-truth filter.
    FilterTruth(FilterTruthArgs),
}

#[derive(Args)]
struct GraphInput {
    /// Edge-list file (`u v` per line).
    #[arg(long)]
    graph: PathBuf,
    /// Node ids in input files start at 1.
    #[arg(long)]
    one_based: bool,
}

impl GraphInput {
    fn indexing(&self) -> Indexing {
        if self.one_based {
            Indexing::OneBased
        } else {
            Indexing::ZeroBased
        }
    }

    fn load(&self) -> Result<Graph, Error> {
        load_edge_list(open(&self.graph)?, self.indexing())
    }

    /// Converts a user-facing id to an internal one.
    fn node(&self, id: usize) -> Result<NodeId, Error> {
        match self.indexing() {
            Indexing::ZeroBased => Ok(id),
            Indexing::OneBased => id
                .checked_sub(1)
                .ok_or_else(|| Error::Input("node ids start at 1".into())),
        }
    }

    fn shown(&self, v: NodeId) -> usize {
        match self.indexing() {
            Indexing::ZeroBased => v,
            Indexing::OneBased => v + 1,
        }
    }
}

#[derive(Args)]
struct Output {
    /// Output file (standard output when absent).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Output {
    fn writer(&self) -> Result<Box<dyn Write>, Error> {
        create(self.out.as_deref())
    }
}

#[derive(Args)]
struct GenGridArgs {
    #[arg(long, default_value_t = 60)]
    w: usize,
    #[arg(long, default_value_t = 60)]
    h: usize,
    /// Noise level p: floor(p * w * h) random non-lattice edges are added.
    #[arg(long, default_value_t = 0.0)]
    noise: f64,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    rng: u64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct GenPathstarArgs {
    /// Number of paths.
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Path length.
    #[arg(long, default_value_t = 40)]
    l: usize,
    /// Degree of the node outside the cluster.
    #[arg(long, default_value_t = 1000)]
    outside_degree: usize,
    /// Also write the cluster's node ids, one per line.
    #[arg(long)]
    cluster_out: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct CrdParamArgs {
    /// Conductance target, as `p/q` or a decimal.
    #[arg(long, default_value = "1/3")]
    phi: Ratio,
    /// Stop once the retained mass falls to tau times the injected mass.
    #[arg(long, default_value = "1/2")]
    tau: Ratio,
    /// Number of doubling iterations (default: until the mass would reach
    /// 4 vol(G)).
    #[arg(long)]
    t: Option<u32>,
}

impl CrdParamArgs {
    fn params(&self) -> CrdParams {
        CrdParams {
            phi: self.phi,
            tau: self.tau,
            iterations: self.t,
        }
    }
}

#[derive(Args)]
struct CrdArgs {
    #[command(flatten)]
    input: GraphInput,
    /// Seed node id.
    #[arg(long)]
    seed: usize,
    #[command(flatten)]
    params: CrdParamArgs,
    /// Report the nodes holding at least their degree in mass instead of the
    /// best sweep cut.
    #[arg(long)]
    recovered: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct AclArgs {
    #[command(flatten)]
    input: GraphInput,
    /// Seed node id.
    #[arg(long)]
    seed: usize,
    /// Teleportation probability.
    #[arg(long, conflicts_with = "lambda", required_unless_present = "lambda")]
    alpha: Option<f64>,
    /// Gap estimate; runs alpha over [lambda/2, 2 lambda) and keeps the best
    /// conductance.
    #[arg(long)]
    lambda: Option<f64>,
    /// Residual tolerance per unit degree.
    /// ACL residual tolerance per unit degree.
    #[arg(long, default_value = "1e-7")]
    eps: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    input: GraphInput,
    /// File of node ids forming the set to evaluate.
    #[arg(long)]
    set: PathBuf,
    /// File of node ids forming the reference set.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Weight precision and recall by degree instead of node count.
    #[arg(long)]
    volume_weighted: bool,
    /// Also report the spectral gap of the induced subgraph.
    #[arg(long)]
    gap: bool,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ExperimentGridArgs {
    #[arg(long, default_value_t = 60)]
    w: usize,
    #[arg(long, default_value_t = 60)]
    h: usize,
    /// Noise levels as `start:stop:step`, or a single value.
    #[arg(long, default_value = "0:0.5:0.05")]
    noise: String,
    /// Graphs per noise level.
    #[arg(long, default_value_t = 5)]
    trials: usize,
    /// Start nodes per graph.
    #[arg(long, default_value_t = 10)]
    starts: usize,
    /// Draw starts from the block `row,col,rows,cols` instead of the whole grid.
    #[arg(long)]
    block: Option<String>,
    #[command(flatten)]
    params: CrdParamArgs,
    /// ACL gap estimate (default: phi).
    #[arg(long)]
    lambda: Option<f64>,
    /// ACL residual tolerance per unit degree.
    #[arg(long, default_value = "1e-7")]
    eps: f64,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    rng: u64,
    /// Record wall-clock time per run.
    #[arg(long)]
    timing: bool,
    /// Quartile summary CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
    /// Mean conductance per level CSV.
    #[arg(long)]
    means: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct ThresholdArgs {
    /// Keep clusters with volume above this.
    #[arg(long, default_value_t = 1000)]
    min_volume: u64,
    /// Keep clusters with conductance below this.
    #[arg(long, default_value_t = 0.5)]
    max_conductance: f64,
    /// Keep clusters whose spectral gap over conductance is above this.
    #[arg(long, default_value_t = 0.5)]
    min_gap: f64,
}

impl ThresholdArgs {
    fn thresholds(&self) -> FilterThresholds {
        FilterThresholds {
            min_volume: self.min_volume,
            max_conductance: self.max_conductance,
            min_gap: self.min_gap,
        }
    }
}

#[derive(Args)]
struct ExperimentClustersArgs {
    #[command(flatten)]
    input: GraphInput,
    /// Feature TSV with header `node_id<TAB>feat1<TAB>...`.
    #[arg(long)]
    features: PathBuf,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    /// Fraction of each cluster used as start nodes.
    #[arg(long, default_value_t = 0.5)]
    fraction: f64,
    #[command(flatten)]
    params: CrdParamArgs,
    /// ACL residual tolerance per unit degree.
    #[arg(long, default_value = "1e-7")]
    eps: f64,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    rng: u64,
    /// Record wall-clock time per run.
    #[arg(long)]
    timing: bool,
    /// Quartile summary CSV.
    #[arg(long)]
    summary: Option<PathBuf>,
    #[command(flatten)]
    output: Output,
}

#[derive(Args)]
struct FilterTruthArgs {
    #[command(flatten)]
    input: GraphInput,
    /// Feature TSV with header `node_id<TAB>feat1<TAB>...`.
    #[arg(long)]
    features: PathBuf,
    #[command(flatten)]
    thresholds: ThresholdArgs,
    #[command(flatten)]
    output: Output,
}

fn open(path: &Path) -> Result<BufReader<File>, Error> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

fn create(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Input(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn read_node_set(path: &Path, input: &GraphInput, g: &Graph) -> Result<NodeSet, Error> {
    let mut nodes = Vec::new();
    for (i, line) in open(path)?.lines().enumerate() {
        let line = line?;
        let text = line.split('#').next().unwrap_or("");
        for token in text.split_whitespace() {
            let id: usize = token.parse().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("not a node id: {token:?}"),
            })?;
            let v = input.node(id)?;
            if !g.contains_node(v) {
                return Err(Error::Input(format!("node {id} is not in the graph")));
            }
            nodes.push(v);
        }
    }
    Ok(NodeSet::new(nodes))
}

fn members(input: &GraphInput, set: &NodeSet) -> String {
    set.iter()
        .map(|v| input.shown(v).to_string())
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_noise(text: &str) -> Result<Vec<f64>, Error> {
    let bad = || Error::Input(format!("noise must be `start:stop:step` or a number, got {text:?}"));
    let parts: Vec<f64> = text
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [p] => Ok(vec![p]),
        [a, b, s] => noise_range(a, b, s),
        _ => Err(bad()),
    }
}

fn parse_block(text: &str) -> Result<StartSampling, Error> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::Input(format!("block must be `row,col,rows,cols`, got {text:?}")))?;
    match parts[..] {
        [row, col, rows, cols] => Ok(StartSampling::Block { row, col, rows, cols }),
        _ => Err(Error::Input(format!("block must be `row,col,rows,cols`, got {text:?}"))),
    }
}

fn cut_line(input: &GraphInput, seed: usize, cut: &CutResult) -> String {
    format!(
        "{seed},{},{},{},{},{}",
        cut.conductance.to_f64(),
        cut.volume,
        cut.boundary_edges,
        cut.side.len(),
        members(input, &cut.side)
    )
}

fn gen_grid(a: &GenGridArgs) -> Result<(), Error> {
    let g = generate::grid(a.w, a.h, a.noise, a.rng)?;
    let mut out = a.output.writer()?;
    write_edge_list(&g, &mut out)?;
    out.flush()?;
    Ok(())
}

fn gen_pathstar(a: &GenPathstarArgs) -> Result<(), Error> {
    let (g, b) = generate::path_star(a.k, a.l, a.outside_degree)?;
    let mut out = a.output.writer()?;
    write_edge_list(&g, &mut out)?;
    out.flush()?;
    if let Some(path) = &a.cluster_out {
        let mut w = create(Some(path))?;
        for v in b.iter() {
            writeln!(w, "{v}")?;
        }
        w.flush()?;
    }
    Ok(())
}

fn crd(a: &CrdArgs) -> Result<(), Error> {
    let g = a.input.load()?;
    let seed = a.input.node(a.seed)?;
    let run = crd_outer(&g, seed, &a.params.params())?;
    let termination = match run.termination {
        Termination::Tau { iteration } => format!("tau@{iteration}"),
        Termination::IterationLimit => "limit".to_string(),
        Termination::Saturated { iteration } => format!("saturated@{iteration}"),
    };
    let cut = if a.recovered {
        let set = extract_recovered_set(&g, &run.mass);
        conductance(&g, &set)?
    } else {
        run.cluster()
            .cloned()
            .ok_or_else(|| Error::Domain(format!("diffusion from {} produced no proper cut", a.seed)))?
    };
    info!("CRD from {}: {} iterations, {termination}", a.seed, run.trace.iterations.len());
    let mut out = a.output.writer()?;
    writeln!(out, "seed,conductance,volume,boundary_edges,size,members,termination,touched_volume")?;
    writeln!(
        out,
        "{},{termination},{}",
        cut_line(&a.input, a.seed, &cut),
        run.counters.touched_volume
    )?;
    out.flush()?;
    Ok(())
}

fn acl(a: &AclArgs) -> Result<(), Error> {
    let g = a.input.load()?;
    let seed = a.input.node(a.seed)?;
    let run = match (a.alpha, a.lambda) {
        (Some(alpha), _) => acl_run(&g, seed, alpha, a.eps)?,
        (None, Some(lambda)) => acl_grid_runs(&g, seed, lambda, a.eps)?,
        (None, None) => return Err(Error::Input("give --alpha or --lambda".into())),
    };
    let mut out = a.output.writer()?;
    writeln!(out, "seed,conductance,volume,boundary_edges,size,members,alpha,touched_volume")?;
    writeln!(
        out,
        "{},{},{}",
        cut_line(&a.input, a.seed, &run.cut),
        run.alpha,
        run.touched_volume
    )?;
    out.flush()?;
    Ok(())
}

fn eval(a: &EvalArgs) -> Result<(), Error> {
    let g = a.input.load()?;
    let set = read_node_set(&a.set, &a.input, &g)?;
    let cut = conductance(&g, &set)?;
    let mut header = vec!["size", "volume", "boundary_edges", "conductance"];
    let mut row = vec![
        set.len().to_string(),
        cut.volume.to_string(),
        cut.boundary_edges.to_string(),
        cut.conductance.to_f64().to_string(),
    ];
    if let Some(path) = &a.truth {
        let truth = read_node_set(path, &a.input, &g)?;
        let weighting = if a.volume_weighted {
            Weighting::Volume
        } else {
            Weighting::NodeCount
        };
        let m = precision_recall(&set, &truth, &g, weighting);
        header.extend(["precision", "recall", "f1"]);
        row.extend([m.precision.to_string(), m.recall.to_string(), m.f1.to_string()]);
    }
    if a.gap {
        let (sub, _) = induced_subgraph(&g, &set)?;
        header.push("spectral_gap");
        row.push(spectral_gap(&sub)?.to_string());
    }
    let mut out = a.output.writer()?;
    writeln!(out, "{}", header.join(","))?;
    writeln!(out, "{}", row.join(","))?;
    out.flush()?;
    Ok(())
}

fn experiment_grid(a: &ExperimentGridArgs, jobs: usize) -> Result<(), Error> {
    let config = GridConfig {
        width: a.w,
        height: a.h,
        noise_levels: parse_noise(&a.noise)?,
        seeds_per_level: a.trials,
        starts_per_graph: a.starts,
        crd: a.params.params(),
        acl_lambda: a.lambda,
        acl_eps: a.eps,
        rng_seed: a.rng,
        start_sampling: match &a.block {
            Some(text) => parse_block(text)?,
            None => StartSampling::Uniform,
        },
        timing: a.timing,
    };
    let records = with_jobs(jobs, || run_grid_experiment(&config))??;
    write_records(a.output.writer()?, &records)?;
    if let Some(path) = &a.summary {
        write_summary(create(Some(path))?, &summarize(&records))?;
    }
    if let Some(path) = &a.means {
        write_level_means(create(Some(path))?, &level_means(&records))?;
    }
    Ok(())
}

fn load_features(input: &GraphInput, path: &Path) -> Result<FeatureTable, Error> {
    FeatureTable::load_tsv(open(path)?, input.indexing())
}

fn experiment_clusters(a: &ExperimentClustersArgs, jobs: usize) -> Result<(), Error> {
    let g = a.input.load()?;
    let table = load_features(&a.input, &a.features)?;
    let config = ClusterConfig {
        graph_name: a
            .input
            .graph
            .file_stem()
            .map_or_else(|| "graph".into(), |s| s.to_string_lossy().into_owned()),
        sample_fraction: a.fraction,
        rng_seed: a.rng,
        crd: a.params.params(),
        acl_eps: a.eps,
        timing: a.timing,
    };
    let records = with_jobs(jobs, || -> Result<_, Error> {
        let report = filter_ground_truth(&g, &table, &a.thresholds.thresholds())?;
        info!("{} clusters kept, {} rejected", report.kept.len(), report.rejected.len());
        if report.kept.is_empty() {
            return Err(Error::Input("no feature group passes the ground-truth filter".into()));
        }
        run_cluster_experiment(&g, &report.kept, &config)
    })??;
    write_records(a.output.writer()?, &records)?;
    if let Some(path) = &a.summary {
        write_summary(create(Some(path))?, &summarize(&records))?;
    }
    Ok(())
}

fn filter_truth(a: &FilterTruthArgs) -> Result<(), Error> {
    let g = a.input.load()?;
    let table = load_features(&a.input, &a.features)?;
    let report = filter_ground_truth(&g, &table, &a.thresholds.thresholds())?;
    for r in &report.rejected {
        info!("rejected {}={}: {}", r.feature, r.value, r.reason);
    }
    for r in &report.warnings {
        warn!("skipped {}={}: {}", r.feature, r.value, r.reason);
    }
    let mut out = a.output.writer()?;
    writeln!(out, "feature,value,nodes,volume,conductance,spectral_gap,gap")?;
    for c in &report.kept {
        writeln!(
            out,
            "{},{},{},{},{},{},{}",
            c.feature,
            c.value,
            c.members.len(),
            c.volume,
            c.conductance.to_f64(),
            c.spectral_gap,
            c.gap
        )?;
    }
    out.flush()?;
    Ok(())
}

fn run(cli: &Cli) -> Result<(), Error> {
    match &cli.command {
        Command::GenGrid(a) => gen_grid(a),
        Command::GenPathstar(a) => gen_pathstar(a),
        Command::Crd(a) => crd(a),
        Command::Acl(a) => acl(a),
        Command::Eval(a) => eval(a),
        Command::ExperimentGrid(a) => experiment_grid(a, cli.jobs),
        Command::ExperimentClusters(a) => experiment_clusters(a, cli.jobs),
        Command::FilterTruth(a) => filter_truth(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

/// 2 for a violated precondition, 1 for everything the user can fix.
fn exit_code(e: &Error) -> u8 {
    if e.is_contract() {
        2
    } else {
        1
    }
}

use log::debug;

use super::{crd_inner, sweep_order_from_labels, InnerKind, InnerOutcome, MassVector, WorkCounters};
use crate::graph::{sweep_cut, CutResult, Graph, NodeId};
use crate::{Error, Ratio, Result};

/// Largest supported iteration bound; `2^t` must fit the mass type.
pub const MAX_ITERATIONS: u32 = 62;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CrdParams {
    pub phi: Ratio,
    pub tau: Ratio,
    /// Last iteration index `t`; `None` picks [`default_iterations`].
    pub iterations: Option<u32>,
}

impl Default for CrdParams {
    fn default() -> Self {
        CrdParams {
            phi: Ratio::new(1, 3).unwrap(),
            tau: Ratio::new(1, 2).unwrap(),
            iterations: None,
        }
    }
}

/// Smallest `t` with `2 d(seed) 2^t >= 4 budget`, capped at [`MAX_ITERATIONS`].
pub fn default_iterations(seed_degree: u64, budget: u64) -> u32 {
    let start = 2 * seed_degree.max(1) as u128;
    let target = 4 * budget as u128;
    let mut t = 0;
    while t < MAX_ITERATIONS && start << t < target {
        t += 1;
    }
    t
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Termination {
    /// The retained mass fell to at most `tau` of the mass injected.
    Tau { iteration: u32 },
    /// Iteration `t` finished without the `tau` test firing.
    IterationLimit,
    /// Doubling at `iteration` would have exceeded the graph volume, so the
    /// loop stopped before calling the inner step.
    Saturated { iteration: u32 },
}

#[derive(Clone, Debug)]
pub struct IterationRecord {
    pub iteration: u32,
    pub pre_doubling_total: u64,
    pub post_inner_total: u64,
    pub excess_removed: u64,
    pub kind: InnerKind,
    pub inner_cut: Option<CutResult>,
    /// Label sweep of this iteration's terminal state.
    pub sweep_cut: Option<CutResult>,
    /// Best label sweep over iterations `0..=iteration`.
    pub best_sweep_conductance: Option<Ratio>,
    pub height: u32,
    pub counters: WorkCounters,
}

#[derive(Clone, Debug, Default)]
pub struct OuterTrace {
    pub iterations: Vec<IterationRecord>,
}

impl OuterTrace {
    /// Checks that each iteration starts from the previous one's retained mass.
    pub fn check_consistency(&self) -> std::result::Result<(), String> {
        for w in self.iterations.windows(2) {
            let carried = w[0].post_inner_total - w[0].excess_removed;
            if carried != w[1].pre_doubling_total {
                return Err(format!(
                    "iteration {}: carried {carried}, next starts from {}",
                    w[0].iteration, w[1].pre_doubling_total
                ));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct CrdRun {
    pub seed: NodeId,
    /// Mass after the last excess removal.
    pub mass: MassVector,
    /// Cut returned by the last inner call, if it stopped at a bottleneck.
    pub cut: Option<CutResult>,
    /// Lowest-conductance label sweep cut over all iterations.
    pub best_sweep: Option<CutResult>,
    pub termination: Termination,
    pub trace: OuterTrace,
    pub counters: WorkCounters,
}

impl CrdRun {
    /// The reported cluster: the best label sweep cut, falling back to the
    /// last inner cut.
    pub fn cluster(&self) -> Option<&CutResult> {
        self.best_sweep.as_ref().or(self.cut.as_ref())
    }
}

/// Hooks around every inner call of [`crd_outer_observed`].
pub trait OuterObserver {
    fn before_inner(&mut self, _iteration: u32, _mass: &MassVector) {}
    fn after_inner(&mut self, _iteration: u32, _outcome: &InnerOutcome) {}
}

impl OuterObserver for () {}

pub fn crd_outer(g: &Graph, seed: NodeId, params: &CrdParams) -> Result<CrdRun> {
    crd_outer_observed(g, seed, params, &mut ())
}

pub(crate) fn validate(g: &Graph, seed: NodeId, params: &CrdParams) -> Result<u32> {
    if !g.contains_node(seed) {
        return Err(Error::input(format!("seed {seed} outside the graph")));
    }
    if g.degree(seed) == 0 {
        return Err(Error::input(format!("seed {seed} is isolated")));
    }
    if params.phi.is_zero() || params.phi > Ratio::ONE {
        return Err(Error::input(format!("phi = {} outside (0, 1]", params.phi)));
    }
    if params.tau.is_zero() || params.tau >= Ratio::ONE {
        return Err(Error::input(format!("tau = {} outside (0, 1)", params.tau)));
    }
    let t = params
        .iterations
        .unwrap_or_else(|| default_iterations(g.degree(seed), g.total_volume()));
    if t > MAX_ITERATIONS {
        return Err(Error::input(format!("t = {t} above {MAX_ITERATIONS}")));
    }
    Ok(t)
}

/// `|m| <= tau * 2 d(seed) 2^j`.
fn tau_fires(total: u64, tau: Ratio, seed_degree: u64, j: u32) -> bool {
    let injected = (2 * seed_degree as u128).checked_mul(1u128 << j);
    let rhs = injected.and_then(|x| x.checked_mul(tau.numer() as u128));
    match rhs {
        Some(rhs) => total as u128 * tau.denom() as u128 <= rhs,
        None => true,
    }
}

/// The doubling loop with excess removal and the `tau` stopping rule, also
/// tracking the best label sweep cut.
pub fn crd_outer_observed<O: OuterObserver + ?Sized>(
    g: &Graph,
    seed: NodeId,
    params: &CrdParams,
    observer: &mut O,
) -> Result<CrdRun> {
    let t = validate(g, seed, params)?;
    let d_seed = g.degree(seed);
    let mut mass = MassVector::zeros(g.node_count());
    mass.set(seed, d_seed);
    let mut trace = OuterTrace::default();
    let mut counters = WorkCounters::default();
    let mut best_sweep: Option<CutResult> = None;
    let mut cut = None;
    let mut termination = Termination::IterationLimit;

    for j in 0..=t {
        let pre = mass.total();
        if 2 * pre as u128 > g.total_volume() as u128 {
            debug!("seed {seed}: doubling at iteration {j} exceeds vol(G), stopping");
            termination = Termination::Saturated { iteration: j };
            break;
        }
        mass.double()?;
        observer.before_inner(j, &mass);
        let outcome = crd_inner(g, mass, params.phi)?;
        observer.after_inner(j, &outcome);
        counters.accumulate(&outcome.counters);

        let order = sweep_order_from_labels(&outcome.labels, &outcome.mass, g);
        let sweep = match sweep_cut(g, &order) {
            Ok(c) => Some(c),
            Err(Error::Domain(_)) => None,
            Err(e) => return Err(e),
        };
        if let Some(s) = &sweep {
            if best_sweep.as_ref().is_none_or(|b| s.conductance < b.conductance) {
                best_sweep = Some(s.clone());
            }
        }

        let InnerOutcome {
            kind,
            cut: inner_cut,
            mass: terminal,
            height,
            counters: step_counters,
            ..
        } = outcome;
        mass = terminal;
        let post = mass.total();
        let removed = mass.truncate_to_degree(g);
        trace.iterations.push(IterationRecord {
            iteration: j,
            pre_doubling_total: pre,
            post_inner_total: post,
            excess_removed: removed,
            kind,
            inner_cut: inner_cut.clone(),
            sweep_cut: sweep,
            best_sweep_conductance: best_sweep.as_ref().map(|c| c.conductance),
            height,
            counters: step_counters,
        });
        cut = inner_cut;
        if tau_fires(mass.total(), params.tau, d_seed, j) {
            termination = Termination::Tau { iteration: j };
            break;
        }
    }
    Ok(CrdRun {
        seed,
        mass,
        cut,
        best_sweep,
        termination,
        trace,
        counters,
    })
}

/// Runs the diffusion and returns its reported cluster.
pub fn crd_cluster(g: &Graph, seed: NodeId, params: &CrdParams) -> Result<CutResult> {
    let run = crd_outer(g, seed, params)?;
    run.cluster()
        .cloned()
        .ok_or_else(|| Error::domain(format!("diffusion from {seed} produced no proper cut")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crd::extract_recovered_set;
    use crate::graph::generate;

    #[test]
    fn default_iteration_count() {
        // 2 * 1 * 2^t >= 4 * 100 first at t = 8.
        assert_eq!(default_iterations(1, 100), 8);
        assert_eq!(default_iterations(4, 2), 0);
        assert_eq!(default_iterations(1, u64::MAX), MAX_ITERATIONS);
    }

    #[test]
    fn tau_test_arithmetic() {
        let half = Ratio::new(1, 2).unwrap();
        assert!(tau_fires(4, half, 2, 1));
        assert!(!tau_fires(5, half, 2, 1));
        assert!(tau_fires(u64::MAX, half, u64::MAX, 62));
    }

    #[test]
    fn rejects_bad_parameters() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        let p = CrdParams::default();
        assert!(matches!(crd_outer(&g, 2, &p), Err(Error::Input(_))));
        assert!(matches!(crd_outer(&g, 9, &p), Err(Error::Input(_))));
        let bad_tau = CrdParams { tau: Ratio::ONE, ..p };
        assert!(matches!(crd_outer(&g, 0, &bad_tau), Err(Error::Input(_))));
        let bad_t = CrdParams { iterations: Some(63), ..p };
        assert!(matches!(crd_outer(&g, 0, &bad_t), Err(Error::Input(_))));
        let bad_phi = CrdParams { phi: Ratio::ZERO, ..p };
        assert!(matches!(crd_outer(&g, 0, &bad_phi), Err(Error::Input(_))));
    }

    #[test]
    fn zero_iterations_runs_one_step() {
        let g = generate::grid(10, 10, 0.0, 0).unwrap();
        let p = CrdParams { iterations: Some(0), ..CrdParams::default() };
        let run = crd_outer(&g, 55, &p).unwrap();
        assert_eq!(run.trace.iterations.len(), 1);
        assert_eq!(run.trace.iterations[0].pre_doubling_total, 4);
    }

    #[test]
    fn planted_clique_is_recovered() {
        let (g, b) = generate::planted_clique(10, 10, 10).unwrap();
        let p = CrdParams { iterations: Some(10), ..CrdParams::default() };
        let run = crd_outer(&g, 0, &p).unwrap();
        assert!(matches!(run.termination, Termination::Tau { .. }));
        let k = run.cut.as_ref().expect("stopped at a bottleneck");
        assert!(k.side.intersection_len(&b) >= 9);
        let s = extract_recovered_set(&g, &run.mass);
        assert!(s.intersection_len(&b) >= 9);
        // Mass that crossed the bridge early is doubled with everything else,
        // so the lattice corner (node 10 and its neighbors 11 and 20) fills up.
        let outside: Vec<_> = s.iter().filter(|&v| !b.contains(v)).collect();
        assert_eq!(outside, vec![10, 11, 20]);
        let outside_volume: u64 = outside.iter().map(|&v| g.degree(v)).sum();
        assert!(outside_volume * 10 <= 91);
        run.trace.check_consistency().unwrap();
    }

    #[test]
    fn saturation_stops_before_overflowing_volume() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2), (0, 2)]).unwrap();
        let p = CrdParams { iterations: Some(10), ..CrdParams::default() };
        let run = crd_outer(&g, 0, &p).unwrap();
        assert!(matches!(
            run.termination,
            Termination::Saturated { .. } | Termination::Tau { .. }
        ));
        assert!(run.mass.total() <= g.total_volume());
    }
}

use super::queue::LabelQueue;
use super::MassVector;
use crate::graph::{CutResult, Graph, NodeId, NodeSet};
use crate::{Error, Ratio, Result};

const NO_ARCS: usize = usize::MAX;

/// Label cap `ceil(3 log2 |m| / phi)`, at least 1.
pub fn label_cap(total_mass: u64, phi: Ratio) -> Result<u32> {
    if phi.is_zero() {
        return Err(Error::input("phi must be positive"));
    }
    if total_mass < 2 {
        return Ok(1);
    }
    let h = (3.0 * (total_mass as f64).log2() / phi.to_f64()).ceil();
    if !(h.is_finite() && h <= (u32::MAX / 2) as f64) {
        return Err(Error::Overflow(format!("label cap {h} for phi = {phi}")));
    }
    Ok((h as u32).max(1))
}

/// Per-call work accounting.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct WorkCounters {
    pub pushes: u64,
    pub relabels: u64,
    /// Cursor advances past an ineligible arc.
    pub scans: u64,
    pub queue_ops: u64,
    pub mass_moved: u64,
    /// Total degree of the nodes whose adjacency lists were read.
    pub touched_volume: u64,
}

impl WorkCounters {
    pub fn accumulate(&mut self, other: &WorkCounters) {
        self.pushes += other.pushes;
        self.relabels += other.relabels;
        self.scans += other.scans;
        self.queue_ops += other.queue_ops;
        self.mass_moved += other.mass_moved;
        self.touched_volume += other.touched_volume;
    }
}

/// Terminal labels of one inner call.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Labels {
    dense: Vec<u32>,
    positive: Vec<NodeId>,
}

impl Labels {
    pub fn from_dense(dense: Vec<u32>) -> Self {
        let positive = (0..dense.len()).filter(|&v| dense[v] > 0).collect();
        Labels { dense, positive }
    }

    pub fn get(&self, v: NodeId) -> u32 {
        self.dense[v]
    }

    /// Nodes with label at least 1, ascending.
    pub fn positive(&self) -> &[NodeId] {
        &self.positive
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InnerKind {
    /// Every node ends with `m(v) <= d(v)`.
    FullStep,
    /// Excess remains on label-`h` nodes; `cut` certifies the bottleneck.
    CutFound,
}

#[derive(Clone, Debug)]
pub struct InnerOutcome {
    pub kind: InnerKind,
    pub cut: Option<CutResult>,
    pub labels: Labels,
    pub mass: MassVector,
    pub counters: WorkCounters,
    pub height: u32,
    pub capacity: u64,
}

/// State of one capacity-releasing push-relabel call.
///
/// Arc flows are stored per adjacency slot, but only for nodes that have been
/// scanned; the flow on an arc out of an unscanned node is recovered from the
/// reverse arc. Labels, cursors and the queue are local to the call.
pub struct InnerState<'g> {
    graph: &'g Graph,
    mass: MassVector,
    phi: Ratio,
    capacity: u64,
    height: u32,
    labels: Vec<u32>,
    cursor: Vec<usize>,
    arc_base: Vec<usize>,
    arc_flow: Vec<i64>,
    scanned: Vec<NodeId>,
    queue: LabelQueue,
    counters: WorkCounters,
}

impl<'g> InnerState<'g> {
    /// Validates the call's preconditions and queues every node with excess
    /// at label 0.
    pub fn new(graph: &'g Graph, mass: MassVector, phi: Ratio) -> Result<Self> {
        if phi.is_zero() || phi > Ratio::ONE {
            return Err(Error::contract(format!("phi = {phi} outside (0, 1]")));
        }
        mass.check_admissible(graph)?;
        let capacity = phi.ceil_recip().expect("phi is positive");
        if capacity > i64::MAX as u64 / 4 {
            return Err(Error::Overflow(format!("edge capacity {capacity}")));
        }
        let height = label_cap(mass.total(), phi)?;
        let n = graph.node_count();
        let mut queue = LabelQueue::new(n, height as usize);
        let mut excess_nodes: Vec<NodeId> = mass
            .iter_positive()
            .filter(|&(v, m)| m > graph.degree(v))
            .map(|(v, _)| v)
            .collect();
        excess_nodes.sort_unstable_by(|a, b| b.cmp(a));
        for v in excess_nodes {
            queue.add(v, 0);
        }
        Ok(InnerState {
            graph,
            mass,
            phi,
            capacity,
            height,
            labels: vec![0; n],
            cursor: vec![0; n],
            arc_base: vec![NO_ARCS; n],
            arc_flow: Vec::new(),
            scanned: Vec::new(),
            queue,
            counters: WorkCounters::default(),
        })
    }

    pub fn height(&self) -> u32 {
        self.height
    }

    pub fn capacity(&self) -> u64 {
        self.capacity
    }

    pub fn label(&self, v: NodeId) -> u32 {
        self.labels[v]
    }

    pub fn mass(&self) -> &MassVector {
        &self.mass
    }

    pub fn counters(&self) -> WorkCounters {
        let mut c = self.counters;
        c.queue_ops = self.queue.ops();
        c
    }

    pub fn excess(&self, v: NodeId) -> u64 {
        self.mass.get(v).saturating_sub(self.graph.degree(v))
    }

    pub fn is_active(&self, v: NodeId) -> bool {
        self.labels[v] < self.height && self.excess(v) > 0
    }

    /// Nodes currently queued.
    pub fn queue_len(&self) -> usize {
        self.queue.len()
    }

    /// Net mass moved along arc `(v, u)` during this call.
    pub fn flow(&self, v: NodeId, u: NodeId) -> Option<i64> {
        self.graph.slot_of(v, u).map(|s| self.flow_at(v, s))
    }

    fn flow_at(&self, v: NodeId, slot: usize) -> i64 {
        let base = self.arc_base[v];
        if base != NO_ARCS {
            return self.arc_flow[base + slot - self.graph.slots(v).start];
        }
        let u = self.graph.target(slot);
        let ubase = self.arc_base[u];
        if ubase != NO_ARCS {
            -self.arc_flow[ubase + self.graph.twin(slot) - self.graph.slots(u).start]
        } else {
            0
        }
    }

    /// `min(l(v), C) - m(v, u)` for the arc at `slot`.
    fn residual_at(&self, v: NodeId, slot: usize) -> i64 {
        let cap = (self.labels[v] as u64).min(self.capacity) as i64;
        cap - self.flow_at(v, slot)
    }

    fn eligible_at(&self, v: NodeId, slot: usize) -> bool {
        let u = self.graph.target(slot);
        self.labels[v] > self.labels[u] && self.residual_at(v, slot) > 0
    }

    /// Allocates flow storage for `v` on first visit.
    fn scan(&mut self, v: NodeId) {
        if self.arc_base[v] != NO_ARCS {
            return;
        }
        let base = self.arc_flow.len();
        let slots = self.graph.slots(v);
        for slot in slots.clone() {
            let f = self.flow_at(v, slot);
            self.arc_flow.push(f);
        }
        self.arc_base[v] = base;
        self.scanned.push(v);
        self.counters.touched_volume += slots.len() as u64;
    }

    fn push_at(&mut self, v: NodeId, slot: usize) -> Result<u64> {
        let u = self.graph.target(slot);
        let residual = self.residual_at(v, slot);
        if self.labels[v] <= self.labels[u] || residual <= 0 {
            return Err(Error::contract(format!("arc ({v}, {u}) is not eligible")));
        }
        let ex = self.excess(v);
        if ex == 0 {
            return Err(Error::contract(format!("push from {v} without excess")));
        }
        let headroom = 2 * self.graph.degree(u) - self.mass.get(u);
        if headroom == 0 {
            return Err(Error::contract(format!("push into saturated node {u}")));
        }
        let psi = ex.min(residual as u64).min(headroom);
        self.scan(v);
        let vbase = self.arc_base[v];
        self.arc_flow[vbase + slot - self.graph.slots(v).start] += psi as i64;
        let ubase = self.arc_base[u];
        if ubase != NO_ARCS {
            self.arc_flow[ubase + self.graph.twin(slot) - self.graph.slots(u).start] -= psi as i64;
        }
        debug_assert!(self.residual_at(v, slot) >= 0, "capacity exceeded on ({v}, {u})");
        self.mass.sub(v, psi);
        self.mass.add(u, psi);
        self.counters.pushes += 1;
        self.counters.mass_moved += psi;
        Ok(psi)
    }

    /// Pushes `min(ex(v), r(v, u), 2d(u) - m(u))` units along `(v, u)` and
    /// updates the queue. Errors if the arc is not eligible, `v` has no
    /// excess, or `u` is full.
    pub fn push(&mut self, v: NodeId, u: NodeId) -> Result<u64> {
        let slot = self
            .graph
            .slot_of(v, u)
            .ok_or_else(|| Error::contract(format!("no edge ({v}, {u})")))?;
        let u_was_active = self.is_active(u);
        let moved = self.push_at(v, slot)?;
        if self.queue.contains(v) && !self.is_active(v) {
            self.queue.remove(v, self.labels[v] as usize);
        }
        if !u_was_active && self.is_active(u) && !self.queue.contains(u) {
            self.queue.add(u, self.labels[u] as usize);
        }
        Ok(moved)
    }

    fn has_eligible_arc(&self, v: NodeId) -> Option<NodeId> {
        self.graph
            .slots(v)
            .find(|&s| self.eligible_at(v, s))
            .map(|s| self.graph.target(s))
    }

    /// Raises `l(v)` by one and resets its cursor. A node reaching the cap
    /// leaves the queue for good, keeping its excess.
    pub fn relabel(&mut self, v: NodeId) -> Result<u32> {
        if !self.is_active(v) {
            return Err(Error::contract(format!("relabel of inactive node {v}")));
        }
        if let Some(u) = self.has_eligible_arc(v) {
            return Err(Error::contract(format!(
                "relabel of {v} with eligible arc to {u} outstanding"
            )));
        }
        self.scan(v);
        Ok(self.raise(v))
    }

    fn raise(&mut self, v: NodeId) -> u32 {
        let old = self.labels[v];
        self.labels[v] = old + 1;
        self.cursor[v] = 0;
        self.counters.relabels += 1;
        if self.queue.contains(v) {
            if old + 1 < self.height {
                self.queue.shift(v, old as usize);
            } else {
                self.queue.remove(v, old as usize);
            }
        }
        old + 1
    }

    /// One Push/Relabel step on the lowest-labeled active node. Returns
    /// `false` once the queue is empty.
    pub fn step(&mut self) -> Result<bool> {
        let Some(v) = self.queue.first() else {
            return Ok(false);
        };
        self.scan(v);
        let slots = self.graph.slots(v);
        let slot = slots.start + self.cursor[v];
        if self.eligible_at(v, slot) {
            let u = self.graph.target(slot);
            self.push_at(v, slot)?;
            if !self.is_active(v) {
                self.queue.remove(v, self.labels[v] as usize);
            }
            if self.is_active(u) {
                debug_assert!(self.labels[u] < self.labels[v]);
                self.queue.add(u, self.labels[u] as usize);
            }
        } else if slot + 1 < slots.end {
            self.cursor[v] += 1;
            self.counters.scans += 1;
        } else {
            if cfg!(debug_assertions) {
                if let Some(u) = self.has_eligible_arc(v) {
                    return Err(Error::contract(format!(
                        "cursor of {v} wrapped with eligible arc to {u}"
                    )));
                }
            }
            self.raise(v);
        }
        Ok(true)
    }

    pub fn run(&mut self) -> Result<()> {
        while self.step()? {}
        Ok(())
    }

    /// Whether any node holds excess (all such nodes sit at label `h` once
    /// the queue is empty).
    fn excess_remains(&self) -> bool {
        self.scanned.iter().any(|&v| self.excess(v) > 0)
    }

    /// Extracts a low-conductance level cut `S_i = {v : l(v) >= i}`.
    ///
    /// Scans `i = h, h-1, ..., ceil(h/2)` for the first level whose
    /// one-level boundary (edges from label `i` to label `i-1`) is at most
    /// `phi * vol(S_i)`. If that level set holds more than half the volume,
    /// the scan is redone on `i = ceil(h/4) ..= floor(h/2)` against the
    /// complement's volume. Either way the side containing `S_h` is
    /// returned. If neither scan finds a level (only possible for very small
    /// totals, where `h` is tiny), the level set of least conductance is used.
    pub fn level_cut(&self) -> Result<CutResult> {
        let h = self.height as usize;
        if !self
            .scanned
            .iter()
            .any(|&v| self.labels[v] as usize == h && self.excess(v) > 0)
        {
            return Err(Error::contract("level cut requested with no excess at the cap"));
        }
        let g = self.graph;
        let total = g.total_volume();
        let mut vol_at = vec![0u64; h + 2];
        let mut crossing = vec![0i64; h + 2];
        let mut one_level = vec![0u64; h + 1];
        for &v in &self.scanned {
            let lv = self.labels[v] as usize;
            if lv == 0 {
                continue;
            }
            vol_at[lv] += g.degree(v);
            for &u in g.neighbors(v) {
                let lu = self.labels[u] as usize;
                if lu < lv {
                    crossing[lu + 1] += 1;
                    crossing[lv + 1] -= 1;
                    if lu + 1 == lv {
                        one_level[lv] += 1;
                    }
                }
            }
        }
        // vol(S_i) and |E(S_i, V \ S_i)| for i in 0..=h (index 0 unused).
        let mut vol_s = vec![0u64; h + 2];
        for i in (1..=h).rev() {
            vol_s[i] = vol_s[i + 1] + vol_at[i];
        }
        let mut boundary = vec![0u64; h + 1];
        let mut running = 0i64;
        for i in 1..=h {
            running += crossing[i];
            boundary[i] = running as u64;
        }

        let within = |part: u64, whole: u64| {
            part as u128 * self.phi.denom() as u128 <= self.phi.numer() as u128 * whole as u128
        };
        let defined = |i: usize| vol_s[i] > 0 && vol_s[i] < total;
        let upper_start = h.div_ceil(2).max(1);
        let mut chosen = None;
        if let Some(i) = (upper_start..=h)
            .rev()
            .find(|&i| defined(i) && within(one_level[i], vol_s[i]))
        {
            if 2 * vol_s[i] <= total {
                chosen = Some(i);
            } else {
                let lower_start = h.div_ceil(4).max(1);
                chosen = (lower_start..=h / 2)
                    .find(|&i| defined(i) && within(one_level[i], total - vol_s[i]));
            }
        }
        let level = match chosen {
            Some(i) => i,
            None => (1..=h)
                .filter(|&i| defined(i))
                .min_by(|&a, &b| {
                    let ra = Ratio::new(boundary[a], vol_s[a].min(total - vol_s[a])).unwrap();
                    let rb = Ratio::new(boundary[b], vol_s[b].min(total - vol_s[b])).unwrap();
                    ra.cmp(&rb).then(b.cmp(&a))
                })
                .ok_or_else(|| Error::contract("no level set is a proper cut"))?,
        };
        let side = NodeSet::new(
            self.scanned
                .iter()
                .copied()
                .filter(|&v| self.labels[v] as usize >= level),
        );
        CutResult::from_counts(side, vol_s[level], boundary[level], total)
    }

    /// Full scan of the state invariants: flow antisymmetry, the released
    /// capacity bound, label range, and queue contents and order.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        let g = self.graph;
        for &v in &self.scanned {
            if self.labels[v] > self.height {
                return Err(format!("label of {v} above cap"));
            }
            for slot in g.slots(v) {
                let u = g.target(slot);
                let f = self.flow_at(v, slot);
                let back = self.flow_at(u, g.twin(slot));
                if f != -back {
                    return Err(format!("flows on ({v}, {u}) not antisymmetric: {f} vs {back}"));
                }
                let cap = (self.labels[v] as u64).min(self.capacity) as i64;
                if f > cap {
                    return Err(format!("flow {f} on ({v}, {u}) exceeds released capacity {cap}"));
                }
            }
        }
        for v in 0..g.node_count() {
            if self.mass.get(v) > 2 * g.degree(v) {
                return Err(format!("node {v} above 2 d(v)"));
            }
            if self.queue.contains(v) != self.is_active(v) {
                return Err(format!("queue membership of {v} disagrees with activity"));
            }
        }
        if let Some(head) = self.queue.first() {
            let lowest = self.labels[head];
            if (0..g.node_count()).any(|v| self.queue.contains(v) && self.labels[v] < lowest) {
                return Err("queue head is not lowest-labeled".into());
            }
        }
        Ok(())
    }

    /// Classifies the terminal state and extracts the certificate cut.
    pub fn finish(self) -> Result<InnerOutcome> {
        if self.queue.len() > 0 {
            return Err(Error::contract("finish called with active nodes remaining"));
        }
        let (kind, cut) = if self.excess_remains() {
            (InnerKind::CutFound, Some(self.level_cut()?))
        } else {
            (InnerKind::FullStep, None)
        };
        let counters = self.counters();
        let mut positive: Vec<NodeId> = self
            .scanned
            .iter()
            .copied()
            .filter(|&v| self.labels[v] > 0)
            .collect();
        positive.sort_unstable();
        Ok(InnerOutcome {
            kind,
            cut,
            labels: Labels {
                dense: self.labels,
                positive,
            },
            mass: self.mass,
            counters,
            height: self.height,
            capacity: self.capacity,
        })
    }
}

/// One capacity-releasing diffusion step: spread `mass` so that every node
/// ends with at most its degree, or stop with a low-conductance cut.
pub fn crd_inner(g: &Graph, mass: MassVector, phi: Ratio) -> Result<InnerOutcome> {
    let mut state = InnerState::new(g, mass, phi)?;
    state.run()?;
    state.finish()
}

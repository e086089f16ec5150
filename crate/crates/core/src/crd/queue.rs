use crate::graph::NodeId;

const NIL: usize = usize::MAX;

/// Active nodes ordered by label.
///
/// One doubly linked list per label holds the nodes at that label, and a
/// second doubly linked list threads the non-empty labels in increasing
/// order. The diffusion only ever adds a node below every queued label,
/// removes queued nodes, and shifts a node up by exactly one label, and each
/// of those is O(1) here.
#[derive(Clone, Debug)]
pub(crate) struct LabelQueue {
    next: Vec<usize>,
    prev: Vec<usize>,
    queued: Vec<bool>,
    head: Vec<usize>,
    label_up: Vec<usize>,
    label_down: Vec<usize>,
    lowest: usize,
    len: usize,
    ops: u64,
}

impl LabelQueue {
    pub fn new(node_count: usize, max_label: usize) -> Self {
        LabelQueue {
            next: vec![NIL; node_count],
            prev: vec![NIL; node_count],
            queued: vec![false; node_count],
            head: vec![NIL; max_label + 2],
            label_up: vec![NIL; max_label + 2],
            label_down: vec![NIL; max_label + 2],
            lowest: NIL,
            len: 0,
            ops: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.queued[v]
    }

    pub fn ops(&self) -> u64 {
        self.ops
    }

    /// A node at the lowest queued label.
    pub fn first(&self) -> Option<NodeId> {
        (self.lowest != NIL).then(|| self.head[self.lowest])
    }

    #[cfg(test)]
    pub fn lowest_label(&self) -> Option<usize> {
        (self.lowest != NIL).then_some(self.lowest)
    }

    pub fn add(&mut self, v: NodeId, label: usize) {
        debug_assert!(!self.queued[v], "node {v} queued twice");
        self.ops += 1;
        if self.head[label] == NIL {
            self.link_label(label);
        }
        self.push_front(v, label);
    }

    pub fn remove(&mut self, v: NodeId, label: usize) {
        debug_assert!(self.queued[v]);
        self.ops += 1;
        self.unlink_node(v, label);
    }

    /// Moves `v` from `label` to `label + 1`.
    pub fn shift(&mut self, v: NodeId, label: usize) {
        debug_assert!(self.queued[v]);
        self.ops += 1;
        let up = label + 1;
        if self.head[up] == NIL {
            // `label` is non-empty (it holds v), so `up` slots in directly above it.
            let above = self.label_up[label];
            self.label_up[label] = up;
            self.label_down[up] = label;
            self.label_up[up] = above;
            if above != NIL {
                self.label_down[above] = up;
            }
        }
        self.unlink_node(v, label);
        self.push_front(v, up);
    }

    fn push_front(&mut self, v: NodeId, label: usize) {
        let old = self.head[label];
        self.next[v] = old;
        self.prev[v] = NIL;
        if old != NIL {
            self.prev[old] = v;
        }
        self.head[label] = v;
        self.queued[v] = true;
        self.len += 1;
    }

    fn unlink_node(&mut self, v: NodeId, label: usize) {
        let (p, n) = (self.prev[v], self.next[v]);
        if p != NIL {
            self.next[p] = n;
        } else {
            self.head[label] = n;
        }
        if n != NIL {
            self.prev[n] = p;
        }
        self.next[v] = NIL;
        self.prev[v] = NIL;
        self.queued[v] = false;
        self.len -= 1;
        if self.head[label] == NIL {
            self.unlink_label(label);
        }
    }

    fn link_label(&mut self, label: usize) {
        if self.lowest == NIL || label < self.lowest {
            self.label_down[label] = NIL;
            self.label_up[label] = self.lowest;
            if self.lowest != NIL {
                self.label_down[self.lowest] = label;
            }
            self.lowest = label;
            return;
        }
        // Not reached by the diffusion itself, which only adds below the
        // lowest label; kept so the queue stays correct for arbitrary use.
        let mut below = self.lowest;
        while self.label_up[below] != NIL && self.label_up[below] < label {
            below = self.label_up[below];
        }
        let above = self.label_up[below];
        self.label_up[below] = label;
        self.label_down[label] = below;
        self.label_up[label] = above;
        if above != NIL {
            self.label_down[above] = label;
        }
    }

    fn unlink_label(&mut self, label: usize) {
        let (down, up) = (self.label_down[label], self.label_up[label]);
        if down != NIL {
            self.label_up[down] = up;
        } else {
            self.lowest = up;
        }
        if up != NIL {
            self.label_down[up] = down;
        }
        self.label_up[label] = NIL;
        self.label_down[label] = NIL;
    }

    /// Labels of queued nodes in list order (lowest label first).
    #[cfg(test)]
    pub fn labels_in_order(&self) -> Vec<(usize, NodeId)> {
        let mut out = Vec::new();
        let mut label = self.lowest;
        while label != NIL {
            let mut v = self.head[label];
            while v != NIL {
                out.push((label, v));
                v = self.next[v];
            }
            label = self.label_up[label];
        }
        out
    }
}

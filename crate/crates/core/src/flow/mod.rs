//! Maximum preflow on the Lawler expansion of a [`FlowHypergraph`].
//!
//! The expansion is never materialized. For `N` hypernodes and `m` nets the
//! simulated nodes are the hypernodes `0..N`, the in-nodes `N + e` and the
//! out-nodes `N + m + e`. Every pin `(u, e)` carries two arcs, `u -> e_in`
//! and `e_out -> u`, and every net one bridge `e_in -> e_out` of capacity
//! `ω(e)`. Only hypernodes can be terminals.

mod parallel;
mod sequential;

use std::collections::VecDeque;
use std::sync::atomic::{AtomicI64, Ordering::Relaxed};

pub use parallel::ParallelOptions;

use crate::error::{Error, Result};
use crate::network::{Capacity, FlowHypergraph, NodeId};

/// Residual arc of the expansion, identified by the flow variable it uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Arc {
    /// `u -> e_in`, forward on the pin's in-flow.
    PinIn(usize),
    /// `e_in -> u`, cancels in-flow.
    PinInRev(usize),
    /// `e_out -> u`, forward on the pin's out-flow.
    PinOut(usize),
    /// `u -> e_out`, cancels out-flow.
    PinOutRev(usize),
    Bridge(usize),
    BridgeRev(usize),
}

/// Which solver augments the flow.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    /// FIFO push-relabel.
    Sequential,
    /// Synchronous push-relabel with rounds over all active nodes.
    Parallel(ParallelOptions),
}

/// Counters of one augmentation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AugmentStats {
    pub pushes: u64,
    pub relabels: u64,
    pub global_relabels: u64,
    pub rounds: u64,
}

/// Reachability sets of a maximum preflow.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cuts {
    /// Simulated nodes reachable from the sources or from excess nodes.
    pub source_reach: Vec<bool>,
    /// Simulated nodes that reach a sink.
    pub sink_reach: Vec<bool>,
    /// Weight of the hypernodes in `source_reach`.
    pub source_weight: Capacity,
    /// Weight of the hypernodes in `sink_reach`.
    pub sink_weight: Capacity,
    /// Nets whose in-node is source reachable but whose out-node is not.
    pub source_cut_nets: Vec<usize>,
    /// Nets whose out-node reaches a sink but whose in-node does not.
    pub sink_cut_nets: Vec<usize>,
}

impl Cuts {
    pub fn source_cut_weight(&self, g: &FlowHypergraph) -> Capacity {
        self.source_cut_nets.iter().map(|&e| g.net_weight(e)).sum()
    }

    pub fn sink_cut_weight(&self, g: &FlowHypergraph) -> Capacity {
        self.sink_cut_nets.iter().map(|&e| g.net_weight(e)).sum()
    }
}

/// Preflow, distance labels and terminal sets on a flow hypergraph.
pub struct FlowState<'g> {
    g: &'g FlowHypergraph,
    hypernodes: usize,
    nets: usize,
    restricted: bool,
    unrestricted_capacity: Capacity,
    flow_in: Vec<AtomicI64>,
    flow_out: Vec<AtomicI64>,
    flow_bridge: Vec<AtomicI64>,
    excess: Vec<Capacity>,
    labels: Vec<u32>,
    is_source: Vec<bool>,
    is_sink: Vec<bool>,
    flow_value: Capacity,
}

impl Clone for FlowState<'_> {
    fn clone(&self) -> Self {
        let copy = |v: &[AtomicI64]| v.iter().map(|x| AtomicI64::new(x.load(Relaxed))).collect();
        Self {
            g: self.g,
            hypernodes: self.hypernodes,
            nets: self.nets,
            restricted: self.restricted,
            unrestricted_capacity: self.unrestricted_capacity,
            flow_in: copy(&self.flow_in),
            flow_out: copy(&self.flow_out),
            flow_bridge: copy(&self.flow_bridge),
            excess: self.excess.clone(),
            labels: self.labels.clone(),
            is_source: self.is_source.clone(),
            is_sink: self.is_sink.clone(),
            flow_value: self.flow_value,
        }
    }
}

impl<'g> FlowState<'g> {
    /// Sets up the zero flow for the terminal sets and saturates all arcs
    /// leaving the sources.
    pub fn new(g: &'g FlowHypergraph, sources: &[NodeId], sinks: &[NodeId], restricted: bool) -> Result<Self> {
        let hypernodes = g.num_nodes();
        let nets = g.num_nets();
        let n = hypernodes + 2 * nets;
        let zeros = |len: usize| (0..len).map(|_| AtomicI64::new(0)).collect::<Vec<_>>();
        let mut state = Self {
            g,
            hypernodes,
            nets,
            restricted,
            unrestricted_capacity: g.total_net_weight() + 1,
            flow_in: zeros(g.num_pins()),
            flow_out: zeros(g.num_pins()),
            flow_bridge: zeros(nets),
            excess: vec![0; n],
            labels: vec![0; n],
            is_source: vec![false; hypernodes],
            is_sink: vec![false; hypernodes],
            flow_value: 0,
        };
        for &t in sinks {
            state.is_sink[t] = true;
        }
        if sources.iter().any(|&s| state.is_sink[s]) {
            return Err(Error::Overlap);
        }
        state.grow_source(sources);
        Ok(state)
    }

    pub fn network(&self) -> &'g FlowHypergraph {
        self.g
    }

    /// Number of simulated nodes `n = N + 2m`.
    pub fn num_simulated(&self) -> usize {
        self.hypernodes + 2 * self.nets
    }

    /// Number of simulated arcs, counting each residual pair once.
    pub fn num_arcs(&self) -> usize {
        2 * self.g.num_pins() + self.nets
    }

    pub fn in_node(&self, e: usize) -> usize {
        self.hypernodes + e
    }

    pub fn out_node(&self, e: usize) -> usize {
        self.hypernodes + self.nets + e
    }

    pub fn flow_value(&self) -> Capacity {
        self.flow_value
    }

    pub fn excess(&self, x: usize) -> Capacity {
        self.excess[x]
    }

    pub fn label(&self, x: usize) -> u32 {
        self.labels[x]
    }

    pub fn is_source(&self, v: NodeId) -> bool {
        self.is_source[v]
    }

    pub fn is_sink(&self, v: NodeId) -> bool {
        self.is_sink[v]
    }

    pub fn is_terminal(&self, v: NodeId) -> bool {
        self.is_source[v] || self.is_sink[v]
    }

    fn is_source_node(&self, x: usize) -> bool {
        x < self.hypernodes && self.is_source[x]
    }

    fn is_sink_node(&self, x: usize) -> bool {
        x < self.hypernodes && self.is_sink[x]
    }

    /// Flow on the bridge of net `e`.
    pub fn bridge_flow(&self, e: usize) -> Capacity {
        self.flow_bridge[e].load(Relaxed)
    }

    fn pin_in_capacity(&self, e: usize) -> Capacity {
        if self.restricted {
            self.g.net_weight(e)
        } else {
            self.unrestricted_capacity
        }
    }

    fn infinite(&self) -> Capacity {
        self.unrestricted_capacity
    }

    pub(crate) fn residual(&self, arc: Arc, e: usize) -> Capacity {
        match arc {
            Arc::PinIn(p) => self.pin_in_capacity(e) - self.flow_in[p].load(Relaxed),
            Arc::PinInRev(p) => self.flow_in[p].load(Relaxed),
            Arc::PinOut(_) => self.infinite(),
            Arc::PinOutRev(p) => self.flow_out[p].load(Relaxed),
            Arc::Bridge(_) => self.g.net_weight(e) - self.flow_bridge[e].load(Relaxed),
            Arc::BridgeRev(_) => self.flow_bridge[e].load(Relaxed),
        }
    }

    /// Moves `delta` units along `arc`. Safe to call concurrently as long as
    /// each arc is pushed by its tail only.
    pub(crate) fn push_flow(&self, arc: Arc, delta: Capacity) {
        match arc {
            Arc::PinIn(p) => self.flow_in[p].fetch_add(delta, Relaxed),
            Arc::PinInRev(p) => self.flow_in[p].fetch_sub(delta, Relaxed),
            Arc::PinOut(p) => self.flow_out[p].fetch_add(delta, Relaxed),
            Arc::PinOutRev(p) => self.flow_out[p].fetch_sub(delta, Relaxed),
            Arc::Bridge(e) => self.flow_bridge[e].fetch_add(delta, Relaxed),
            Arc::BridgeRev(e) => self.flow_bridge[e].fetch_sub(delta, Relaxed),
        };
    }

    /// Calls `f(head, arc, net)` for every arc leaving `x`, residual or not.
    pub(crate) fn for_each_out_arc(&self, x: usize, mut f: impl FnMut(usize, Arc, usize) -> bool) {
        let (n_h, m) = (self.hypernodes, self.nets);
        if x < n_h {
            for &(e, p) in self.g.incidence(x) {
                if !f(n_h + e, Arc::PinIn(p), e) || !f(n_h + m + e, Arc::PinOutRev(p), e) {
                    return;
                }
            }
        } else if x < n_h + m {
            let e = x - n_h;
            if !f(n_h + m + e, Arc::Bridge(e), e) {
                return;
            }
            for p in self.g.pin_range(e) {
                if !f(self.g.pin_node(p), Arc::PinInRev(p), e) {
                    return;
                }
            }
        } else {
            let e = x - n_h - m;
            if !f(n_h + e, Arc::BridgeRev(e), e) {
                return;
            }
            for p in self.g.pin_range(e) {
                if !f(self.g.pin_node(p), Arc::PinOut(p), e) {
                    return;
                }
            }
        }
    }

    /// Calls `f(tail, arc, net)` for every arc entering `x`.
    fn for_each_in_arc(&self, x: usize, mut f: impl FnMut(usize, Arc, usize)) {
        let (n_h, m) = (self.hypernodes, self.nets);
        if x < n_h {
            for &(e, p) in self.g.incidence(x) {
                f(n_h + e, Arc::PinInRev(p), e);
                f(n_h + m + e, Arc::PinOut(p), e);
            }
        } else if x < n_h + m {
            let e = x - n_h;
            f(n_h + m + e, Arc::BridgeRev(e), e);
            for p in self.g.pin_range(e) {
                f(self.g.pin_node(p), Arc::PinIn(p), e);
            }
        } else {
            let e = x - n_h - m;
            f(n_h + e, Arc::Bridge(e), e);
            for p in self.g.pin_range(e) {
                f(self.g.pin_node(p), Arc::PinOutRev(p), e);
            }
        }
    }

    /// Exact distance labels by reverse residual BFS from the sinks. Sources
    /// and unreachable nodes get label `n`. Returns the nodes that are active
    /// under the new labels.
    pub fn global_relabel(&mut self) -> Vec<usize> {
        let n = self.num_simulated();
        let unreached = n as u32;
        self.labels.iter_mut().for_each(|d| *d = unreached);
        let mut queue = VecDeque::new();
        for v in 0..self.hypernodes {
            if self.is_sink[v] {
                self.labels[v] = 0;
                queue.push_back(v);
            }
        }
        while let Some(x) = queue.pop_front() {
            let next = self.labels[x] + 1;
            let mut found = Vec::new();
            self.for_each_in_arc(x, |y, arc, e| {
                if self.labels[y] == unreached && !self.is_source_node(y) && self.residual(arc, e) > 0 {
                    found.push(y);
                }
            });
            for y in found {
                if self.labels[y] == unreached {
                    self.labels[y] = next;
                    queue.push_back(y);
                }
            }
        }
        self.active_nodes()
    }

    /// Non-terminal nodes with positive excess and label below `n`.
    pub fn active_nodes(&self) -> Vec<usize> {
        let n = self.num_simulated() as u32;
        (0..self.num_simulated())
            .filter(|&x| self.excess[x] > 0 && self.labels[x] < n && !self.is_source_node(x) && !self.is_sink_node(x))
            .collect()
    }

    /// Augments the preflow to a maximum preflow with respect to the current
    /// terminal sets.
    pub fn augment(&mut self, solver: Solver, pool: Option<&rayon::ThreadPool>) -> AugmentStats {
        match solver {
            Solver::Sequential => self.augment_sequential(),
            Solver::Parallel(opts) => match pool {
                Some(pool) => pool.install(|| self.augment_parallel(opts)),
                None => self.augment_parallel(opts),
            },
        }
    }

    /// Adds `nodes` to the source set: their excess is absorbed, their
    /// outgoing arcs are saturated and their labels set to `n`.
    pub fn grow_source(&mut self, nodes: &[NodeId]) {
        let n = self.num_simulated() as u32;
        for &u in nodes {
            debug_assert!(!self.is_sink[u], "node {u} is already a sink");
            if self.is_source[u] {
                continue;
            }
            self.is_source[u] = true;
            self.excess[u] = 0;
            self.labels[u] = n;
            let mut pushes = Vec::new();
            self.for_each_out_arc(u, |y, arc, e| {
                let r = self.residual(arc, e);
                if r > 0 {
                    pushes.push((y, arc, r));
                }
                true
            });
            for (y, arc, r) in pushes {
                self.push_flow(arc, r);
                if self.is_sink_node(y) {
                    self.flow_value += r;
                } else if !self.is_source_node(y) {
                    self.excess[y] += r;
                }
            }
        }
    }

    /// Adds `nodes` to the sink set and moves their excess into the flow
    /// value. Labels become stale; the next augmentation recomputes them.
    pub fn grow_sink(&mut self, nodes: &[NodeId]) {
        for &v in nodes {
            debug_assert!(!self.is_source[v], "node {v} is already a source");
            if self.is_sink[v] {
                continue;
            }
            self.is_sink[v] = true;
            self.flow_value += self.excess[v];
            self.excess[v] = 0;
            self.labels[v] = 0;
        }
    }

    fn unbounded_residual(&self, arc: Arc, e: usize) -> Capacity {
        match arc {
            Arc::PinIn(_) => self.infinite(),
            _ => self.residual(arc, e),
        }
    }

    /// Extends `reach` by everything reachable from `seeds` in the residual
    /// graph. Returns the hypernodes newly marked.
    pub fn source_closure(&self, seeds: &[usize], reach: &mut [bool]) -> Vec<NodeId> {
        let mut added = Vec::new();
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &x in seeds {
            if !reach[x] {
                reach[x] = true;
                queue.push_back(x);
            }
        }
        while let Some(x) = queue.pop_front() {
            if x < self.hypernodes {
                added.push(x);
            }
            self.for_each_out_arc(x, |y, arc, e| {
                if !reach[y] && self.unbounded_residual(arc, e) > 0 {
                    reach[y] = true;
                    queue.push_back(y);
                }
                true
            });
        }
        added
    }

    /// Extends `reach` by everything that reaches `seeds` in the residual
    /// graph. Returns the hypernodes newly marked.
    pub fn sink_closure(&self, seeds: &[usize], reach: &mut [bool]) -> Vec<NodeId> {
        let mut added = Vec::new();
        let mut queue: VecDeque<usize> = VecDeque::new();
        for &x in seeds {
            if !reach[x] {
                reach[x] = true;
                queue.push_back(x);
            }
        }
        while let Some(x) = queue.pop_front() {
            if x < self.hypernodes {
                added.push(x);
            }
            self.for_each_in_arc(x, |y, arc, e| {
                if !reach[y] && self.unbounded_residual(arc, e) > 0 {
                    reach[y] = true;
                    queue.push_back(y);
                }
            });
        }
        added
    }

    /// Source-side and sink-side reachability of the current preflow.
    ///
    /// The forward search starts at the sources and at every non-sink node
    /// holding excess. Pin-to-net arcs are treated as unbounded in both
    /// searches, so every in-node of a reached hypernode is reached as well
    /// and the cut nets are exactly the nets with in- and out-node on
    /// different sides.
    pub fn derive_cuts(&self) -> Cuts {
        let n = self.num_simulated();
        let seeds: Vec<usize> = (0..n)
            .filter(|&x| self.is_source_node(x) || (!self.is_sink_node(x) && self.excess[x] > 0))
            .collect();
        let mut source_reach = vec![false; n];
        let source_nodes = self.source_closure(&seeds, &mut source_reach);

        let sinks: Vec<usize> = (0..self.hypernodes).filter(|&v| self.is_sink[v]).collect();
        let mut sink_reach = vec![false; n];
        let sink_nodes = self.sink_closure(&sinks, &mut sink_reach);

        let weight = |nodes: &[NodeId]| -> Capacity { nodes.iter().map(|&v| self.g.node_weight(v)).sum() };
        let source_cut_nets = (0..self.nets)
            .filter(|&e| source_reach[self.in_node(e)] && !source_reach[self.out_node(e)])
            .collect();
        let sink_cut_nets = (0..self.nets)
            .filter(|&e| sink_reach[self.out_node(e)] && !sink_reach[self.in_node(e)])
            .collect();
        Cuts {
            source_weight: weight(&source_nodes),
            sink_weight: weight(&sink_nodes),
            source_reach,
            sink_reach,
            source_cut_nets,
            sink_cut_nets,
        }
    }

    /// Checks capacity constraints, excess bookkeeping and the flow value.
    pub fn validate_preflow(&self) -> std::result::Result<(), String> {
        let n = self.num_simulated();
        let mut balance = vec![0 as Capacity; n];
        for e in 0..self.nets {
            let fb = self.bridge_flow(e);
            if fb < 0 || fb > self.g.net_weight(e) {
                return Err(format!("bridge of net {e} carries {fb}"));
            }
            balance[self.in_node(e)] -= fb;
            balance[self.out_node(e)] += fb;
            for p in self.g.pin_range(e) {
                let u = self.g.pin_node(p);
                let fi = self.flow_in[p].load(Relaxed);
                let fo = self.flow_out[p].load(Relaxed);
                if fi < 0 || fi > self.pin_in_capacity(e) {
                    return Err(format!("pin {p} of net {e} carries in-flow {fi}"));
                }
                if fo < 0 {
                    return Err(format!("pin {p} of net {e} carries out-flow {fo}"));
                }
                balance[u] += fo - fi;
                balance[self.in_node(e)] += fi;
                balance[self.out_node(e)] -= fo;
            }
        }
        let mut absorbed = 0;
        for x in 0..n {
            if self.is_source_node(x) {
                continue;
            }
            if self.is_sink_node(x) {
                absorbed += balance[x];
                continue;
            }
            if self.excess[x] < 0 {
                return Err(format!("node {x} has negative excess {}", self.excess[x]));
            }
            if balance[x] != self.excess[x] {
                return Err(format!("node {x} stores excess {} but receives {}", self.excess[x], balance[x]));
            }
        }
        if absorbed != self.flow_value {
            return Err(format!("sinks absorb {absorbed} but the flow value is {}", self.flow_value));
        }
        Ok(())
    }

    /// Residual arcs `(x, y)` with `d(x) > d(y) + 1`, ignoring arcs leaving
    /// sources.
    pub fn label_violations(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for x in 0..self.num_simulated() {
            if self.is_source_node(x) {
                continue;
            }
            self.for_each_out_arc(x, |y, arc, e| {
                if self.residual(arc, e) > 0 && self.labels[x] > self.labels[y] + 1 {
                    out.push((x, y));
                }
                true
            });
        }
        out
    }

    /// Whether no active node remains.
    pub fn is_maximal(&self) -> bool {
        self.active_nodes().is_empty()
    }
}

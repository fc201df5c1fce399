//! Contracted flow hypergraph of a block pair.
//!
//! Region vertices keep their identity; the rest of the source block is
//! contracted into the source `s` and the rest of the sink block into the
//! sink `t`. Single-pin nets and nets containing both `s` and `t` are
//! dropped, identical nets are merged into one representative carrying the
//! summed weight.

use std::collections::{HashMap, HashSet};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::hypergraph::Hypergraph;
use crate::partition::PartitionState;
use crate::region::Region;
use crate::types::{BlockId, NetId, VertexId};

/// Node of a [`FlowHypergraph`].
pub type NodeId = usize;
/// Flow capacities and node weights inside flow problems.
pub type Capacity = i64;

pub const SOURCE: NodeId = 0;
pub const SINK: NodeId = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Source,
    Sink,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Source => Side::Sink,
            Side::Sink => Side::Source,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstructionAlgorithm {
    /// Scan the full pin list of every net touching the region.
    NetScan,
    /// Sort `(net, node)` pairs of region vertices and compare pin counts.
    NodeSort,
}

/// Picks [`ConstructionAlgorithm::NodeSort`] for sparse hypergraphs
/// (`|E| / |V| <= 0.5`) or large average net size (`>= 100`).
pub fn select_construction(h: &Hypergraph) -> ConstructionAlgorithm {
    let density = h.num_nets() as f64 / h.num_vertices().max(1) as f64;
    if density <= 0.5 || h.average_net_size() >= 100.0 {
        ConstructionAlgorithm::NodeSort
    } else {
        ConstructionAlgorithm::NetScan
    }
}

/// `Σ v²` over the pins, with wrap-around arithmetic.
pub fn fingerprint(pins: &[NodeId]) -> u64 {
    pins.iter()
        .fold(0u64, |acc, &v| acc.wrapping_add((v as u64).wrapping_mul(v as u64)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeInfo {
    pub weight: Capacity,
    /// Vertex of the input hypergraph, `None` for `s` and `t`.
    pub original: Option<VertexId>,
    /// BFS layer from the region; zero for the terminals.
    pub distance: u32,
    /// Side of the node in the partition the network was built from.
    pub origin: Side,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ConstructOptions<'a> {
    /// Merge identical nets.
    pub skip_merging: bool,
    /// Build pin lists in parallel on this pool.
    pub pool: Option<&'a rayon::ThreadPool>,
}

/// Hypergraph flow problem with terminals `s = 0` and `t = 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlowHypergraph {
    nodes: Vec<NodeInfo>,
    net_offsets: Vec<usize>,
    pins: Vec<NodeId>,
    net_weights: Vec<Capacity>,
    node_offsets: Vec<usize>,
    /// `(net, pin index)` per node, ordered by net.
    incidence: Vec<(usize, usize)>,
    source_block: BlockId,
    sink_block: BlockId,
    initial_cut: Capacity,
    dropped_weight: Capacity,
}

impl FlowHypergraph {
    /// Builds a network from raw nets over `nodes`. Pins are deduplicated and
    /// sorted, single-pin and `s`-`t` nets are dropped, and identical nets
    /// are merged unless `skip_merging` is set.
    pub fn from_nets(
        nodes: Vec<NodeInfo>,
        nets: Vec<(Vec<NodeId>, Capacity)>,
        skip_merging: bool,
        pool: Option<&rayon::ThreadPool>,
    ) -> Self {
        assert!(nodes.len() >= 2, "a flow hypergraph needs a source and a sink");
        let mut dropped_weight = 0;
        let mut kept: Vec<(Vec<NodeId>, Capacity)> = Vec::with_capacity(nets.len());
        for (mut pins, w) in nets {
            pins.sort_unstable();
            pins.dedup();
            debug_assert!(pins.iter().all(|&v| v < nodes.len()));
            if pins.len() < 2 {
                continue;
            }
            if pins[0] == SOURCE && pins[1] == SINK {
                dropped_weight += w;
                continue;
            }
            kept.push((pins, w));
        }

        let kept = if skip_merging {
            kept
        } else if let Some(pool) = pool {
            pool.install(|| merge_identical_concurrent(kept))
        } else {
            merge_identical(kept)
        };

        let mut net_offsets = Vec::with_capacity(kept.len() + 1);
        net_offsets.push(0);
        let mut pins = Vec::with_capacity(kept.iter().map(|(p, _)| p.len()).sum());
        let mut net_weights = Vec::with_capacity(kept.len());
        for (p, w) in kept {
            pins.extend_from_slice(&p);
            net_offsets.push(pins.len());
            net_weights.push(w);
        }

        let mut degree = vec![0usize; nodes.len()];
        for &v in &pins {
            degree[v] += 1;
        }
        let mut node_offsets = Vec::with_capacity(nodes.len() + 1);
        node_offsets.push(0);
        for d in &degree {
            node_offsets.push(node_offsets.last().unwrap() + d);
        }
        let mut cursor = node_offsets[..nodes.len()].to_vec();
        let mut incidence = vec![(0, 0); pins.len()];
        for e in 0..net_weights.len() {
            for p in net_offsets[e]..net_offsets[e + 1] {
                let v = pins[p];
                incidence[cursor[v]] = (e, p);
                cursor[v] += 1;
            }
        }

        let mut g = Self {
            nodes,
            net_offsets,
            pins,
            net_weights,
            node_offsets,
            incidence,
            source_block: 0,
            sink_block: 1,
            initial_cut: 0,
            dropped_weight,
        };
        g.initial_cut = g
            .nets()
            .filter(|&e| {
                let mut sides = g.pins(e).iter().map(|&v| g.nodes[v].origin);
                let first = sides.next();
                sides.any(|s| Some(s) != first)
            })
            .map(|e| g.net_weights[e])
            .sum();
        g
    }

    /// Convenience constructor for hand-built networks: node weights are
    /// given for `s`, `t` and every further node; inner nodes are assigned to
    /// the source side of the initial bipartition.
    pub fn from_weights(node_weights: &[Capacity], nets: &[(&[NodeId], Capacity)]) -> Self {
        let nodes = node_weights
            .iter()
            .enumerate()
            .map(|(v, &weight)| NodeInfo {
                weight,
                original: None,
                distance: 0,
                origin: if v == SINK { Side::Sink } else { Side::Source },
            })
            .collect();
        let nets = nets.iter().map(|(p, w)| (p.to_vec(), *w)).collect();
        Self::from_nets(nodes, nets, false, None)
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_nets(&self) -> usize {
        self.net_weights.len()
    }

    pub fn num_pins(&self) -> usize {
        self.pins.len()
    }

    pub fn nodes(&self) -> std::ops::Range<NodeId> {
        0..self.num_nodes()
    }

    pub fn nets(&self) -> std::ops::Range<usize> {
        0..self.num_nets()
    }

    pub fn pins(&self, e: usize) -> &[NodeId] {
        &self.pins[self.net_offsets[e]..self.net_offsets[e + 1]]
    }

    /// Global pin index range of net `e`, used to address per-pin flow.
    pub fn pin_range(&self, e: usize) -> std::ops::Range<usize> {
        self.net_offsets[e]..self.net_offsets[e + 1]
    }

    pub fn pin_node(&self, pin: usize) -> NodeId {
        self.pins[pin]
    }

    /// `(net, pin index)` pairs of the nets incident to `v`.
    pub fn incidence(&self, v: NodeId) -> &[(usize, usize)] {
        &self.incidence[self.node_offsets[v]..self.node_offsets[v + 1]]
    }

    pub fn net_weight(&self, e: usize) -> Capacity {
        self.net_weights[e]
    }

    pub fn total_net_weight(&self) -> Capacity {
        self.net_weights.iter().sum()
    }

    pub fn node(&self, v: NodeId) -> &NodeInfo {
        &self.nodes[v]
    }

    pub fn node_weight(&self, v: NodeId) -> Capacity {
        self.nodes[v].weight
    }

    pub fn total_node_weight(&self) -> Capacity {
        self.nodes.iter().map(|n| n.weight).sum()
    }

    pub fn source_block(&self) -> BlockId {
        self.source_block
    }

    pub fn sink_block(&self) -> BlockId {
        self.sink_block
    }

    /// Weight of the nets cut by the partition the network was built from.
    pub fn initial_cut(&self) -> Capacity {
        self.initial_cut
    }

    /// Weight of dropped nets that contained both terminals.
    pub fn dropped_weight(&self) -> Capacity {
        self.dropped_weight
    }

    /// Cut weight of a bipartition of the nodes.
    pub fn cut_weight(&self, side: impl Fn(NodeId) -> Side) -> Capacity {
        self.nets()
            .filter(|&e| {
                let pins = self.pins(e);
                let first = side(pins[0]);
                pins[1..].iter().any(|&v| side(v) != first)
            })
            .map(|e| self.net_weights[e])
            .sum()
    }

    /// Multiset of `(pins, weight)` in canonical order, for comparisons.
    pub fn net_multiset(&self) -> Vec<(Vec<NodeId>, Capacity)> {
        let mut out: Vec<_> = self.nets().map(|e| (self.pins(e).to_vec(), self.net_weights[e])).collect();
        out.sort();
        out
    }
}

fn merge_identical(nets: Vec<(Vec<NodeId>, Capacity)>) -> Vec<(Vec<NodeId>, Capacity)> {
    let mut table: HashMap<(u64, usize), Vec<usize>> = HashMap::new();
    let mut out: Vec<(Vec<NodeId>, Capacity)> = Vec::with_capacity(nets.len());
    for (pins, w) in nets {
        let bucket = table.entry((fingerprint(&pins), pins.len())).or_default();
        if let Some(&rep) = bucket.iter().find(|&&r| out[r].0 == pins) {
            out[rep].1 += w;
        } else {
            bucket.push(out.len());
            out.push((pins, w));
        }
    }
    out
}

/// Identical-net detection over a chained hash table with locked buckets.
/// Nets are inserted concurrently; each bucket keeps its representatives.
fn merge_identical_concurrent(nets: Vec<(Vec<NodeId>, Capacity)>) -> Vec<(Vec<NodeId>, Capacity)> {
    const BUCKETS: usize = 1024;
    let table: Vec<Mutex<Vec<(u64, usize, Capacity)>>> = (0..BUCKETS).map(|_| Mutex::new(Vec::new())).collect();
    let fingerprints: Vec<u64> = nets.par_iter().map(|(p, _)| fingerprint(p)).collect();
    (0..nets.len()).into_par_iter().for_each(|i| {
        let fp = fingerprints[i];
        let mut bucket = table[(fp as usize) % BUCKETS].lock().unwrap();
        match bucket
            .iter_mut()
            .find(|(f, rep, _)| *f == fp && nets[*rep].0 == nets[i].0)
        {
            Some(entry) => entry.2 += nets[i].1,
            None => bucket.push((fp, i, nets[i].1)),
        }
    });
    let mut reps: Vec<(usize, Capacity)> = table
        .into_iter()
        .flat_map(|b| b.into_inner().unwrap())
        .map(|(_, rep, w)| (rep, w))
        .collect();
    // keep the input order of the representatives
    reps.sort_unstable();
    let mut nets: Vec<Option<(Vec<NodeId>, Capacity)>> = nets.into_iter().map(Some).collect();
    reps.into_iter()
        .map(|(rep, w)| (nets[rep].take().unwrap().0, w))
        .collect()
}

/// Network node layout shared by both construction algorithms:
/// `s`, `t`, then `B_1`, then `B_2`.
fn region_nodes(region: &Region) -> (Vec<NodeInfo>, HashMap<VertexId, NodeId>) {
    let mut nodes = Vec::with_capacity(region.len() + 2);
    nodes.push(NodeInfo {
        weight: (region.source_block_weight - region.source_weight) as Capacity,
        original: None,
        distance: 0,
        origin: Side::Source,
    });
    nodes.push(NodeInfo {
        weight: (region.sink_block_weight - region.sink_weight) as Capacity,
        original: None,
        distance: 0,
        origin: Side::Sink,
    });
    let mut map = HashMap::with_capacity(region.len());
    for (side, list) in [(Side::Source, &region.source_side), (Side::Sink, &region.sink_side)] {
        for &(v, distance) in list {
            map.insert(v, nodes.len());
            nodes.push(NodeInfo { weight: 0, original: Some(v), distance, origin: side });
        }
    }
    (nodes, map)
}

fn fill_weights(h: &Hypergraph, nodes: &mut [NodeInfo]) {
    for n in nodes.iter_mut() {
        if let Some(v) = n.original {
            n.weight = h.vertex_weight(v) as Capacity;
        }
    }
}

fn nets_touching(h: &Hypergraph, region: &Region) -> Vec<NetId> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for v in region.vertices() {
        for &e in h.incident_nets(v) {
            if seen.insert(e) {
                out.push(e);
            }
        }
    }
    out
}

/// Builds the network by scanning every pin of every net touching the
/// region. Work is linear in the total size of those nets.
pub fn construct_net_scan(
    h: &Hypergraph,
    p: &PartitionState,
    region: &Region,
    opts: ConstructOptions<'_>,
) -> FlowHypergraph {
    let (mut nodes, map) = region_nodes(region);
    fill_weights(h, &mut nodes);
    let nets = nets_touching(h, region);
    let build_net = |&e: &NetId| {
        let mut pins = Vec::with_capacity(h.net_size(e));
        let (mut has_source, mut has_sink) = (false, false);
        for &v in h.pins(e) {
            if let Some(&id) = map.get(&v) {
                pins.push(id);
            } else {
                let b = p.block(v);
                has_source |= b == region.source_block;
                has_sink |= b == region.sink_block;
            }
        }
        if has_source {
            pins.push(SOURCE);
        }
        if has_sink {
            pins.push(SINK);
        }
        (pins, h.net_weight(e) as Capacity)
    };
    let raw: Vec<(Vec<NodeId>, Capacity)> = match opts.pool {
        // per-thread buffers concatenated in order by rayon's collect
        Some(pool) => pool.install(|| nets.par_iter().map(build_net).collect()),
        None => nets.iter().map(build_net).collect(),
    };
    finish(nodes, raw, region, opts)
}

/// Builds the network from sorted `(net, node)` pairs of the region
/// vertices; `s` / `t` are added when a net has pins of the source / sink
/// block outside the region. Work is `O(p log p)` for `p` region pins.
pub fn construct_node_sort(
    h: &Hypergraph,
    p: &PartitionState,
    region: &Region,
    opts: ConstructOptions<'_>,
) -> FlowHypergraph {
    let (mut nodes, _) = region_nodes(region);
    fill_weights(h, &mut nodes);

    let build_bucket = |mut pairs: Vec<(NetId, NodeId)>| -> Vec<(Vec<NodeId>, Capacity)> {
        pairs.sort_unstable();
        let mut out = Vec::new();
        let mut i = 0;
        while i < pairs.len() {
            let e = pairs[i].0;
            let mut j = i;
            let mut pins = Vec::new();
            let (mut in_source, mut in_sink) = (0u32, 0u32);
            while j < pairs.len() && pairs[j].0 == e {
                let id = pairs[j].1;
                match nodes[id].origin {
                    Side::Source => in_source += 1,
                    Side::Sink => in_sink += 1,
                }
                pins.push(id);
                j += 1;
            }
            if in_source < p.pin_count(e, region.source_block) {
                pins.push(SOURCE);
            }
            if in_sink < p.pin_count(e, region.sink_block) {
                pins.push(SINK);
            }
            out.push((pins, h.net_weight(e) as Capacity));
            i = j;
        }
        out
    };

    let node_ids = 2..nodes.len();
    let raw = match opts.pool {
        Some(pool) => pool.install(|| {
            let buckets = rayon::current_num_threads().max(1) * 4;
            let sharded: Vec<Mutex<Vec<(NetId, NodeId)>>> = (0..buckets).map(|_| Mutex::new(Vec::new())).collect();
            node_ids.clone().into_par_iter().for_each(|id| {
                let v = nodes[id].original.unwrap();
                for &e in h.incident_nets(v) {
                    sharded[e % buckets].lock().unwrap().push((e, id));
                }
            });
            sharded
                .into_par_iter()
                .map(|m| build_bucket(m.into_inner().unwrap()))
                .flatten()
                .collect()
        }),
        None => {
            let mut pairs = Vec::new();
            for id in node_ids {
                let v = nodes[id].original.unwrap();
                pairs.extend(h.incident_nets(v).iter().map(|&e| (e, id)));
            }
            build_bucket(pairs)
        }
    };
    finish(nodes, raw, region, opts)
}

fn finish(
    nodes: Vec<NodeInfo>,
    raw: Vec<(Vec<NodeId>, Capacity)>,
    region: &Region,
    opts: ConstructOptions<'_>,
) -> FlowHypergraph {
    let mut g = FlowHypergraph::from_nets(nodes, raw, opts.skip_merging, opts.pool);
    g.source_block = region.source_block;
    g.sink_block = region.sink_block;
    g
}

/// Builds the network with the given algorithm.
pub fn construct(
    algorithm: ConstructionAlgorithm,
    h: &Hypergraph,
    p: &PartitionState,
    region: &Region,
    opts: ConstructOptions<'_>,
) -> FlowHypergraph {
    match algorithm {
        ConstructionAlgorithm::NetScan => construct_net_scan(h, p, region, opts),
        ConstructionAlgorithm::NodeSort => construct_node_sort(h, p, region, opts),
    }
}

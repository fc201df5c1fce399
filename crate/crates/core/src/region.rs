//! Size-constrained, distance-bounded region around the cut of a block pair.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::partition::PartitionState;
use crate::types::{BlockId, NetId, VertexId, Weight};

/// Region `B = B_1 ∪ B_2` with `B_1 ⊆ V_i` and `B_2 ⊆ V_j`.
///
/// Each vertex carries its BFS layer, starting at 1 for boundary vertices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Region {
    pub source_block: BlockId,
    pub sink_block: BlockId,
    /// `(vertex, distance)` pairs of `B_1` in insertion order.
    pub source_side: Vec<(VertexId, u32)>,
    /// `(vertex, distance)` pairs of `B_2` in insertion order.
    pub sink_side: Vec<(VertexId, u32)>,
    pub source_weight: Weight,
    pub sink_weight: Weight,
    /// Weights of the two blocks as observed when the region was grown.
    pub source_block_weight: Weight,
    pub sink_block_weight: Weight,
}

impl Region {
    pub fn is_empty(&self) -> bool {
        self.source_side.is_empty() && self.sink_side.is_empty()
    }

    pub fn len(&self) -> usize {
        self.source_side.len() + self.sink_side.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.source_side.iter().chain(&self.sink_side).map(|&(v, _)| v)
    }
}

/// Upper bound on the weight of the region part grown inside `own` block:
/// `(1 + αε) * ceil((c(V_own) + c(V_other)) / 2) - c(V_other)`.
pub fn region_weight_bound(own: Weight, other: Weight, alpha: f64, epsilon: f64) -> f64 {
    let half = (own + other).div_ceil(2);
    (1.0 + alpha * epsilon) * half as f64 - other as f64
}

/// Grows the region of the pair `(source_block, sink_block)` with two
/// breadth-first searches starting at the boundary vertices of the given cut
/// nets. A vertex is added while the side's weight bound holds and its
/// distance does not exceed `max_distance`; vertices that do not fit are
/// skipped.
pub fn grow_region(
    h: &Hypergraph,
    p: &PartitionState,
    source_block: BlockId,
    sink_block: BlockId,
    cut_nets: &[NetId],
    alpha: f64,
    max_distance: u32,
) -> Result<Region> {
    let live: Vec<NetId> = cut_nets
        .iter()
        .copied()
        .filter(|&e| p.pin_count(e, source_block) > 0 && p.pin_count(e, sink_block) > 0)
        .collect();
    if live.is_empty() {
        return Err(Error::EmptyRegion(source_block, sink_block));
    }

    let source_block_weight = p.block_weight(source_block);
    let sink_block_weight = p.block_weight(sink_block);
    let eps = p.epsilon();
    let source_bound = region_weight_bound(source_block_weight, sink_block_weight, alpha, eps);
    let sink_bound = region_weight_bound(sink_block_weight, source_block_weight, alpha, eps);

    let (source_side, source_weight) = bfs(h, p, source_block, &live, source_bound, max_distance);
    let (sink_side, sink_weight) = bfs(h, p, sink_block, &live, sink_bound, max_distance);

    Ok(Region {
        source_block,
        sink_block,
        source_side,
        sink_side,
        source_weight,
        sink_weight,
        source_block_weight,
        sink_block_weight,
    })
}

fn bfs(
    h: &Hypergraph,
    p: &PartitionState,
    block: BlockId,
    cut_nets: &[NetId],
    bound: f64,
    max_distance: u32,
) -> (Vec<(VertexId, u32)>, Weight) {
    let mut visited: HashMap<VertexId, u32> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut out = Vec::new();
    let mut weight: Weight = 0;
    if max_distance == 0 {
        return (out, weight);
    }

    let mut try_add = |v: VertexId, d: u32, visited: &mut HashMap<VertexId, u32>, queue: &mut VecDeque<_>| {
        if visited.contains_key(&v) || p.block(v) != block {
            return;
        }
        let w = h.vertex_weight(v);
        if (weight + w) as f64 > bound {
            return;
        }
        visited.insert(v, d);
        weight += w;
        out.push((v, d));
        queue.push_back((v, d));
    };

    for &e in cut_nets {
        for &v in h.pins(e) {
            try_add(v, 1, &mut visited, &mut queue);
        }
    }
    while let Some((u, d)) = queue.pop_front() {
        if d >= max_distance {
            continue;
        }
        for &e in h.incident_nets(u) {
            for &v in h.pins(e) {
                try_add(v, d + 1, &mut visited, &mut queue);
            }
        }
    }
    (out, weight)
}

//! Greedy initial partition for end-to-end runs without an input partition.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::partition::{max_block_weight, PartitionState};
use crate::types::BlockId;

/// Grows blocks one after another by BFS from random start vertices until
/// each reaches `ceil(c(V)/k)`; leftover vertices go to the lightest block
/// that still fits under `L_max`, heaviest first.
pub fn seed_partition(h: &Hypergraph, k: usize, epsilon: f64, seed: u64) -> Result<PartitionState> {
    if k == 0 {
        return Err(Error::InvalidPartition("k must be at least 1".into()));
    }
    let total = h.total_vertex_weight();
    let max = max_block_weight(total, k, epsilon);
    if let Some(v) = h.vertices().find(|&v| h.vertex_weight(v) > max) {
        return Err(Error::BalanceInfeasible { vertex: v, weight: h.vertex_weight(v), max_block_weight: max });
    }
    let target = total.div_ceil(k as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = h.vertices().collect();
    order.shuffle(&mut rng);

    const UNASSIGNED: BlockId = BlockId::MAX;
    let mut block = vec![UNASSIGNED; h.num_vertices()];
    let mut weights = vec![0u64; k];
    let mut starts = order.iter();
    for b in 0..k.saturating_sub(1) {
        let mut queue = VecDeque::new();
        while weights[b] < target {
            let v = match queue.pop_front() {
                Some(v) => v,
                None => match starts.find(|&&v| block[v] == UNASSIGNED) {
                    Some(&v) => v,
                    None => break,
                },
            };
            if block[v] != UNASSIGNED || weights[b] + h.vertex_weight(v) > target {
                continue;
            }
            block[v] = b;
            weights[b] += h.vertex_weight(v);
            for &e in h.incident_nets(v) {
                queue.extend(h.pins(e).iter().copied().filter(|&u| block[u] == UNASSIGNED));
            }
        }
    }

    let mut rest: Vec<usize> = h.vertices().filter(|&v| block[v] == UNASSIGNED).collect();
    rest.sort_by_key(|&v| std::cmp::Reverse(h.vertex_weight(v)));
    for v in rest {
        let w = h.vertex_weight(v);
        // the last block collects what is left, then the lightest fitting block
        let last = k - 1;
        let b = if weights[last] + w <= target {
            last
        } else {
            (0..k)
                .filter(|&b| weights[b] + w <= max)
                .min_by_key(|&b| weights[b])
                .ok_or(Error::PlacementInfeasible { k, max_block_weight: max })?
        };
        block[v] = b;
        weights[b] += w;
    }
    PartitionState::new(h, k, epsilon, block)
}

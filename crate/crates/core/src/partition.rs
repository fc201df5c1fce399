//! Mutable k-way partition with concurrent pin-count bookkeeping.

use std::collections::HashMap;
use std::sync::atomic::{AtomicU32, AtomicU64, AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::error::{Error, Result};
use crate::hypergraph::Hypergraph;
use crate::quotient::QuotientGraph;
use crate::types::{BlockId, Gain, NetId, VertexId, Weight};

/// Maximum block weight `L_max = (1 + ε) * ceil(c(V) / k)`, rounded down to
/// the next integer since all weights are integral.
pub fn max_block_weight(total_weight: Weight, k: usize, epsilon: f64) -> Weight {
    let perfect = total_weight.div_ceil(k.max(1) as u64);
    // the small slack absorbs representation error, e.g. 1.07 * 100
    ((1.0 + epsilon) * perfect as f64 + 1e-9).floor() as Weight
}

/// A k-way partition `Π` of a hypergraph together with block weights,
/// per-net per-block pin counts `Φ(e, V_i)` and connectivities `λ(e)`.
///
/// Single-vertex moves update all counters with atomic read-modify-write
/// operations so that readers never observe torn values. Move sequences are
/// applied one at a time under [`PartitionState::apply_move_sequence`].
#[derive(Debug)]
pub struct PartitionState {
    k: usize,
    epsilon: f64,
    max_block_weight: Weight,
    part: Vec<AtomicUsize>,
    block_weights: Vec<AtomicU64>,
    pin_counts: Vec<AtomicU32>,
    connectivity: Vec<AtomicU32>,
    apply_lock: Mutex<()>,
}

impl Clone for PartitionState {
    fn clone(&self) -> Self {
        let load32 = |a: &AtomicU32| AtomicU32::new(a.load(Ordering::Relaxed));
        Self {
            k: self.k,
            epsilon: self.epsilon,
            max_block_weight: self.max_block_weight,
            part: self.part.iter().map(|a| AtomicUsize::new(a.load(Ordering::Relaxed))).collect(),
            block_weights: self
                .block_weights
                .iter()
                .map(|a| AtomicU64::new(a.load(Ordering::Relaxed)))
                .collect(),
            pin_counts: self.pin_counts.iter().map(load32).collect(),
            connectivity: self.connectivity.iter().map(load32).collect(),
            apply_lock: Mutex::new(()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Move {
    pub vertex: VertexId,
    pub from: BlockId,
    pub to: BlockId,
}

/// Ordered list of moves plus the gain the producer expects.
///
/// The expected gain is advisory; the gain computed while applying the moves
/// is authoritative.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct MoveSequence {
    pub moves: Vec<Move>,
    pub expected_gain: Gain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ApplyOutcome {
    /// Moves were applied. `gain >= 0`; `dropped` moves referred to vertices
    /// that were no longer in their expected block.
    Applied { gain: Gain, dropped: usize },
    /// Moves were applied, degraded the metric, and were undone.
    Reverted { gain: Gain },
    /// Applying the moves would overload a block; nothing was changed.
    BalanceViolation,
}

impl PartitionState {
    pub fn new(h: &Hypergraph, k: usize, epsilon: f64, assignment: Vec<BlockId>) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidPartition("k must be at least 1".into()));
        }
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidPartition(format!("epsilon {epsilon} must be finite and non-negative")));
        }
        if assignment.len() != h.num_vertices() {
            return Err(Error::InvalidPartition(format!(
                "{} block ids for {} vertices",
                assignment.len(),
                h.num_vertices()
            )));
        }
        if let Some(v) = assignment.iter().position(|&b| b >= k) {
            return Err(Error::InvalidPartition(format!(
                "vertex {v} assigned to block {} but k = {k}",
                assignment[v]
            )));
        }

        let mut block_weights = vec![0u64; k];
        for v in h.vertices() {
            block_weights[assignment[v]] += h.vertex_weight(v);
        }
        let mut pin_counts = vec![0u32; h.num_nets() * k];
        let mut connectivity = vec![0u32; h.num_nets()];
        for e in h.nets() {
            for &v in h.pins(e) {
                let slot = &mut pin_counts[e * k + assignment[v]];
                if *slot == 0 {
                    connectivity[e] += 1;
                }
                *slot += 1;
            }
        }

        Ok(Self {
            k,
            epsilon,
            max_block_weight: max_block_weight(h.total_vertex_weight(), k, epsilon),
            part: assignment.into_iter().map(AtomicUsize::new).collect(),
            block_weights: block_weights.into_iter().map(AtomicU64::new).collect(),
            pin_counts: pin_counts.into_iter().map(AtomicU32::new).collect(),
            connectivity: connectivity.into_iter().map(AtomicU32::new).collect(),
            apply_lock: Mutex::new(()),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn max_block_weight(&self) -> Weight {
        self.max_block_weight
    }

    pub fn num_vertices(&self) -> usize {
        self.part.len()
    }

    pub fn block(&self, v: VertexId) -> BlockId {
        self.part[v].load(Ordering::Acquire)
    }

    pub fn block_weight(&self, b: BlockId) -> Weight {
        self.block_weights[b].load(Ordering::Acquire)
    }

    pub fn block_weights(&self) -> Vec<Weight> {
        (0..self.k).map(|b| self.block_weight(b)).collect()
    }

    /// `Φ(e, V_b)`.
    pub fn pin_count(&self, e: NetId, b: BlockId) -> u32 {
        self.pin_counts[e * self.k + b].load(Ordering::Acquire)
    }

    /// `λ(e)`.
    pub fn connectivity(&self, e: NetId) -> u32 {
        self.connectivity[e].load(Ordering::Acquire)
    }

    /// `Λ(e)`: the blocks containing at least one pin of `e`.
    pub fn connectivity_set(&self, e: NetId) -> impl Iterator<Item = BlockId> + '_ {
        (0..self.k).filter(move |&b| self.pin_count(e, b) > 0)
    }

    pub fn assignment(&self) -> Vec<BlockId> {
        (0..self.num_vertices()).map(|v| self.block(v)).collect()
    }

    pub fn is_balanced(&self) -> bool {
        (0..self.k).all(|b| self.block_weight(b) <= self.max_block_weight)
    }

    /// `max_i c(V_i) / ceil(c(V) / k) - 1`.
    pub fn imbalance(&self, h: &Hypergraph) -> f64 {
        let perfect = h.total_vertex_weight().div_ceil(self.k as u64).max(1);
        let heaviest = (0..self.k).map(|b| self.block_weight(b)).max().unwrap_or(0);
        heaviest as f64 / perfect as f64 - 1.0
    }

    /// Moves `v` from `from` to `to`, updating all counters atomically.
    ///
    /// Returns `false` without changing anything if `v` is not in `from`.
    /// `on_net` is invoked for every incident net with the pin counts of the
    /// two blocks after the move.
    pub fn change_node_part(
        &self,
        h: &Hypergraph,
        v: VertexId,
        from: BlockId,
        to: BlockId,
        mut on_net: impl FnMut(NetId, u32, u32),
    ) -> bool {
        if from == to
            || self.part[v]
                .compare_exchange(from, to, Ordering::AcqRel, Ordering::Acquire)
                .is_err()
        {
            return false;
        }
        let w = h.vertex_weight(v);
        self.block_weights[to].fetch_add(w, Ordering::AcqRel);
        self.block_weights[from].fetch_sub(w, Ordering::AcqRel);
        for &e in h.incident_nets(v) {
            let from_after = self.pin_counts[e * self.k + from].fetch_sub(1, Ordering::AcqRel) - 1;
            if from_after == 0 {
                self.connectivity[e].fetch_sub(1, Ordering::AcqRel);
            }
            let to_after = self.pin_counts[e * self.k + to].fetch_add(1, Ordering::AcqRel) + 1;
            if to_after == 1 {
                self.connectivity[e].fetch_add(1, Ordering::AcqRel);
            }
            on_net(e, from_after, to_after);
        }
        true
    }

    /// Applies a move sequence under mutual exclusion.
    ///
    /// Moves of vertices that are no longer in their expected block are
    /// dropped. If the remaining moves would overload a block, nothing is
    /// applied. Otherwise the moves are applied while the exact gain is
    /// accumulated; a negative gain reverts everything. Nets whose pin count
    /// in the target block rises to one are registered in `quotient`.
    pub fn apply_move_sequence(
        &self,
        h: &Hypergraph,
        quotient: &QuotientGraph,
        sequence: &MoveSequence,
    ) -> ApplyOutcome {
        let _guard = self.apply_lock.lock().unwrap_or_else(|p| p.into_inner());

        let mut seen = std::collections::HashSet::new();
        let valid: Vec<Move> = sequence
            .moves
            .iter()
            .copied()
            .filter(|m| m.from != m.to && self.block(m.vertex) == m.from && seen.insert(m.vertex))
            .collect();
        let dropped = sequence.moves.len() - valid.len();

        let mut delta: HashMap<BlockId, i64> = HashMap::new();
        for m in &valid {
            let w = h.vertex_weight(m.vertex) as i64;
            *delta.entry(m.from).or_default() -= w;
            *delta.entry(m.to).or_default() += w;
        }
        let overloaded = delta
            .iter()
            .any(|(&b, &d)| d > 0 && self.block_weight(b) as i64 + d > self.max_block_weight as i64);
        if overloaded {
            return ApplyOutcome::BalanceViolation;
        }

        let mut gain: Gain = 0;
        let mut new_connections: Vec<(NetId, BlockId)> = Vec::new();
        for m in &valid {
            let applied = self.change_node_part(h, m.vertex, m.from, m.to, |e, from_after, to_after| {
                let w = h.net_weight(e) as Gain;
                if from_after == 0 {
                    gain += w;
                }
                if to_after == 1 {
                    gain -= w;
                    new_connections.push((e, m.to));
                }
            });
            debug_assert!(applied, "partition changed while holding the apply lock");
        }

        if gain < 0 {
            for m in valid.iter().rev() {
                self.change_node_part(h, m.vertex, m.to, m.from, |_, _, _| {});
            }
            return ApplyOutcome::Reverted { gain };
        }

        for (e, b) in new_connections {
            // the net may have lost block b again later in the same sequence
            if self.pin_count(e, b) == 0 {
                continue;
            }
            for other in self.connectivity_set(e) {
                if other != b {
                    quotient.register(e, b, other);
                }
            }
        }
        ApplyOutcome::Applied { gain, dropped }
    }

    /// Recomputes every counter from scratch and compares it with the
    /// incrementally maintained values.
    pub fn validate(&self, h: &Hypergraph) -> std::result::Result<(), String> {
        let assignment = self.assignment();
        let fresh = PartitionState::new(h, self.k, self.epsilon, assignment).map_err(|e| e.to_string())?;
        for b in 0..self.k {
            if fresh.block_weight(b) != self.block_weight(b) {
                return Err(format!(
                    "block {b}: weight {} but recomputed {}",
                    self.block_weight(b),
                    fresh.block_weight(b)
                ));
            }
        }
        for e in h.nets() {
            if fresh.connectivity(e) != self.connectivity(e) {
                return Err(format!("net {e}: connectivity mismatch"));
            }
            for b in 0..self.k {
                if fresh.pin_count(e, b) != self.pin_count(e, b) {
                    return Err(format!("net {e}, block {b}: pin count mismatch"));
                }
            }
        }
        Ok(())
    }
}

/// The connectivity metric `Σ_e (λ(e) − 1) ω(e)`.
pub fn connectivity_metric(h: &Hypergraph, p: &PartitionState) -> Weight {
    h.nets()
        .map(|e| (p.connectivity(e).saturating_sub(1) as Weight) * h.net_weight(e))
        .sum()
}

//! Quotient graph over the blocks of a partition with explicit cut-net lists.

use std::sync::atomic::{AtomicI64, AtomicU64, Ordering};
use std::sync::Mutex;

use rayon::prelude::*;

use crate::hypergraph::Hypergraph;
use crate::partition::PartitionState;
use crate::types::{BlockId, Gain, NetId, Weight};

/// Unordered block pair, normalized so that `first < second`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BlockPair {
    pub first: BlockId,
    pub second: BlockId,
}

impl BlockPair {
    pub fn new(a: BlockId, b: BlockId) -> Self {
        assert_ne!(a, b, "a block pair needs two distinct blocks");
        Self { first: a.min(b), second: a.max(b) }
    }
}

#[derive(Debug, Default)]
struct PairData {
    cut_nets: Mutex<Vec<NetId>>,
    improvement: AtomicI64,
    improvements_found: AtomicU64,
}

/// For every block pair `{V_i, V_j}` the list of nets connecting both.
///
/// Entries are appended when a net starts to connect a pair and are removed
/// lazily when the list is read: stale entries (nets no longer connecting
/// the pair) and duplicates are filtered out by [`QuotientGraph::cut_nets`].
#[derive(Debug)]
pub struct QuotientGraph {
    k: usize,
    pairs: Vec<PairData>,
}

impl QuotientGraph {
    fn index(&self, a: BlockId, b: BlockId) -> usize {
        let (i, j) = (a.min(b), a.max(b));
        debug_assert!(i < j && j < self.k);
        // row-major upper triangle without the diagonal
        i * self.k - i * (i + 1) / 2 + (j - i - 1)
    }

    pub fn new(k: usize) -> Self {
        let num_pairs = k * k.saturating_sub(1) / 2;
        Self { k, pairs: (0..num_pairs).map(|_| PairData::default()).collect() }
    }

    /// Registers every cut net with all block pairs in its connectivity set.
    pub fn build(h: &Hypergraph, p: &PartitionState) -> Self {
        let q = Self::new(p.k());
        h.nets().into_par_iter().for_each(|e| {
            if p.connectivity(e) < 2 {
                return;
            }
            let blocks: Vec<BlockId> = p.connectivity_set(e).collect();
            for (x, &i) in blocks.iter().enumerate() {
                for &j in &blocks[x + 1..] {
                    q.register(e, i, j);
                }
            }
        });
        // parallel registration leaves lists in nondeterministic order
        for pair in &q.pairs {
            pair.cut_nets.lock().unwrap().sort_unstable();
        }
        q
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn register(&self, e: NetId, a: BlockId, b: BlockId) {
        let idx = self.index(a, b);
        self.pairs[idx].cut_nets.lock().unwrap().push(e);
    }

    /// Number of stored entries for the pair, including stale ones.
    pub fn raw_len(&self, pair: BlockPair) -> usize {
        self.pairs[self.index(pair.first, pair.second)].cut_nets.lock().unwrap().len()
    }

    /// Non-stale cut nets of the pair. Stale entries and duplicates are
    /// removed from the stored list as a side effect.
    pub fn cut_nets(&self, p: &PartitionState, a: BlockId, b: BlockId) -> Vec<NetId> {
        let idx = self.index(a, b);
        let mut list = self.pairs[idx].cut_nets.lock().unwrap();
        list.retain(|&e| p.pin_count(e, a) > 0 && p.pin_count(e, b) > 0);
        list.sort_unstable();
        list.dedup();
        list.clone()
    }

    /// Total weight of the nets connecting both blocks.
    pub fn cut_weight(&self, h: &Hypergraph, p: &PartitionState, a: BlockId, b: BlockId) -> Weight {
        self.cut_nets(p, a, b).iter().map(|&e| h.net_weight(e)).sum()
    }

    /// Block pairs with at least one stored entry.
    pub fn adjacent_pairs(&self) -> Vec<BlockPair> {
        let mut out = Vec::new();
        for i in 0..self.k {
            for j in i + 1..self.k {
                if !self.pairs[self.index(i, j)].cut_nets.lock().unwrap().is_empty() {
                    out.push(BlockPair::new(i, j));
                }
            }
        }
        out
    }

    /// Blocks sharing at least one stored cut net with `b`.
    pub fn neighbors(&self, b: BlockId) -> Vec<BlockId> {
        (0..self.k)
            .filter(|&x| x != b && !self.pairs[self.index(b, x)].cut_nets.lock().unwrap().is_empty())
            .collect()
    }

    pub fn add_improvement(&self, pair: BlockPair, gain: Gain) {
        let data = &self.pairs[self.index(pair.first, pair.second)];
        data.improvement.fetch_add(gain, Ordering::AcqRel);
        if gain > 0 {
            data.improvements_found.fetch_add(1, Ordering::AcqRel);
        }
    }

    pub fn improvement(&self, pair: BlockPair) -> Gain {
        self.pairs[self.index(pair.first, pair.second)].improvement.load(Ordering::Acquire)
    }

    pub fn improvements_found(&self, pair: BlockPair) -> u64 {
        self.pairs[self.index(pair.first, pair.second)].improvements_found.load(Ordering::Acquire)
    }
}

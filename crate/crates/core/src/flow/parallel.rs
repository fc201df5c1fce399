use std::sync::atomic::{AtomicI64, AtomicU32, Ordering::Relaxed};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{Arc, AugmentStats, FlowState};
use crate::network::Capacity;

/// Options of the synchronous push-relabel solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ParallelOptions {
    /// Run a global relabeling when no active node is left and resume if it
    /// uncovers mislabeled excess nodes.
    pub collect_fix: bool,
    /// Global relabeling after linear push and relabel work.
    pub periodic_relabel: bool,
    /// Discharge each round one node after another in an order shuffled
    /// with this seed instead of in parallel.
    pub serialized: Option<u64>,
    /// Rounds without flow change that trigger an extra global relabeling.
    pub stagnation_rounds: u32,
    /// Extra relabeling only counts rounds with fewer active nodes.
    pub stagnation_active: usize,
}

impl Default for ParallelOptions {
    fn default() -> Self {
        Self {
            collect_fix: true,
            periodic_relabel: true,
            serialized: None,
            stagnation_rounds: 500,
            stagnation_active: 1500,
        }
    }
}

/// `u` may push to the active node `v` if it wins on the labels of the
/// round start; equal labels go to the smaller ID.
pub fn wins(u: usize, du: u32, v: usize, dv: u32) -> bool {
    du == dv + 1 || du + 1 < dv || (du == dv && u < v)
}

struct Round<'a> {
    labels: &'a [u32],
    excess: &'a [Capacity],
    in_round: &'a [u32],
    round: u32,
    delta: &'a [AtomicI64],
    touched: &'a [AtomicU32],
}

struct Discharged {
    node: usize,
    label: u32,
    work: usize,
    pushes: u64,
    relabels: u64,
    touched: Vec<usize>,
}

impl FlowState<'_> {
    fn discharge_sync(&self, u: usize, r: &Round<'_>) -> Discharged {
        let n = self.num_simulated() as u32;
        let mut out = Discharged { node: u, label: r.labels[u], work: 0, pushes: 0, relabels: 0, touched: Vec::new() };
        let mut excess = r.excess[u];
        let touch = |x: usize, out: &mut Discharged| {
            if r.touched[x].swap(r.round, Relaxed) != r.round {
                out.touched.push(x);
            }
        };
        touch(u, &mut out);

        let mut arcs: Vec<(usize, Arc, usize)> = Vec::new();
        self.for_each_out_arc(u, |y, arc, e| {
            arcs.push((y, arc, e));
            true
        });
        for _ in 0..=n {
            out.work += arcs.len();
            let mut skipped = false;
            let mut min_label = n;
            for &(y, arc, e) in &arcs {
                let res = self.residual(arc, e);
                if res <= 0 {
                    continue;
                }
                let dy = r.labels[y];
                if excess > 0 && out.label == dy + 1 {
                    if r.in_round[y] == r.round && !wins(u, r.labels[u], y, dy) {
                        skipped = true;
                        continue;
                    }
                    let amount = res.min(excess);
                    self.push_flow(arc, amount);
                    excess -= amount;
                    r.delta[u].fetch_sub(amount, Relaxed);
                    r.delta[y].fetch_add(amount, Relaxed);
                    touch(y, &mut out);
                    out.pushes += 1;
                    if amount < res {
                        min_label = min_label.min(dy + 1);
                    }
                } else {
                    min_label = min_label.min(dy + 1);
                }
            }
            if excess == 0 || skipped {
                break;
            }
            out.label = min_label.min(n);
            out.relabels += 1;
            if out.label >= n {
                break;
            }
        }
        out
    }

    /// Synchronous push-relabel. Every round discharges all active nodes
    /// against the labels and excesses of the round start; excess changes
    /// are collected separately and applied after the round.
    pub fn augment_parallel(&mut self, opts: ParallelOptions) -> AugmentStats {
        let mut stats = AugmentStats::default();
        let size = self.num_simulated();
        let n = size as u32;
        let cadence = self.num_arcs().max(1);
        let delta: Vec<AtomicI64> = (0..size).map(|_| AtomicI64::new(0)).collect();
        let touched: Vec<AtomicU32> = (0..size).map(|_| AtomicU32::new(0)).collect();
        let mut in_round = vec![0u32; size];
        let mut rng = opts.serialized.map(ChaCha8Rng::seed_from_u64);

        let mut active = self.global_relabel();
        stats.global_relabels += 1;
        let mut work = 0usize;
        let mut stagnant = 0u32;
        let mut round = 0u32;

        loop {
            if active.is_empty() {
                if !opts.collect_fix {
                    break;
                }
                active = self.global_relabel();
                stats.global_relabels += 1;
                if active.is_empty() {
                    break;
                }
            }
            round += 1;
            stats.rounds += 1;
            for &x in &active {
                in_round[x] = round;
            }
            if let Some(rng) = rng.as_mut() {
                active.shuffle(rng);
            }

            let results: Vec<Discharged> = {
                let ctx = Round {
                    labels: &self.labels,
                    excess: &self.excess,
                    in_round: &in_round,
                    round,
                    delta: &delta,
                    touched: &touched,
                };
                let this = &*self;
                if rng.is_some() {
                    active.iter().map(|&u| this.discharge_sync(u, &ctx)).collect()
                } else {
                    active.par_iter().map(|&u| this.discharge_sync(u, &ctx)).collect()
                }
            };

            let flow_before = self.flow_value;
            for res in &results {
                self.labels[res.node] = res.label;
                work += res.work;
                stats.pushes += res.pushes;
                stats.relabels += res.relabels;
            }
            let mut next = Vec::new();
            for x in results.iter().flat_map(|res| res.touched.iter().copied()) {
                self.excess[x] += delta[x].swap(0, Relaxed);
                if self.is_sink_node(x) {
                    self.flow_value += self.excess[x];
                    self.excess[x] = 0;
                } else if self.excess[x] > 0 && self.labels[x] < n && !self.is_source_node(x) {
                    next.push(x);
                }
            }
            let active_count = active.len();
            active = next;

            if self.flow_value == flow_before && active_count < opts.stagnation_active {
                stagnant += 1;
            } else {
                stagnant = 0;
            }
            let periodic = opts.periodic_relabel && work > cadence;
            if periodic || stagnant >= opts.stagnation_rounds {
                work = 0;
                stagnant = 0;
                active = self.global_relabel();
                stats.global_relabels += 1;
            }
        }
        stats
    }
}

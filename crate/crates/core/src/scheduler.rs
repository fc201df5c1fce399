//! Active block scheduling over the quotient graph.
//!
//! Workers pop block pairs from one global queue. A pair is refined by
//! growing a region around its cut, building the flow network, running
//! FlowCutter and applying the resulting moves. Pairs of consecutive rounds
//! are stored interleaved in the queue: an improvement on a pair of round
//! `r` activates both blocks for round `r + 1`.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::{Condvar, Mutex};
use std::time::Duration;

use web_time::Instant;

use crate::config::RefinementConfig;
use crate::error::{Error, Result};
use crate::flow::{ParallelOptions, Solver};
use crate::flowcutter::{run_flowcutter, FlowCutterConfig, Termination};
use crate::hypergraph::Hypergraph;
use crate::network::{construct, select_construction, ConstructOptions};
use crate::partition::{connectivity_metric, ApplyOutcome, PartitionState};
use crate::quotient::{BlockPair, QuotientGraph};
use crate::region::grow_region;
use crate::types::{Gain, Weight};

/// Counters of one [`Refiner::refine`] call.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RefinementStats {
    pub initial_metric: Weight,
    pub final_metric: Weight,
    pub initial_imbalance: f64,
    pub final_imbalance: f64,
    pub rounds: u32,
    pub pairs_processed: u64,
    pub pairs_pruned: u64,
    /// Move sequences handed to the partition.
    pub improvements_found: u64,
    pub applied: u64,
    pub balance_rejected: u64,
    pub reverted: u64,
    /// Applied sequences that left the metric unchanged.
    pub zero_gain: u64,
    pub time_limit: u64,
    pub aborted_cut_too_large: u64,
    /// Applied sequences whose actual gain matched the expected gain.
    pub expected_matches_actual: u64,
    /// Flow augmentations over all FlowCutter runs.
    pub flowcutter_iterations: u64,
    pub pierced_nodes: u64,
    pub region_time: Duration,
    pub construction_time: Duration,
    pub flow_time: Duration,
    pub apply_time: Duration,
    pub total_time: Duration,
}

impl RefinementStats {
    fn merge(&mut self, other: &RefinementStats) {
        self.pairs_processed += other.pairs_processed;
        self.pairs_pruned += other.pairs_pruned;
        self.improvements_found += other.improvements_found;
        self.applied += other.applied;
        self.balance_rejected += other.balance_rejected;
        self.reverted += other.reverted;
        self.zero_gain += other.zero_gain;
        self.time_limit += other.time_limit;
        self.aborted_cut_too_large += other.aborted_cut_too_large;
        self.expected_matches_actual += other.expected_matches_actual;
        self.flowcutter_iterations += other.flowcutter_iterations;
        self.pierced_nodes += other.pierced_nodes;
        self.region_time += other.region_time;
        self.construction_time += other.construction_time;
        self.flow_time += other.flow_time;
        self.apply_time += other.apply_time;
    }

    /// Line-oriented `key=value` rendering.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let secs = |d: Duration| d.as_secs_f64();
        let _ = writeln!(s, "initial_metric={}", self.initial_metric);
        let _ = writeln!(s, "final_metric={}", self.final_metric);
        let _ = writeln!(s, "initial_imbalance={:.6}", self.initial_imbalance);
        let _ = writeln!(s, "final_imbalance={:.6}", self.final_imbalance);
        let _ = writeln!(s, "rounds={}", self.rounds);
        let _ = writeln!(s, "pairs_processed={}", self.pairs_processed);
        let _ = writeln!(s, "pairs_pruned={}", self.pairs_pruned);
        let _ = writeln!(s, "improvements_found={}", self.improvements_found);
        let _ = writeln!(s, "applied={}", self.applied);
        let _ = writeln!(s, "balance_rejected={}", self.balance_rejected);
        let _ = writeln!(s, "reverted={}", self.reverted);
        let _ = writeln!(s, "zero_gain={}", self.zero_gain);
        let _ = writeln!(s, "time_limit={}", self.time_limit);
        let _ = writeln!(s, "aborted_cut_too_large={}", self.aborted_cut_too_large);
        let _ = writeln!(s, "expected_matches_actual={}", self.expected_matches_actual);
        let _ = writeln!(s, "flowcutter_iterations={}", self.flowcutter_iterations);
        let _ = writeln!(s, "pierced_nodes={}", self.pierced_nodes);
        let _ = writeln!(s, "time_region={:.6}", secs(self.region_time));
        let _ = writeln!(s, "time_construction={:.6}", secs(self.construction_time));
        let _ = writeln!(s, "time_flow={:.6}", secs(self.flow_time));
        let _ = writeln!(s, "time_apply={:.6}", secs(self.apply_time));
        let _ = writeln!(s, "time_total={:.6}", secs(self.total_time));
        s
    }
}

/// Flow time limit: unarmed until `k` pairs were processed, afterwards
/// `factor` times the average flow time.
pub fn time_budget(processed: u64, k: usize, total_flow_time: Duration, factor: f64) -> Option<Duration> {
    if processed < k as u64 || processed == 0 {
        return None;
    }
    Some((total_flow_time / processed as u32).mul_f64(factor))
}

/// Skip decision for a pair.
pub fn prune(cut_weight: Weight, finest: bool, min_cut: Weight, round: u32, ever_improved: bool) -> bool {
    (!finest && cut_weight < min_cut) || (round >= 2 && !ever_improved)
}

struct Queue {
    entries: VecDeque<(BlockPair, u32)>,
    queued: HashMap<BlockPair, ()>,
    in_flight: usize,
    /// Unprocessed pairs per round.
    pending: BTreeMap<u32, usize>,
    /// Blocks activated for each upcoming round.
    active: HashMap<u32, Vec<bool>>,
    round_gain: HashMap<u32, Gain>,
    round_start_metric: HashMap<u32, Weight>,
    metric: Weight,
    rounds: u32,
    stopped: bool,
    processed: u64,
    flow_time: Duration,
}

impl Queue {
    fn push(&mut self, pair: BlockPair, round: u32) {
        if self.queued.insert(pair, ()).is_none() {
            self.entries.push_back((pair, round));
            *self.pending.entry(round).or_default() += 1;
        }
    }

    fn finish(&mut self, round: u32, min_relative_improvement: f64) {
        if self.stopped {
            return;
        }
        let left = self.pending.get_mut(&round).expect("round bookkeeping");
        *left -= 1;
        // a round ends once all its pairs and all earlier rounds are done
        while let Some((&r, &count)) = self.pending.iter().next() {
            if count > 0 {
                break;
            }
            self.pending.remove(&r);
            self.active.remove(&r);
            let gain = self.round_gain.remove(&r).unwrap_or(0);
            let start = self.round_start_metric.remove(&r).unwrap_or(self.metric);
            if start > 0 && (gain as f64) < min_relative_improvement * start as f64 {
                self.stopped = true;
                self.entries.clear();
                self.queued.clear();
                self.pending.clear();
                return;
            }
        }
    }
}

/// Flow-based refinement driver. Keeps per-pair improvement history across
/// [`Refiner::refine`] calls for round-one ordering and pruning.
#[derive(Debug, Clone)]
pub struct Refiner {
    pub config: RefinementConfig,
    history: HashMap<BlockPair, (Gain, u64)>,
}

impl Refiner {
    pub fn new(config: RefinementConfig) -> Self {
        Self { config, history: HashMap::new() }
    }

    /// Improves `p` in place. The connectivity metric never increases and
    /// the partition stays balanced if it was balanced before.
    pub fn refine(&mut self, h: &Hypergraph, p: &PartitionState) -> Result<RefinementStats> {
        let start = Instant::now();
        let cfg = self.config.clone();
        let k = p.k();
        let initial_metric = connectivity_metric(h, p);
        let mut stats = RefinementStats {
            initial_metric,
            final_metric: initial_metric,
            initial_imbalance: p.imbalance(h),
            final_imbalance: p.imbalance(h),
            ..Default::default()
        };
        if k < 2 || initial_metric == 0 {
            stats.total_time = start.elapsed();
            return Ok(stats);
        }

        let q = QuotientGraph::build(h, p);
        let mut first_round: Vec<(BlockPair, Gain, usize)> = q
            .adjacent_pairs()
            .into_iter()
            .map(|pair| {
                let nets = q.cut_nets(p, pair.first, pair.second);
                let cut: Gain = nets.iter().map(|&e| h.net_weight(e) as Gain).sum();
                let prior = self.history.get(&pair).map_or(cut, |&(gain, _)| gain);
                (pair, prior, nets.len())
            })
            .collect();
        first_round.sort_by(|a, b| b.1.cmp(&a.1).then(b.2.cmp(&a.2)).then(a.0.cmp(&b.0)));

        let queue = Mutex::new(Queue {
            entries: VecDeque::new(),
            queued: HashMap::new(),
            in_flight: 0,
            pending: BTreeMap::new(),
            active: HashMap::new(),
            round_gain: HashMap::new(),
            round_start_metric: HashMap::new(),
            metric: initial_metric,
            rounds: 0,
            stopped: false,
            processed: 0,
            flow_time: Duration::ZERO,
        });
        {
            let mut guard = queue.lock().unwrap();
            for &(pair, _, _) in &first_round {
                guard.push(pair, 1);
            }
        }
        let wakeup = Condvar::new();

        let threads = cfg.threads.max(1);
        let workers = cfg.pair_workers(k);
        let pool = if threads > 1 {
            rayon::ThreadPoolBuilder::new().num_threads(threads).build().ok()
        } else {
            None
        };

        let ctx = Worker {
            h,
            p,
            q: &q,
            cfg: &cfg,
            queue: &queue,
            wakeup: &wakeup,
            pool: pool.as_ref(),
            threads,
            history: &self.history,
            validate_each_move: cfg.validate && workers == 1,
        };
        let results: Vec<RefinementStats> = if workers == 1 {
            vec![ctx.run(0)]
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = (0..workers).map(|id| {
                    let ctx = &ctx;
                    scope.spawn(move || ctx.run(id))
                }).collect();
                handles.into_iter().map(|h| h.join().expect("refinement worker panicked")).collect()
            })
        };
        for r in &results {
            stats.merge(r);
        }
        if cfg.validate {
            p.validate(h).map_err(Error::InvalidPartition)?;
        }

        for pair in q.adjacent_pairs() {
            let entry = self.history.entry(pair).or_insert((0, 0));
            entry.0 = q.improvement(pair);
            entry.1 += q.improvements_found(pair);
        }
        stats.rounds = queue.lock().unwrap().rounds;
        stats.final_metric = connectivity_metric(h, p);
        stats.final_imbalance = p.imbalance(h);
        stats.total_time = start.elapsed();
        Ok(stats)
    }
}

/// Convenience wrapper running one refinement pass with `config`.
pub fn refine(h: &Hypergraph, p: &PartitionState, config: &RefinementConfig) -> Result<RefinementStats> {
    Refiner::new(config.clone()).refine(h, p)
}

struct Worker<'a> {
    h: &'a Hypergraph,
    p: &'a PartitionState,
    q: &'a QuotientGraph,
    cfg: &'a RefinementConfig,
    queue: &'a Mutex<Queue>,
    wakeup: &'a Condvar,
    pool: Option<&'a rayon::ThreadPool>,
    threads: usize,
    history: &'a HashMap<BlockPair, (Gain, u64)>,
    // concurrent moves make mid-run checks meaningless
    validate_each_move: bool,
}

/// Stops the queue if a worker unwinds so its peers do not wait forever.
struct StopOnPanic<'a> {
    queue: &'a Mutex<Queue>,
    wakeup: &'a Condvar,
}

impl Drop for StopOnPanic<'_> {
    fn drop(&mut self) {
        if std::thread::panicking() {
            self.queue.lock().unwrap_or_else(|e| e.into_inner()).stopped = true;
            self.wakeup.notify_all();
        }
    }
}

impl Worker<'_> {
    fn run(&self, id: usize) -> RefinementStats {
        let mut stats = RefinementStats::default();
        let mut local_count = 0u64;
        let _guard = StopOnPanic { queue: self.queue, wakeup: self.wakeup };
        loop {
            let (pair, round, in_flight, budget) = {
                let mut q = self.queue.lock().unwrap();
                loop {
                    if q.stopped {
                        return stats;
                    }
                    if let Some((pair, round)) = q.entries.pop_front() {
                        q.queued.remove(&pair);
                        q.in_flight += 1;
                        q.rounds = q.rounds.max(round);
                        let metric = q.metric;
                        q.round_start_metric.entry(round).or_insert(metric);
                        let budget = time_budget(q.processed, self.p.k(), q.flow_time, self.cfg.time_limit_factor);
                        break (pair, round, q.in_flight, budget);
                    }
                    if q.in_flight == 0 {
                        self.wakeup.notify_all();
                        return stats;
                    }
                    q = self.wakeup.wait(q).unwrap();
                }
            };

            local_count += 1;
            let seed = self.cfg.seed ^ ((id as u64) << 48) ^ local_count.wrapping_mul(0x9E37_79B9_7F4A_7C15);
            let flow_started = Instant::now();
            let gain = self.process(pair, round, in_flight, budget, seed, &mut stats);
            let elapsed = flow_started.elapsed();

            let mut q = self.queue.lock().unwrap();
            q.in_flight -= 1;
            q.processed += 1;
            q.flow_time += elapsed;
            if let Some(gain) = gain.filter(|&g| g > 0) {
                q.metric = q.metric.saturating_sub(gain as Weight);
                *q.round_gain.entry(round).or_default() += gain;
                if !q.stopped {
                    self.activate(&mut q, pair, round + 1);
                }
            }
            q.finish(round, self.cfg.min_relative_improvement);
            self.wakeup.notify_all();
        }
    }

    fn activate(&self, q: &mut Queue, pair: BlockPair, next: u32) {
        let k = self.p.k();
        let mut already = false;
        for b in [pair.first, pair.second] {
            let active = q.active.entry(next).or_insert_with(|| vec![false; k]);
            if active[b] {
                already = true;
                continue;
            }
            active[b] = true;
            for other in self.q.neighbors(b) {
                q.push(BlockPair::new(b, other), next);
            }
        }
        if already {
            q.push(pair, next);
        }
    }

    /// Refines one pair; returns the applied gain.
    fn process(
        &self,
        pair: BlockPair,
        round: u32,
        in_flight: usize,
        budget: Option<Duration>,
        seed: u64,
        stats: &mut RefinementStats,
    ) -> Option<Gain> {
        let (h, p, cfg) = (self.h, self.p, self.cfg);
        let t = Instant::now();
        let cut_nets = self.q.cut_nets(p, pair.first, pair.second);
        let cut_weight: Weight = cut_nets.iter().map(|&e| h.net_weight(e)).sum();
        let (gain_so_far, found_before) = self.history.get(&pair).copied().unwrap_or((0, 0));
        let _ = gain_so_far;
        let ever_improved = found_before + self.q.improvements_found(pair) > 0;
        if cut_nets.is_empty() || prune(cut_weight, cfg.finest, cfg.min_cut_prune, round, ever_improved) {
            stats.pairs_pruned += 1;
            return None;
        }
        stats.pairs_processed += 1;

        let region = grow_region(h, p, pair.first, pair.second, &cut_nets, cfg.alpha, cfg.delta).ok()?;
        stats.region_time += t.elapsed();
        if region.is_empty() {
            return None;
        }

        let t = Instant::now();
        let nested = if in_flight < self.threads { self.pool } else { None };
        let network = construct(
            select_construction(h),
            h,
            p,
            &region,
            ConstructOptions { skip_merging: false, pool: nested },
        );
        stats.construction_time += t.elapsed();
        if network.num_nets() == 0 {
            return None;
        }

        let t = Instant::now();
        let max = p.max_block_weight() as i64;
        let fc = FlowCutterConfig {
            beta: cfg.beta,
            bulk_piercing: cfg.bulk_piercing,
            most_balanced_repetitions: cfg.most_balanced_repetitions,
            restricted_capacities: cfg.restricted_capacities,
            seed,
            solver: if nested.is_some() { Solver::Parallel(ParallelOptions::default()) } else { Solver::Sequential },
            deadline: budget.map(|b| Instant::now() + b),
            ..FlowCutterConfig::new(max, max)
        };
        let result = run_flowcutter(&network, &fc, nested);
        stats.flow_time += t.elapsed();
        let result = match result {
            Ok(r) => r,
            Err(_) => return None,
        };
        stats.flowcutter_iterations += result.iterations as u64;
        stats.pierced_nodes += result.pierced as u64;
        match result.termination {
            Termination::Balanced => {}
            Termination::AbortCutTooLarge => {
                stats.aborted_cut_too_large += 1;
                return None;
            }
            Termination::TimeLimit => {
                stats.time_limit += 1;
                return None;
            }
        }
        let seq = result.moves(&network);
        if result.expected_gain < 0 || seq.moves.is_empty() {
            return None;
        }

        let t = Instant::now();
        stats.improvements_found += 1;
        let outcome = p.apply_move_sequence(h, self.q, &seq);
        stats.apply_time += t.elapsed();
        match outcome {
            ApplyOutcome::Applied { gain, .. } => {
                stats.applied += 1;
                if gain == 0 {
                    stats.zero_gain += 1;
                }
                if gain == seq.expected_gain {
                    stats.expected_matches_actual += 1;
                }
                self.q.add_improvement(pair, gain);
                if self.validate_each_move {
                    if let Err(msg) = p.validate(h) {
                        panic!("partition invariant violated after applying moves: {msg}");
                    }
                }
                Some(gain)
            }
            ApplyOutcome::Reverted { .. } => {
                stats.reverted += 1;
                None
            }
            ApplyOutcome::BalanceViolation => {
                stats.balance_rejected += 1;
                None
            }
        }
    }
}

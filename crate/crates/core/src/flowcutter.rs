//! Balanced bipartitioning of a flow hypergraph by incremental maximum flows.
//!
//! Each iteration augments the preflow, derives the source- and sink-side
//! reachable sets, and accepts the first induced bipartition that satisfies
//! both side weight limits. Otherwise the lighter side absorbs its reachable
//! set plus one or more piercing nodes and the flow is augmented again.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use web_time::Instant;

use crate::error::{Error, Result};
use crate::flow::{Cuts, FlowState, Solver};
use crate::network::{Capacity, FlowHypergraph, NodeId, Side, SINK, SOURCE};
use crate::partition::{Move, MoveSequence};

#[derive(Debug, Clone, Copy)]
pub struct FlowCutterConfig {
    /// Maximum weight of the source side and of the sink side.
    pub max_weight: [Capacity; 2],
    pub beta: f64,
    pub bulk_piercing: bool,
    /// Single-node piercings per side before bulk piercing may start.
    pub calibration_rounds: u32,
    pub most_balanced_repetitions: usize,
    pub restricted_capacities: bool,
    pub seed: u64,
    pub solver: Solver,
    pub deadline: Option<Instant>,
    /// Stop once the flow exceeds this value; defaults to the initial cut.
    pub abort_cut: Option<Capacity>,
}

impl FlowCutterConfig {
    pub fn new(max_source_weight: Capacity, max_sink_weight: Capacity) -> Self {
        Self {
            max_weight: [max_source_weight, max_sink_weight],
            beta: 0.55,
            bulk_piercing: true,
            calibration_rounds: 4,
            most_balanced_repetitions: 7,
            restricted_capacities: true,
            seed: 0,
            solver: Solver::Sequential,
            deadline: None,
            abort_cut: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Balanced,
    AbortCutTooLarge,
    TimeLimit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowCutterResult {
    pub termination: Termination,
    /// Side of every network node; only meaningful for [`Termination::Balanced`].
    pub sides: Vec<Side>,
    /// Cut weight inside the network.
    pub cut_weight: Capacity,
    /// Reduction of the network's cut weight relative to its initial cut.
    pub expected_gain: i64,
    pub source_weight: Capacity,
    pub sink_weight: Capacity,
    /// Number of flow augmentations.
    pub iterations: usize,
    /// Total number of pierced nodes.
    pub pierced: usize,
}

impl FlowCutterResult {
    /// Moves of region vertices whose side differs from their block.
    pub fn moves(&self, g: &FlowHypergraph) -> MoveSequence {
        let block = |side: Side| match side {
            Side::Source => g.source_block(),
            Side::Sink => g.sink_block(),
        };
        let moves = g
            .nodes()
            .filter_map(|v| {
                let info = g.node(v);
                let vertex = info.original?;
                (info.origin != self.sides[v]).then(|| Move { vertex, from: block(info.origin), to: block(self.sides[v]) })
            })
            .collect();
        MoveSequence { moves, expected_gain: self.expected_gain }
    }
}

/// A bipartition with both sides closed under residual reachability.
#[derive(Debug, Clone)]
struct Candidate {
    sides: Vec<Side>,
    source_weight: Capacity,
    sink_weight: Capacity,
}

struct Piercer {
    rng: ChaCha8Rng,
    beta: f64,
    bulk: bool,
    calibration: u32,
    half_weight: f64,
    base_goal: [f64; 2],
    remainder: [f64; 2],
    rounds: [u32; 2],
    added_weight: [f64; 2],
    pierced_nodes: [f64; 2],
}

fn idx(side: Side) -> usize {
    match side {
        Side::Source => 0,
        Side::Sink => 1,
    }
}

/// Initial bulk piercing goal `β (c(V)/2 - c(terminal))`, clamped at zero.
pub fn initial_goal(beta: f64, total_weight: Capacity, terminal_weight: Capacity) -> f64 {
    (beta * (total_weight as f64 / 2.0 - terminal_weight as f64)).max(0.0)
}

impl Piercer {
    fn new(g: &FlowHypergraph, cfg: &FlowCutterConfig) -> Self {
        let total = g.total_node_weight();
        Self {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            beta: cfg.beta,
            bulk: cfg.bulk_piercing,
            calibration: cfg.calibration_rounds,
            half_weight: total as f64 / 2.0,
            base_goal: [
                initial_goal(cfg.beta, total, g.node_weight(SOURCE)),
                initial_goal(cfg.beta, total, g.node_weight(SINK)),
            ],
            remainder: [0.0; 2],
            rounds: [0; 2],
            added_weight: [0.0; 2],
            pierced_nodes: [0.0; 2],
        }
    }

    fn goal(&self, side: Side) -> f64 {
        self.base_goal[idx(side)] + self.remainder[idx(side)]
    }

    /// Chooses piercing nodes for `side`. Candidates are the non-terminal
    /// pins of the side's cut nets outside its reachable set, or every
    /// non-terminal node outside it if there are none. Nodes that avoid an
    /// augmenting path come first, then nodes originally on `side` far from
    /// the cut, then random order.
    fn select(&mut self, f: &FlowState<'_>, cuts: &Cuts, side: Side) -> (Vec<NodeId>, bool) {
        let g = f.network();
        let (own, other, cut_nets, weight) = match side {
            Side::Source => (&cuts.source_reach, &cuts.sink_reach, &cuts.source_cut_nets, cuts.source_weight),
            Side::Sink => (&cuts.sink_reach, &cuts.source_reach, &cuts.sink_cut_nets, cuts.sink_weight),
        };
        let eligible = |v: NodeId| !own[v] && !f.is_terminal(v);
        let mut candidates: Vec<NodeId> = cut_nets.iter().flat_map(|&e| g.pins(e).iter().copied()).filter(|&v| eligible(v)).collect();
        candidates.sort_unstable();
        candidates.dedup();
        if candidates.is_empty() {
            candidates = g.nodes().filter(|&v| eligible(v)).collect();
        }
        if candidates.is_empty() {
            return (candidates, false);
        }
        candidates.shuffle(&mut self.rng);
        let key = |v: NodeId| {
            let info = g.node(v);
            let d = info.distance as i64;
            let signed = if info.origin == side { d } else { -d };
            (other[v], std::cmp::Reverse(signed))
        };
        candidates.sort_by_key(|&v| key(v));

        let free = !other[candidates[0]];
        let i = idx(side);
        let calibrating = self.rounds[i] < self.calibration;
        // close to balance every node is pierced on its own
        let goal = self.goal(side).min(self.beta * (self.half_weight - weight as f64));
        let heaviest = candidates.iter().map(|&v| g.node_weight(v)).max().unwrap_or(0) as f64;
        let single = !self.bulk || free || calibrating || goal <= heaviest || self.pierced_nodes[i] == 0.0;
        let count = if single {
            1
        } else {
            let per_node = (self.added_weight[i] / self.pierced_nodes[i]).max(1.0);
            ((goal / per_node).ceil() as usize).clamp(1, candidates.len())
        };
        candidates.truncate(count);
        (candidates, !single)
    }

    /// Records that piercing `count` nodes grew `side` by `added` weight.
    /// Only bulk iterations consume the goal: it shrinks by `β` and an unmet
    /// part is carried over to the next bulk iteration.
    fn record(&mut self, side: Side, count: usize, added: Capacity, bulk: bool) {
        let i = idx(side);
        let goal = self.goal(side);
        self.rounds[i] += 1;
        self.added_weight[i] += added as f64;
        self.pierced_nodes[i] += count as f64;
        if bulk {
            self.remainder[i] = (goal - added as f64).max(0.0);
            self.base_goal[i] *= self.beta;
        }
    }
}

fn within(cfg: &FlowCutterConfig, source_weight: Capacity, sink_weight: Capacity) -> bool {
    source_weight <= cfg.max_weight[0] && sink_weight <= cfg.max_weight[1]
}

fn imbalance(cfg: &FlowCutterConfig, c: &Candidate) -> f64 {
    let ratio = |w: Capacity, max: Capacity| w as f64 / max.max(1) as f64;
    ratio(c.source_weight, cfg.max_weight[0]).max(ratio(c.sink_weight, cfg.max_weight[1]))
}

/// Bipartition induced by a source-closed set.
fn from_source_set(g: &FlowHypergraph, reach: &[bool], weight: Capacity) -> Candidate {
    let sides = g.nodes().map(|v| if reach[v] { Side::Source } else { Side::Sink }).collect();
    Candidate { sides, source_weight: weight, sink_weight: g.total_node_weight() - weight }
}

/// Bipartition induced by a sink-closed set.
fn from_sink_set(g: &FlowHypergraph, reach: &[bool], weight: Capacity) -> Candidate {
    let sides = g.nodes().map(|v| if reach[v] { Side::Sink } else { Side::Source }).collect();
    Candidate { sides, source_weight: g.total_node_weight() - weight, sink_weight: weight }
}

/// Improves the balance of a balanced bipartition without changing the
/// cut: nodes reachable from neither side are added together with their
/// residual closure to the lighter side, in random order. Keeps the most
/// balanced bipartition seen over all repetitions.
fn most_balanced_cut(f: &FlowState<'_>, cuts: &Cuts, first: Candidate, cfg: &FlowCutterConfig, rng: &mut ChaCha8Rng) -> Candidate {
    let g = f.network();
    let mut best = first;
    let mut best_score = imbalance(cfg, &best);
    for _ in 0..cfg.most_balanced_repetitions {
        let mut source_reach = cuts.source_reach.clone();
        let mut sink_reach = cuts.sink_reach.clone();
        let (mut source_weight, mut sink_weight) = (cuts.source_weight, cuts.sink_weight);
        let mut free: Vec<NodeId> = g.nodes().filter(|&v| !source_reach[v] && !sink_reach[v]).collect();
        if free.is_empty() {
            break;
        }
        free.shuffle(rng);
        for v in free {
            if source_reach[v] || sink_reach[v] {
                continue;
            }
            if source_weight <= sink_weight {
                source_weight += f.source_closure(&[v], &mut source_reach).iter().map(|&u| g.node_weight(u)).sum::<Capacity>();
            } else {
                sink_weight += f.sink_closure(&[v], &mut sink_reach).iter().map(|&u| g.node_weight(u)).sum::<Capacity>();
            }
            let total = g.total_node_weight();
            for (candidate_source, candidate_sink, by_source) in
                [(source_weight, total - source_weight, true), (total - sink_weight, sink_weight, false)]
            {
                if !within(cfg, candidate_source, candidate_sink) {
                    continue;
                }
                let c = Candidate { sides: Vec::new(), source_weight: candidate_source, sink_weight: candidate_sink };
                let score = imbalance(cfg, &c);
                if score < best_score {
                    best_score = score;
                    best = if by_source {
                        from_source_set(g, &source_reach, source_weight)
                    } else {
                        from_sink_set(g, &sink_reach, sink_weight)
                    };
                }
            }
        }
    }
    best
}

/// Runs FlowCutter on `g` with terminals `s` and `t`.
pub fn run_flowcutter(g: &FlowHypergraph, cfg: &FlowCutterConfig, pool: Option<&rayon::ThreadPool>) -> Result<FlowCutterResult> {
    if g.node_weight(SOURCE) > cfg.max_weight[0] || g.node_weight(SINK) > cfg.max_weight[1] {
        return Err(Error::Unrefinable(format!(
            "terminal weights ({}, {}) exceed the side limits ({}, {})",
            g.node_weight(SOURCE),
            g.node_weight(SINK),
            cfg.max_weight[0],
            cfg.max_weight[1]
        )));
    }
    let abort_cut = cfg.abort_cut.unwrap_or(g.initial_cut());
    let mut f = FlowState::new(g, &[SOURCE], &[SINK], cfg.restricted_capacities)?;
    let mut piercer = Piercer::new(g, cfg);
    let total = g.total_node_weight();
    let mut iterations = 0;
    let mut pierced = 0;

    let finish = |termination: Termination, candidate: Option<Candidate>, cut: Capacity, iterations: usize, pierced: usize| {
        let (sides, source_weight, sink_weight) = match candidate {
            Some(c) => (c.sides, c.source_weight, c.sink_weight),
            None => (g.nodes().map(|v| g.node(v).origin).collect(), 0, 0),
        };
        FlowCutterResult {
            termination,
            sides,
            cut_weight: cut,
            expected_gain: g.initial_cut() - cut,
            source_weight,
            sink_weight,
            iterations,
            pierced,
        }
    };

    loop {
        if cfg.deadline.is_some_and(|d| Instant::now() >= d) {
            return Ok(finish(Termination::TimeLimit, None, f.flow_value(), iterations, pierced));
        }
        f.augment(cfg.solver, pool);
        iterations += 1;
        if f.flow_value() > abort_cut {
            return Ok(finish(Termination::AbortCutTooLarge, None, f.flow_value(), iterations, pierced));
        }
        let cuts = f.derive_cuts();

        let mut balanced: Vec<Candidate> = Vec::new();
        if within(cfg, cuts.source_weight, total - cuts.source_weight) {
            balanced.push(from_source_set(g, &cuts.source_reach, cuts.source_weight));
        }
        if within(cfg, total - cuts.sink_weight, cuts.sink_weight) {
            balanced.push(from_sink_set(g, &cuts.sink_reach, cuts.sink_weight));
        }
        if let Some(first) = balanced.into_iter().min_by(|a, b| imbalance(cfg, a).total_cmp(&imbalance(cfg, b))) {
            let best = most_balanced_cut(&f, &cuts, first, cfg, &mut piercer.rng);
            return Ok(finish(Termination::Balanced, Some(best), f.flow_value(), iterations, pierced));
        }

        let preferred = if cuts.source_weight <= cuts.sink_weight { Side::Source } else { Side::Sink };
        let mut side = preferred;
        let (mut nodes, mut bulk) = piercer.select(&f, &cuts, side);
        if nodes.is_empty() {
            side = preferred.opposite();
            (nodes, bulk) = piercer.select(&f, &cuts, side);
        }
        if nodes.is_empty() {
            return Err(Error::NoCandidates);
        }
        pierced += nodes.len();
        let (reach, before) = match side {
            Side::Source => (&cuts.source_reach, cuts.source_weight),
            Side::Sink => (&cuts.sink_reach, cuts.sink_weight),
        };
        let mut grown: Vec<NodeId> = g.nodes().filter(|&v| reach[v] && !f.is_terminal(v)).collect();
        let pierced_weight: Capacity = nodes.iter().map(|&v| g.node_weight(v)).sum();
        let terminal_weight: Capacity = g.nodes().filter(|&v| f.is_terminal(v) && reach[v]).map(|v| g.node_weight(v)).sum();
        let added = before - terminal_weight + pierced_weight;
        grown.extend_from_slice(&nodes);
        piercer.record(side, nodes.len(), added, bulk);
        match side {
            Side::Source => f.grow_source(&grown),
            Side::Sink => f.grow_sink(&grown),
        }
    }
}

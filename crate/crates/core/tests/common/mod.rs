#![allow(dead_code)]

use flowrefine::network::{Capacity, FlowHypergraph, NodeInfo, Side, SINK, SOURCE};
use flowrefine::{Hypergraph, PartitionState};
use rand::seq::SliceRandom;
use rand::Rng;

/// Random flow network with at most `max_pins` pins (before dropping
/// single-pin and terminal-spanning nets).
pub fn random_network(rng: &mut impl Rng, max_pins: usize) -> FlowHypergraph {
    let inner = rng.gen_range(1..=6);
    let n = inner + 2;
    let mut nodes: Vec<NodeInfo> = (0..n)
        .map(|v| NodeInfo {
            weight: rng.gen_range(1..=4),
            original: None,
            distance: rng.gen_range(1..=3),
            origin: match v {
                SOURCE => Side::Source,
                SINK => Side::Sink,
                _ if rng.gen_bool(0.5) => Side::Source,
                _ => Side::Sink,
            },
        })
        .collect();
    nodes[SOURCE].distance = 0;
    nodes[SINK].distance = 0;
    let mut nets = Vec::new();
    let mut pins = 0;
    while pins < max_pins {
        let size = rng.gen_range(2..=4).min(n).min(max_pins - pins);
        if size < 2 {
            break;
        }
        let mut all: Vec<usize> = (0..n).collect();
        all.shuffle(rng);
        let net: Vec<usize> = all[..size].to_vec();
        pins += size;
        nets.push((net, rng.gen_range(1..=5)));
    }
    FlowHypergraph::from_nets(nodes, nets, false, None)
}

/// Minimum `s`-`t` cut by enumerating all sides of the non-terminal nodes.
pub fn brute_force_min_cut(g: &FlowHypergraph) -> Capacity {
    brute_force_terminal_cut(g, &[SOURCE], &[SINK])
}

/// Minimum cut separating the node sets `sources` and `sinks`.
pub fn brute_force_terminal_cut(g: &FlowHypergraph, sources: &[usize], sinks: &[usize]) -> Capacity {
    let free: Vec<usize> = g.nodes().filter(|v| !sources.contains(v) && !sinks.contains(v)).collect();
    assert!(free.len() <= 20);
    let mut side = vec![Side::Sink; g.num_nodes()];
    for &v in sources {
        side[v] = Side::Source;
    }
    let mut best = Capacity::MAX;
    for mask in 0u64..(1 << free.len()) {
        for (i, &v) in free.iter().enumerate() {
            side[v] = if mask >> i & 1 == 1 { Side::Source } else { Side::Sink };
        }
        best = best.min(g.cut_weight(|v| side[v]));
    }
    best
}

/// Minimum connectivity metric over all ε-balanced bipartitions.
pub fn brute_force_bipartition(h: &Hypergraph, epsilon: f64) -> Option<u64> {
    let n = h.num_vertices();
    assert!(n <= 20);
    let max = flowrefine::partition::max_block_weight(h.total_vertex_weight(), 2, epsilon);
    let mut best = None;
    // vertex 0 stays in block 0 by symmetry
    for mask in 0u64..(1 << (n - 1)) {
        let block = |v: usize| if v == 0 { 0 } else { (mask >> (v - 1) & 1) as usize };
        let w1: u64 = (0..n).filter(|&v| block(v) == 1).map(|v| h.vertex_weight(v)).sum();
        let w0 = h.total_vertex_weight() - w1;
        if w0 > max || w1 > max {
            continue;
        }
        let cut: u64 = h
            .nets()
            .filter(|&e| {
                let pins = h.pins(e);
                pins.iter().any(|&v| block(v) != block(pins[0]))
            })
            .map(|e| h.net_weight(e))
            .sum();
        best = Some(best.map_or(cut, |b: u64| b.min(cut)));
    }
    best
}

/// Random hypergraph with unit weights unless `weighted`.
pub fn random_hypergraph(rng: &mut impl Rng, n: usize, m: usize, max_size: usize, weighted: bool) -> Hypergraph {
    let nets: Vec<Vec<usize>> = (0..m)
        .map(|_| {
            let size = rng.gen_range(2..=max_size.max(2)).min(n);
            let mut all: Vec<usize> = (0..n).collect();
            all.shuffle(rng);
            all.truncate(size);
            all
        })
        .collect();
    let net_weights = weighted.then(|| (0..m).map(|_| rng.gen_range(1..=4)).collect());
    let vertex_weights = weighted.then(|| (0..n).map(|_| rng.gen_range(1..=3)).collect());
    Hypergraph::new(n, nets, net_weights, vertex_weights).unwrap()
}

/// Random partition with perfectly even block sizes on unit weights.
pub fn random_balanced_partition(rng: &mut impl Rng, h: &Hypergraph, k: usize, epsilon: f64) -> PartitionState {
    let mut blocks: Vec<usize> = (0..h.num_vertices()).map(|v| v % k).collect();
    blocks.shuffle(rng);
    PartitionState::new(h, k, epsilon, blocks).unwrap()
}

/// Recounts `Σ (λ(e) - 1) ω(e)` from the block assignment alone.
pub fn recount_metric(h: &Hypergraph, blocks: &[usize]) -> u64 {
    h.nets()
        .map(|e| {
            let mut seen: Vec<usize> = h.pins(e).iter().map(|&v| blocks[v]).collect();
            seen.sort_unstable();
            seen.dedup();
            (seen.len() as u64 - 1) * h.net_weight(e)
        })
        .sum()
}

/// One instance of the refinement fuzz suite.
pub struct FuzzInstance {
    pub hypergraph: Hypergraph,
    pub partition: PartitionState,
}

/// 200 random hypergraphs with up to 200 vertices and k cycling through
/// 2, 4, 8. Even instances have unit weights and a shuffled round-robin
/// partition, odd instances are weighted with a greedy BFS partition.
pub fn fuzz_suite(count: usize) -> Vec<FuzzInstance> {
    use rand::SeedableRng;
    (0..count)
        .map(|i| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1000 + i as u64);
            let k = [2, 4, 8][i % 3];
            let n = rng.gen_range(4 * k..=200);
            let m = rng.gen_range(n..=2 * n);
            let weighted = i % 2 == 1;
            let hypergraph = random_hypergraph(&mut rng, n, m, 6, weighted);
            let partition = if weighted {
                flowrefine::seed::seed_partition(&hypergraph, k, 0.03, rng.gen()).unwrap()
            } else {
                random_balanced_partition(&mut rng, &hypergraph, k, 0.03)
            };
            FuzzInstance { hypergraph, partition }
        })
        .collect()
}

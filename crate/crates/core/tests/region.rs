mod common;

use common::*;
use flowrefine::region::{grow_region, region_weight_bound};
use flowrefine::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn regions_respect_weight_and_distance_bounds(
        seed in any::<u64>(),
        k in 2usize..5,
        alpha in prop::sample::select(vec![1.0, 2.0, 16.0, 100.0]),
        delta in 1u32..4,
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(2 * k..80);
        let h = random_hypergraph(&mut rng, n, n, 5, true);
        let Ok(p) = flowrefine::seed::seed_partition(&h, k, 0.03, seed) else { return Ok(()) };
        let q = QuotientGraph::build(&h, &p);
        for pair in q.adjacent_pairs() {
            let (a, b) = (pair.first, pair.second);
            let region = grow_region(&h, &p, a, b, &q.cut_nets(&p, a, b), alpha, delta).unwrap();
            let (wa, wb) = (p.block_weight(a), p.block_weight(b));
            // a block much heavier than its partner gets a negative bound
            prop_assert!(region.source_weight as f64 <= region_weight_bound(wa, wb, alpha, 0.03).max(0.0));
            prop_assert!(region.sink_weight as f64 <= region_weight_bound(wb, wa, alpha, 0.03).max(0.0));
            let mut seen = std::collections::HashSet::new();
            for &(v, d) in &region.source_side {
                prop_assert_eq!(p.block(v), a);
                prop_assert!((1..=delta).contains(&d));
                prop_assert!(seen.insert(v));
            }
            for &(v, d) in &region.sink_side {
                prop_assert_eq!(p.block(v), b);
                prop_assert!((1..=delta).contains(&d));
                prop_assert!(seen.insert(v));
            }
            let sum = |side: &[(usize, u32)]| side.iter().map(|&(v, _)| h.vertex_weight(v)).sum::<u64>();
            prop_assert_eq!(sum(&region.source_side), region.source_weight);
            prop_assert_eq!(sum(&region.sink_side), region.sink_weight);
        }
    }

    #[test]
    fn with_alpha_one_every_region_move_is_balanced(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(4..20);
        let h = random_hypergraph(&mut rng, n, n, 4, true);
        let Ok(p) = flowrefine::seed::seed_partition(&h, 2, 0.03, seed) else { return Ok(()) };
        let q = QuotientGraph::build(&h, &p);
        let Ok(region) = grow_region(&h, &p, 0, 1, &q.cut_nets(&p, 0, 1), 1.0, 3) else { return Ok(()) };
        let vertices: Vec<usize> = region.vertices().collect();
        prop_assume!(vertices.len() <= 14);
        let max = p.max_block_weight();
        for mask in 0u32..(1 << vertices.len()) {
            let mut w = p.block_weights();
            for (i, &v) in vertices.iter().enumerate() {
                if mask >> i & 1 == 1 {
                    let from = p.block(v);
                    w[from] -= h.vertex_weight(v);
                    w[1 - from] += h.vertex_weight(v);
                }
            }
            prop_assert!(w[0] <= max && w[1] <= max, "{:?} > {}", w, max);
        }
    }
}

#[test]
fn h1_region_with_room_for_two_vertices() {
    let h = Hypergraph::new(4, vec![vec![0, 1], vec![1, 2], vec![2, 3]], None, None).unwrap();
    let p = PartitionState::new(&h, 2, 0.03, vec![0, 0, 1, 1]).unwrap();
    let q = QuotientGraph::build(&h, &p);
    let region = grow_region(&h, &p, 0, 1, &q.cut_nets(&p, 0, 1), 1.0 / 0.03, 2).unwrap();
    assert_eq!(region.source_side, vec![(1, 1), (0, 2)]);
    assert_eq!(region.sink_side, vec![(2, 1), (3, 2)]);
}

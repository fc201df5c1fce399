mod common;

use common::*;
use flowrefine::*;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn parallel_refinement_is_safe(index in 0usize..200, threads in 1usize..9, seed in any::<u64>()) {
        let inst = fuzz_suite(index + 1).pop().unwrap();
        let (h, p) = (&inst.hypergraph, inst.partition.clone());
        let stats = refine(h, &p, &RefinementConfig { threads, seed, validate: true, ..Default::default() }).unwrap();
        prop_assert!(stats.final_metric <= stats.initial_metric);
        prop_assert_eq!(stats.final_metric, recount_metric(h, &p.assignment()));
        prop_assert!(p.is_balanced());
        prop_assert!(p.validate(h).is_ok());
        prop_assert_eq!(stats.improvements_found, stats.applied + stats.reverted + stats.balance_rejected);
    }
}

#[test]
fn one_thread_is_deterministic() {
    for inst in fuzz_suite(12) {
        let run = || {
            let p = inst.partition.clone();
            refine(&inst.hypergraph, &p, &RefinementConfig { seed: 5, ..Default::default() }).unwrap();
            p.assignment()
        };
        assert_eq!(run(), run());
    }
}

#[test]
fn refiner_keeps_history_across_calls() {
    let inst = fuzz_suite(3).pop().unwrap();
    let p = inst.partition.clone();
    let mut refiner = Refiner::new(RefinementConfig::default());
    let first = refiner.refine(&inst.hypergraph, &p).unwrap();
    let second = refiner.refine(&inst.hypergraph, &p).unwrap();
    assert_eq!(second.initial_metric, first.final_metric);
    assert!(second.final_metric <= second.initial_metric);
}

#[test]
fn imbalanced_refinement_stays_within_its_own_limit() {
    let inst = fuzz_suite(2).pop().unwrap();
    let p = inst.partition.clone();
    let stats = refine(&inst.hypergraph, &p, &RefinementConfig { threads: 4, ..Default::default() }).unwrap();
    assert!(stats.final_imbalance <= 0.03 + 1e-9);
}

//! Acceptance criteria 1-9. Runs without the libtest harness and prints one
//! PASS/FAIL line per criterion; exits non-zero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use common::*;
use flowrefine::cli::Args;
use flowrefine::flow::{FlowState, ParallelOptions, Solver};
use flowrefine::network::{construct_net_scan, construct_node_sort, Capacity, ConstructOptions, FlowHypergraph, SINK, SOURCE};
use flowrefine::region::grow_region;
use flowrefine::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn pool(threads: usize) -> rayon::ThreadPool {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap()
}

fn max_flow(g: &FlowHypergraph, solver: Solver, pool: Option<&rayon::ThreadPool>, restricted: bool) -> Capacity {
    let mut f = FlowState::new(g, &[SOURCE], &[SINK], restricted).unwrap();
    f.augment(solver, pool);
    f.flow_value()
}

fn parallel() -> Solver {
    Solver::Parallel(ParallelOptions::default())
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let pools = [pool(1), pool(2), pool(8)];
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for i in 0..500 {
        let g = random_network(&mut rng, 12);
        let oracle = brute_force_min_cut(&g);
        let seq = max_flow(&g, Solver::Sequential, None, true);
        if seq != oracle {
            return outcome(false, format!("instance {i}: sequential {seq} vs oracle {oracle}"));
        }
        for p in &pools {
            let par = max_flow(&g, parallel(), Some(p), true);
            if par != oracle {
                return outcome(false, format!("instance {i}: {} workers {par} vs oracle {oracle}", p.current_num_threads()));
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(secs < 60.0, format!("500 networks agree with the oracle in {secs:.1}s"))
}

/// Five-node network on which a serialized round discharges an `e_in` node
/// to the maximum label while a pin node pushes into it in the same round.
fn race_network() -> FlowHypergraph {
    FlowHypergraph::from_weights(
        &[2, 1, 4, 3, 4],
        &[(&[1, 3, 4], 1), (&[2, 3], 4), (&[1, 2, 3, 4], 1), (&[0, 3], 5), (&[0, 4], 2), (&[2, 4], 1)],
    )
}

fn criterion_2() -> Outcome {
    let g = race_network();
    let oracle = brute_force_min_cut(&g);
    let unfixed = ParallelOptions {
        collect_fix: false,
        periodic_relabel: false,
        serialized: Some(18),
        stagnation_rounds: u32::MAX,
        ..Default::default()
    };
    let mut f = FlowState::new(&g, &[SOURCE], &[SINK], true).unwrap();
    f.augment(Solver::Parallel(unfixed), None);
    let violations = f.label_violations();
    if violations.is_empty() {
        return outcome(false, "race did not reproduce a label violation without the fix".into());
    }
    let (u, v) = violations[0];
    let shown = format!("d({u})={} > d({v})+1={}", f.label(u), f.label(v) + 1);

    let fixed = ParallelOptions { periodic_relabel: false, stagnation_rounds: u32::MAX, ..Default::default() };
    let eight = pool(8);
    for rep in 0..1000u64 {
        for (opts, p) in [
            (ParallelOptions { serialized: Some(rep), ..fixed }, None),
            (fixed, Some(&eight)),
        ] {
            let mut f = FlowState::new(&g, &[SOURCE], &[SINK], true).unwrap();
            f.augment(Solver::Parallel(opts), p);
            if !f.label_violations().is_empty() || f.flow_value() != oracle || !f.is_maximal() {
                return outcome(false, format!("repetition {rep} ({opts:?}): flow {} vs oracle {oracle}", f.flow_value()));
            }
        }
    }
    outcome(true, format!("without the fix {shown}; with it 1000 serialized and 1000 8-worker runs are valid with |f|={oracle}"))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p2 = pool(2);
    for i in 0..1000 {
        let g = random_network(&mut rng, 30);
        let restricted = i % 2 == 0;
        for (solver, p) in [(Solver::Sequential, None), (parallel(), Some(&p2))] {
            let mut f = FlowState::new(&g, &[SOURCE], &[SINK], restricted).unwrap();
            f.augment(solver, p);
            let cuts = f.derive_cuts();
            let (a, b) = (cuts.source_cut_weight(&g), cuts.sink_cut_weight(&g));
            if a != f.flow_value() || b != f.flow_value() {
                return outcome(false, format!("instance {i}: |f|={} source cut {a} sink cut {b}", f.flow_value()));
            }
        }
    }
    outcome(true, "1000 networks, both solvers: source and sink cut weights equal |f|".into())
}

fn criterion_4() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let p2 = pool(2);
    let mut regions = 0;
    let mut attempts = 0;
    while regions < 500 {
        attempts += 1;
        let n = rng.gen_range(6..=20);
        let m = rng.gen_range(n / 2..=2 * n);
        let weighted = rng.gen_bool(0.5);
        let h = random_hypergraph(&mut rng, n, m, 5, weighted);
        let p = random_balanced_partition(&mut rng, &h, 2, 0.03);
        let q = QuotientGraph::build(&h, &p);
        let cut = q.cut_nets(&p, 0, 1);
        let alpha = [1.0, 4.0, 16.0, 1000.0][rng.gen_range(0..4)];
        let delta = rng.gen_range(1..=3);
        let Ok(region) = grow_region(&h, &p, 0, 1, &cut, alpha, delta) else { continue };
        regions += 1;
        let raw = |pool| ConstructOptions { skip_merging: true, pool };
        let reference = construct_net_scan(&h, &p, &region, raw(None)).net_multiset();
        for other in [
            construct_node_sort(&h, &p, &region, raw(None)),
            construct_net_scan(&h, &p, &region, raw(Some(&p2))),
            construct_node_sort(&h, &p, &region, raw(Some(&p2))),
        ] {
            if other.net_multiset() != reference {
                return outcome(false, format!("region {regions}: construction multisets differ"));
            }
        }
        let unmerged = construct_node_sort(&h, &p, &region, raw(None));
        let merged = construct_node_sort(&h, &p, &region, ConstructOptions { skip_merging: false, pool: None });
        if brute_force_min_cut(&unmerged) != brute_force_min_cut(&merged) {
            return outcome(false, format!("region {regions}: merging changed the minimum cut"));
        }
    }
    outcome(true, format!("500 regions ({attempts} attempts): identical multisets, merging keeps the minimum cut"))
}

fn criterion_5() -> Outcome {
    let suite = fuzz_suite(200);
    let mut runs = 0;
    for (i, inst) in suite.iter().enumerate() {
        let h = &inst.hypergraph;
        for threads in [1, 2, 4, 8] {
            for seed in 0..3 {
                let p = inst.partition.clone();
                let cfg = RefinementConfig { threads, seed, ..Default::default() };
                let stats = refine(h, &p, &cfg).unwrap();
                runs += 1;
                let metric = recount_metric(h, &p.assignment());
                let bad = if stats.final_metric > stats.initial_metric {
                    Some("metric increased")
                } else if metric != stats.final_metric {
                    Some("reported metric differs from recount")
                } else if !p.is_balanced() {
                    Some("balance broken")
                } else if p.validate(h).is_err() {
                    Some("partition invariants broken")
                } else {
                    None
                };
                if let Some(why) = bad {
                    return outcome(false, format!("instance {i}, {threads} threads, seed {seed}: {why}"));
                }
            }
        }
    }
    outcome(true, format!("{runs} refinements: metric never increased, all partitions balanced"))
}

fn criterion_6() -> Outcome {
    let mut hits = 0;
    let mut gap = 0;
    for run in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(run);
        let n = rng.gen_range(10..=16);
        let m = n + rng.gen_range(0..n);
        let h = random_hypergraph(&mut rng, n, m, 3, false);
        let p = random_balanced_partition(&mut rng, &h, 2, 0.03);
        let optimum = brute_force_bipartition(&h, 0.03).unwrap();
        let stats = refine(&h, &p, &RefinementConfig { seed: run, ..Default::default() }).unwrap();
        if stats.final_metric == optimum {
            hits += 1;
        }
        gap += stats.final_metric - optimum;
    }
    outcome(hits >= 90, format!("{hits}/100 runs reach the optimum (required 90), total excess {gap}"))
}

/// Two-sided exact sign test.
fn sign_test(pos: u64, neg: u64) -> f64 {
    let n = pos + neg;
    if n == 0 {
        return 1.0;
    }
    let k = pos.min(neg);
    let mut coef = 1.0f64;
    let mut tail = 0.0;
    for i in 0..=k {
        if i > 0 {
            coef *= (n - i + 1) as f64 / i as f64;
        }
        tail += coef;
    }
    (2.0 * tail / 2f64.powi(n as i32)).min(1.0)
}

fn criterion_7() -> Outcome {
    let suite = fuzz_suite(200);
    let (mut pos, mut neg) = (0, 0);
    let (mut on_metrics, mut off_metrics) = (Vec::new(), Vec::new());
    let (mut on_iters, mut off_iters, mut long) = (0u64, 0u64, 0u64);
    for (i, inst) in suite.iter().enumerate() {
        let run = |bulk_piercing| {
            let cfg = RefinementConfig { seed: i as u64, bulk_piercing, ..Default::default() };
            refine(&inst.hypergraph, &inst.partition.clone(), &cfg).unwrap()
        };
        let (on, off) = (run(true), run(false));
        on_metrics.push(on.final_metric);
        off_metrics.push(off.final_metric);
        match on.final_metric.cmp(&off.final_metric) {
            std::cmp::Ordering::Greater => pos += 1,
            std::cmp::Ordering::Less => neg += 1,
            std::cmp::Ordering::Equal => {}
        }
        if off.flowcutter_iterations >= 50 {
            long += 1;
            on_iters += on.flowcutter_iterations;
            off_iters += off.flowcutter_iterations;
        }
    }
    on_metrics.sort_unstable();
    off_metrics.sort_unstable();
    let p = sign_test(pos, neg);
    let (on_mean, off_mean) = (on_iters as f64 / long.max(1) as f64, off_iters as f64 / long.max(1) as f64);
    outcome(
        p > 0.05 && long > 0 && on_mean < off_mean,
        format!(
            "medians {} vs {}, bulk worse/better {pos}/{neg} (p={p:.3}); mean iterations on {long} long instances {on_mean:.1} vs {off_mean:.1}",
            on_metrics[100], off_metrics[100]
        ),
    )
}

fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let p2 = pool(2);
    let mut networks: Vec<FlowHypergraph> = (0..500).map(|_| random_network(&mut rng, 30)).collect();
    for inst in fuzz_suite(200) {
        let (h, p) = (&inst.hypergraph, &inst.partition);
        let q = QuotientGraph::build(h, p);
        let cut = q.cut_nets(p, 0, 1);
        if let Ok(region) = grow_region(h, p, 0, 1, &cut, 16.0, 2) {
            networks.push(construct_net_scan(h, p, &region, ConstructOptions::default()));
        }
    }
    for (i, g) in networks.iter().enumerate() {
        for (solver, p) in [(Solver::Sequential, None), (parallel(), Some(&p2))] {
            let (a, b) = (max_flow(g, solver, p, true), max_flow(g, solver, p, false));
            if a != b {
                return outcome(false, format!("network {i} ({solver:?}): restricted {a} vs unrestricted {b}"));
            }
        }
    }
    outcome(true, format!("{} networks, both solvers: restricted and unrestricted |f| agree", networks.len()))
}

fn criterion_9() -> Outcome {
    let args = Args::parse_from(["flowrefine", "--hypergraph", "in.hgr", "--k", "2"]);
    let got = args.config();
    let want = RefinementConfig {
        epsilon: 0.03,
        tau: 1.0,
        alpha: 16.0,
        delta: 2,
        beta: 0.55,
        bulk_piercing: true,
        ..RefinementConfig::default()
    };
    let snapshot = format!(
        "tau={} delta={} alpha={} beta={} epsilon={} bulk_piercing={}",
        got.tau, got.delta, got.alpha, got.beta, got.epsilon, got.bulk_piercing
    );
    outcome(got == want && snapshot == "tau=1 delta=2 alpha=16 beta=0.55 epsilon=0.03 bulk_piercing=true", snapshot)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("min-cut oracle", criterion_1),
        ("push-relabel race fix", criterion_2),
        ("max-flow min-cut identity", criterion_3),
        ("construction equivalence", criterion_4),
        ("refinement safety", criterion_5),
        ("desk-scale quality", criterion_6),
        ("bulk piercing neutrality", criterion_7),
        ("capacity restriction", criterion_8),
        ("parameter defaults", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = run();
        failed += usize::from(!o.pass);
        println!(
            "criterion {} {name}: {} ({}; {:.1}s)",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

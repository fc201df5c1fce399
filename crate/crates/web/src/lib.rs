//! WebAssembly bindings for the browser demo. Every export takes a
//! hypergraph in hMetis text format and returns a JSON string.

use flowrefine::flow::{FlowState, ParallelOptions, Solver};
use flowrefine::flowcutter::{run_flowcutter, FlowCutterConfig, FlowCutterResult};
use flowrefine::io::parse_hgr;
use flowrefine::network::{construct, select_construction, ConstructOptions, FlowHypergraph, SINK, SOURCE};
use flowrefine::region::grow_region;
use flowrefine::seed::seed_partition;
use flowrefine::{refine, Hypergraph, PartitionState, QuotientGraph, RefinementConfig};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;
use web_time::Instant;

fn respond(result: Result<Value, String>) -> String {
    match result {
        Ok(v) => v.to_string(),
        Err(e) => json!({ "error": e }).to_string(),
    }
}

/// Seeds a `k`-way partition and refines it.
#[wasm_bindgen]
pub fn refine_demo(hgr: &str, k: usize, epsilon: f64, seed: u64) -> String {
    respond(refine_inner(hgr, k, epsilon, seed))
}

fn refine_inner(hgr: &str, k: usize, epsilon: f64, seed: u64) -> Result<Value, String> {
    let h = parse_hgr(hgr).map_err(|e| e.to_string())?;
    let p = seed_partition(&h, k, epsilon, seed).map_err(|e| e.to_string())?;
    let cfg = RefinementConfig { epsilon, seed, threads: 1, ..Default::default() };
    let t = Instant::now();
    let stats = refine(&h, &p, &cfg).map_err(|e| e.to_string())?;
    Ok(json!({
        "initial_metric": stats.initial_metric,
        "final_metric": stats.final_metric,
        "imbalance": stats.final_imbalance,
        "rounds": stats.rounds,
        "applied": stats.applied,
        "block_weights": p.block_weights(),
        "assignment": p.assignment(),
        "millis": t.elapsed().as_secs_f64() * 1e3,
    }))
}

/// Network around the cut of a seeded bipartition.
fn bipartition_network(
    h: &Hypergraph,
    epsilon: f64,
    seed: u64,
    alpha: f64,
    delta: u32,
) -> Result<(PartitionState, FlowHypergraph), String> {
    let p = seed_partition(h, 2, epsilon, seed).map_err(|e| e.to_string())?;
    let q = QuotientGraph::build(h, &p);
    let region = grow_region(h, &p, 0, 1, &q.cut_nets(&p, 0, 1), alpha, delta).map_err(|e| e.to_string())?;
    let g = construct(select_construction(h), h, &p, &region, ConstructOptions::default());
    Ok((p, g))
}

fn cut_summary(r: &FlowCutterResult, millis: f64) -> Value {
    json!({
        "cut": r.cut_weight,
        "gain": r.expected_gain,
        "source_weight": r.source_weight,
        "sink_weight": r.sink_weight,
        "iterations": r.iterations,
        "pierced": r.pierced,
        "millis": millis,
    })
}

/// Computes one balanced cut of a seeded bipartition with and without bulk
/// piercing.
#[wasm_bindgen]
pub fn piercing_demo(hgr: &str, epsilon: f64, seed: u64) -> String {
    respond(piercing_inner(hgr, epsilon, seed))
}

fn piercing_inner(hgr: &str, epsilon: f64, seed: u64) -> Result<Value, String> {
    let h = parse_hgr(hgr).map_err(|e| e.to_string())?;
    // the whole pair, so the terminals start out empty
    let (p, g) = bipartition_network(&h, epsilon, seed, f64::INFINITY, u32::MAX)?;
    let max = p.max_block_weight() as i64;
    let mut out = json!({
        "nodes": g.num_nodes(),
        "nets": g.num_nets(),
        "initial_cut": g.initial_cut(),
    });
    for (key, bulk_piercing) in [("bulk", true), ("single", false)] {
        let cfg = FlowCutterConfig { bulk_piercing, seed, ..FlowCutterConfig::new(max, max) };
        let t = Instant::now();
        let r = run_flowcutter(&g, &cfg, None).map_err(|e| e.to_string())?;
        out[key] = cut_summary(&r, t.elapsed().as_secs_f64() * 1e3);
    }
    Ok(out)
}

/// Solves the maximum preflow between the two terminals of a seeded
/// bipartition's network with each push-relabel variant.
#[wasm_bindgen]
pub fn solver_demo(hgr: &str, epsilon: f64, seed: u64) -> String {
    respond(solver_inner(hgr, epsilon, seed))
}

fn solver_inner(hgr: &str, epsilon: f64, seed: u64) -> Result<Value, String> {
    let h = parse_hgr(hgr).map_err(|e| e.to_string())?;
    let defaults = RefinementConfig::default();
    let (_, g) = bipartition_network(&h, epsilon, seed, defaults.alpha, defaults.delta)?;
    let variants = [
        ("fifo", Solver::Sequential),
        ("synchronous", Solver::Parallel(ParallelOptions::default())),
        (
            "synchronous_without_fix",
            Solver::Parallel(ParallelOptions { collect_fix: false, periodic_relabel: false, ..Default::default() }),
        ),
    ];
    let mut rows = Vec::new();
    for (name, solver) in variants {
        let mut f = FlowState::new(&g, &[SOURCE], &[SINK], false).map_err(|e| e.to_string())?;
        let t = Instant::now();
        let s = f.augment(solver, None);
        rows.push(json!({
            "solver": name,
            "flow": f.flow_value(),
            "maximal": f.is_maximal(),
            "pushes": s.pushes,
            "relabels": s.relabels,
            "global_relabels": s.global_relabels,
            "rounds": s.rounds,
            "millis": t.elapsed().as_secs_f64() * 1e3,
        }));
    }
    Ok(json!({ "nodes": g.num_nodes(), "nets": g.num_nets(), "solvers": rows }))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(side: usize) -> String {
        let id = |r: usize, c: usize| r * side + c + 1;
        let mut nets = Vec::new();
        for r in 0..side {
            for c in 0..side {
                if c + 1 < side {
                    nets.push(format!("{} {}", id(r, c), id(r, c + 1)));
                }
                if r + 1 < side {
                    nets.push(format!("{} {}", id(r, c), id(r + 1, c)));
                }
            }
        }
        format!("{} {}\n{}\n", nets.len(), side * side, nets.join("\n"))
    }

    #[test]
    fn exports_return_json() {
        let grid = grid(12);
        let r: Value = serde_json::from_str(&refine_demo(&grid, 2, 0.03, 1)).unwrap();
        assert!(r["final_metric"].as_u64().unwrap() <= r["initial_metric"].as_u64().unwrap());
        let c: Value = serde_json::from_str(&piercing_demo(&grid, 0.03, 1)).unwrap();
        assert!(c["bulk"]["cut"].is_number(), "{c}");
        let s: Value = serde_json::from_str(&solver_demo(&grid, 0.03, 1)).unwrap();
        let flows: Vec<_> = s["solvers"].as_array().unwrap().iter().map(|r| r["flow"].clone()).collect();
        assert_eq!(flows[0], flows[1]);
        assert!(flows[0].as_i64().unwrap() > 0, "{s}");
    }

    #[test]
    fn errors_are_reported_as_json() {
        let r: Value = serde_json::from_str(&refine_demo("nonsense", 2, 0.03, 1)).unwrap();
        assert!(r["error"].is_string());
    }
}

mod common;

use std::process::Command;

use clap::Parser;
use common::*;
use flowrefine::cli::{run, Args};
use flowrefine::io::{read_partition, write_hgr, write_partition};
use flowrefine::{connectivity_metric, PartitionState};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn fixture(dir: &std::path::Path) -> (std::path::PathBuf, flowrefine::Hypergraph) {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let h = random_hypergraph(&mut rng, 120, 200, 5, false);
    let path = dir.join("g.hgr");
    write_hgr(&path, &h).unwrap();
    (path, h)
}

#[test]
fn refines_a_seeded_partition_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, h) = fixture(dir.path());
    let (out, stats) = (dir.path().join("out.part"), dir.path().join("stats.txt"));
    let args = Args::parse_from([
        "flowrefine",
        "--hypergraph",
        graph.to_str().unwrap(),
        "--k",
        "4",
        "--seed-partition",
        "--threads",
        "2",
        "--partition-out",
        out.to_str().unwrap(),
        "--stats",
        stats.to_str().unwrap(),
        "--validate",
    ]);
    let result = run(&args).unwrap();
    assert!(result.final_metric <= result.initial_metric);

    let blocks = read_partition(&out, h.num_vertices()).unwrap();
    let p = PartitionState::new(&h, 4, 0.03, blocks).unwrap();
    assert!(p.is_balanced());
    assert_eq!(connectivity_metric(&h, &p), result.final_metric);

    let text = std::fs::read_to_string(&stats).unwrap();
    for key in ["k=4", "threads=2", "initial_metric=", "final_metric=", "time_flow=", "balance_rejected="] {
        assert!(text.lines().any(|l| l.starts_with(key)), "missing {key}");
    }
}

#[test]
fn partition_input_is_refined() {
    let dir = tempfile::tempdir().unwrap();
    let (graph, h) = fixture(dir.path());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let p = random_balanced_partition(&mut rng, &h, 2, 0.03);
    let input = dir.path().join("in.part");
    write_partition(&input, &p.assignment()).unwrap();
    let args = Args::parse_from(["flowrefine", "--hypergraph", graph.to_str().unwrap(), "--partition-in", input.to_str().unwrap()]);
    let stats = run(&args).unwrap();
    assert_eq!(stats.initial_metric, connectivity_metric(&h, &p));
    assert!(stats.final_metric < stats.initial_metric);
}

#[test]
fn binary_reports_errors_with_a_nonzero_exit() {
    let exe = env!("CARGO_BIN_EXE_flowrefine");
    let missing = Command::new(exe).args(["--hypergraph", "/nonexistent.hgr", "--k", "2", "--seed-partition"]).output().unwrap();
    assert!(!missing.status.success());
    assert!(!missing.stderr.is_empty());

    let dir = tempfile::tempdir().unwrap();
    let (graph, _) = fixture(dir.path());
    let no_partition = Command::new(exe).args(["--hypergraph", graph.to_str().unwrap()]).output().unwrap();
    assert!(!no_partition.status.success());

    let ok = Command::new(exe).args(["--hypergraph", graph.to_str().unwrap(), "--k", "2", "--seed-partition"]).output().unwrap();
    assert!(ok.status.success(), "{}", String::from_utf8_lossy(&ok.stderr));
}

//! Command line interface.

use std::path::PathBuf;

use clap::{ArgAction, Parser};

use crate::config::RefinementConfig;
use crate::error::{Error, Result};
use crate::io::{read_hgr, read_partition, write_partition};
use crate::partition::{connectivity_metric, PartitionState};
use crate::scheduler::{RefinementStats, Refiner};
use crate::seed::seed_partition;

/// Refine a k-way hypergraph partition with flow-based local search.
#[derive(Debug, Clone, Parser)]
#[command(name = "flowrefine", version)]
pub struct Args {
    /// Hypergraph in hMetis format.
    #[arg(long)]
    pub hypergraph: PathBuf,
    /// Number of blocks.
    #[arg(long, short)]
    pub k: Option<usize>,
    #[arg(long, default_value_t = 0.03)]
    pub epsilon: f64,
    /// Input partition, one 0-based block id per line.
    #[arg(long, conflicts_with = "seed_partition")]
    pub partition_in: Option<PathBuf>,
    /// Start from a greedy BFS partition instead of a partition file.
    #[arg(long)]
    pub seed_partition: bool,
    #[arg(long)]
    pub partition_out: Option<PathBuf>,
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
    #[arg(long, default_value_t = 1.0)]
    pub tau: f64,
    #[arg(long, default_value_t = 16.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 2)]
    pub delta: u32,
    #[arg(long, default_value_t = 0.55)]
    pub beta: f64,
    #[arg(long, default_value_t = true, action = ArgAction::Set)]
    pub bulk_piercing: bool,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write `key=value` statistics to this file.
    #[arg(long)]
    pub stats: Option<PathBuf>,
    /// Check partition invariants; after every applied move sequence when a
    /// single pair worker runs, otherwise once at the end.
    #[arg(long)]
    pub validate: bool,
}

impl Args {
    pub fn config(&self) -> RefinementConfig {
        RefinementConfig {
            epsilon: self.epsilon,
            tau: self.tau,
            alpha: self.alpha,
            delta: self.delta,
            beta: self.beta,
            bulk_piercing: self.bulk_piercing,
            threads: self.threads.max(1),
            seed: self.seed,
            validate: self.validate,
            ..RefinementConfig::default()
        }
    }
}

/// Runs the CLI and returns the statistics of the refinement.
pub fn run(args: &Args) -> Result<RefinementStats> {
    let h = read_hgr(&args.hypergraph)?;
    let p = match (&args.partition_in, args.seed_partition) {
        (Some(path), _) => {
            let blocks = read_partition(path, h.num_vertices())?;
            let k = args.k.unwrap_or_else(|| blocks.iter().max().map_or(1, |&b| b + 1));
            PartitionState::new(&h, k, args.epsilon, blocks)?
        }
        (None, true) => {
            let k = args.k.ok_or_else(|| Error::InvalidPartition("--seed-partition needs --k".into()))?;
            seed_partition(&h, k, args.epsilon, args.seed)?
        }
        (None, false) => return Err(Error::InvalidPartition("either --partition-in or --seed-partition is required".into())),
    };
    if !p.is_balanced() {
        return Err(Error::InvalidPartition(format!(
            "input partition violates the maximum block weight {}: {:?}",
            p.max_block_weight(),
            p.block_weights()
        )));
    }
    if args.validate {
        p.validate(&h).map_err(Error::InvalidPartition)?;
    }

    let mut refiner = Refiner::new(args.config());
    let stats = refiner.refine(&h, &p)?;
    debug_assert_eq!(stats.final_metric, connectivity_metric(&h, &p));
    if args.validate {
        p.validate(&h).map_err(Error::InvalidPartition)?;
    }
    if let Some(path) = &args.partition_out {
        write_partition(path, &p.assignment())?;
    }
    if let Some(path) = &args.stats {
        let mut text = format!("k={}\nepsilon={}\nthreads={}\n", p.k(), args.epsilon, args.threads);
        text.push_str(&stats.to_key_values());
        std::fs::write(path, text)?;
    }
    Ok(stats)
}

pub fn main() -> std::process::ExitCode {
    let args = Args::parse();
    match run(&args) {
        Ok(stats) => {
            println!("metric before: {}", stats.initial_metric);
            println!("metric after:  {}", stats.final_metric);
            println!("imbalance:     {:.4}", stats.final_imbalance);
            std::process::ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::FAILURE
        }
    }
}

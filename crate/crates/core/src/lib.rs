//! Parallel flow-based refinement for balanced k-way hypergraph partitions.
//!
//! The pipeline improves the connectivity metric of an existing partition:
//! block pairs of the [`quotient`] graph are scheduled by the [`scheduler`],
//! a [`region`] is grown around each pair's cut, contracted into a
//! [`network`], and bipartitioned by [`flowcutter`], which solves a sequence
//! of incremental maximum preflow problems with the solvers in [`flow`].

pub mod cli;
pub mod config;
pub mod error;
pub mod flow;
pub mod flowcutter;
pub mod hypergraph;
pub mod io;
pub mod network;
pub mod partition;
pub mod quotient;
pub mod region;
pub mod scheduler;
pub mod seed;
pub mod types;

pub use config::RefinementConfig;
pub use error::{Error, Result};
pub use hypergraph::Hypergraph;
pub use scheduler::{refine, RefinementStats, Refiner};
pub use partition::{connectivity_metric, ApplyOutcome, Move, MoveSequence, PartitionState};
pub use quotient::{BlockPair, QuotientGraph};
pub use types::{BlockId, Gain, NetId, VertexId, Weight};

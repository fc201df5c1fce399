use thiserror::Error;

use crate::types::{BlockId, VertexId, Weight};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed input at line {line}: {message}")]
    Malformed { line: usize, message: String },

    #[error("invalid hypergraph: {0}")]
    InvalidHypergraph(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("balance infeasible: vertex {vertex} has weight {weight} but the maximum block weight is {max_block_weight}")]
    BalanceInfeasible {
        vertex: VertexId,
        weight: Weight,
        max_block_weight: Weight,
    },

    #[error("balance infeasible: could not place all vertices into {k} blocks of weight at most {max_block_weight}")]
    PlacementInfeasible { k: BlockId, max_block_weight: Weight },

    #[error("region between blocks {0} and {1} is empty (all cut nets are stale)")]
    EmptyRegion(BlockId, BlockId),

    #[error("source and sink sets overlap")]
    Overlap,

    #[error("flow problem is unrefinable: {0}")]
    Unrefinable(String),

    #[error("no piercing candidates available")]
    NoCandidates,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Index of a vertex of the input hypergraph (0-based).
pub type VertexId = usize;
/// Index of a net of the input hypergraph (0-based).
pub type NetId = usize;
/// Index of a block of a k-way partition (0-based).
pub type BlockId = usize;
/// Vertex and net weights. Always strictly positive.
pub type Weight = u64;
/// Signed change of the connectivity metric. Positive values are improvements.
pub type Gain = i64;

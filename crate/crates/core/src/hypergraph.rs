//! Immutable weighted hypergraph in pin-list / incidence-list form.

use crate::error::{Error, Result};
use crate::types::{NetId, VertexId, Weight};

/// A weighted hypergraph `H = (V, E, c, ω)`.
///
/// Both directions of the incidence relation are stored in CSR layout: the
/// pins of every net and the incident nets of every vertex.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    net_offsets: Vec<usize>,
    pins: Vec<VertexId>,
    vertex_offsets: Vec<usize>,
    incident_nets: Vec<NetId>,
    vertex_weights: Vec<Weight>,
    net_weights: Vec<Weight>,
    total_vertex_weight: Weight,
}

impl Hypergraph {
    /// Builds a hypergraph from pin lists. Missing weights default to one.
    ///
    /// Duplicate pins inside a net are collapsed (first occurrence wins).
    /// Empty nets, out-of-range pins and zero weights are rejected.
    pub fn new(
        num_vertices: usize,
        nets: Vec<Vec<VertexId>>,
        net_weights: Option<Vec<Weight>>,
        vertex_weights: Option<Vec<Weight>>,
    ) -> Result<Self> {
        let net_weights = net_weights.unwrap_or_else(|| vec![1; nets.len()]);
        let vertex_weights = vertex_weights.unwrap_or_else(|| vec![1; num_vertices]);
        if net_weights.len() != nets.len() {
            return Err(Error::InvalidHypergraph(format!(
                "{} net weights for {} nets",
                net_weights.len(),
                nets.len()
            )));
        }
        if vertex_weights.len() != num_vertices {
            return Err(Error::InvalidHypergraph(format!(
                "{} vertex weights for {} vertices",
                vertex_weights.len(),
                num_vertices
            )));
        }
        if let Some(e) = net_weights.iter().position(|&w| w == 0) {
            return Err(Error::InvalidHypergraph(format!("net {e} has weight zero")));
        }
        if let Some(v) = vertex_weights.iter().position(|&w| w == 0) {
            return Err(Error::InvalidHypergraph(format!("vertex {v} has weight zero")));
        }

        let mut net_offsets = Vec::with_capacity(nets.len() + 1);
        net_offsets.push(0);
        let mut pins = Vec::with_capacity(nets.iter().map(Vec::len).sum());
        let mut seen = vec![usize::MAX; num_vertices];
        for (e, net) in nets.iter().enumerate() {
            if net.is_empty() {
                return Err(Error::InvalidHypergraph(format!("net {e} is empty")));
            }
            for &v in net {
                if v >= num_vertices {
                    return Err(Error::InvalidHypergraph(format!(
                        "net {e} contains vertex {v} but there are only {num_vertices} vertices"
                    )));
                }
                if seen[v] != e {
                    seen[v] = e;
                    pins.push(v);
                }
            }
            net_offsets.push(pins.len());
        }

        let mut degree = vec![0usize; num_vertices];
        for &v in &pins {
            degree[v] += 1;
        }
        let mut vertex_offsets = Vec::with_capacity(num_vertices + 1);
        vertex_offsets.push(0);
        for d in &degree {
            vertex_offsets.push(vertex_offsets.last().unwrap() + d);
        }
        let mut cursor = vertex_offsets[..num_vertices].to_vec();
        let mut incident_nets = vec![0; pins.len()];
        for e in 0..nets.len() {
            for &v in &pins[net_offsets[e]..net_offsets[e + 1]] {
                incident_nets[cursor[v]] = e;
                cursor[v] += 1;
            }
        }

        let total_vertex_weight = vertex_weights.iter().sum();
        Ok(Self {
            net_offsets,
            pins,
            vertex_offsets,
            incident_nets,
            vertex_weights,
            net_weights,
            total_vertex_weight,
        })
    }

    pub fn num_vertices(&self) -> usize {
        self.vertex_weights.len()
    }

    pub fn num_nets(&self) -> usize {
        self.net_weights.len()
    }

    pub fn num_pins(&self) -> usize {
        self.pins.len()
    }

    pub fn pins(&self, e: NetId) -> &[VertexId] {
        &self.pins[self.net_offsets[e]..self.net_offsets[e + 1]]
    }

    pub fn net_size(&self, e: NetId) -> usize {
        self.net_offsets[e + 1] - self.net_offsets[e]
    }

    pub fn incident_nets(&self, v: VertexId) -> &[NetId] {
        &self.incident_nets[self.vertex_offsets[v]..self.vertex_offsets[v + 1]]
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.vertex_offsets[v + 1] - self.vertex_offsets[v]
    }

    pub fn vertex_weight(&self, v: VertexId) -> Weight {
        self.vertex_weights[v]
    }

    pub fn net_weight(&self, e: NetId) -> Weight {
        self.net_weights[e]
    }

    pub fn vertex_weights(&self) -> &[Weight] {
        &self.vertex_weights
    }

    pub fn net_weights(&self) -> &[Weight] {
        &self.net_weights
    }

    pub fn total_vertex_weight(&self) -> Weight {
        self.total_vertex_weight
    }

    pub fn has_unit_vertex_weights(&self) -> bool {
        self.vertex_weights.iter().all(|&w| w == 1)
    }

    pub fn has_unit_net_weights(&self) -> bool {
        self.net_weights.iter().all(|&w| w == 1)
    }

    pub fn vertices(&self) -> std::ops::Range<VertexId> {
        0..self.num_vertices()
    }

    pub fn nets(&self) -> std::ops::Range<NetId> {
        0..self.num_nets()
    }

    /// Average number of pins per net; zero for a hypergraph without nets.
    pub fn average_net_size(&self) -> f64 {
        if self.num_nets() == 0 {
            0.0
        } else {
            self.num_pins() as f64 / self.num_nets() as f64
        }
    }
}

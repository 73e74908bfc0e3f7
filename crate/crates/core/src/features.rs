use crate::ctqw::{amm_matrix, vertex_entropies, AmmMatrix, VertexEntropyProfile};
use crate::depth::{depth_representation, DepthRepresentation};
use crate::error::Result;
use crate::graph::Graph;
use crate::spectral::spectral_decomposition;

/// Everything the alignment kernels need from one graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphFeatures {
    graph_id: usize,
    amm: AmmMatrix,
    entropies: VertexEntropyProfile,
    depth: DepthRepresentation,
}

impl GraphFeatures {
    pub fn compute(g: &Graph, levels: usize) -> Result<Self> {
        let amm = amm_matrix(&spectral_decomposition(&g.adjacency_matrix())?)?;
        let entropies = vertex_entropies(&amm)?;
        let depth = depth_representation(g, levels)?;
        Ok(Self {
            graph_id: g.graph_id(),
            amm,
            entropies,
            depth,
        })
    }

    pub fn from_parts(
        graph_id: usize,
        amm: AmmMatrix,
        entropies: VertexEntropyProfile,
        depth: DepthRepresentation,
    ) -> Self {
        Self {
            graph_id,
            amm,
            entropies,
            depth,
        }
    }

    pub fn graph_id(&self) -> usize {
        self.graph_id
    }

    pub fn with_graph_id(mut self, graph_id: usize) -> Self {
        self.graph_id = graph_id;
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.entropies.len()
    }

    pub fn levels(&self) -> usize {
        self.depth.levels()
    }

    pub fn amm(&self) -> &AmmMatrix {
        &self.amm
    }

    pub fn entropies(&self) -> &VertexEntropyProfile {
        &self.entropies
    }

    pub fn depth(&self) -> &DepthRepresentation {
        &self.depth
    }
}

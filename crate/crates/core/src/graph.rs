//! Undirected simple graphs and labelled datasets of them.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// An undirected, unweighted simple graph carrying a class label.
///
/// Edges are stored canonically as `(u, v)` with `u < v`, sorted, without
/// duplicates. Neighbour lists are built once at construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRecord", into = "GraphRecord")]
pub struct Graph {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    label: i64,
    graph_id: usize,
    neighbors: Vec<Vec<usize>>,
}

#[derive(Serialize, Deserialize)]
struct GraphRecord {
    vertex_count: usize,
    edges: Vec<(usize, usize)>,
    label: i64,
    graph_id: usize,
}

impl TryFrom<GraphRecord> for Graph {
    type Error = Error;

    fn try_from(r: GraphRecord) -> Result<Self> {
        Graph::new(r.vertex_count, r.edges, r.label, r.graph_id)
    }
}

impl From<Graph> for GraphRecord {
    fn from(g: Graph) -> Self {
        GraphRecord {
            vertex_count: g.vertex_count,
            edges: g.edges,
            label: g.label,
            graph_id: g.graph_id,
        }
    }
}

impl Graph {
    /// Validates and builds a graph. Edge orientation does not matter, but
    /// self-loops, repeated edges and out-of-range endpoints are rejected.
    pub fn new(
        vertex_count: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        label: i64,
        graph_id: usize,
    ) -> Result<Self> {
        if vertex_count == 0 {
            return Err(Error::InvalidGraph(format!(
                "graph {graph_id} has no vertices"
            )));
        }
        let mut set = BTreeSet::new();
        for (u, v) in edges {
            if u >= vertex_count || v >= vertex_count {
                return Err(Error::InvalidGraph(format!(
                    "edge ({u}, {v}) out of range for {vertex_count} vertices in graph {graph_id}"
                )));
            }
            if u == v {
                return Err(Error::InvalidGraph(format!(
                    "self-loop on vertex {u} in graph {graph_id}"
                )));
            }
            if !set.insert((u.min(v), u.max(v))) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({u}, {v}) in graph {graph_id}"
                )));
            }
        }
        Ok(Self::from_canonical(vertex_count, set.into_iter().collect(), label, graph_id))
    }

    /// `edges` must already be sorted, deduplicated and oriented `u < v`.
    pub(crate) fn from_canonical(
        vertex_count: usize,
        edges: Vec<(usize, usize)>,
        label: i64,
        graph_id: usize,
    ) -> Self {
        let mut neighbors = vec![Vec::new(); vertex_count];
        for &(u, v) in &edges {
            neighbors[u].push(v);
            neighbors[v].push(u);
        }
        for list in &mut neighbors {
            list.sort_unstable();
        }
        Self {
            vertex_count,
            edges,
            label,
            graph_id,
            neighbors,
        }
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|u| ((u + 1)..n).map(move |v| (u, v))).collect();
        Self::from_canonical(n, edges, 0, 0)
    }

    pub fn path(n: usize) -> Self {
        let edges = (1..n).map(|v| (v - 1, v)).collect();
        Self::from_canonical(n, edges, 0, 0)
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "a cycle needs at least three vertices");
        let mut edges: Vec<_> = (1..n).map(|v| (v - 1, v)).collect();
        edges.push((0, n - 1));
        edges.sort_unstable();
        Self::from_canonical(n, edges, 0, 0)
    }

    pub fn empty(n: usize) -> Self {
        Self::from_canonical(n, Vec::new(), 0, 0)
    }

    pub fn with_label(mut self, label: i64) -> Self {
        self.label = label;
        self
    }

    pub fn with_id(mut self, graph_id: usize) -> Self {
        self.graph_id = graph_id;
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn label(&self) -> i64 {
        self.label
    }

    pub fn graph_id(&self) -> usize {
        self.graph_id
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors[v].len()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors[u].binary_search(&v).is_ok()
    }

    /// Symmetric 0/1 adjacency matrix with zero diagonal.
    pub fn adjacency_matrix(&self) -> Matrix {
        let n = self.vertex_count;
        let mut a = Matrix::zeros(n, n);
        for &(u, v) in &self.edges {
            a[(u, v)] = 1.0;
            a[(v, u)] = 1.0;
        }
        a
    }

    /// Relabels vertex `i` as `perm[i]`. `perm` must be a permutation of `0..n`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.vertex_count;
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(Error::InvalidArgument(format!(
                "not a permutation of 0..{n}"
            )));
        }
        Graph::new(
            n,
            self.edges.iter().map(|&(u, v)| (perm[u], perm[v])),
            self.label,
            self.graph_id,
        )
    }

    /// SHA-256 over the vertex count and canonical edge list; identifies the
    /// structure independently of label and position in a dataset.
    pub fn content_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update((self.vertex_count as u64).to_le_bytes());
        for &(u, v) in &self.edges {
            h.update((u as u64).to_le_bytes());
            h.update((v as u64).to_le_bytes());
        }
        hex::encode(h.finalize())
    }
}

/// Ordered collection of labelled graphs; `graphs[i].graph_id() == i`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    name: String,
    graphs: Vec<Graph>,
    class_count: usize,
}

impl Dataset {
    /// Builds a dataset, reassigning graph ids to list positions.
    pub fn new(name: impl Into<String>, graphs: Vec<Graph>) -> Self {
        let graphs: Vec<Graph> = graphs
            .into_iter()
            .enumerate()
            .map(|(i, g)| g.with_id(i))
            .collect();
        let class_count = graphs.iter().map(Graph::label).collect::<BTreeSet<_>>().len();
        Self {
            name: name.into(),
            graphs,
            class_count,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn graphs(&self) -> &[Graph] {
        &self.graphs
    }

    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn class_count(&self) -> usize {
        self.class_count
    }

    pub fn labels(&self) -> Vec<i64> {
        self.graphs.iter().map(Graph::label).collect()
    }

    /// Fraction of graphs carrying the most frequent label.
    pub fn majority_class_frequency(&self) -> f64 {
        let mut counts = std::collections::BTreeMap::<i64, usize>::new();
        for g in &self.graphs {
            *counts.entry(g.label()).or_default() += 1;
        }
        let best = counts.values().copied().max().unwrap_or(0);
        if self.graphs.is_empty() {
            0.0
        } else {
            best as f64 / self.graphs.len() as f64
        }
    }

    pub fn statistics(&self) -> Result<DatasetStatistics> {
        dataset_statistics(self)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStatistics {
    pub max_vertices: usize,
    pub min_vertices: usize,
    pub mean_vertices: f64,
    pub graph_count: usize,
    pub class_count: usize,
}

pub fn dataset_statistics(d: &Dataset) -> Result<DatasetStatistics> {
    if d.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "dataset {} is empty",
            d.name()
        )));
    }
    let sizes = d.graphs().iter().map(Graph::vertex_count);
    let total: usize = sizes.clone().sum();
    Ok(DatasetStatistics {
        max_vertices: sizes.clone().max().unwrap_or(0),
        min_vertices: sizes.min().unwrap_or(0),
        mean_vertices: total as f64 / d.len() as f64,
        graph_count: d.len(),
        class_count: d.class_count(),
    })
}

impl fmt::Display for DatasetStatistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "graphs={} classes={} max_vertices={} min_vertices={} mean_vertices={:.2}",
            self.graph_count,
            self.class_count,
            self.max_vertices,
            self.min_vertices,
            self.mean_vertices
        )
    }
}

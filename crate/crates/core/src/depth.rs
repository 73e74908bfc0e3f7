//! Depth-based vertex representations: entropies of the expansion subgraphs
//! grown layer by layer around each vertex.

use std::collections::VecDeque;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::matrix::Matrix;

/// Shortest-path hop counts from `root`; `None` marks unreachable vertices.
pub fn bfs_distances(g: &Graph, root: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.vertex_count()];
    dist[root] = Some(0);
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        for &v in g.neighbors(u) {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Largest finite distance from `root`.
pub fn eccentricity(g: &Graph, root: usize) -> usize {
    bfs_distances(g, root).into_iter().flatten().max().unwrap_or(0)
}

/// Subgraph induced on every vertex within `layers` hops of `root` (root
/// included). Vertices keep their relative order; `root`'s label and id are
/// carried over.
pub fn expansion_subgraph(g: &Graph, root: usize, layers: usize) -> Result<Graph> {
    if layers == 0 {
        return Err(Error::InvalidArgument("expansion layer must be at least 1".into()));
    }
    let dist = bfs_distances(g, root);
    let mut local = vec![usize::MAX; g.vertex_count()];
    let mut count = 0;
    for (v, d) in dist.iter().enumerate() {
        if matches!(d, Some(d) if *d <= layers) {
            local[v] = count;
            count += 1;
        }
    }
    let edges = g
        .edges()
        .iter()
        .filter(|(u, v)| local[*u] != usize::MAX && local[*v] != usize::MAX)
        .map(|&(u, v)| (local[u], local[v]))
        .collect();
    Ok(Graph::from_canonical(count, edges, g.label(), g.graph_id()))
}

/// Summed over the sorted degree multiset so the value does not depend on
/// vertex labelling.
fn entropy_of_degrees(degrees: impl Iterator<Item = usize>) -> f64 {
    let mut degrees: Vec<usize> = degrees.filter(|&d| d > 0).collect();
    if degrees.is_empty() {
        return 0.0;
    }
    degrees.sort_unstable();
    if degrees[0] == degrees[degrees.len() - 1] {
        // uniform distribution; avoid summation drift
        return (degrees.len() as f64).ln();
    }
    let total = degrees.iter().sum::<usize>() as f64;
    let mut h = 0.0;
    for d in degrees {
        let p = d as f64 / total;
        h -= p * p.ln();
    }
    h
}

/// Shannon entropy (nats) of the stationary random-walk distribution
/// `p(v) = deg(v) / Σ deg`. Zero for graphs without edges.
pub fn steady_state_entropy(s: &Graph) -> f64 {
    entropy_of_degrees((0..s.vertex_count()).map(|v| s.degree(v)))
}

/// Per-vertex entropies of the 1..=H layer expansion subgraphs, together
/// with the number of vertices (root excluded) each layer reaches.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthRepresentation {
    values: Matrix,
    neighborhood_sizes: Vec<usize>,
}

impl DepthRepresentation {
    pub fn from_parts(values: Matrix, neighborhood_sizes: Vec<usize>) -> Result<Self> {
        if neighborhood_sizes.len() != values.rows() * values.cols() {
            return Err(Error::InvalidArgument(
                "neighbourhood table does not match the value matrix".into(),
            ));
        }
        Ok(Self {
            values,
            neighborhood_sizes,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.values.rows()
    }

    pub fn levels(&self) -> usize {
        self.values.cols()
    }

    pub fn values(&self) -> &Matrix {
        &self.values
    }

    /// Entropy of the `level`-layer subgraph around `vertex` (`level` is 1-based).
    pub fn value(&self, vertex: usize, level: usize) -> f64 {
        self.values[(vertex, level - 1)]
    }

    /// The first `level` entries of a vertex's representation.
    pub fn prefix(&self, vertex: usize, level: usize) -> &[f64] {
        &self.values.row(vertex)[..level]
    }

    /// `|{u ≠ vertex : d(vertex, u) ≤ level}|`.
    pub fn neighborhood_size(&self, vertex: usize, level: usize) -> usize {
        self.neighborhood_sizes[vertex * self.levels() + level - 1]
    }

    /// Neighbourhood sizes of every vertex at one level.
    pub fn neighborhood_sizes_at(&self, level: usize) -> Vec<usize> {
        (0..self.vertex_count())
            .map(|v| self.neighborhood_size(v, level))
            .collect()
    }

    pub fn raw_neighborhood_sizes(&self) -> &[usize] {
        &self.neighborhood_sizes
    }
}

/// Builds the `levels`-dimensional depth representation of every vertex.
pub fn depth_representation(g: &Graph, levels: usize) -> Result<DepthRepresentation> {
    if levels == 0 {
        return Err(Error::InvalidArgument("depth representation needs H >= 1".into()));
    }
    let n = g.vertex_count();
    let mut values = Matrix::zeros(n, levels);
    let mut sizes = vec![0usize; n * levels];
    for root in 0..n {
        let dist = bfs_distances(g, root);
        let within = |v: usize, h: usize| matches!(dist[v], Some(d) if d <= h);
        let mut previous: Option<(usize, f64)> = None;
        for h in 1..=levels {
            let reached = dist.iter().flatten().filter(|&&d| d <= h).count();
            let value = match previous {
                // the layer did not grow, so the subgraph is the same
                Some((count, value)) if count == reached => value,
                _ => entropy_of_degrees((0..n).filter(|&v| within(v, h)).map(|v| {
                    g.neighbors(v).iter().filter(|&&u| within(u, h)).count()
                })),
            };
            previous = Some((reached, value));
            values[(root, h - 1)] = value;
            sizes[root * levels + h - 1] = reached - 1;
        }
    }
    Ok(DepthRepresentation {
        values,
        neighborhood_sizes: sizes,
    })
}

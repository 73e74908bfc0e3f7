//! Seeded random graphs for tests and the self-test.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::graph::Graph;

/// Connected graph on `n` vertices: a random spanning tree plus every other
/// pair independently with probability `p`, then randomly relabelled.
pub fn random_connected_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = std::collections::BTreeSet::new();
    for v in 1..n {
        let u = rng.gen_range(0..v);
        edges.insert((u, v));
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(p) {
                edges.insert((u, v));
            }
        }
    }
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    Graph::new(n, edges.into_iter().map(|(u, v)| (perm[u], perm[v])), 0, 0)
        .expect("generated edges are valid")
}

/// Erdős–Rényi graph; may be disconnected.
pub fn random_graph(n: usize, p: f64, rng: &mut impl Rng) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in (u + 1)..n {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges, 0, 0).expect("generated edges are valid")
}

pub fn random_permutation(n: usize, rng: &mut impl Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    perm
}

#![allow(dead_code)]

use std::path::PathBuf;

use qgk_core::alignment::{level_stream_seed, pair_stream_seed};
use qgk_core::ctqw::graph_amm;
use qgk_core::ctqw::vertex_entropies;
use qgk_core::depth::{bfs_distances, expansion_subgraph, steady_state_entropy};
use qgk_core::io::load_dataset;
use qgk_core::{Dataset, Graph};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn data_dir(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

pub fn mutag() -> Dataset {
    load_dataset(data_dir("MUTAG"), "MUTAG").expect("vendored MUTAG loads")
}

/// Straight-line evaluation of the aligned entropic kernel from its
/// definition: literal expansion subgraphs, dense affinity matrices,
/// exhaustive row/column minimality, dense correspondence matrices.
/// Shares only the tie-break seed protocol with the library.
pub fn naive_aerk(gp: &Graph, gq: &Graph, levels: usize, seed: u64) -> f64 {
    let (gp, gq) = if gp.graph_id() > gq.graph_id() { (gq, gp) } else { (gp, gq) };
    let hp = vertex_entropies(&graph_amm(gp).unwrap()).unwrap();
    let hq = vertex_entropies(&graph_amm(gq).unwrap()).unwrap();
    let np = gp.vertex_count();
    let nq = gq.vertex_count();

    let db = |g: &Graph, v: usize| -> Vec<f64> {
        (1..=levels)
            .map(|h| steady_state_entropy(&expansion_subgraph(g, v, h).unwrap()))
            .collect()
    };
    let reach = |g: &Graph, v: usize, h: usize| -> usize {
        bfs_distances(g, v)
            .iter()
            .enumerate()
            .filter(|(u, d)| *u != v && matches!(d, Some(d) if *d <= h))
            .count()
    };
    let dbp: Vec<Vec<f64>> = (0..np).map(|v| db(gp, v)).collect();
    let dbq: Vec<Vec<f64>> = (0..nq).map(|v| db(gq, v)).collect();
    let pair_seed = pair_stream_seed(seed, gp.graph_id(), gq.graph_id());

    let mut per_level = Vec::new();
    for h in 1..=levels {
        let mut r = vec![vec![0.0f64; nq]; np];
        for i in 0..np {
            for j in 0..nq {
                let mut s = 0.0;
                for k in 0..h {
                    s += (dbp[i][k] - dbq[j][k]) * (dbp[i][k] - dbq[j][k]);
                }
                r[i][j] = s.sqrt();
            }
        }
        let mut cand = Vec::new();
        for i in 0..np {
            for j in 0..nq {
                let row_min = (0..nq).all(|k| r[i][j] <= r[i][k]);
                let col_min = (0..np).all(|k| r[i][j] <= r[k][j]);
                if row_min && col_min && reach(gp, i, h) > 0 && reach(gq, j, h) > 0 {
                    cand.push((i, j));
                }
            }
        }
        cand.shuffle(&mut ChaCha8Rng::seed_from_u64(level_stream_seed(pair_seed, h)));
        cand.sort_by(|a, b| r[a.0][a.1].total_cmp(&r[b.0][b.1]));
        let mut c = vec![vec![0u8; nq]; np];
        for (i, j) in cand {
            if (0..nq).all(|k| c[i][k] == 0) && (0..np).all(|k| c[k][j] == 0) {
                c[i][j] = 1;
            }
        }
        let mut level_sum = 0.0;
        for i in 0..np {
            for j in 0..nq {
                if c[i][j] == 1 {
                    level_sum += 0.5 * (-(hp.get(i) - hq.get(j)).abs()).exp();
                }
            }
        }
        per_level.push(level_sum);
    }
    per_level.iter().sum()
}

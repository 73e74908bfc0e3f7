//! Multi-level vertex alignment between two graphs.
//!
//! At each level `h` the depth representations truncated to `h` entries are
//! compared by Euclidean distance. A pair `(i, j)` is a candidate when its
//! distance is minimal in both its row and its column and both vertices
//! reach at least one other vertex within `h` hops. Candidates that share a
//! row or column are then thinned to a partial permutation with a seeded
//! tie-break, and each surviving pair is weighted by the reproducing kernel
//! of the two vertices' quantum entropies.

use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::ctqw::VertexEntropyProfile;
use crate::depth::DepthRepresentation;
use crate::error::{Error, Result};
use crate::features::GraphFeatures;
use crate::kernels::brk;
use crate::matrix::Matrix;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of the tie-break stream for the ordered pair `(id_p, id_q)`.
pub fn pair_stream_seed(seed: u64, id_p: usize, id_q: usize) -> u64 {
    splitmix64(splitmix64(splitmix64(seed) ^ id_p as u64) ^ id_q as u64)
}

/// Seed for one level within a pair stream.
pub fn level_stream_seed(pair_seed: u64, level: usize) -> u64 {
    splitmix64(pair_seed ^ (level as u64).wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

/// `r(i, j) = ‖DB_p(i)[..h] − DB_q(j)[..h]‖₂` at a fixed level `h`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    r: Matrix,
    level: usize,
}

impl AffinityMatrix {
    pub fn new(r: Matrix, level: usize) -> Self {
        Self { r, level }
    }

    pub fn matrix(&self) -> &Matrix {
        &self.r
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.r[(i, j)]
    }

    pub fn transpose(&self) -> Self {
        Self {
            r: self.r.transpose(),
            level: self.level,
        }
    }
}

pub fn affinity(
    level: usize,
    dp: &DepthRepresentation,
    dq: &DepthRepresentation,
) -> Result<AffinityMatrix> {
    if level == 0 || level > dp.levels() || level > dq.levels() {
        return Err(Error::InvalidArgument(format!(
            "level {level} outside 1..={}",
            dp.levels().min(dq.levels())
        )));
    }
    let (np, nq) = (dp.vertex_count(), dq.vertex_count());
    let mut r = Matrix::zeros(np, nq);
    for i in 0..np {
        let a = dp.prefix(i, level);
        for j in 0..nq {
            let b = dq.prefix(j, level);
            r[(i, j)] = a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt();
        }
    }
    Ok(AffinityMatrix { r, level })
}

/// Pairs whose entry equals both its row minimum and its column minimum
/// (ties admitted), in row-major order.
pub fn minimal_pairs(r: &AffinityMatrix) -> Vec<(usize, usize)> {
    let m = r.matrix();
    let row_min: Vec<f64> = (0..m.rows())
        .map(|i| m.row(i).iter().copied().fold(f64::INFINITY, f64::min))
        .collect();
    let mut col_min = vec![f64::INFINITY; m.cols()];
    for i in 0..m.rows() {
        for (c, &v) in col_min.iter_mut().zip(m.row(i)) {
            *c = c.min(v);
        }
    }
    let mut out = Vec::new();
    for i in 0..m.rows() {
        for (j, &v) in m.row(i).iter().enumerate() {
            if v <= row_min[i] && v <= col_min[j] {
                out.push((i, j));
            }
        }
    }
    out
}

/// Minimal pairs restricted to vertices with non-empty neighbourhoods at
/// the affinity level.
pub fn raw_matches(r: &AffinityMatrix, np: &[usize], nq: &[usize]) -> Vec<(usize, usize)> {
    assert_eq!(np.len(), r.matrix().rows(), "row neighbourhood table size");
    assert_eq!(nq.len(), r.matrix().cols(), "column neighbourhood table size");
    minimal_pairs(r)
        .into_iter()
        .filter(|&(i, j)| np[i] > 0 && nq[j] > 0)
        .collect()
}

/// Binary correspondence with at most one pair per row and per column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Correspondence {
    rows: usize,
    cols: usize,
    pairs: Vec<(usize, usize)>,
}

impl Correspondence {
    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Aligned pairs sorted by row.
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.pairs.binary_search(&(i, j)).is_ok()
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for &(i, j) in &self.pairs {
            m[(i, j)] = 1.0;
        }
        m
    }
}

/// Greedy thinning of `candidates` to a partial permutation.
///
/// Candidates are put in row-major order, shuffled by a ChaCha8 stream seeded
/// with `seed`, then stably sorted by affinity; a pair is kept when neither
/// its row nor its column has been used.
pub fn resolve_conflicts(
    candidates: &[(usize, usize)],
    r: &AffinityMatrix,
    seed: u64,
) -> Correspondence {
    let m = r.matrix();
    let mut order = candidates.to_vec();
    order.sort_unstable();
    order.dedup();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    order.sort_by(|a, b| m[*a].total_cmp(&m[*b]));

    let mut row_used = vec![false; m.rows()];
    let mut col_used = vec![false; m.cols()];
    let mut pairs = Vec::new();
    for (i, j) in order {
        if !row_used[i] && !col_used[j] {
            row_used[i] = true;
            col_used[j] = true;
            pairs.push((i, j));
        }
    }
    pairs.sort_unstable();
    Correspondence {
        rows: m.rows(),
        cols: m.cols(),
        pairs,
    }
}

/// Correspondence weighted by `½·exp(−|H_p(i) − H_q(j)|)` on aligned pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropicCorrespondence {
    rows: usize,
    cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl EntropicCorrespondence {
    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Sum of all entries, accumulated in row order.
    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.2).sum()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries
            .iter()
            .find(|e| e.0 == i && e.1 == j)
            .map_or(0.0, |e| e.2)
    }

    pub fn to_dense(&self) -> Matrix {
        let mut m = Matrix::zeros(self.rows, self.cols);
        for &(i, j, v) in &self.entries {
            m[(i, j)] = v;
        }
        m
    }
}

pub fn entropic_correspondence(
    c: &Correspondence,
    hp: &VertexEntropyProfile,
    hq: &VertexEntropyProfile,
) -> EntropicCorrespondence {
    EntropicCorrespondence {
        rows: c.rows,
        cols: c.cols,
        entries: c
            .pairs
            .iter()
            .map(|&(i, j)| (i, j, brk(hp.get(i), hq.get(j))))
            .collect(),
    }
}

/// Binary and entropic correspondences for levels `1..=H`.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceSet {
    levels: Vec<(Correspondence, EntropicCorrespondence)>,
}

impl CorrespondenceSet {
    pub fn levels(&self) -> usize {
        self.levels.len()
    }

    /// Binary correspondence at `level` (1-based).
    pub fn binary(&self, level: usize) -> &Correspondence {
        &self.levels[level - 1].0
    }

    /// Entropic correspondence at `level` (1-based).
    pub fn entropic(&self, level: usize) -> &EntropicCorrespondence {
        &self.levels[level - 1].1
    }

    /// Per-level sums of the entropic correspondences.
    pub fn level_totals(&self) -> Vec<f64> {
        self.levels.iter().map(|(_, e)| e.total()).collect()
    }

    /// Writes `h i j value` lines, one per aligned pair.
    pub fn write_triplets(&self, mut out: impl Write) -> io::Result<()> {
        for (h, (_, e)) in self.levels.iter().enumerate() {
            for &(i, j, v) in &e.entries {
                writeln!(out, "{} {} {} {}", h + 1, i, j, v)?;
            }
        }
        Ok(())
    }
}

/// Runs affinity → candidates → conflict resolution → entropic weighting for
/// every level. `pair_seed` should come from [`pair_stream_seed`].
pub fn correspondence_set(
    fp: &GraphFeatures,
    fq: &GraphFeatures,
    levels: usize,
    pair_seed: u64,
) -> Result<CorrespondenceSet> {
    let mut out = Vec::with_capacity(levels);
    for h in 1..=levels {
        let r = affinity(h, fp.depth(), fq.depth())?;
        let candidates = raw_matches(
            &r,
            &fp.depth().neighborhood_sizes_at(h),
            &fq.depth().neighborhood_sizes_at(h),
        );
        let c = resolve_conflicts(&candidates, &r, level_stream_seed(pair_seed, h));
        let e = entropic_correspondence(&c, fp.entropies(), fq.entropies());
        out.push((c, e));
    }
    Ok(CorrespondenceSet { levels: out })
}

//! Pairwise graph kernels.

use std::fmt;
use std::str::FromStr;

use crate::alignment::{
    affinity, correspondence_set, level_stream_seed, minimal_pairs, pair_stream_seed,
    resolve_conflicts,
};
use crate::error::{Error, Result};
use crate::features::GraphFeatures;
use crate::graph::Graph;

/// Basic reproducing kernel on the real line, `½·exp(−|a − b|)`.
#[inline]
pub fn brk(a: f64, b: f64) -> f64 {
    0.5 * (-(a - b).abs()).exp()
}

/// Degree-based quadratic approximation of the von Neumann entropy:
/// `1 − 1/n − (1/n²)·Σ_{(u,v)∈E} 1/(deg u · deg v)`.
pub fn approx_von_neumann_entropy(g: &Graph) -> f64 {
    let n = g.vertex_count() as f64;
    let s: f64 = g
        .edges()
        .iter()
        .map(|&(u, v)| 1.0 / (g.degree(u) * g.degree(v)) as f64)
        .sum();
    1.0 - 1.0 / n - s / (n * n)
}

/// Reproducing kernel between the approximate von Neumann entropies.
pub fn rgk_pair(gp: &Graph, gq: &Graph) -> f64 {
    brk(approx_von_neumann_entropy(gp), approx_von_neumann_entropy(gq))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    Aerk,
    Dbmk,
    Rgk,
}

impl KernelKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            KernelKind::Aerk => "aerk",
            KernelKind::Dbmk => "dbmk",
            KernelKind::Rgk => "rgk",
        }
    }

    /// Whether the kernel consumes [`GraphFeatures`].
    pub fn needs_features(&self) -> bool {
        !matches!(self, KernelKind::Rgk)
    }
}

impl fmt::Display for KernelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for KernelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "aerk" => Ok(KernelKind::Aerk),
            "dbmk" => Ok(KernelKind::Dbmk),
            "rgk" => Ok(KernelKind::Rgk),
            other => Err(Error::InvalidArgument(format!("unknown kernel {other:?}"))),
        }
    }
}

pub const DEFAULT_LEVELS: usize = 10;
pub const DEFAULT_SEED: u64 = 42;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KernelConfig {
    pub kind: KernelKind,
    /// Number of alignment levels `H` (the single level used by DBMK).
    pub levels: usize,
    pub seed: u64,
    pub normalize: bool,
}

impl Default for KernelConfig {
    fn default() -> Self {
        Self {
            kind: KernelKind::Aerk,
            levels: DEFAULT_LEVELS,
            seed: DEFAULT_SEED,
            normalize: false,
        }
    }
}

impl KernelConfig {
    pub fn new(kind: KernelKind, levels: usize) -> Self {
        Self {
            kind,
            levels,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::InvalidArgument("H must be at least 1".into()));
        }
        Ok(())
    }

    /// `kernel=<kind> H=<H> seed=<seed> normalize=<bool>`
    pub fn describe(&self) -> String {
        format!(
            "kernel={} H={} seed={} normalize={}",
            self.kind, self.levels, self.seed, self.normalize
        )
    }
}

/// Orders a pair by graph id so both argument orders share one computation.
fn canonical<'a>(
    fp: &'a GraphFeatures,
    fq: &'a GraphFeatures,
) -> (&'a GraphFeatures, &'a GraphFeatures) {
    if fp.graph_id() > fq.graph_id() {
        (fq, fp)
    } else {
        (fp, fq)
    }
}

/// Single-level matching kernel: the number of aligned vertex pairs at
/// level `h`, without the neighbourhood guard.
pub fn dbmk_pair(fp: &GraphFeatures, fq: &GraphFeatures, h: usize, seed: u64) -> Result<f64> {
    let (a, b) = canonical(fp, fq);
    let r = affinity(h, a.depth(), b.depth())?;
    let pair_seed = pair_stream_seed(seed, a.graph_id(), b.graph_id());
    let c = resolve_conflicts(&minimal_pairs(&r), &r, level_stream_seed(pair_seed, h));
    Ok(c.len() as f64)
}

/// Per-level contributions `Σ_{i,j} C_E^h(i, j)` for `h = 1..=H`.
pub fn aerk_level_contributions(
    fp: &GraphFeatures,
    fq: &GraphFeatures,
    levels: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    if levels == 0 {
        return Err(Error::InvalidArgument("H must be at least 1".into()));
    }
    let (a, b) = canonical(fp, fq);
    let set = correspondence_set(a, b, levels, pair_stream_seed(seed, a.graph_id(), b.graph_id()))?;
    Ok(set.level_totals())
}

/// Aligned entropic reproducing kernel: the sum over levels and aligned
/// vertex pairs of `brk(H_Q(i), H_Q(j))`.
pub fn aerk_pair(fp: &GraphFeatures, fq: &GraphFeatures, cfg: &KernelConfig) -> Result<f64> {
    Ok(aerk_level_contributions(fp, fq, cfg.levels, cfg.seed)?
        .into_iter()
        .sum())
}

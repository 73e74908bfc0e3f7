//! On-disk feature cache.
//!
//! The file starts with the line `QGK-FEAT v1`; every following line is one
//! JSON record holding a graph's averaged mixing matrix, vertex entropies and
//! depth representation, keyed by the graph's content hash and level count.
//! Unreadable records are skipped and recomputed.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ctqw::{AmmMatrix, VertexEntropyProfile};
use crate::depth::DepthRepresentation;
use crate::error::{Error, Result};
use crate::features::GraphFeatures;
use crate::graph::{Dataset, Graph};
use crate::matrix::Matrix;

pub const MAGIC: &str = "QGK-FEAT v1";

#[derive(Debug, Clone, Serialize, Deserialize)]
struct Record {
    graph_id: usize,
    hash: String,
    levels: usize,
    n: usize,
    q: Vec<f64>,
    entropies: Vec<f64>,
    depth: Vec<f64>,
    sizes: Vec<usize>,
}

impl Record {
    fn from_features(hash: String, f: &GraphFeatures) -> Self {
        Self {
            graph_id: f.graph_id(),
            hash,
            levels: f.levels(),
            n: f.vertex_count(),
            q: f.amm().matrix().as_slice().to_vec(),
            entropies: f.entropies().as_slice().to_vec(),
            depth: f.depth().values().as_slice().to_vec(),
            sizes: f.depth().raw_neighborhood_sizes().to_vec(),
        }
    }

    fn to_features(&self, graph_id: usize) -> Result<GraphFeatures> {
        let n = self.n;
        if self.q.len() != n * n
            || self.entropies.len() != n
            || self.depth.len() != n * self.levels
            || self.sizes.len() != n * self.levels
        {
            return Err(Error::InvalidArgument("cache record has inconsistent shapes".into()));
        }
        let amm = AmmMatrix::new(Matrix::from_vec(n, n, self.q.clone()))?;
        let depth = DepthRepresentation::from_parts(
            Matrix::from_vec(n, self.levels, self.depth.clone()),
            self.sizes.clone(),
        )?;
        Ok(GraphFeatures::from_parts(
            graph_id,
            amm,
            VertexEntropyProfile::new(self.entropies.clone()),
            depth,
        ))
    }
}

/// Cache hits and misses of one lookup pass.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
    /// Records in the file that could not be parsed or validated.
    pub corrupted: usize,
}

#[derive(Debug, Default)]
pub struct FeatureCache {
    records: BTreeMap<(String, usize), Record>,
    corrupted: usize,
}

pub fn cache_path(dir: &Path, dataset: &str) -> PathBuf {
    dir.join(format!("{dataset}.qgkfeat"))
}

impl FeatureCache {
    /// Reads a cache file; a missing file yields an empty cache.
    pub fn load(path: &Path) -> Result<Self> {
        let text = match fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Self::default()),
            Err(e) => return Err(Error::io(path, e)),
        };
        let mut lines = text.lines();
        let mut cache = Self::default();
        if lines.next().map(str::trim_end) != Some(MAGIC) {
            log::warn!("{}: missing {MAGIC:?} header, ignoring cache", path.display());
            cache.corrupted = text.lines().count().saturating_sub(1);
            return Ok(cache);
        }
        for (idx, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parsed = serde_json::from_str::<Record>(line)
                .map_err(|e| e.to_string())
                .and_then(|r| r.to_features(r.graph_id).map(|_| r).map_err(|e| e.to_string()));
            match parsed {
                Ok(r) => {
                    cache.records.insert((r.hash.clone(), r.levels), r);
                }
                Err(e) => {
                    log::warn!("{}:{}: corrupted cache record ({e})", path.display(), idx + 2);
                    cache.corrupted += 1;
                }
            }
        }
        Ok(cache)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut out = String::from(MAGIC);
        out.push('\n');
        let mut records: Vec<&Record> = self.records.values().collect();
        records.sort_by(|a, b| (a.graph_id, &a.hash, a.levels).cmp(&(b.graph_id, &b.hash, b.levels)));
        for r in records {
            out.push_str(&serde_json::to_string(r).expect("records serialise"));
            out.push('\n');
        }
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn corrupted(&self) -> usize {
        self.corrupted
    }

    pub fn get(&self, g: &Graph, levels: usize) -> Option<GraphFeatures> {
        let r = self.records.get(&(g.content_hash(), levels))?;
        if r.n != g.vertex_count() {
            return None;
        }
        r.to_features(g.graph_id()).ok()
    }

    pub fn insert(&mut self, g: &Graph, f: &GraphFeatures) {
        let hash = g.content_hash();
        self.records
            .insert((hash.clone(), f.levels()), Record::from_features(hash, f));
    }
}

/// Features for every graph, served from `cache_file` where possible. New
/// results are written back when anything was recomputed.
pub fn features_with_cache(
    d: &Dataset,
    levels: usize,
    cache_file: Option<&Path>,
) -> Result<(Vec<GraphFeatures>, CacheStats)> {
    let mut cache = match cache_file {
        Some(p) => FeatureCache::load(p)?,
        None => FeatureCache::default(),
    };
    let cached: Vec<Option<GraphFeatures>> =
        d.graphs().iter().map(|g| cache.get(g, levels)).collect();
    let features: Vec<GraphFeatures> = d
        .graphs()
        .par_iter()
        .zip(cached)
        .map(|(g, hit)| match hit {
            Some(f) => Ok(f),
            None => GraphFeatures::compute(g, levels),
        })
        .collect::<Result<_>>()?;
    let hits = d
        .graphs()
        .iter()
        .filter(|g| cache.get(g, levels).is_some())
        .count();
    let stats = CacheStats {
        hits,
        misses: d.len() - hits,
        corrupted: cache.corrupted(),
    };
    if let Some(p) = cache_file {
        if stats.misses > 0 || stats.corrupted > 0 {
            for (g, f) in d.graphs().iter().zip(&features) {
                cache.insert(g, f);
            }
            cache.save(p)?;
        }
    }
    Ok((features, stats))
}

//! Gram-matrix assembly over a dataset, normalisation and export.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::features::GraphFeatures;
use crate::graph::Dataset;
use crate::kernels::{aerk_pair, dbmk_pair, rgk_pair, KernelConfig, KernelKind};
use crate::matrix::Matrix;
use crate::spectral::eigendecompose;

/// Symmetric kernel matrix over a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    k: Matrix,
    config: KernelConfig,
    dataset_name: String,
    labels: Vec<i64>,
}

impl GramMatrix {
    pub fn new(k: Matrix, config: KernelConfig, dataset_name: impl Into<String>, labels: Vec<i64>) -> Result<Self> {
        if !k.is_square() || labels.len() != k.rows() {
            return Err(Error::InvalidArgument(format!(
                "Gram matrix is {}x{} with {} labels",
                k.rows(),
                k.cols(),
                labels.len()
            )));
        }
        Ok(Self {
            k,
            config,
            dataset_name: dataset_name.into(),
            labels,
        })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.k
    }

    pub fn config(&self) -> &KernelConfig {
        &self.config
    }

    pub fn dataset_name(&self) -> &str {
        &self.dataset_name
    }

    pub fn labels(&self) -> &[i64] {
        &self.labels
    }

    pub fn len(&self) -> usize {
        self.k.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.k.rows() == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.k[(i, j)]
    }

    /// `k'(p, q) = k(p, q) / sqrt(k(p, p)·k(q, q))`. Fails on a non-positive
    /// self-kernel, naming the graph.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.len();
        if let Some(p) = (0..n).find(|&p| !(self.k[(p, p)] > 0.0)) {
            return Err(Error::numerical(
                format!(
                    "cannot normalise: graph {p} of {} has self-kernel {}",
                    self.dataset_name,
                    self.k[(p, p)]
                ),
                self.k[(p, p)],
            ));
        }
        let mut k = Matrix::zeros(n, n);
        for p in 0..n {
            for q in p..n {
                let v = self.k[(p, q)] / (self.k[(p, p)] * self.k[(q, q)]).sqrt();
                k[(p, q)] = v;
                k[(q, p)] = v;
            }
        }
        Ok(Self {
            k,
            config: KernelConfig {
                normalize: true,
                ..self.config
            },
            dataset_name: self.dataset_name.clone(),
            labels: self.labels.clone(),
        })
    }

    /// Smallest eigenvalue; a diagnostic for indefiniteness, never used to
    /// alter the matrix.
    pub fn min_eigenvalue(&self) -> Result<f64> {
        let pairs = eigendecompose(&self.k, 1e-8)?;
        Ok(pairs.last().map_or(0.0, |p| p.value))
    }
}

/// Computes features for every graph of `d` in parallel.
pub fn compute_features(d: &Dataset, levels: usize) -> Result<Vec<GraphFeatures>> {
    d.graphs()
        .par_iter()
        .map(|g| GraphFeatures::compute(g, levels))
        .collect()
}

/// Builds the Gram matrix, computing features as needed.
pub fn gram(d: &Dataset, cfg: &KernelConfig) -> Result<GramMatrix> {
    cfg.validate()?;
    let features = if cfg.kind.needs_features() {
        compute_features(d, cfg.levels)?
    } else {
        Vec::new()
    };
    gram_with_features(d, &features, cfg)
}

/// Builds the Gram matrix from precomputed features (ignored for RGK).
///
/// Each unordered pair is evaluated once and mirrored; the diagonal runs the
/// same pairwise procedure on a graph against itself.
pub fn gram_with_features(
    d: &Dataset,
    features: &[GraphFeatures],
    cfg: &KernelConfig,
) -> Result<GramMatrix> {
    cfg.validate()?;
    let n = d.len();
    if cfg.kind.needs_features() {
        if features.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{} feature bundles for {n} graphs",
                features.len()
            )));
        }
        if let Some(f) = features.iter().find(|f| f.levels() < cfg.levels) {
            return Err(Error::InvalidArgument(format!(
                "features of graph {} have {} levels, kernel needs {}",
                f.graph_id(),
                f.levels(),
                cfg.levels
            )));
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|p| (p..n).map(move |q| (p, q))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(p, q)| match cfg.kind {
            KernelKind::Aerk => aerk_pair(&features[p], &features[q], cfg),
            KernelKind::Dbmk => dbmk_pair(&features[p], &features[q], cfg.levels, cfg.seed),
            KernelKind::Rgk => Ok(rgk_pair(&d.graphs()[p], &d.graphs()[q])),
        })
        .collect::<Result<_>>()?;

    let mut k = Matrix::zeros(n, n);
    for (&(p, q), &v) in pairs.iter().zip(&values) {
        k[(p, q)] = v;
        k[(q, p)] = v;
    }
    let raw = GramMatrix::new(
        k,
        KernelConfig {
            normalize: false,
            ..*cfg
        },
        d.name(),
        d.labels(),
    )?;
    if cfg.normalize {
        raw.normalized()
    } else {
        Ok(raw)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Csv,
    /// One `<label> 0:<row> 1:<k(i,1)> …` line per graph, the precomputed
    /// kernel input convention of common SVM tools.
    SvmPrecomputed,
}

impl fmt::Display for ExportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ExportFormat::Csv => "csv",
            ExportFormat::SvmPrecomputed => "svm",
        })
    }
}

impl FromStr for ExportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(ExportFormat::Csv),
            "svm" | "svm-precomputed" => Ok(ExportFormat::SvmPrecomputed),
            other => Err(Error::InvalidArgument(format!("unknown export format {other:?}"))),
        }
    }
}

/// Renders the Gram matrix. Numbers use the shortest representation that
/// parses back to the same `f64`.
pub fn render_gram(g: &GramMatrix, format: ExportFormat) -> String {
    let mut out = String::new();
    match format {
        ExportFormat::Csv => {
            out.push_str(&format!("# {}\n", g.config.describe()));
            for i in 0..g.len() {
                let row: Vec<String> = g.k.row(i).iter().map(|v| v.to_string()).collect();
                out.push_str(&row.join(","));
                out.push('\n');
            }
        }
        ExportFormat::SvmPrecomputed => {
            for i in 0..g.len() {
                out.push_str(&format!("{} 0:{}", g.labels[i], i + 1));
                for (j, v) in g.k.row(i).iter().enumerate() {
                    out.push_str(&format!(" {}:{}", j + 1, v));
                }
                out.push('\n');
            }
        }
    }
    out
}

pub fn export_gram(g: &GramMatrix, format: ExportFormat, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(render_gram(g, format).as_bytes())
        .map_err(|e| Error::io(path, e))
}

/// Parses a CSV export back into a matrix, skipping `#` comment lines.
pub fn read_gram_csv(path: impl AsRef<Path>) -> Result<Matrix> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut rows = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let row = line
            .split(',')
            .map(|f| {
                f.trim().parse::<f64>().map_err(|_| Error::Parse {
                    file: path.to_path_buf(),
                    line: idx + 1,
                    message: format!("bad number {f:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        rows.push(row);
    }
    if rows.iter().any(|r| r.len() != rows.len()) {
        return Err(Error::Parse {
            file: path.to_path_buf(),
            line: 0,
            message: "Gram matrix is not square".into(),
        });
    }
    Ok(Matrix::from_rows(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn small() -> Dataset {
        Dataset::new(
            "small",
            vec![
                Graph::path(3),
                Graph::complete(3).with_label(1),
                Graph::cycle(5),
                Graph::path(5).with_label(1),
            ],
        )
    }

    #[test]
    fn single_graph_gram() {
        let d = Dataset::new("one", vec![Graph::path(3)]);
        let g = gram(&d, &KernelConfig::new(KernelKind::Aerk, 2)).unwrap();
        assert_eq!(g.len(), 1);
        assert_eq!(g.get(0, 0), 3.0);
    }

    #[test]
    fn symmetric_and_normalised() {
        for kind in [KernelKind::Aerk, KernelKind::Dbmk, KernelKind::Rgk] {
            let cfg = KernelConfig::new(kind, 3);
            let g = gram(&small(), &cfg).unwrap();
            for p in 0..4 {
                for q in 0..4 {
                    assert_eq!(g.get(p, q).to_bits(), g.get(q, p).to_bits());
                }
            }
            let n = gram(&small(), &KernelConfig { normalize: true, ..cfg }).unwrap();
            assert!(n.config().normalize);
            for p in 0..4 {
                assert!((n.get(p, p) - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_self_kernel_cannot_be_normalised() {
        let d = Dataset::new("z", vec![Graph::path(3), Graph::empty(1)]);
        let cfg = KernelConfig {
            normalize: true,
            ..KernelConfig::new(KernelKind::Aerk, 2)
        };
        let err = gram(&d, &cfg).unwrap_err();
        assert!(err.to_string().contains("graph 1"), "{err}");
    }

    #[test]
    fn csv_export() {
        let g = GramMatrix::new(
            Matrix::from_rows(&[vec![0.5]]),
            KernelConfig::default(),
            "x",
            vec![1],
        )
        .unwrap();
        assert_eq!(
            render_gram(&g, ExportFormat::Csv),
            "# kernel=aerk H=10 seed=42 normalize=false\n0.5\n"
        );
    }

    #[test]
    fn svm_export() {
        let g = GramMatrix::new(Matrix::identity(2), KernelConfig::default(), "x", vec![1, 2]).unwrap();
        assert_eq!(
            render_gram(&g, ExportFormat::SvmPrecomputed),
            "1 0:1 1:1 2:0\n2 0:2 1:0 2:1\n"
        );
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let g = gram(&small(), &KernelConfig { normalize: true, ..KernelConfig::new(KernelKind::Aerk, 4) }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("k.csv");
        export_gram(&g, ExportFormat::Csv, &path).unwrap();
        let back = read_gram_csv(&path).unwrap();
        assert_eq!(&back, g.matrix());
        assert!(export_gram(&g, ExportFormat::Csv, dir.path().join("missing/k.csv")).is_err());
    }

    #[test]
    fn eigenvalue_diagnostic() {
        let g = GramMatrix::new(
            Matrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]),
            KernelConfig::default(),
            "x",
            vec![0, 1],
        )
        .unwrap();
        assert!((g.min_eigenvalue().unwrap() + 1.0).abs() < 1e-12);
    }
}

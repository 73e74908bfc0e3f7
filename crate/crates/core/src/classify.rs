//! Kernel nearest-neighbour classification with stratified cross-validation.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gram::GramMatrix;
use crate::kernels::KernelConfig;
use crate::matrix::Matrix;

/// Read access to a square kernel matrix.
pub trait KernelSource: Sync {
    fn size(&self) -> usize;
    fn kernel(&self, i: usize, j: usize) -> f64;
}

impl KernelSource for Matrix {
    fn size(&self) -> usize {
        self.rows()
    }

    fn kernel(&self, i: usize, j: usize) -> f64 {
        self[(i, j)]
    }
}

impl KernelSource for GramMatrix {
    fn size(&self) -> usize {
        self.len()
    }

    fn kernel(&self, i: usize, j: usize) -> f64 {
        self.get(i, j)
    }
}

/// Majority label among the `neighbors` training graphs with the largest
/// kernel value. Equal kernel values prefer the lower training index; equal
/// vote counts prefer the smaller label.
pub fn kernel_knn_predict(k_row: &[f64], train_labels: &[i64], neighbors: usize) -> Result<i64> {
    if train_labels.is_empty() {
        return Err(Error::InvalidArgument("empty training set".into()));
    }
    if k_row.len() != train_labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{} kernel values for {} training labels",
            k_row.len(),
            train_labels.len()
        )));
    }
    if neighbors == 0 || neighbors > train_labels.len() {
        return Err(Error::InvalidArgument(format!(
            "neighbors must be in 1..={}, got {neighbors}",
            train_labels.len()
        )));
    }
    let mut order: Vec<usize> = (0..k_row.len()).collect();
    order.sort_by(|&a, &b| k_row[b].total_cmp(&k_row[a]).then(a.cmp(&b)));
    let mut votes = BTreeMap::<i64, usize>::new();
    for &i in &order[..neighbors] {
        *votes.entry(train_labels[i]).or_default() += 1;
    }
    // BTreeMap iterates labels ascending; keep the first maximum
    let mut best = (i64::MAX, 0usize);
    for (&label, &count) in &votes {
        if count > best.1 {
            best = (label, count);
        }
    }
    Ok(best.0)
}

/// Fold index of every sample. Classes are shuffled independently with one
/// seeded stream (in ascending label order), concatenated, and dealt out
/// round-robin, so per-class fold sizes differ by at most one.
pub fn stratified_folds(labels: &[i64], folds: usize, seed: u64) -> Result<Vec<usize>> {
    if folds < 2 {
        return Err(Error::InvalidArgument(format!("need at least 2 folds, got {folds}")));
    }
    if folds > labels.len() {
        return Err(Error::InvalidArgument(format!(
            "{folds} folds requested for {} graphs",
            labels.len()
        )));
    }
    let mut classes = BTreeMap::<i64, Vec<usize>>::new();
    for (i, &l) in labels.iter().enumerate() {
        classes.entry(l).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut assignment = vec![0; labels.len()];
    let mut position = 0;
    for members in classes.values_mut() {
        members.shuffle(&mut rng);
        for &i in members.iter() {
            assignment[i] = position % folds;
            position += 1;
        }
    }
    Ok(assignment)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CvReport {
    pub fold_accuracies: Vec<f64>,
    pub mean_accuracy: f64,
    /// Sample standard deviation of the fold accuracies over `sqrt(folds)`.
    pub std_error: f64,
    pub folds: usize,
    pub neighbors: usize,
    pub seed: u64,
    pub kernel: Option<KernelConfig>,
    pub dataset: Option<String>,
}

impl CvReport {
    fn from_folds(fold_accuracies: Vec<f64>, neighbors: usize, seed: u64) -> Self {
        let k = fold_accuracies.len() as f64;
        let mean = fold_accuracies.iter().sum::<f64>() / k;
        let var = fold_accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (k - 1.0);
        Self {
            folds: fold_accuracies.len(),
            fold_accuracies,
            mean_accuracy: mean,
            std_error: var.sqrt() / k.sqrt(),
            neighbors,
            seed,
            kernel: None,
            dataset: None,
        }
    }

    pub fn with_kernel(mut self, cfg: KernelConfig) -> Self {
        self.kernel = Some(cfg);
        self
    }

    pub fn with_dataset(mut self, name: impl Into<String>) -> Self {
        self.dataset = Some(name.into());
        self
    }

    /// Machine-readable `key=value` lines.
    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        if let Some(d) = &self.dataset {
            let _ = writeln!(s, "dataset={d}");
        }
        if let Some(k) = &self.kernel {
            let _ = writeln!(s, "kernel={}", k.kind);
            let _ = writeln!(s, "H={}", k.levels);
            let _ = writeln!(s, "kernel_seed={}", k.seed);
            let _ = writeln!(s, "normalize={}", k.normalize);
        }
        let _ = writeln!(s, "folds={}", self.folds);
        let _ = writeln!(s, "neighbors={}", self.neighbors);
        let _ = writeln!(s, "cv_seed={}", self.seed);
        let accs: Vec<String> = self.fold_accuracies.iter().map(|a| a.to_string()).collect();
        let _ = writeln!(s, "fold_accuracies={}", accs.join(","));
        let _ = writeln!(s, "mean_accuracy={}", self.mean_accuracy);
        let _ = writeln!(s, "std_error={}", self.std_error);
        s
    }
}

impl fmt::Display for CvReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if let Some(d) = &self.dataset {
            writeln!(f, "dataset    {d}")?;
        }
        if let Some(k) = &self.kernel {
            writeln!(f, "kernel     {}", k.describe())?;
        }
        writeln!(
            f,
            "protocol   folds={} neighbors={} seed={}",
            self.folds, self.neighbors, self.seed
        )?;
        writeln!(f, "{:>6}  {:>10}", "fold", "accuracy")?;
        for (i, a) in self.fold_accuracies.iter().enumerate() {
            writeln!(f, "{:>6}  {:>10.4}", i + 1, a)?;
        }
        writeln!(
            f,
            "{:>6}  {:>10.4} ± {:.4}",
            "mean", self.mean_accuracy, self.std_error
        )
    }
}

/// Stratified `folds`-fold cross-validation of kernel k-NN. Only
/// test-to-train kernel entries are read.
pub fn stratified_cv(
    gram: &impl KernelSource,
    labels: &[i64],
    folds: usize,
    neighbors: usize,
    seed: u64,
) -> Result<CvReport> {
    let n = gram.size();
    if labels.len() != n {
        return Err(Error::InvalidArgument(format!(
            "{} labels for a {n}x{n} kernel",
            labels.len()
        )));
    }
    let assignment = stratified_folds(labels, folds, seed)?;
    let accuracies = (0..folds)
        .into_par_iter()
        .map(|fold| {
            let (test, train): (Vec<usize>, Vec<usize>) =
                (0..n).partition(|&i| assignment[i] == fold);
            let train_labels: Vec<i64> = train.iter().map(|&i| labels[i]).collect();
            let mut correct = 0usize;
            for &t in &test {
                let row: Vec<f64> = train.iter().map(|&j| gram.kernel(t, j)).collect();
                if kernel_knn_predict(&row, &train_labels, neighbors)? == labels[t] {
                    correct += 1;
                }
            }
            Ok(correct as f64 / test.len() as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(CvReport::from_folds(accuracies, neighbors, seed))
}

//! Python bindings for `qgk_core`.

use pyo3::create_exception;
use pyo3::exceptions::{PyArithmeticError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use qgk_core::classify::stratified_cv as cv;
use qgk_core::ctqw::{graph_amm, vertex_entropies};
use qgk_core::depth::depth_representation;
use qgk_core::kernels::{self, DEFAULT_LEVELS, DEFAULT_SEED};
use qgk_core::selftest::{run_selftest, SelftestOptions};
use qgk_core::{Error, ErrorKind, GraphFeatures, KernelConfig, KernelKind, Matrix};

create_exception!(pyqgk, DataError, PyValueError);

fn to_py(e: Error) -> PyErr {
    let msg = e.to_string();
    match e.kind() {
        ErrorKind::Usage => PyValueError::new_err(msg),
        ErrorKind::Data => DataError::new_err(msg),
        ErrorKind::Numerical => PyArithmeticError::new_err(msg),
    }
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    m.to_rows()
}

/// Simple undirected graph with vertices `0..vertex_count`.
#[pyclass(name = "Graph", module = "pyqgk", frozen, from_py_object)]
#[derive(Clone)]
struct PyGraph {
    inner: qgk_core::Graph,
}

#[pymethods]
impl PyGraph {
    #[new]
    #[pyo3(signature = (vertex_count, edges, label = 0))]
    fn new(vertex_count: usize, edges: Vec<(usize, usize)>, label: i64) -> PyResult<Self> {
        let inner = qgk_core::Graph::new(vertex_count, edges, label, 0).map_err(to_py)?;
        Ok(Self { inner })
    }

    #[staticmethod]
    fn complete(n: usize) -> Self {
        Self { inner: qgk_core::Graph::complete(n) }
    }

    #[staticmethod]
    fn path(n: usize) -> Self {
        Self { inner: qgk_core::Graph::path(n) }
    }

    #[staticmethod]
    fn cycle(n: usize) -> Self {
        Self { inner: qgk_core::Graph::cycle(n) }
    }

    #[getter]
    fn vertex_count(&self) -> usize {
        self.inner.vertex_count()
    }

    #[getter]
    fn edges(&self) -> Vec<(usize, usize)> {
        self.inner.edges().to_vec()
    }

    #[getter]
    fn label(&self) -> i64 {
        self.inner.label()
    }

    #[getter]
    fn graph_id(&self) -> usize {
        self.inner.graph_id()
    }

    fn content_hash(&self) -> String {
        self.inner.content_hash()
    }

    fn adjacency(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.adjacency_matrix())
    }

    /// Averaged mixing matrix of the continuous-time quantum walk.
    fn amm(&self) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(graph_amm(&self.inner).map_err(to_py)?.matrix()))
    }

    /// Shannon entropy (nats) of each row of the averaged mixing matrix.
    fn entropies(&self) -> PyResult<Vec<f64>> {
        let q = graph_amm(&self.inner).map_err(to_py)?;
        Ok(vertex_entropies(&q).map_err(to_py)?.as_slice().to_vec())
    }

    /// `levels` depth-based entropies per vertex.
    #[pyo3(signature = (levels = DEFAULT_LEVELS))]
    fn depth(&self, levels: usize) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(depth_representation(&self.inner, levels).map_err(to_py)?.values()))
    }

    fn __len__(&self) -> usize {
        self.inner.vertex_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(vertex_count={}, edges={}, label={})",
            self.inner.vertex_count(),
            self.inner.edge_count(),
            self.inner.label()
        )
    }
}

#[pyclass(name = "Dataset", module = "pyqgk", frozen)]
struct PyDataset {
    inner: qgk_core::Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    fn new(name: String, graphs: Vec<PyGraph>) -> Self {
        Self {
            inner: qgk_core::Dataset::new(name, graphs.into_iter().map(|g| g.inner).collect()),
        }
    }

    #[getter]
    fn name(&self) -> &str {
        self.inner.name()
    }

    #[getter]
    fn labels(&self) -> Vec<i64> {
        self.inner.labels()
    }

    #[getter]
    fn graphs(&self) -> Vec<PyGraph> {
        self.inner.graphs().iter().map(|g| PyGraph { inner: g.clone() }).collect()
    }

    fn statistics<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyDict>> {
        let s = self.inner.statistics().map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("graph_count", s.graph_count)?;
        d.set_item("class_count", s.class_count)?;
        d.set_item("max_vertices", s.max_vertices)?;
        d.set_item("min_vertices", s.min_vertices)?;
        d.set_item("mean_vertices", s.mean_vertices)?;
        Ok(d)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Dataset(name={:?}, graphs={})", self.inner.name(), self.inner.len())
    }
}

fn config(kernel: &str, levels: usize, seed: u64, normalize: bool) -> PyResult<KernelConfig> {
    let kind: KernelKind = kernel.parse().map_err(to_py)?;
    let cfg = KernelConfig { kind, levels, seed, normalize };
    cfg.validate().map_err(to_py)?;
    Ok(cfg)
}

fn pair_features(gp: &PyGraph, gq: &PyGraph, levels: usize) -> PyResult<(GraphFeatures, GraphFeatures)> {
    let fp = GraphFeatures::compute(&gp.inner, levels).map_err(to_py)?;
    // distinct ids keep the tie-break stream of a pair well defined
    let fq = GraphFeatures::compute(&gq.inner, levels).map_err(to_py)?.with_graph_id(1);
    Ok((fp, fq))
}

/// Loads a dataset in the `<name>_A.txt` / `_graph_indicator.txt` /
/// `_graph_labels.txt` layout.
#[pyfunction]
fn load_dataset(directory: std::path::PathBuf, name: &str) -> PyResult<PyDataset> {
    let inner = qgk_core::io::load_dataset(&directory, name).map_err(to_py)?;
    Ok(PyDataset { inner })
}

#[pyfunction]
fn brk(a: f64, b: f64) -> f64 {
    kernels::brk(a, b)
}

#[pyfunction]
#[pyo3(signature = (gp, gq, levels = DEFAULT_LEVELS, seed = DEFAULT_SEED))]
fn aerk_pair(gp: &PyGraph, gq: &PyGraph, levels: usize, seed: u64) -> PyResult<f64> {
    let cfg = config("aerk", levels, seed, false)?;
    let (fp, fq) = pair_features(gp, gq, levels)?;
    kernels::aerk_pair(&fp, &fq, &cfg).map_err(to_py)
}

#[pyfunction]
#[pyo3(signature = (gp, gq, levels = DEFAULT_LEVELS, seed = DEFAULT_SEED))]
fn dbmk_pair(gp: &PyGraph, gq: &PyGraph, levels: usize, seed: u64) -> PyResult<f64> {
    config("dbmk", levels, seed, false)?;
    let (fp, fq) = pair_features(gp, gq, levels)?;
    kernels::dbmk_pair(&fp, &fq, levels, seed).map_err(to_py)
}

#[pyfunction]
fn rgk_pair(gp: &PyGraph, gq: &PyGraph) -> f64 {
    kernels::rgk_pair(&gp.inner, &gq.inner)
}

/// Gram matrix of a dataset as a list of rows.
#[pyfunction]
#[pyo3(signature = (dataset, kernel = "aerk", levels = DEFAULT_LEVELS, seed = DEFAULT_SEED, normalize = false))]
fn gram(
    py: Python<'_>,
    dataset: &PyDataset,
    kernel: &str,
    levels: usize,
    seed: u64,
    normalize: bool,
) -> PyResult<Vec<Vec<f64>>> {
    let cfg = config(kernel, levels, seed, normalize)?;
    let g = py
        .detach(|| qgk_core::gram(&dataset.inner, &cfg))
        .map_err(to_py)?;
    Ok(rows(g.matrix()))
}

/// Stratified cross-validation of kernel k-NN on a precomputed Gram matrix.
#[pyfunction]
#[pyo3(signature = (kernel_matrix, labels, folds = 10, neighbors = 1, seed = DEFAULT_SEED))]
fn stratified_cv<'py>(
    py: Python<'py>,
    kernel_matrix: Vec<Vec<f64>>,
    labels: Vec<i64>,
    folds: usize,
    neighbors: usize,
    seed: u64,
) -> PyResult<Bound<'py, PyDict>> {
    let n = kernel_matrix.len();
    if kernel_matrix.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("kernel matrix must be square"));
    }
    let k = Matrix::from_rows(&kernel_matrix);
    let r = cv(&k, &labels, folds, neighbors, seed).map_err(to_py)?;
    let d = PyDict::new(py);
    d.set_item("fold_accuracies", r.fold_accuracies.clone())?;
    d.set_item("mean_accuracy", r.mean_accuracy)?;
    d.set_item("std_error", r.std_error)?;
    d.set_item("folds", r.folds)?;
    d.set_item("neighbors", r.neighbors)?;
    d.set_item("seed", r.seed)?;
    Ok(d)
}

/// Runs the built-in oracle checks; returns `(passed, report)`.
#[pyfunction]
fn selftest(py: Python<'_>) -> (bool, String) {
    let r = py.detach(|| run_selftest(&SelftestOptions::standard()));
    (r.passed(), r.to_string())
}

#[pymodule]
fn pyqgk(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyDataset>()?;
    m.add("DataError", m.py().get_type::<DataError>())?;
    m.add_function(wrap_pyfunction!(load_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(brk, m)?)?;
    m.add_function(wrap_pyfunction!(aerk_pair, m)?)?;
    m.add_function(wrap_pyfunction!(dbmk_pair, m)?)?;
    m.add_function(wrap_pyfunction!(rgk_pair, m)?)?;
    m.add_function(wrap_pyfunction!(gram, m)?)?;
    m.add_function(wrap_pyfunction!(stratified_cv, m)?)?;
    m.add_function(wrap_pyfunction!(selftest, m)?)?;
    Ok(())
}

//! Graph kernels built on continuous-time quantum walks.
//!
//! The pipeline for one graph is: adjacency matrix → eigenspace projectors →
//! averaged mixing matrix `Q` → per-vertex Shannon entropies of the rows of
//! `Q`, alongside depth-based representations from layered expansion
//! subgraphs. Pairs of graphs are then aligned level by level and the
//! aligned entropic reproducing kernel (AERK) sums a reproducing kernel over
//! the entropies of aligned vertices. Baselines (DBMK, RGK), parallel Gram
//! assembly and a kernel k-NN cross-validation harness complete the toolkit.

pub mod alignment;
pub mod cache;
pub mod classify;
pub mod ctqw;
pub mod depth;
pub mod error;
pub mod features;
pub mod generate;
pub mod gram;
pub mod graph;
pub mod io;
pub mod kernels;
pub mod matrix;
pub mod selftest;
pub mod spectral;

pub use error::{Error, ErrorKind, Result};
pub use features::GraphFeatures;
pub use gram::{gram, ExportFormat, GramMatrix};
pub use graph::{Dataset, DatasetStatistics, Graph};
pub use kernels::{KernelConfig, KernelKind};
pub use matrix::Matrix;

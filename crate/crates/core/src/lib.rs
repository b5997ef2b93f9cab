//! One-step bipartite graph cut clustering (OBCut).
//!
//! The crate learns a small set of anchors together with a row-stochastic
//! sample-to-anchor bipartite graph, and partitions that graph directly into a
//! discrete cluster indicator by maximizing a normalized trace criterion.
//! No spectral embedding followed by k-means is involved.
//!
//! Layout:
//! - [`types`]: the shared data model (datasets, graphs, indicators, config).
//! - [`graph_cut`]: the cut criterion family, its trace form and a
//!   brute-force equivalence checker for small graphs.
//! - [`solver`]: initialization, the four alternating block updates and the
//!   ablation variants.
//! - [`metrics`]: NMI, ACC and purity.
//! - [`dataio`]: loading, normalization, synthetic data and run records.

pub mod dataio;
pub mod error;
pub mod graph_cut;
pub mod linalg;
pub mod metrics;
pub mod solver;
pub mod types;

pub use error::{Error, Result};
pub use graph_cut::{BipartitePartition, EquivalenceReport};
pub use solver::{fit, fit_variant, FitResult, IterationRecord, SolverState, Variant, Warning};
pub use types::{
    AlmConfig, AnchorEmbedding, AnchorMatrix, BipartiteGraph, ClusterIndicator, Dataset,
    SolverConfig, Violation,
};

pub use nalgebra::{DMatrix, DVector};

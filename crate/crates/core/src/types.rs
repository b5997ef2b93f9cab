//! Data model shared by every other module.
//!
//! Matrices follow the column-per-sample convention for features: a dataset
//! with `d` features and `N` samples is a `d × N` matrix, anchors are `d × M`,
//! the bipartite graph is `N × M`, and the anchor embedding is `M × k`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Entries down to this value count as nonnegative; they read back as zero.
pub const NONNEGATIVE_TOL: f64 = -1e-12;
/// Allowed deviation of a graph row sum from one.
pub const ROW_SUM_TOL: f64 = 1e-8;
/// Allowed deviation of `HᵀH` from the identity.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

/// Feature matrix (`d × N`, one column per sample) with optional labels.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    labels: Option<Vec<usize>>,
    feature_names: Option<Vec<String>>,
}

impl Dataset {
    pub fn new(features: DMatrix<f64>, labels: Option<Vec<usize>>) -> Result<Self> {
        if features.nrows() == 0 || features.ncols() == 0 {
            return Err(Error::InvalidDataset(format!(
                "need at least one feature and one sample, got {}×{}",
                features.nrows(),
                features.ncols()
            )));
        }
        if let Some((idx, _)) = features.iter().enumerate().find(|(_, v)| !v.is_finite()) {
            let (row, col) = (idx % features.nrows(), idx / features.nrows());
            return Err(Error::InvalidDataset(format!(
                "non-finite value at feature {row}, sample {col}"
            )));
        }
        if let Some(labels) = &labels {
            if labels.len() != features.ncols() {
                return Err(Error::InvalidDataset(format!(
                    "{} labels for {} samples",
                    labels.len(),
                    features.ncols()
                )));
            }
            let classes = labels.iter().max().map_or(0, |m| m + 1);
            let mut seen = vec![false; classes];
            for &l in labels {
                seen[l] = true;
            }
            if let Some(missing) = seen.iter().position(|s| !s) {
                return Err(Error::InvalidDataset(format!(
                    "class id {missing} never occurs; labels must be compact"
                )));
            }
        }
        Ok(Dataset {
            features,
            labels,
            feature_names: None,
        })
    }

    pub fn with_feature_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.dim() {
            return Err(Error::InvalidDataset(format!(
                "{} feature names for {} features",
                names.len(),
                self.dim()
            )));
        }
        self.feature_names = Some(names);
        Ok(self)
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn labels(&self) -> Option<&[usize]> {
        self.labels.as_deref()
    }

    pub fn feature_names(&self) -> Option<&[String]> {
        self.feature_names.as_deref()
    }

    /// Number of features `d`.
    pub fn dim(&self) -> usize {
        self.features.nrows()
    }

    /// Number of samples `N`.
    pub fn len(&self) -> usize {
        self.features.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.features.ncols() == 0
    }

    pub fn num_classes(&self) -> Option<usize> {
        self.labels
            .as_ref()
            .map(|l| l.iter().max().map_or(0, |m| m + 1))
    }

    pub(crate) fn replace_features(&self, features: DMatrix<f64>) -> Dataset {
        Dataset {
            features,
            labels: self.labels.clone(),
            feature_names: self.feature_names.clone(),
        }
    }
}

/// Learned anchors, `d × M`.
#[derive(Clone, Debug, PartialEq)]
pub struct AnchorMatrix(pub DMatrix<f64>);

impl AnchorMatrix {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn num_anchors(&self) -> usize {
        self.0.ncols()
    }
}

/// A single invariant violation found by [`BipartiteGraph::validate`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Violation {
    NonFinite { row: usize, col: usize },
    Negative { row: usize, col: usize, value: f64 },
    RowSum { row: usize, deviation: f64 },
}

/// Row-stochastic, nonnegative `N × M` sample-to-anchor similarity matrix.
///
/// Construction through [`BipartiteGraph::new`] enforces the invariants;
/// [`BipartiteGraph::from_raw`] does not, so arbitrary matrices can be
/// inspected with [`BipartiteGraph::validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteGraph {
    weights: DMatrix<f64>,
}

impl BipartiteGraph {
    pub fn new(weights: DMatrix<f64>) -> Result<Self> {
        let graph = BipartiteGraph { weights };
        let report = graph.validate();
        if let Some(first) = report.first() {
            return Err(Error::InvalidGraph(format!(
                "{} violation(s), first: {first:?}",
                report.len()
            )));
        }
        Ok(graph.clamped())
    }

    pub fn from_raw(weights: DMatrix<f64>) -> Self {
        BipartiteGraph { weights }
    }

    /// Entries in `[NONNEGATIVE_TOL, 0)` are zeroed.
    pub fn clamped(mut self) -> Self {
        for w in self.weights.iter_mut() {
            if *w < 0.0 && *w >= NONNEGATIVE_TOL {
                *w = 0.0;
            }
        }
        self
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    /// Entry `b_ij`, with numerical negative residue read as zero.
    pub fn get(&self, sample: usize, anchor: usize) -> f64 {
        let w = self.weights[(sample, anchor)];
        if (NONNEGATIVE_TOL..0.0).contains(&w) {
            0.0
        } else {
            w
        }
    }

    pub fn num_samples(&self) -> usize {
        self.weights.nrows()
    }

    pub fn num_anchors(&self) -> usize {
        self.weights.ncols()
    }

    /// Largest absolute entry (`α` in the objective bound `N·M·α`).
    pub fn max_abs(&self) -> f64 {
        self.weights.iter().fold(0.0, |m, w| m.max(w.abs()))
    }

    /// Every invariant violation, in row-major order. Empty iff the graph is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for row in 0..self.weights.nrows() {
            let mut sum = 0.0;
            let mut finite = true;
            for col in 0..self.weights.ncols() {
                let w = self.weights[(row, col)];
                if !w.is_finite() {
                    out.push(Violation::NonFinite { row, col });
                    finite = false;
                    continue;
                }
                if w < NONNEGATIVE_TOL {
                    out.push(Violation::Negative { row, col, value: w });
                }
                sum += w;
            }
            if finite && (sum - 1.0).abs() > ROW_SUM_TOL {
                out.push(Violation::RowSum {
                    row,
                    deviation: sum - 1.0,
                });
            }
        }
        out
    }
}

/// Discrete assignment of `N` samples to `k` clusters, stored densely as a
/// label per sample rather than an `N × k` one-hot matrix.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterIndicator {
    assignments: Vec<usize>,
    k: usize,
}

impl ClusterIndicator {
    pub fn new(assignments: Vec<usize>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidConfig("k must be positive".into()));
        }
        if let Some(&bad) = assignments.iter().find(|&&a| a >= k) {
            return Err(Error::InvalidPartition(format!(
                "assignment {bad} outside 0..{k}"
            )));
        }
        Ok(ClusterIndicator { assignments, k })
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }

    /// Column sums `n_j` of the one-hot matrix.
    pub fn counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.k];
        for &a in &self.assignments {
            counts[a] += 1;
        }
        counts
    }

    pub(crate) fn set(&mut self, sample: usize, cluster: usize) {
        debug_assert!(cluster < self.k);
        self.assignments[sample] = cluster;
    }

    /// Dense `N × k` one-hot matrix.
    pub fn to_one_hot(&self) -> DMatrix<f64> {
        let mut y = DMatrix::zeros(self.assignments.len(), self.k);
        for (i, &a) in self.assignments.iter().enumerate() {
            y[(i, a)] = 1.0;
        }
        y
    }
}

/// Anchor-side relaxed indicator `H` (`M × k`, orthonormal columns).
#[derive(Clone, Debug, PartialEq)]
pub struct AnchorEmbedding(pub DMatrix<f64>);

impl AnchorEmbedding {
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    /// `max |HᵀH − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let gram = self.0.transpose() * &self.0;
        let mut worst = 0.0f64;
        for i in 0..gram.nrows() {
            for j in 0..gram.ncols() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - target).abs());
            }
        }
        worst
    }
}

/// Settings for the per-row simplex QP solved by the augmented Lagrangian method.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlmConfig {
    pub rho_init: f64,
    pub rho_growth: f64,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for AlmConfig {
    fn default() -> Self {
        AlmConfig {
            rho_init: 1.0,
            rho_growth: 1.1,
            max_iters: 200,
            tol: 1e-8,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    /// Number of clusters.
    pub k: usize,
    /// Number of anchors `M`.
    pub anchors: usize,
    /// Weight of the graph-cut term against the reconstruction term.
    pub lambda: f64,
    /// Regularizer in `(YᵀY + εI)^{-1/2}`.
    pub epsilon: f64,
    /// Nearest anchors per sample in the initial graph.
    pub knn_k: usize,
    pub max_outer_iters: usize,
    /// Relative objective change below which the outer loop stops.
    pub outer_tol: f64,
    pub kmeans_iters: usize,
    pub kmeans_restarts: usize,
    pub alm: AlmConfig,
    pub seed: u64,
}

impl SolverConfig {
    pub fn new(k: usize) -> Self {
        SolverConfig {
            k,
            ..SolverConfig::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.k < 2 {
            return fail(format!("k = {} but at least 2 clusters are required", self.k));
        }
        if self.anchors < self.k {
            return fail(format!(
                "M = {} anchors is fewer than k = {}",
                self.anchors, self.k
            ));
        }
        if !(self.lambda > 0.0 && self.lambda.is_finite()) {
            return fail(format!("lambda must be positive, got {}", self.lambda));
        }
        if self.knn_k == 0 {
            return fail("knn_k must be positive".into());
        }
        if self.max_outer_iters == 0 || self.kmeans_iters == 0 || self.kmeans_restarts == 0 {
            return fail("iteration counts must be positive".into());
        }
        if self.alm.max_iters == 0 {
            return fail("alm max_iters must be positive".into());
        }
        for (name, v) in [
            ("epsilon", self.epsilon),
            ("outer_tol", self.outer_tol),
            ("alm tol", self.alm.tol),
            ("alm rho_init", self.alm.rho_init),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        if !(self.alm.rho_growth >= 1.0 && self.alm.rho_growth.is_finite()) {
            return fail(format!(
                "alm rho_growth must be at least 1, got {}",
                self.alm.rho_growth
            ));
        }
        Ok(())
    }
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            k: 2,
            anchors: 100,
            lambda: 1.0,
            epsilon: 1e-8,
            knn_k: 5,
            max_outer_iters: 50,
            outer_tol: 1e-6,
            kmeans_iters: 100,
            kmeans_restarts: 3,
            alm: AlmConfig::default(),
            seed: 0,
        }
    }
}

//! Alternating minimization of
//! `‖X − ABᵀ‖_F² − λ Tr((YᵀY + εI)^{-1/2} Yᵀ B H)` over anchors `A`, graph `B`,
//! discrete indicator `Y` and anchor embedding `H`.
//!
//! Each outer iteration updates `Y`, `H`, `B`, `A` in that order. Every block
//! update is exact or guarded so the objective never increases.

pub mod kmeans;
pub mod qp;
pub mod updates;

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{
    AnchorEmbedding, AnchorMatrix, BipartiteGraph, ClusterIndicator, Dataset, SolverConfig,
};
use kmeans::KMeans;
use updates::{
    joint_objective, knn_graph, reconstruction_error, update_anchors, update_embedding,
    update_graph, update_indicator, GraphUpdateStats,
};

/// Which blocks are learned. `LaLg` is the full method.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variant {
    /// Learned anchors, learned graph.
    LaLg,
    /// Fixed (k-means) anchors, learned graph.
    FaLg,
    /// Fixed anchors and fixed initial graph; only `Y` and `H` iterate.
    FaFg,
    /// Graph learning first (reconstruction only), then partitioning of the frozen graph.
    TwoStep,
}

impl Variant {
    pub const ALL: [Variant; 4] = [Variant::LaLg, Variant::FaLg, Variant::FaFg, Variant::TwoStep];

    pub fn name(self) -> &'static str {
        match self {
            Variant::LaLg => "LA+LG",
            Variant::FaLg => "FA+LG",
            Variant::FaFg => "FA+FG",
            Variant::TwoStep => "two-step",
        }
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "la+lg" | "lalg" | "full" => Ok(Variant::LaLg),
            "fa+lg" | "falg" => Ok(Variant::FaLg),
            "fa+fg" | "fafg" => Ok(Variant::FaFg),
            "two-step" | "twostep" | "two_step" => Ok(Variant::TwoStep),
            _ => Err(Error::InvalidConfig(format!("unknown variant {s:?}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub enum Warning {
    /// Some graph rows ended with a KKT residual above `100 · alm tol`.
    QpNotConverged {
        iteration: usize,
        rows: usize,
        worst_row: usize,
        residual: f64,
    },
    /// The final indicator leaves a cluster without samples.
    EmptyCluster { cluster: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterationRecord {
    pub iteration: usize,
    pub objective: f64,
    pub reconstruction: f64,
    pub relaxed_trace: f64,
    pub seconds: f64,
}

#[derive(Clone, Debug)]
pub struct SolverState {
    pub anchors: AnchorMatrix,
    pub graph: BipartiteGraph,
    pub indicator: ClusterIndicator,
    pub embedding: AnchorEmbedding,
    pub iteration: usize,
    /// Objective right after initialization.
    pub initial_objective: f64,
    /// Objective after each completed outer iteration.
    pub objective_trace: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct FitResult {
    pub indicator: ClusterIndicator,
    pub state: SolverState,
    pub converged: bool,
    pub iterations_run: usize,
    pub iterations: Vec<IterationRecord>,
    pub warnings: Vec<Warning>,
}

/// Joint objective of a state, with the ε-regularized normalization.
pub fn objective(state: &SolverState, dataset: &Dataset, config: &SolverConfig) -> Result<f64> {
    check_dimensions(state, dataset)?;
    Ok(joint_objective(
        dataset,
        &state.anchors,
        &state.graph,
        &state.indicator,
        &state.embedding,
        config.lambda,
        config.epsilon,
    ))
}

fn check_dimensions(state: &SolverState, dataset: &Dataset) -> Result<()> {
    let (d, n) = (dataset.dim(), dataset.len());
    let m = state.anchors.num_anchors();
    let k = state.indicator.k();
    let ok = state.anchors.matrix().nrows() == d
        && state.graph.num_samples() == n
        && state.graph.num_anchors() == m
        && state.indicator.len() == n
        && state.embedding.matrix().shape() == (m, k);
    if ok {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "dataset {d}×{n}, anchors {:?}, graph {}×{}, indicator {}/{k}, embedding {:?}",
            state.anchors.matrix().shape(),
            state.graph.num_samples(),
            state.graph.num_anchors(),
            state.indicator.len(),
            state.embedding.matrix().shape()
        )))
    }
}

fn qp_warning(iteration: usize, stats: &GraphUpdateStats) -> Option<Warning> {
    (stats.unconverged_rows > 0).then(|| Warning::QpNotConverged {
        iteration,
        rows: stats.unconverged_rows,
        worst_row: stats.worst_row.unwrap_or(0),
        residual: stats.worst_residual,
    })
}

/// k-means anchors (`M` centers), k-means indicator (`k` centers), K-NN
/// simplex graph, and the embedding that is optimal for that graph and indicator.
pub fn init(dataset: &Dataset, config: &SolverConfig) -> Result<(SolverState, Vec<Warning>)> {
    config.validate()?;
    if config.anchors > dataset.len() {
        return Err(Error::InvalidConfig(format!(
            "M = {} anchors exceeds N = {} samples",
            config.anchors,
            dataset.len()
        )));
    }
    let x = dataset.features();
    let kmeans = |clusters| KMeans {
        clusters,
        max_iters: config.kmeans_iters,
        restarts: config.kmeans_restarts,
        seed: config.seed,
    };
    let anchors = AnchorMatrix(kmeans(config.anchors).fit(x)?.centroids);
    let indicator = ClusterIndicator::new(kmeans(config.k).fit(x)?.assignments, config.k)?;
    let (graph, stats) = knn_graph(dataset, &anchors, config.knn_k, &config.alm);
    let embedding = update_embedding(&graph, &indicator, config.epsilon);
    let initial_objective = joint_objective(
        dataset,
        &anchors,
        &graph,
        &indicator,
        &embedding,
        config.lambda,
        config.epsilon,
    );
    let warnings = qp_warning(0, &stats).into_iter().collect();
    Ok((
        SolverState {
            anchors,
            graph,
            indicator,
            embedding,
            iteration: 0,
            initial_objective,
            objective_trace: Vec::new(),
        },
        warnings,
    ))
}

/// Run the full method (learned anchors and graph).
pub fn fit(dataset: &Dataset, config: &SolverConfig) -> Result<FitResult> {
    fit_variant(dataset, config, Variant::LaLg)
}

pub fn fit_variant(dataset: &Dataset, config: &SolverConfig, variant: Variant) -> Result<FitResult> {
    fit_with_observer(dataset, config, variant, |_| {})
}

/// Like [`fit_variant`], calling `observer` with the state after every outer iteration.
pub fn fit_with_observer(
    dataset: &Dataset,
    config: &SolverConfig,
    variant: Variant,
    mut observer: impl FnMut(&SolverState),
) -> Result<FitResult> {
    let (mut state, mut warnings) = init(dataset, config)?;
    let x = dataset.features();

    if variant == Variant::TwoStep {
        learn_graph_only(dataset, config, &mut state, &mut warnings);
        state.initial_objective = joint_objective(
            dataset,
            &state.anchors,
            &state.graph,
            &state.indicator,
            &state.embedding,
            config.lambda,
            config.epsilon,
        );
    }
    let learn_graph = matches!(variant, Variant::LaLg | Variant::FaLg);
    let learn_anchors = variant == Variant::LaLg;

    let mut previous = state.initial_objective;
    let mut converged = false;
    let mut records = Vec::new();
    for iteration in 1..=config.max_outer_iters {
        let started = Instant::now();
        state.indicator = update_indicator(&state.graph, &state.embedding, &state.indicator, config.epsilon);
        state.embedding = update_embedding(&state.graph, &state.indicator, config.epsilon);
        if learn_graph {
            let (graph, stats) = update_graph(
                dataset,
                &state.anchors,
                &state.graph,
                &state.indicator,
                &state.embedding,
                config.lambda,
                config.epsilon,
                &config.alm,
            );
            state.graph = graph;
            warnings.extend(qp_warning(iteration, &stats));
        }
        if learn_anchors {
            let candidate = update_anchors(dataset, &state.graph);
            if reconstruction_error(x, &candidate, &state.graph)
                <= reconstruction_error(x, &state.anchors, &state.graph)
            {
                state.anchors = candidate;
            }
        }

        let reconstruction = reconstruction_error(x, &state.anchors, &state.graph);
        let trace = crate::graph_cut::relaxed_trace_unchecked(
            state.graph.weights(),
            &state.indicator,
            state.embedding.matrix(),
            config.epsilon,
        );
        let value = reconstruction - config.lambda * trace;
        state.iteration = iteration;
        state.objective_trace.push(value);
        records.push(IterationRecord {
            iteration,
            objective: value,
            reconstruction,
            relaxed_trace: trace,
            seconds: started.elapsed().as_secs_f64(),
        });
        observer(&state);

        if (value - previous).abs() / (1.0 + previous.abs()) < config.outer_tol {
            converged = true;
            break;
        }
        previous = value;
    }

    for (cluster, &n) in state.indicator.counts().iter().enumerate() {
        if n == 0 {
            warnings.push(Warning::EmptyCluster { cluster });
        }
    }
    Ok(FitResult {
        indicator: state.indicator.clone(),
        iterations_run: state.iteration,
        state,
        converged,
        iterations: records,
        warnings,
    })
}

/// Alternate reconstruction-only graph and anchor updates until the
/// reconstruction error settles.
fn learn_graph_only(
    dataset: &Dataset,
    config: &SolverConfig,
    state: &mut SolverState,
    warnings: &mut Vec<Warning>,
) {
    let x = dataset.features();
    let mut previous = reconstruction_error(x, &state.anchors, &state.graph);
    for iteration in 1..=config.max_outer_iters {
        // λ = 0 removes the partition term from the row problems
        let (graph, stats) = update_graph(
            dataset,
            &state.anchors,
            &state.graph,
            &state.indicator,
            &state.embedding,
            0.0,
            config.epsilon,
            &config.alm,
        );
        state.graph = graph;
        warnings.extend(qp_warning(iteration, &stats));
        let candidate = update_anchors(dataset, &state.graph);
        if reconstruction_error(x, &candidate, &state.graph) <= reconstruction_error(x, &state.anchors, &state.graph) {
            state.anchors = candidate;
        }
        let value = reconstruction_error(x, &state.anchors, &state.graph);
        let change = (value - previous).abs() / (1.0 + previous.abs());
        previous = value;
        if change < config.outer_tol {
            break;
        }
    }
    state.embedding = update_embedding(&state.graph, &state.indicator, config.epsilon);
}

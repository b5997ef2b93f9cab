//! The four block updates of the alternating scheme and the joint objective.

use nalgebra::DMatrix;
use rayon::prelude::*;

use super::qp::SimplexQp;
use crate::graph_cut::relaxed_trace_unchecked;
use crate::linalg::{polar_factor, symmetric_pinv, symmetric_spectral_norm};
use crate::types::{
    AlmConfig, AnchorEmbedding, AnchorMatrix, BipartiteGraph, ClusterIndicator, Dataset,
};

/// `‖X − ABᵀ‖_F²`.
pub fn reconstruction_error(x: &DMatrix<f64>, anchors: &AnchorMatrix, graph: &BipartiteGraph) -> f64 {
    let residual = x - anchors.matrix() * graph.weights().transpose();
    residual.norm_squared()
}

/// `‖X − ABᵀ‖_F² − λ Σ_j (y_jᵀ B h_j)/√(n_j + ε)`.
pub fn joint_objective(
    dataset: &Dataset,
    anchors: &AnchorMatrix,
    graph: &BipartiteGraph,
    indicator: &ClusterIndicator,
    embedding: &AnchorEmbedding,
    lambda: f64,
    epsilon: f64,
) -> f64 {
    reconstruction_error(dataset.features(), anchors, graph)
        - lambda * relaxed_trace_unchecked(graph.weights(), indicator, embedding.matrix(), epsilon)
}

/// One sequential sweep over the samples, moving each to the cluster with the
/// largest gain in `Σ_j (Σ_{s∈j} q_sj)/√(n_j + ε)` where `Q = BH`.
///
/// Cluster sums and sizes are updated after every row, so later rows see the
/// moves of earlier ones. Ties go to the lowest cluster index.
pub fn update_indicator(
    graph: &BipartiteGraph,
    embedding: &AnchorEmbedding,
    indicator: &ClusterIndicator,
    epsilon: f64,
) -> ClusterIndicator {
    let q = graph.weights() * embedding.matrix();
    sweep_indicator(&q, indicator, epsilon)
}

pub(crate) fn sweep_indicator(q: &DMatrix<f64>, indicator: &ClusterIndicator, epsilon: f64) -> ClusterIndicator {
    let k = indicator.k();
    let mut y = indicator.clone();
    let mut sums = vec![0.0; k];
    let mut counts = vec![0usize; k];
    for (i, &c) in y.assignments().iter().enumerate() {
        sums[c] += q[(i, c)];
        counts[c] += 1;
    }
    let value = |sum: f64, count: usize| sum / (count as f64 + epsilon).sqrt();
    for i in 0..y.len() {
        let current = y.assignments()[i];
        counts[current] -= 1;
        sums[current] = if counts[current] == 0 {
            0.0
        } else {
            sums[current] - q[(i, current)]
        };
        let mut best = (f64::NEG_INFINITY, 0);
        for j in 0..k {
            let gain = value(sums[j] + q[(i, j)], counts[j] + 1) - value(sums[j], counts[j]);
            if gain > best.0 {
                best = (gain, j);
            }
        }
        let chosen = best.1;
        sums[chosen] += q[(i, chosen)];
        counts[chosen] += 1;
        y.set(i, chosen);
    }
    y
}

/// `G = Bᵀ Y (YᵀY + εI)^{-1/2}` (`M × k`).
pub fn embedding_target(graph: &BipartiteGraph, indicator: &ClusterIndicator, epsilon: f64) -> DMatrix<f64> {
    let b = graph.weights();
    let m = b.ncols();
    let mut g = DMatrix::zeros(m, indicator.k());
    for a in 0..m {
        let col = b.column(a);
        for (i, &c) in indicator.assignments().iter().enumerate() {
            g[(a, c)] += col[i];
        }
    }
    for (j, &n) in indicator.counts().iter().enumerate() {
        let scale = 1.0 / (n as f64 + epsilon).sqrt();
        g.column_mut(j).scale_mut(scale);
    }
    g
}

/// `H = UVᵀ` from the compact SVD of [`embedding_target`]; maximizes `Tr(HᵀG)`
/// over column-orthonormal `H`.
pub fn update_embedding(graph: &BipartiteGraph, indicator: &ClusterIndicator, epsilon: f64) -> AnchorEmbedding {
    let g = embedding_target(graph, indicator, epsilon);
    AnchorEmbedding(polar_factor(&g).0)
}

/// Outcome of a graph update across all rows.
#[derive(Clone, Debug, Default)]
pub struct GraphUpdateStats {
    /// Rows whose final KKT residual exceeded `100 · tol`.
    pub unconverged_rows: usize,
    pub worst_row: Option<usize>,
    pub worst_residual: f64,
    /// Rows where the solver's answer was worse than the incoming row and was discarded.
    pub kept_previous: usize,
}

/// Re-solve every row of `B` as a simplex QP with `Ĥ = AᵀA` and
/// `f = 2Aᵀx_i + λ q̂_i`, where `q̂_i = h_{:,y_i}/√(n_{y_i} + ε)`.
///
/// Rows are independent and solved in parallel, warm-started from the
/// current row. A row is only replaced when its objective does not increase.
#[allow(clippy::too_many_arguments)]
pub fn update_graph(
    dataset: &Dataset,
    anchors: &AnchorMatrix,
    graph: &BipartiteGraph,
    indicator: &ClusterIndicator,
    embedding: &AnchorEmbedding,
    lambda: f64,
    epsilon: f64,
    alm: &AlmConfig,
) -> (BipartiteGraph, GraphUpdateStats) {
    let a = anchors.matrix();
    let hessian = a.transpose() * a;
    let norm = symmetric_spectral_norm(&hessian);
    let projected = a.transpose() * dataset.features(); // M × N
    let counts = indicator.counts();
    let h = embedding.matrix();
    let m = a.ncols();
    let b = graph.weights();

    let rows: Vec<(Vec<f64>, f64)> = (0..graph.num_samples())
        .into_par_iter()
        .map(|i| {
            let c = indicator.assignments()[i];
            let q_scale = lambda / (counts[c] as f64 + epsilon).sqrt();
            let f: Vec<f64> = (0..m)
                .map(|j| 2.0 * projected[(j, i)] + q_scale * h[(j, c)])
                .collect();
            let qp = SimplexQp::with_norm(&hessian, &f, norm);
            let previous: Vec<f64> = b.row(i).iter().map(|&v| v.max(0.0)).collect();
            let solved = qp.solve(Some(&previous), alm);
            let previous_objective = qp.objective(&previous);
            if solved.objective <= previous_objective {
                (solved.solution, solved.kkt_residual)
            } else {
                (previous, f64::NAN)
            }
        })
        .collect();

    let mut stats = GraphUpdateStats::default();
    let mut weights = DMatrix::zeros(graph.num_samples(), m);
    for (i, (row, residual)) in rows.into_iter().enumerate() {
        if residual.is_nan() {
            stats.kept_previous += 1;
        } else if residual > 100.0 * alm.tol {
            stats.unconverged_rows += 1;
            if residual > stats.worst_residual {
                stats.worst_residual = residual;
                stats.worst_row = Some(i);
            }
        }
        for (j, v) in row.into_iter().enumerate() {
            weights[(i, j)] = v;
        }
    }
    (BipartiteGraph::from_raw(weights).clamped(), stats)
}

/// Least-squares anchors `A = XB(BᵀB)⁺`.
pub fn update_anchors(dataset: &Dataset, graph: &BipartiteGraph) -> AnchorMatrix {
    let b = graph.weights();
    let gram = b.transpose() * b;
    AnchorMatrix(dataset.features() * b * symmetric_pinv(&gram))
}

/// Initial graph: each sample is connected only to its `knn` nearest anchors,
/// with weights from the reconstruction-only simplex QP on those anchors.
pub fn knn_graph(dataset: &Dataset, anchors: &AnchorMatrix, knn: usize, alm: &AlmConfig) -> (BipartiteGraph, GraphUpdateStats) {
    let x = dataset.features();
    let a = anchors.matrix();
    let m = a.ncols();
    let knn = knn.min(m);
    let rows: Vec<(Vec<usize>, Vec<f64>, f64)> = (0..dataset.len())
        .into_par_iter()
        .map(|i| {
            let xi = x.column(i);
            let mut order: Vec<(f64, usize)> = (0..m)
                .map(|j| ((a.column(j) - xi).norm_squared(), j))
                .collect();
            order.sort_by(|p, q| p.0.total_cmp(&q.0).then(p.1.cmp(&q.1)));
            let picked: Vec<usize> = order[..knn].iter().map(|p| p.1).collect();
            let local = a.select_columns(&picked);
            let hessian = local.transpose() * &local;
            let f: Vec<f64> = (local.transpose() * xi).iter().map(|v| 2.0 * v).collect();
            let solved = SimplexQp::new(&hessian, &f).solve(None, alm);
            (picked, solved.solution, solved.kkt_residual)
        })
        .collect();
    let mut stats = GraphUpdateStats::default();
    let mut weights = DMatrix::zeros(dataset.len(), m);
    for (i, (picked, values, residual)) in rows.into_iter().enumerate() {
        if residual > 100.0 * alm.tol {
            stats.unconverged_rows += 1;
            if residual > stats.worst_residual {
                stats.worst_residual = residual;
                stats.worst_row = Some(i);
            }
        }
        for (j, v) in picked.into_iter().zip(values) {
            weights[(i, j)] = v;
        }
    }
    (BipartiteGraph::from_raw(weights).clamped(), stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn sweep_fixes_swapped_rows() {
        let q = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let y = ClusterIndicator::new(vec![1, 0], 2).unwrap();
        let y = sweep_indicator(&q, &y, 1e-8);
        assert_eq!(y.assignments(), &[0, 1]);
    }

    #[test]
    fn sweep_breaks_ties_low() {
        let q = DMatrix::from_row_slice(1, 3, &[0.0, 0.0, 0.0]);
        let y = ClusterIndicator::new(vec![2], 3).unwrap();
        assert_eq!(sweep_indicator(&q, &y, 1e-8).assignments(), &[0]);
    }

    #[test]
    fn embedding_of_orthonormal_target() {
        // B = [[1,0,0],[0,1,0]], Y = identity pairing → G = [[1,0],[0,1],[0,0]]
        let b = BipartiteGraph::new(DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 0.0, 1.0, 0.0])).unwrap();
        let y = ClusterIndicator::new(vec![0, 1], 2).unwrap();
        let h = update_embedding(&b, &y, 0.0);
        let expected = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
        assert!((h.matrix() - expected).amax() < 1e-12);
    }

    #[test]
    fn one_hot_graph_gives_mean_anchors() {
        let x = DMatrix::from_row_slice(1, 4, &[1.0, 3.0, 10.0, 20.0]);
        let ds = Dataset::new(x, None).unwrap();
        let b = BipartiteGraph::new(DMatrix::from_row_slice(
            4,
            3,
            &[1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 1.0, 0.0],
        ))
        .unwrap();
        let a = update_anchors(&ds, &b);
        assert_relative_eq!(a.matrix()[(0, 0)], 2.0, epsilon = 1e-12);
        assert_relative_eq!(a.matrix()[(0, 1)], 15.0, epsilon = 1e-12);
        // unused anchor stays at the minimum-norm value
        assert_eq!(a.matrix()[(0, 2)], 0.0);
    }

    #[test]
    fn knn_of_one_is_one_hot() {
        let x = DMatrix::from_fn(2, 6, |i, j| (i + 2 * j) as f64 * 0.3);
        let ds = Dataset::new(x, None).unwrap();
        let anchors = AnchorMatrix(DMatrix::from_row_slice(2, 2, &[0.0, 2.0, 0.0, 2.0]));
        let (g, _) = knn_graph(&ds, &anchors, 1, &AlmConfig::default());
        for i in 0..6 {
            let row: Vec<f64> = g.weights().row(i).iter().copied().collect();
            assert_eq!(row.iter().filter(|&&v| v == 1.0).count(), 1);
            assert_eq!(row.iter().filter(|&&v| v == 0.0).count(), 1);
        }
    }
}

//! Cut criteria on a sample-anchor bipartite graph, the normalized-indicator
//! trace form, and an exhaustive checker that the two agree on small graphs.
//!
//! A [`BipartitePartition`] splits samples into `S_1..S_k` and anchors into
//! `A_1..A_k`, where `(S_i, A_i)` form cluster `i`. The normalized bipartite
//! cut of such a partition equals `-2 Tr(Ȳ_Nᵀ B Ȳ_M)`, so minimizing the cut
//! and maximizing the trace pick the same partitions. [`verify_equivalence`]
//! checks both claims by brute force.

use std::collections::BTreeSet;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::types::{AnchorEmbedding, BipartiteGraph, ClusterIndicator};

/// Default cap on `k^N · k^M` for exhaustive enumeration.
pub const DEFAULT_ENUMERATION_BUDGET: u128 = 10_000_000;

/// Joint partition of the sample set and the anchor set into `k` paired clusters.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BipartitePartition {
    pub sample_side: Vec<usize>,
    pub anchor_side: Vec<usize>,
    pub k: usize,
}

impl BipartitePartition {
    pub fn new(sample_side: Vec<usize>, anchor_side: Vec<usize>, k: usize) -> Result<Self> {
        if let Some(&bad) = sample_side.iter().chain(&anchor_side).find(|&&c| c >= k) {
            return Err(Error::InvalidPartition(format!(
                "cluster id {bad} outside 0..{k}"
            )));
        }
        Ok(BipartitePartition {
            sample_side,
            anchor_side,
            k,
        })
    }

    pub fn sample_sizes(&self) -> Vec<usize> {
        sizes(&self.sample_side, self.k)
    }

    pub fn anchor_sizes(&self) -> Vec<usize> {
        sizes(&self.anchor_side, self.k)
    }

    pub fn sample_members(&self, cluster: usize) -> Vec<usize> {
        members(&self.sample_side, cluster)
    }

    pub fn anchor_members(&self, cluster: usize) -> Vec<usize> {
        members(&self.anchor_side, cluster)
    }

    /// Relabel clusters by the order of their smallest sample (then anchor) member,
    /// so partitions that differ only by cluster ids compare equal.
    pub fn canonical(&self) -> BipartitePartition {
        let mut map = vec![usize::MAX; self.k];
        let mut next = 0;
        for &c in self.sample_side.iter().chain(&self.anchor_side) {
            if map[c] == usize::MAX {
                map[c] = next;
                next += 1;
            }
        }
        for slot in map.iter_mut().filter(|m| **m == usize::MAX) {
            *slot = next;
            next += 1;
        }
        BipartitePartition {
            sample_side: self.sample_side.iter().map(|&c| map[c]).collect(),
            anchor_side: self.anchor_side.iter().map(|&c| map[c]).collect(),
            k: self.k,
        }
    }

    /// Apply a cluster-id permutation to both sides.
    pub fn relabeled(&self, perm: &[usize]) -> BipartitePartition {
        BipartitePartition {
            sample_side: self.sample_side.iter().map(|&c| perm[c]).collect(),
            anchor_side: self.anchor_side.iter().map(|&c| perm[c]).collect(),
            k: self.k,
        }
    }

    fn check_against(&self, graph: &BipartiteGraph) -> Result<()> {
        if self.sample_side.len() != graph.num_samples()
            || self.anchor_side.len() != graph.num_anchors()
        {
            return Err(Error::DimensionMismatch(format!(
                "partition covers {}×{} nodes, graph is {}×{}",
                self.sample_side.len(),
                self.anchor_side.len(),
                graph.num_samples(),
                graph.num_anchors()
            )));
        }
        for (side, counts) in [("sample", self.sample_sizes()), ("anchor", self.anchor_sizes())] {
            if let Some(cluster) = counts.iter().position(|&c| c == 0) {
                return Err(Error::EmptyCluster { cluster, side });
            }
        }
        Ok(())
    }
}

fn sizes(labels: &[usize], k: usize) -> Vec<usize> {
    let mut out = vec![0; k];
    for &l in labels {
        out[l] += 1;
    }
    out
}

fn members(labels: &[usize], cluster: usize) -> Vec<usize> {
    labels
        .iter()
        .enumerate()
        .filter_map(|(i, &l)| (l == cluster).then_some(i))
        .collect()
}

fn complement(set: &[usize], len: usize) -> Vec<usize> {
    let mut inside = vec![false; len];
    for &i in set {
        inside[i] = true;
    }
    (0..len).filter(|&i| !inside[i]).collect()
}

/// `cut(S', A') = Σ_{n∈S', m∈A'} b_nm`.
pub fn pairwise_cut(graph: &BipartiteGraph, samples: &[usize], anchors: &[usize]) -> Result<f64> {
    let (n, m) = (graph.num_samples(), graph.num_anchors());
    if let Some(&index) = samples.iter().find(|&&i| i >= n) {
        return Err(Error::IndexOutOfRange { index, len: n });
    }
    if let Some(&index) = anchors.iter().find(|&&j| j >= m) {
        return Err(Error::IndexOutOfRange { index, len: m });
    }
    let mut total = 0.0;
    for &s in samples {
        for &a in anchors {
            total += graph.get(s, a);
        }
    }
    Ok(total)
}

/// Row sums (sample degrees) and column sums (anchor degrees) of `B`.
pub fn degree_vectors(graph: &BipartiteGraph) -> (Vec<f64>, Vec<f64>) {
    let (n, m) = (graph.num_samples(), graph.num_anchors());
    let mut rows = vec![0.0; n];
    let mut cols = vec![0.0; m];
    for (j, col) in cols.iter_mut().enumerate() {
        for (i, row) in rows.iter_mut().enumerate() {
            let w = graph.get(i, j);
            *row += w;
            *col += w;
        }
    }
    (rows, cols)
}

struct ClusterCuts {
    /// `cut(S_i, A \ A_i)`
    sample_out: Vec<f64>,
    /// `cut(S \ S_i, A_i)`
    anchor_out: Vec<f64>,
    /// `cut(S_i, A_i)`
    within: Vec<f64>,
    sample_sizes: Vec<f64>,
    anchor_sizes: Vec<f64>,
}

fn cluster_cuts(graph: &BipartiteGraph, partition: &BipartitePartition) -> Result<ClusterCuts> {
    partition.check_against(graph)?;
    let (n, m) = (graph.num_samples(), graph.num_anchors());
    let mut out = ClusterCuts {
        sample_out: Vec::with_capacity(partition.k),
        anchor_out: Vec::with_capacity(partition.k),
        within: Vec::with_capacity(partition.k),
        sample_sizes: Vec::with_capacity(partition.k),
        anchor_sizes: Vec::with_capacity(partition.k),
    };
    for i in 0..partition.k {
        let s_i = partition.sample_members(i);
        let a_i = partition.anchor_members(i);
        out.sample_out
            .push(pairwise_cut(graph, &s_i, &complement(&a_i, m))?);
        out.anchor_out
            .push(pairwise_cut(graph, &complement(&s_i, n), &a_i)?);
        out.within.push(pairwise_cut(graph, &s_i, &a_i)?);
        out.sample_sizes.push(s_i.len() as f64);
        out.anchor_sizes.push(a_i.len() as f64);
    }
    Ok(out)
}

/// Unnormalized multiway cut: half the weight of all edges crossing clusters.
pub fn plain_cut(graph: &BipartiteGraph, partition: &BipartitePartition) -> Result<f64> {
    let c = cluster_cuts(graph, partition)?;
    Ok(0.5 * c.sample_out.iter().zip(&c.anchor_out).map(|(a, b)| a + b).sum::<f64>())
}

/// Size-normalized cross cuts, RatioCut style.
pub fn ratio_cut(graph: &BipartiteGraph, partition: &BipartitePartition) -> Result<f64> {
    let c = cluster_cuts(graph, partition)?;
    Ok((0..partition.k)
        .map(|i| c.sample_out[i] / c.sample_sizes[i] + c.anchor_out[i] / c.anchor_sizes[i])
        .sum())
}

/// [`ratio_cut`] plus a penalty on sample/anchor size imbalance inside each cluster.
pub fn balanced_ratio_cut(graph: &BipartiteGraph, partition: &BipartitePartition) -> Result<f64> {
    let c = cluster_cuts(graph, partition)?;
    Ok((0..partition.k)
        .map(|i| {
            let gap = 1.0 / c.sample_sizes[i].sqrt() - 1.0 / c.anchor_sizes[i].sqrt();
            c.sample_out[i] / c.sample_sizes[i]
                + c.anchor_out[i] / c.anchor_sizes[i]
                + c.within[i] * gap * gap
        })
        .sum())
}

/// The normalized bipartite graph cut: [`balanced_ratio_cut`] minus the
/// size-normalized degree volume of each side of each cluster.
///
/// Can be negative. Fails with [`Error::EmptyCluster`] if any `S_i` or `A_i` is empty.
pub fn bipartite_graph_cut(graph: &BipartiteGraph, partition: &BipartitePartition) -> Result<f64> {
    let c = cluster_cuts(graph, partition)?;
    let (d_samples, d_anchors) = degree_vectors(graph);
    let mut total = 0.0;
    for i in 0..partition.k {
        let gap = 1.0 / c.sample_sizes[i].sqrt() - 1.0 / c.anchor_sizes[i].sqrt();
        let sample_volume: f64 = partition.sample_members(i).iter().map(|&n| d_samples[n]).sum();
        let anchor_volume: f64 = partition.anchor_members(i).iter().map(|&m| d_anchors[m]).sum();
        total += c.sample_out[i] / c.sample_sizes[i]
            + c.anchor_out[i] / c.anchor_sizes[i]
            + c.within[i] * gap * gap
            - sample_volume / c.sample_sizes[i]
            - anchor_volume / c.anchor_sizes[i];
    }
    Ok(total)
}

/// Normalized indicator: entry `(i, j)` is `1/√|S_j|` when `i ∈ S_j`, else 0.
pub fn normalized_indicator(labels: &[usize], k: usize) -> DMatrix<f64> {
    let counts = sizes(labels, k);
    let mut y = DMatrix::zeros(labels.len(), k);
    for (i, &l) in labels.iter().enumerate() {
        y[(i, l)] = 1.0 / (counts[l] as f64).sqrt();
    }
    y
}

/// `Tr(Ȳ_Nᵀ B Ȳ_M)` built from explicit normalized indicator matrices.
pub fn trace_objective(graph: &BipartiteGraph, partition: &BipartitePartition) -> Result<f64> {
    partition.check_against(graph)?;
    let y_n = normalized_indicator(&partition.sample_side, partition.k);
    let y_m = normalized_indicator(&partition.anchor_side, partition.k);
    Ok((y_n.transpose() * graph.weights() * y_m).trace())
}

/// `Tr((YᵀY)^{-1/2} Yᵀ B H (HᵀH)^{-1/2})` with 0/1 indicators `Y` and `H`.
///
/// Equal to [`trace_objective`] on any nonempty partition; evaluated through
/// the one-hot matrices as an independent route.
pub fn indicator_trace_objective(
    graph: &BipartiteGraph,
    partition: &BipartitePartition,
) -> Result<f64> {
    partition.check_against(graph)?;
    let y = ClusterIndicator::new(partition.sample_side.clone(), partition.k)?.to_one_hot();
    let h = ClusterIndicator::new(partition.anchor_side.clone(), partition.k)?.to_one_hot();
    let inv_sqrt = |m: &DMatrix<f64>| {
        let gram = m.transpose() * m;
        DMatrix::from_fn(gram.nrows(), gram.ncols(), |i, j| {
            if i == j {
                1.0 / gram[(i, i)].sqrt()
            } else {
                0.0
            }
        })
    };
    Ok((inv_sqrt(&y) * y.transpose() * graph.weights() * &h * inv_sqrt(&h)).trace())
}

/// `Σ_j (y_jᵀ B h_j) / √(n_j + ε)`, the relaxed trace maximized by the solver.
pub fn relaxed_trace_objective(
    graph: &BipartiteGraph,
    indicator: &ClusterIndicator,
    embedding: &AnchorEmbedding,
    epsilon: f64,
) -> Result<f64> {
    let h = embedding.matrix();
    if indicator.len() != graph.num_samples()
        || h.nrows() != graph.num_anchors()
        || h.ncols() != indicator.k()
    {
        return Err(Error::DimensionMismatch(format!(
            "graph {}×{}, indicator {} samples/{} clusters, embedding {}×{}",
            graph.num_samples(),
            graph.num_anchors(),
            indicator.len(),
            indicator.k(),
            h.nrows(),
            h.ncols()
        )));
    }
    Ok(relaxed_trace_unchecked(graph.weights(), indicator, h, epsilon))
}

pub(crate) fn relaxed_trace_unchecked(
    b: &DMatrix<f64>,
    indicator: &ClusterIndicator,
    h: &DMatrix<f64>,
    epsilon: f64,
) -> f64 {
    let k = indicator.k();
    let m = b.ncols();
    // Column j of Bᵀ Y: summed graph rows of cluster j.
    let mut summed = DMatrix::<f64>::zeros(m, k);
    for a in 0..m {
        let col = b.column(a);
        for (i, &c) in indicator.assignments().iter().enumerate() {
            summed[(a, c)] += col[i];
        }
    }
    indicator
        .counts()
        .iter()
        .enumerate()
        .map(|(j, &n)| summed.column(j).dot(&h.column(j)) / (n as f64 + epsilon).sqrt())
        .sum()
}

/// Labeled partitions with every cluster nonempty on both sides.
pub struct PartitionIter {
    samples: Vec<Vec<usize>>,
    anchors: Vec<Vec<usize>>,
    k: usize,
    next: usize,
}

impl Iterator for PartitionIter {
    type Item = BipartitePartition;

    fn next(&mut self) -> Option<Self::Item> {
        let total = self.samples.len() * self.anchors.len();
        if self.next >= total {
            return None;
        }
        let (s, a) = (self.next / self.anchors.len(), self.next % self.anchors.len());
        self.next += 1;
        Some(BipartitePartition {
            sample_side: self.samples[s].clone(),
            anchor_side: self.anchors[a].clone(),
            k: self.k,
        })
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.samples.len() * self.anchors.len() - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for PartitionIter {}

fn surjective_labelings(len: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    if len < k {
        return out;
    }
    let mut labels = vec![0usize; len];
    loop {
        if sizes(&labels, k).iter().all(|&c| c > 0) {
            out.push(labels.clone());
        }
        // odometer increment, last position fastest
        let mut pos = len;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            labels[pos] += 1;
            if labels[pos] < k {
                break;
            }
            labels[pos] = 0;
        }
    }
}

/// Every labeled partition of `n` samples and `m` anchors into `k` clusters with
/// no empty side-cluster. Fails if `k^n · k^m` exceeds `budget`.
pub fn enumerate_partitions(n: usize, m: usize, k: usize, budget: u128) -> Result<PartitionIter> {
    let required = (k as u128)
        .checked_pow((n + m) as u32)
        .unwrap_or(u128::MAX);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    Ok(PartitionIter {
        samples: surjective_labelings(n, k),
        anchors: surjective_labelings(m, k),
        k,
        next: 0,
    })
}

/// Outcome of checking that cut minimizers and trace maximizers coincide.
#[derive(Clone, Debug)]
pub struct EquivalenceReport {
    /// Canonically relabeled partitions attaining the minimum cut.
    pub argmin_cut: BTreeSet<BipartitePartition>,
    /// Canonically relabeled partitions attaining the maximum trace.
    pub argmax_trace: BTreeSet<BipartitePartition>,
    pub min_cut: f64,
    pub max_trace: f64,
    /// Largest `|cut + 2·trace|` over all partitions.
    pub max_abs_identity_residual: f64,
    pub partitions_checked: usize,
}

impl EquivalenceReport {
    pub fn optimizers_agree(&self) -> bool {
        self.argmin_cut == self.argmax_trace
    }
}

/// Values within this relative distance of the optimum count as ties.
const TIE_TOL: f64 = 1e-9;

/// Exhaustively compare cut minimizers with trace maximizers on `graph`.
pub fn verify_equivalence(graph: &BipartiteGraph, k: usize, budget: u128) -> Result<EquivalenceReport> {
    let partitions: Vec<_> =
        enumerate_partitions(graph.num_samples(), graph.num_anchors(), k, budget)?.collect();
    if partitions.is_empty() {
        return Err(Error::InvalidPartition(format!(
            "no partition of {}×{} nodes into {k} nonempty paired clusters",
            graph.num_samples(),
            graph.num_anchors()
        )));
    }
    let mut values = Vec::with_capacity(partitions.len());
    let mut residual = 0.0f64;
    for p in &partitions {
        let cut = bipartite_graph_cut(graph, p)?;
        let trace = trace_objective(graph, p)?;
        residual = residual.max((cut + 2.0 * trace).abs());
        values.push((cut, trace));
    }
    let min_cut = values.iter().map(|v| v.0).fold(f64::INFINITY, f64::min);
    let max_trace = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    let mut argmin_cut = BTreeSet::new();
    let mut argmax_trace = BTreeSet::new();
    for (p, &(cut, trace)) in partitions.iter().zip(&values) {
        if cut <= min_cut + TIE_TOL * (1.0 + min_cut.abs()) {
            argmin_cut.insert(p.canonical());
        }
        if trace >= max_trace - TIE_TOL * (1.0 + max_trace.abs()) {
            argmax_trace.insert(p.canonical());
        }
    }
    Ok(EquivalenceReport {
        argmin_cut,
        argmax_trace,
        min_cut,
        max_trace,
        max_abs_identity_residual: residual,
        partitions_checked: partitions.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn graph(rows: usize, cols: usize, data: &[f64]) -> BipartiteGraph {
        BipartiteGraph::new(DMatrix::from_row_slice(rows, cols, data)).unwrap()
    }

    fn part(s: &[usize], a: &[usize], k: usize) -> BipartitePartition {
        BipartitePartition::new(s.to_vec(), a.to_vec(), k).unwrap()
    }

    #[test]
    fn pairwise_cut_examples() {
        let g = graph(2, 2, &[0.5, 0.5, 1.0, 0.0]);
        assert_eq!(pairwise_cut(&g, &[0], &[0, 1]).unwrap(), 1.0);
        assert_eq!(pairwise_cut(&g, &[0, 1], &[0]).unwrap(), 1.5);
        assert_eq!(pairwise_cut(&g, &[], &[0, 1]).unwrap(), 0.0);
        assert_eq!(pairwise_cut(&g, &[0, 1], &[]).unwrap(), 0.0);
        assert!(matches!(
            pairwise_cut(&g, &[2], &[0]),
            Err(Error::IndexOutOfRange { index: 2, len: 2 })
        ));
    }

    #[test]
    fn degree_examples() {
        let g = graph(2, 2, &[0.5, 0.5, 1.0, 0.0]);
        let (rows, cols) = degree_vectors(&g);
        assert_eq!(rows, vec![1.0, 1.0]);
        assert_eq!(cols, vec![1.5, 0.5]);
        let eye = BipartiteGraph::new(DMatrix::identity(3, 3)).unwrap();
        assert_eq!(degree_vectors(&eye), (vec![1.0; 3], vec![1.0; 3]));
    }

    #[test]
    fn cut_on_identity_graph() {
        let eye = BipartiteGraph::new(DMatrix::identity(2, 2)).unwrap();
        let paired = part(&[0, 1], &[0, 1], 2);
        let crossed = part(&[0, 1], &[1, 0], 2);
        assert_relative_eq!(bipartite_graph_cut(&eye, &paired).unwrap(), -4.0, epsilon = 1e-15);
        assert_relative_eq!(bipartite_graph_cut(&eye, &crossed).unwrap(), 0.0, epsilon = 1e-15);
        assert_relative_eq!(trace_objective(&eye, &paired).unwrap(), 2.0, epsilon = 1e-15);
        assert_relative_eq!(trace_objective(&eye, &crossed).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn trace_on_uniform_graph() {
        let g = BipartiteGraph::new(DMatrix::from_element(4, 2, 0.5)).unwrap();
        let p = part(&[0, 0, 1, 1], &[0, 1], 2);
        assert_relative_eq!(trace_objective(&g, &p).unwrap(), 2f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn cut_variants_on_identity_graph() {
        let eye = BipartiteGraph::new(DMatrix::identity(2, 2)).unwrap();
        let crossed = part(&[0, 1], &[1, 0], 2);
        assert_eq!(plain_cut(&eye, &crossed).unwrap(), 2.0);
        assert_eq!(ratio_cut(&eye, &crossed).unwrap(), 4.0);
        assert_eq!(balanced_ratio_cut(&eye, &crossed).unwrap(), 4.0);
        let uneven = part(&[0, 0], &[0, 0], 1);
        // one cluster: no crossing edges; within-cut 2 times (1/√2 - 1/√2)² = 0
        assert_eq!(balanced_ratio_cut(&eye, &uneven).unwrap(), 0.0);
    }

    #[test]
    fn empty_cluster_is_an_error() {
        let eye = BipartiteGraph::new(DMatrix::identity(2, 2)).unwrap();
        let p = part(&[0, 0], &[0, 1], 2);
        assert!(matches!(
            bipartite_graph_cut(&eye, &p),
            Err(Error::EmptyCluster { cluster: 1, side: "sample" })
        ));
        assert!(trace_objective(&eye, &part(&[0, 1], &[1, 1], 2)).is_err());
    }

    #[test]
    fn enumeration_counts() {
        let budget = DEFAULT_ENUMERATION_BUDGET;
        assert_eq!(enumerate_partitions(2, 2, 2, budget).unwrap().count(), 4);
        assert_eq!(enumerate_partitions(3, 2, 2, budget).unwrap().count(), 12);
        assert_eq!(enumerate_partitions(1, 1, 2, budget).unwrap().count(), 0);
        assert!(matches!(
            enumerate_partitions(12, 8, 3, budget),
            Err(Error::BudgetExceeded { .. })
        ));
    }

    #[test]
    fn enumeration_yields_distinct_partitions() {
        let all: Vec<_> = enumerate_partitions(4, 3, 2, DEFAULT_ENUMERATION_BUDGET)
            .unwrap()
            .collect();
        let unique: BTreeSet<_> = all.iter().cloned().collect();
        assert_eq!(all.len(), unique.len());
        // 14 surjections of 4 onto 2, 6 of 3 onto 2
        assert_eq!(all.len(), 14 * 6);
    }

    #[test]
    fn equivalence_on_block_graph() {
        let g = graph(3, 2, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0]);
        let report = verify_equivalence(&g, 2, DEFAULT_ENUMERATION_BUDGET).unwrap();
        assert!(report.optimizers_agree());
        assert!(report.max_abs_identity_residual <= 1e-12);
        let expected = part(&[0, 0, 1], &[0, 1], 2);
        assert!(report.argmax_trace.contains(&expected));
    }

    #[test]
    fn equivalence_on_identity_graph() {
        let eye = BipartiteGraph::new(DMatrix::identity(2, 2)).unwrap();
        let report = verify_equivalence(&eye, 2, DEFAULT_ENUMERATION_BUDGET).unwrap();
        let expected: BTreeSet<_> = [part(&[0, 1], &[0, 1], 2)].into_iter().collect();
        assert_eq!(report.argmin_cut, expected);
        assert_eq!(report.argmax_trace, expected);
        assert_eq!(report.max_abs_identity_residual, 0.0);
    }

    #[test]
    fn canonical_relabeling() {
        let p = part(&[2, 0, 1, 2], &[1, 0, 2], 3);
        assert_eq!(p.canonical(), part(&[0, 1, 2, 0], &[2, 1, 0], 3));
        assert_eq!(p.relabeled(&[1, 2, 0]).canonical(), p.canonical());
    }

    #[test]
    fn relaxed_trace_matches_discrete_trace() {
        let eye = BipartiteGraph::new(DMatrix::identity(2, 2)).unwrap();
        let y = ClusterIndicator::new(vec![0, 1], 2).unwrap();
        let h = AnchorEmbedding(DMatrix::identity(2, 2));
        assert_eq!(relaxed_trace_objective(&eye, &y, &h, 0.0).unwrap(), 2.0);

        let y = ClusterIndicator::new(vec![0, 0], 2).unwrap();
        let v = relaxed_trace_objective(&eye, &y, &h, 1e-8).unwrap();
        assert!(v.is_finite());
        assert_relative_eq!(v, 1.0 / 2f64.sqrt(), epsilon = 1e-8);
    }
}

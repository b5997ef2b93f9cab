mod common;

use common::oracles::{cut_by_laplacian, cut_by_loops, random_graph, random_orthonormal};
use nalgebra::DMatrix;
use obcut_core::graph_cut::{
    bipartite_graph_cut, enumerate_partitions, normalized_indicator, relaxed_trace_objective,
    trace_objective, verify_equivalence, DEFAULT_ENUMERATION_BUDGET,
};
use obcut_core::{AnchorEmbedding, BipartiteGraph, BipartitePartition, ClusterIndicator, Error};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn cut_matches_direct_and_laplacian_forms() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..20 {
        let graph = random_graph(&mut rng, 5, 3);
        for p in enumerate_partitions(5, 3, 2, DEFAULT_ENUMERATION_BUDGET).unwrap() {
            let cut = bipartite_graph_cut(&graph, &p).unwrap();
            let w = graph.weights();
            let loops = cut_by_loops(w, &p.sample_side, &p.anchor_side, 2);
            let laplacian = cut_by_laplacian(w, &p.sample_side, &p.anchor_side, 2);
            assert!((cut - loops).abs() <= 1e-10);
            assert!((cut - laplacian).abs() <= 1e-10);
            assert!((cut + 2.0 * trace_objective(&graph, &p).unwrap()).abs() <= 1e-10);
        }
    }
}

#[test]
fn optimizer_sets_agree_on_random_graphs() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for &(n, m, k) in &[(4, 2, 2), (5, 3, 2), (6, 3, 2), (4, 4, 2), (4, 3, 3)] {
        for _ in 0..10 {
            let graph = random_graph(&mut rng, n, m);
            let report = verify_equivalence(&graph, k, DEFAULT_ENUMERATION_BUDGET).unwrap();
            assert!(report.optimizers_agree());
            assert!(report.max_abs_identity_residual <= 1e-10);
            assert!(!report.argmin_cut.is_empty());
        }
    }
}

#[test]
fn equivalence_examples() {
    let block = BipartiteGraph::new(DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 1.0, 0.0, 0.0, 1.0])).unwrap();
    let report = verify_equivalence(&block, 2, DEFAULT_ENUMERATION_BUDGET).unwrap();
    assert!(report.optimizers_agree() && report.max_abs_identity_residual <= 1e-12);

    let identity = BipartiteGraph::new(DMatrix::identity(2, 2)).unwrap();
    let report = verify_equivalence(&identity, 2, DEFAULT_ENUMERATION_BUDGET).unwrap();
    assert_eq!(report.max_abs_identity_residual, 0.0);
    let paired = BipartitePartition::new(vec![0, 1], vec![0, 1], 2).unwrap().canonical();
    assert_eq!(report.argmin_cut.iter().collect::<Vec<_>>(), vec![&paired]);
    assert_eq!(report.argmin_cut, report.argmax_trace);
}

#[test]
fn over_budget_is_reported() {
    let graph = BipartiteGraph::new(DMatrix::from_element(12, 8, 1.0 / 8.0)).unwrap();
    assert!(matches!(
        verify_equivalence(&graph, 3, DEFAULT_ENUMERATION_BUDGET),
        Err(Error::BudgetExceeded { .. })
    ));
}

#[test]
fn relaxed_trace_with_indicator_embedding_matches_trace() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..10 {
        let graph = random_graph(&mut rng, 6, 4);
        for p in enumerate_partitions(6, 4, 2, DEFAULT_ENUMERATION_BUDGET).unwrap().step_by(37) {
            let h = AnchorEmbedding(normalized_indicator(&p.anchor_side, 2));
            let y = ClusterIndicator::new(p.sample_side.clone(), 2).unwrap();
            let relaxed = relaxed_trace_objective(&graph, &y, &h, 0.0).unwrap();
            assert!((relaxed - trace_objective(&graph, &p).unwrap()).abs() <= 1e-12);
        }
    }
}

#[test]
fn relaxed_trace_is_bounded_by_nm_alpha() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for _ in 0..20 {
        let (n, m) = (rng.random_range(3..20), rng.random_range(2..6));
        let k = rng.random_range(1..=m);
        let graph = random_graph(&mut rng, n, m);
        let y = ClusterIndicator::new((0..n).map(|_| rng.random_range(0..k)).collect(), k).unwrap();
        let h = AnchorEmbedding(random_orthonormal(&mut rng, m, k));
        let value = relaxed_trace_objective(&graph, &y, &h, 1e-8).unwrap();
        assert!(value <= (n * m) as f64 * graph.max_abs());
    }
}

proptest! {
    #[test]
    fn identity_holds_for_any_valid_partition(seed in any::<u64>(), n in 2usize..7, m in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let graph = random_graph(&mut rng, n, m);
        let k = 2;
        // guarantee both clusters are nonempty on both sides
        let mut samples: Vec<usize> = (0..n).map(|_| rng.random_range(0..k)).collect();
        let mut anchors: Vec<usize> = (0..m).map(|_| rng.random_range(0..k)).collect();
        samples[0] = 0;
        samples[1] = 1;
        anchors[0] = 1;
        anchors[1] = 0;
        let p = BipartitePartition::new(samples, anchors, k).unwrap();
        let cut = bipartite_graph_cut(&graph, &p).unwrap();
        let trace = trace_objective(&graph, &p).unwrap();
        prop_assert!((cut + 2.0 * trace).abs() <= 1e-10);
        // joint relabeling leaves the trace unchanged
        let swapped = trace_objective(&graph, &p.relabeled(&[1, 0])).unwrap();
        prop_assert!((swapped - trace).abs() <= 1e-12);
        let ybar = normalized_indicator(&p.sample_side, k);
        prop_assert!((ybar.transpose() * &ybar - DMatrix::identity(k, k)).amax() <= 1e-12);
    }
}

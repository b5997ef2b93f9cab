mod common;

use common::oracles::{acc_by_permutation, nmi_direct, purity_direct};
use obcut_core::metrics::{acc, nmi, purity, Scores};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn metrics_match_brute_force_on_random_labelings() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..200 {
        let n = rng.random_range(1..60);
        let kp = rng.random_range(1..=6);
        let kt = rng.random_range(1..=6);
        let pred: Vec<usize> = (0..n).map(|_| rng.random_range(0..kp)).collect();
        let truth: Vec<usize> = (0..n).map(|_| rng.random_range(0..kt)).collect();
        assert!((acc(&pred, &truth).unwrap() - acc_by_permutation(&pred, &truth)).abs() <= 1e-12);
        assert!((nmi(&pred, &truth).unwrap() - nmi_direct(&pred, &truth)).abs() <= 1e-12);
        assert!((purity(&pred, &truth).unwrap() - purity_direct(&pred, &truth)).abs() <= 1e-12);
    }
}

#[test]
fn unused_label_ids_do_not_matter() {
    let pred = [7, 7, 3, 3, 9];
    let truth = [0, 0, 1, 1, 1];
    let s = Scores::compute(&pred, &truth).unwrap();
    assert_eq!(s.acc, acc_by_permutation(&pred, &truth));
    assert!((s.nmi - nmi_direct(&pred, &truth)).abs() <= 1e-12);
}

proptest! {
    #[test]
    fn scores_are_in_unit_interval_and_symmetric(
        labels in prop::collection::vec((0usize..5, 0usize..5), 1..80)
    ) {
        let (pred, truth): (Vec<_>, Vec<_>) = labels.into_iter().unzip();
        let s = Scores::compute(&pred, &truth).unwrap();
        for v in [s.nmi, s.acc, s.purity] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(s.acc <= s.purity + 1e-15);
        prop_assert!((nmi(&truth, &pred).unwrap() - s.nmi).abs() <= 1e-12);
        prop_assert!((acc(&truth, &pred).unwrap() - s.acc).abs() <= 1e-12);
    }

    #[test]
    fn relabeling_predictions_changes_nothing(
        pred in prop::collection::vec(0usize..4, 1..50),
        shift in 1usize..10,
    ) {
        let truth: Vec<usize> = pred.iter().enumerate().map(|(i, &p)| (p + i % 2) % 4).collect();
        let renamed: Vec<usize> = pred.iter().map(|&p| (p + shift) * 3).collect();
        prop_assert_eq!(Scores::compute(&pred, &truth).unwrap(), Scores::compute(&renamed, &truth).unwrap());
    }
}

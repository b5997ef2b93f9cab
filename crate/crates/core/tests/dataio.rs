use obcut_core::dataio::{
    load_dense, load_result, load_sparse, make_blobs, normalize, save_result, write_trace,
    DenseOptions, NormalizationMode, NormalizationSpec, RunRecord,
};
use obcut_core::metrics::Scores;
use obcut_core::solver::kmeans::KMeans;
use obcut_core::{fit, Error, SolverConfig, Variant};
use proptest::prelude::*;

#[test]
fn run_record_round_trips() {
    let raw = make_blobs(20, 2, 2, 10.0, 0.5, 1).unwrap();
    let (data, spec) = normalize(&raw, NormalizationMode::MinMax);
    let config = SolverConfig {
        anchors: 6,
        ..SolverConfig::new(2)
    };
    let result = fit(&data, &config).unwrap();
    let scores = Scores::compute(result.indicator.assignments(), data.labels().unwrap()).unwrap();
    let record = RunRecord::from_fit(&result, &config, Variant::LaLg, Some(scores), Some(spec));
    assert_eq!(record.iterations.len(), record.objective_trace.len());

    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    save_result(&record, &path).unwrap();
    let back = load_result(&path).unwrap();
    assert_eq!(back.assignments, record.assignments);
    assert_eq!(back.objective_trace, record.objective_trace);
    assert_eq!(back.iterations, record.iterations);
    assert_eq!(back.config, record.config);
    assert_eq!(back.metrics, record.metrics);
    assert_eq!(back.nmi_normalization, "geometric");

    let trace_path = dir.path().join("trace.txt");
    write_trace(&record.objective_trace, &trace_path).unwrap();
    let text = std::fs::read_to_string(&trace_path).unwrap();
    let values: Vec<f64> = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split_whitespace().nth(1).unwrap().parse().unwrap())
        .collect();
    assert_eq!(values, record.objective_trace);
}

#[test]
fn unwritable_path_is_an_io_error() {
    let raw = make_blobs(5, 2, 2, 10.0, 0.5, 1).unwrap();
    let config = SolverConfig {
        anchors: 2,
        max_outer_iters: 1,
        ..SolverConfig::new(2)
    };
    let result = fit(&raw, &config).unwrap();
    let record = RunRecord::from_fit(&result, &config, Variant::LaLg, None, None);
    let err = save_result(&record, "/nonexistent-dir/x/run.json").unwrap_err();
    assert!(matches!(err, Error::Io { .. }));
}

#[test]
fn missing_file_error_names_the_path() {
    let err = load_dense("/no/such/file.csv", &DenseOptions::default()).unwrap_err();
    assert!(err.to_string().contains("/no/such/file.csv"), "{err}");
    assert!(load_sparse("/no/such/file.svm").is_err());
}

#[test]
fn files_load_from_disk() {
    let dir = tempfile::tempdir().unwrap();
    let dense = dir.path().join("d.csv");
    std::fs::write(&dense, "1,2,a\n3,4,a\n5,6,b\n").unwrap();
    let opts = DenseOptions {
        label_column: Some(2),
        ..DenseOptions::default()
    };
    let ds = load_dense(&dense, &opts).unwrap();
    assert_eq!((ds.dim(), ds.len()), (2, 3));
    assert_eq!(ds.labels().unwrap(), &[0, 0, 1]);

    let sparse = dir.path().join("s.svm");
    std::fs::write(&sparse, "1 1:0.5 3:0.5\n2 2:1\n").unwrap();
    let ds = load_sparse(&sparse).unwrap();
    assert_eq!(ds.dim(), 3);
    assert_eq!(ds.features().column(0).as_slice(), &[0.5, 0.0, 0.5]);
}

#[test]
fn blobs_are_separable_by_kmeans() {
    let data = make_blobs(50, 3, 2, 10.0, 0.1, 8).unwrap();
    let km = KMeans::new(3, 0).fit(data.features()).unwrap();
    let score = obcut_core::metrics::acc(&km.assignments, data.labels().unwrap()).unwrap();
    assert!(score >= 0.99);
}

#[test]
fn blob_centers_are_separated() {
    let data = make_blobs(1, 5, 3, 7.0, 0.0, 2).unwrap();
    let x = data.features();
    for i in 0..5 {
        for j in 0..i {
            assert!((x.column(i) - x.column(j)).norm() >= 7.0 - 1e-12);
        }
    }
}

proptest! {
    #[test]
    fn normalization_is_idempotent_and_reapplicable(
        values in prop::collection::vec(-100.0f64..100.0, 12),
        mode in prop::sample::select(vec![NormalizationMode::MinMax, NormalizationMode::ZScore]),
    ) {
        let x = obcut_core::DMatrix::from_column_slice(3, 4, &values);
        let data = obcut_core::Dataset::new(x, None).unwrap();
        let (once, spec) = normalize(&data, mode);
        let (twice, _) = normalize(&once, mode);
        prop_assert!((once.features() - twice.features()).amax() <= 1e-12);
        let reapplied = spec.apply(&data).unwrap();
        prop_assert_eq!(reapplied.features(), once.features());
        let refit = NormalizationSpec::fit(&data, mode);
        prop_assert_eq!(refit, spec);
    }
}

//! Cluster three Gaussian blobs and print the objective trace and scores.

use obcut_core::dataio::{make_blobs, normalize, NormalizationMode};
use obcut_core::metrics::Scores;
use obcut_core::{fit, SolverConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().collect();
    let n_per: usize = args.get(1).map_or(Ok(100), |s| s.parse())?;
    let k: usize = args.get(2).map_or(Ok(3), |s| s.parse())?;
    let d: usize = args.get(3).map_or(Ok(2), |s| s.parse())?;
    let m: usize = args.get(4).map_or(Ok(10), |s| s.parse())?;
    let lambda: f64 = args.get(5).map_or(Ok(1.0), |s| s.parse())?;
    let raw = make_blobs(n_per, k, d, 10.0, 0.5, 1)?;
    let (data, _) = normalize(&raw, NormalizationMode::MinMax);
    let config = SolverConfig {
        anchors: m,
        lambda,
        max_outer_iters: args.get(6).map_or(Ok(50), |s| s.parse())?,
        ..SolverConfig::new(k)
    };
    let start = std::time::Instant::now();
    let result = fit(&data, &config)?;
    for record in &result.iterations {
        println!("{:>3} {:>14.6} {:.3}s", record.iteration, record.objective, record.seconds);
    }
    let scores = Scores::compute(result.indicator.assignments(), data.labels().unwrap())?;
    println!("{scores:?} converged={} in {:.2?}", result.converged, start.elapsed());
    println!("warnings: {:?}", result.warnings);
    Ok(())
}

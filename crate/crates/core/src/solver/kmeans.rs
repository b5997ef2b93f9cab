//! Lloyd's k-means with k-means++ seeding, used to initialize anchors and the
//! cluster indicator, and as the plain reference baseline.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct KMeans {
    pub clusters: usize,
    pub max_iters: usize,
    pub restarts: usize,
    pub seed: u64,
}

#[derive(Clone, Debug)]
pub struct KMeansFit {
    /// `d × clusters`
    pub centroids: DMatrix<f64>,
    pub assignments: Vec<usize>,
    pub inertia: f64,
    pub iterations: usize,
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

impl KMeans {
    pub fn new(clusters: usize, seed: u64) -> Self {
        KMeans {
            clusters,
            max_iters: 100,
            restarts: 3,
            seed,
        }
    }

    /// Cluster the columns of `points` (`d × N`). Keeps the restart with the lowest inertia.
    pub fn fit(&self, points: &DMatrix<f64>) -> Result<KMeansFit> {
        let n = points.ncols();
        if self.clusters == 0 || self.clusters > n {
            return Err(Error::InvalidConfig(format!(
                "cannot form {} clusters from {n} points",
                self.clusters
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut best: Option<KMeansFit> = None;
        for _ in 0..self.restarts.max(1) {
            if let Some(fit) = self.fit_once(points, &mut rng) {
                if best.as_ref().is_none_or(|b| fit.inertia < b.inertia) {
                    best = Some(fit);
                }
            }
        }
        best.ok_or_else(|| {
            Error::DegenerateData(format!(
                "k-means could not find {} nonempty clusters after {} attempts",
                self.clusters,
                self.restarts.max(1)
            ))
        })
    }

    fn seed_centroids(&self, points: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> Option<DMatrix<f64>> {
        let (d, n) = points.shape();
        let mut centroids = DMatrix::zeros(d, self.clusters);
        let first = rng.random_range(0..n);
        centroids.set_column(0, &points.column(first));
        let mut nearest: Vec<f64> = (0..n)
            .map(|i| sq_dist(points.column(i).as_slice(), centroids.column(0).as_slice()))
            .collect();
        for c in 1..self.clusters {
            let total: f64 = nearest.iter().sum();
            if total <= 0.0 {
                return None;
            }
            let mut target = rng.random::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                if target < w {
                    chosen = i;
                    break;
                }
                target -= w;
            }
            // guard against landing on a zero-weight point through rounding
            if nearest[chosen] <= 0.0 {
                chosen = nearest
                    .iter()
                    .enumerate()
                    .max_by(|a, b| a.1.total_cmp(b.1))
                    .map(|(i, _)| i)?;
            }
            centroids.set_column(c, &points.column(chosen));
            for (i, slot) in nearest.iter_mut().enumerate() {
                let dist = sq_dist(points.column(i).as_slice(), centroids.column(c).as_slice());
                if dist < *slot {
                    *slot = dist;
                }
            }
        }
        Some(centroids)
    }

    fn fit_once(&self, points: &DMatrix<f64>, rng: &mut ChaCha8Rng) -> Option<KMeansFit> {
        let (d, n) = points.shape();
        let mut centroids = self.seed_centroids(points, rng)?;
        let mut assignments = vec![usize::MAX; n];
        let mut distances = vec![0.0; n];
        let mut iterations = 0;
        for _ in 0..self.max_iters {
            iterations += 1;
            let changed = assign(points, &centroids, &mut assignments, &mut distances);

            let mut sums = DMatrix::<f64>::zeros(d, self.clusters);
            let mut counts = vec![0usize; self.clusters];
            for (i, &a) in assignments.iter().enumerate() {
                counts[a] += 1;
                let mut col = sums.column_mut(a);
                col += points.column(i);
            }
            let mut repaired = false;
            for (c, &count) in counts.iter().enumerate() {
                if count == 0 {
                    // reseed an empty cluster at the point farthest from its centroid
                    let (far, dist) = distances
                        .iter()
                        .enumerate()
                        .max_by(|a, b| a.1.total_cmp(b.1))
                        .map(|(i, &dd)| (i, dd))?;
                    if dist <= 0.0 {
                        return None;
                    }
                    centroids.set_column(c, &points.column(far));
                    distances[far] = 0.0;
                    repaired = true;
                } else {
                    let mean = sums.column(c) / counts[c] as f64;
                    centroids.set_column(c, &mean);
                }
            }
            if !changed && !repaired {
                break;
            }
        }
        assign(points, &centroids, &mut assignments, &mut distances);
        let mut counts = vec![0usize; self.clusters];
        for &a in &assignments {
            counts[a] += 1;
        }
        if counts.contains(&0) {
            return None;
        }
        Some(KMeansFit {
            centroids,
            assignments,
            inertia: distances.iter().sum(),
            iterations,
        })
    }
}

/// Nearest-centroid assignment (lowest index on ties). Returns whether anything changed.
fn assign(
    points: &DMatrix<f64>,
    centroids: &DMatrix<f64>,
    assignments: &mut [usize],
    distances: &mut [f64],
) -> bool {
    let mut changed = false;
    for i in 0..points.ncols() {
        let p = points.column(i);
        let mut best = (f64::INFINITY, 0);
        for c in 0..centroids.ncols() {
            let dist = sq_dist(p.as_slice(), centroids.column(c).as_slice());
            if dist < best.0 {
                best = (dist, c);
            }
        }
        if assignments[i] != best.1 {
            assignments[i] = best.1;
            changed = true;
        }
        distances[i] = best.0;
    }
    changed
}

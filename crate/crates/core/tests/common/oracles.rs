//! Brute-force reference implementations used by the integration tests and
//! the acceptance harness. Each one is deliberately naive.

#![allow(dead_code)]

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use obcut_core::BipartiteGraph;

/// Exact minimizer of `bᵀHb − fᵀb` over the probability simplex by trying
/// every support set: solve the equality-constrained KKT system on the
/// support, keep feasible stationary points, return the lowest objective.
pub fn qp_enumeration(h: &DMatrix<f64>, f: &[f64]) -> (Vec<f64>, f64) {
    let m = f.len();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for mask in 1u32..(1 << m) {
        let support: Vec<usize> = (0..m).filter(|&j| mask & (1 << j) != 0).collect();
        let s = support.len();
        let mut kkt = DMatrix::zeros(s + 1, s + 1);
        let mut rhs = DVector::zeros(s + 1);
        for (a, &i) in support.iter().enumerate() {
            for (c, &j) in support.iter().enumerate() {
                kkt[(a, c)] = 2.0 * h[(i, j)];
            }
            kkt[(a, s)] = 1.0;
            kkt[(s, a)] = 1.0;
            rhs[a] = f[i];
        }
        rhs[s] = 1.0;
        let Ok(sol) = kkt.clone().svd(true, true).solve(&rhs, 1e-12) else {
            continue;
        };
        if (&kkt * &sol - &rhs).amax() > 1e-9 {
            continue;
        }
        if sol.rows(0, s).iter().any(|&v| v < -1e-12) {
            continue;
        }
        let mut b = vec![0.0; m];
        for (a, &i) in support.iter().enumerate() {
            b[i] = sol[a].max(0.0);
        }
        let value = qp_objective(h, f, &b);
        if best.as_ref().is_none_or(|(_, v)| value < *v) {
            best = Some((b, value));
        }
    }
    best.expect("the simplex always has a feasible stationary point")
}

pub fn qp_objective(h: &DMatrix<f64>, f: &[f64], b: &[f64]) -> f64 {
    let bv = DVector::from_column_slice(b);
    (bv.transpose() * h * &bv)[0] - f.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

/// Sum of singular values.
pub fn nuclear_norm(g: &DMatrix<f64>) -> f64 {
    g.clone().svd(false, false).singular_values.sum()
}

/// A random `m × k` matrix with orthonormal columns (QR of a Gaussian matrix).
pub fn random_orthonormal(rng: &mut impl Rng, m: usize, k: usize) -> DMatrix<f64> {
    let g = gaussian(rng, m, k);
    g.qr().q().columns(0, k).into_owned()
}

pub fn gaussian(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(rng))
}

/// `∂/∂A ‖X − ABᵀ‖² = 2(ABᵀ − X)B`.
pub fn anchor_gradient(x: &DMatrix<f64>, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    (a * b.transpose() - x) * b * 2.0
}

/// `Σ_j (Σ_{i∈j} q_ij) / √(n_j + ε)`, computed from an explicit one-hot matrix.
pub fn indicator_trace(q: &DMatrix<f64>, assignments: &[usize], k: usize, epsilon: f64) -> f64 {
    let n = assignments.len();
    let y = DMatrix::from_fn(n, k, |i, j| if assignments[i] == j { 1.0 } else { 0.0 });
    let yty = y.transpose() * &y;
    let scale = DMatrix::from_fn(k, k, |i, j| {
        if i == j {
            1.0 / (yty[(i, i)] + epsilon).sqrt()
        } else {
            0.0
        }
    });
    (scale * y.transpose() * q).trace()
}

/// Best single-row move gain; a fixed point has no positive gain.
pub fn best_single_move_gain(q: &DMatrix<f64>, assignments: &[usize], k: usize, epsilon: f64) -> f64 {
    let base = indicator_trace(q, assignments, k, epsilon);
    let mut best = f64::NEG_INFINITY;
    let mut trial = assignments.to_vec();
    for i in 0..assignments.len() {
        for j in 0..k {
            if j == assignments[i] {
                continue;
            }
            trial[i] = j;
            best = best.max(indicator_trace(q, &trial, k, epsilon) - base);
            trial[i] = assignments[i];
        }
    }
    best
}

/// Maximum of [`indicator_trace`] over all `k^N` labelings.
pub fn best_indicator_trace(q: &DMatrix<f64>, k: usize, epsilon: f64) -> f64 {
    let n = q.nrows();
    let total = (k as u64).pow(n as u32);
    let mut labels = vec![0; n];
    let mut best = f64::NEG_INFINITY;
    for code in 0..total {
        let mut c = code;
        for l in labels.iter_mut() {
            *l = (c % k as u64) as usize;
            c /= k as u64;
        }
        best = best.max(indicator_trace(q, &labels, k, epsilon));
    }
    best
}

fn relabel(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut map = HashMap::new();
    let out = labels
        .iter()
        .map(|&l| {
            let next = map.len();
            *map.entry(l).or_insert(next)
        })
        .collect();
    (out, map.len())
}

/// ACC by trying every permutation of `max(clusters, classes)` labels.
pub fn acc_by_permutation(pred: &[usize], truth: &[usize]) -> f64 {
    let (pred, kp) = relabel(pred);
    let (truth, kt) = relabel(truth);
    let size = kp.max(kt);
    assert!(size <= 8, "permutation oracle limited to 8 labels");
    let mut perm: Vec<usize> = (0..size).collect();
    let mut best = 0;
    permute(&mut perm, 0, &mut |p| {
        let hits = pred.iter().zip(&truth).filter(|&(&a, &b)| p[a] == b).count();
        best = best.max(hits);
    });
    best as f64 / pred.len() as f64
}

fn permute(items: &mut Vec<usize>, start: usize, visit: &mut impl FnMut(&[usize])) {
    if start == items.len() {
        visit(items);
        return;
    }
    for i in start..items.len() {
        items.swap(start, i);
        permute(items, start + 1, visit);
        items.swap(start, i);
    }
}

/// NMI with the geometric-mean normalization, from joint probabilities.
pub fn nmi_direct(pred: &[usize], truth: &[usize]) -> f64 {
    let n = pred.len() as f64;
    let mut joint: HashMap<(usize, usize), f64> = HashMap::new();
    let mut pp: HashMap<usize, f64> = HashMap::new();
    let mut pt: HashMap<usize, f64> = HashMap::new();
    for (&a, &b) in pred.iter().zip(truth) {
        *joint.entry((a, b)).or_default() += 1.0 / n;
        *pp.entry(a).or_default() += 1.0 / n;
        *pt.entry(b).or_default() += 1.0 / n;
    }
    let h = |m: &HashMap<usize, f64>| -m.values().map(|p| p * p.ln()).sum::<f64>();
    let (hp, ht) = (h(&pp), h(&pt));
    if pp.len() == 1 || pt.len() == 1 {
        return if pp.len() == 1 && pt.len() == 1 { 1.0 } else { 0.0 };
    }
    let mi: f64 = joint
        .iter()
        .map(|(&(a, b), &p)| p * (p / (pp[&a] * pt[&b])).ln())
        .sum();
    mi / (hp * ht).sqrt()
}

pub fn purity_direct(pred: &[usize], truth: &[usize]) -> f64 {
    let mut per_cluster: HashMap<usize, HashMap<usize, usize>> = HashMap::new();
    for (&a, &b) in pred.iter().zip(truth) {
        *per_cluster.entry(a).or_default().entry(b).or_default() += 1;
    }
    let hits: usize = per_cluster
        .values()
        .map(|m| *m.values().max().unwrap())
        .sum();
    hits as f64 / pred.len() as f64
}

/// Random row-stochastic nonnegative graph; about a third of the entries are zero.
pub fn random_graph(rng: &mut impl Rng, n: usize, m: usize) -> BipartiteGraph {
    let mut w = DMatrix::from_fn(n, m, |_, _| {
        if rng.random::<f64>() < 0.33 {
            0.0
        } else {
            rng.random::<f64>()
        }
    });
    for i in 0..n {
        let mut row = w.row_mut(i);
        if row.sum() == 0.0 {
            row[rng.random_range(0..m)] = 1.0;
        }
        let s = row.sum();
        row /= s;
    }
    BipartiteGraph::new(w).expect("row-normalized")
}

/// Explicit violations of the state invariants, as readable strings.
pub fn state_violations(
    graph: &BipartiteGraph,
    embedding: &DMatrix<f64>,
    assignments: &[usize],
    k: usize,
) -> Vec<String> {
    let mut out = Vec::new();
    let b = graph.weights();
    for i in 0..b.nrows() {
        let s: f64 = b.row(i).sum();
        if (s - 1.0).abs() > 1e-8 {
            out.push(format!("row {i} sums to {s}"));
        }
        for j in 0..b.ncols() {
            if b[(i, j)] < -1e-12 {
                out.push(format!("b[{i},{j}] = {}", b[(i, j)]));
            }
        }
    }
    let gram = embedding.transpose() * embedding;
    let err = (gram - DMatrix::identity(k, k)).amax();
    if err > 1e-8 {
        out.push(format!("HᵀH deviates from I by {err}"));
    }
    if assignments.iter().any(|&c| c >= k) {
        out.push("assignment outside 0..k".into());
    }
    out
}

/// The normalized bipartite cut by direct summation over node pairs.
pub fn cut_by_loops(b: &DMatrix<f64>, samples: &[usize], anchors: &[usize], k: usize) -> f64 {
    let (n, m) = b.shape();
    let mut total = 0.0;
    for c in 0..k {
        let ns = samples.iter().filter(|&&s| s == c).count() as f64;
        let na = anchors.iter().filter(|&&a| a == c).count() as f64;
        for i in 0..n {
            for j in 0..m {
                let (si, aj) = (samples[i] == c, anchors[j] == c);
                let w = b[(i, j)];
                if si && !aj {
                    total += w / ns;
                }
                if !si && aj {
                    total += w / na;
                }
                if si && aj {
                    total += w * (1.0 / ns.sqrt() - 1.0 / na.sqrt()).powi(2);
                }
                if si {
                    total -= w / ns;
                }
                if aj {
                    total -= w / na;
                }
            }
        }
    }
    total
}

/// `Tr(ȲᵀLȲ) − Tr(ȲᵀDȲ)` on the augmented graph `P = [0 B; Bᵀ 0]`.
pub fn cut_by_laplacian(b: &DMatrix<f64>, samples: &[usize], anchors: &[usize], k: usize) -> f64 {
    let (n, m) = b.shape();
    let mut p = DMatrix::zeros(n + m, n + m);
    p.view_mut((0, n), (n, m)).copy_from(b);
    p.view_mut((n, 0), (m, n)).copy_from(&b.transpose());
    let d = DMatrix::from_diagonal(&p.column_sum());
    let l = &d - &p;
    let labels: Vec<usize> = samples.iter().chain(anchors).copied().collect();
    let mut y = DMatrix::zeros(n + m, k);
    for c in 0..k {
        let ns = samples.iter().filter(|&&s| s == c).count() as f64;
        let na = anchors.iter().filter(|&&a| a == c).count() as f64;
        for (r, &l) in labels.iter().enumerate() {
            if l == c {
                y[(r, c)] = if r < n { 1.0 / ns.sqrt() } else { 1.0 / na.sqrt() };
            }
        }
    }
    (y.transpose() * l * &y).trace() - (y.transpose() * d * &y).trace()
}

//! Simplex-constrained convex QP: `min bᵀĤb − fᵀb  s.t.  Σb = 1, b ≥ 0`.
//!
//! A primal active-set method runs first from the warm start (or the best
//! vertex). Rows of the anchor graph are sparse, so the faces it visits are
//! small and it usually certifies the optimum on its own. Otherwise an
//! augmented Lagrangian on the equality constraint takes over, with
//! nonnegativity kept by projection in an accelerated projected-gradient inner
//! loop, and each of its iterates is polished by the active-set method.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::linalg::{project_simplex, symmetric_spectral_norm};
use crate::types::AlmConfig;

const INNER_MAX_ITERS: usize = 200;

#[derive(Clone, Debug)]
pub struct QpSolution {
    pub solution: Vec<f64>,
    pub objective: f64,
    /// Scale-free KKT residual of `solution`; see [`SimplexQp::kkt_residual`].
    pub kkt_residual: f64,
    pub alm_iterations: usize,
    pub converged: bool,
}

/// One row problem. `hessian` must be symmetric positive semidefinite.
pub struct SimplexQp<'a> {
    hessian: &'a DMatrix<f64>,
    linear: &'a [f64],
    hessian_norm: f64,
    scale: f64,
}

impl<'a> SimplexQp<'a> {
    pub fn new(hessian: &'a DMatrix<f64>, linear: &'a [f64]) -> Self {
        Self::with_norm(hessian, linear, symmetric_spectral_norm(hessian))
    }

    /// Like [`SimplexQp::new`] with a precomputed `‖Ĥ‖₂`, for many rows sharing `Ĥ`.
    pub fn with_norm(hessian: &'a DMatrix<f64>, linear: &'a [f64], hessian_norm: f64) -> Self {
        assert_eq!(hessian.nrows(), linear.len());
        assert_eq!(hessian.ncols(), linear.len());
        let f_max = linear.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let scale = hessian_norm.max(f_max).max(f64::MIN_POSITIVE);
        SimplexQp {
            hessian,
            linear,
            hessian_norm,
            scale,
        }
    }

    pub fn dim(&self) -> usize {
        self.linear.len()
    }

    fn hessian_times(&self, b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let mut out = vec![0.0; n];
        for (j, &bj) in b.iter().enumerate() {
            if bj != 0.0 {
                let col = self.hessian.column(j);
                for i in 0..n {
                    out[i] += bj * col[i];
                }
            }
        }
        out
    }

    pub fn objective(&self, b: &[f64]) -> f64 {
        let hb = self.hessian_times(b);
        b.iter()
            .zip(&hb)
            .zip(self.linear)
            .map(|((bi, hbi), fi)| bi * hbi - fi * bi)
            .sum()
    }

    /// `2Ĥb − f`.
    pub fn gradient(&self, b: &[f64]) -> Vec<f64> {
        self.hessian_times(b)
            .into_iter()
            .zip(self.linear)
            .map(|(hb, f)| 2.0 * hb - f)
            .collect()
    }

    /// `max(‖b − P_Δ(b − ∇/s)‖_∞, |Σb − 1|, max(−b))`, where `s` scales the
    /// problem to unit size. Zero exactly at a KKT point.
    pub fn kkt_residual(&self, b: &[f64]) -> f64 {
        let g = self.gradient(b);
        let shifted: Vec<f64> = b.iter().zip(&g).map(|(x, gi)| x - gi / self.scale).collect();
        let projected = project_simplex(&shifted);
        let stationarity = b
            .iter()
            .zip(&projected)
            .fold(0.0f64, |m, (x, p)| m.max((x - p).abs()));
        let feasibility = (b.iter().sum::<f64>() - 1.0).abs();
        let negativity = b.iter().fold(0.0f64, |m, &x| m.max(-x));
        stationarity.max(feasibility).max(negativity)
    }

    pub fn solve(&self, warm_start: Option<&[f64]>, config: &AlmConfig) -> QpSolution {
        let b = match warm_start {
            Some(w) => feasible_start(w),
            None => self.best_vertex(),
        };
        let mut best = self.candidate(b.clone());
        best = self.better(best, self.refine(&b));
        if best.1 <= config.tol {
            return self.finish(best, 0, config);
        }
        self.augmented_lagrangian(b, best, config, true)
    }

    /// ALM on the scaled problem: minimize `(bᵀĤb − fᵀb)/s + μ(Σb − 1) + ρ/2 (Σb − 1)²`
    /// over `b ≥ 0`, updating `μ` and growing `ρ` between inner solves. With
    /// `polish`, each projected iterate is also handed to the active-set refinement.
    fn augmented_lagrangian(
        &self,
        mut b: Vec<f64>,
        mut best: (Vec<f64>, f64, f64),
        config: &AlmConfig,
        polish: bool,
    ) -> QpSolution {
        let n = self.dim();
        let g = self.gradient(&b);
        let support: Vec<usize> = (0..n).filter(|&j| b[j] > 0.0).collect();
        let mut mu = -support.iter().map(|&j| g[j]).sum::<f64>() / (support.len().max(1) as f64 * self.scale);
        let mut rho = config.rho_init;
        let curvature = 2.0 * self.hessian_norm / self.scale;
        for it in 1..=config.max_iters {
            let lipschitz = curvature + rho * n as f64;
            let inner_tol = (1e-3 * 0.3f64.powi(it as i32)).max(0.1 * config.tol);
            self.minimize_lagrangian(&mut b, mu, rho, lipschitz, inner_tol);
            let violation = b.iter().sum::<f64>() - 1.0;
            mu += rho * violation;
            rho *= config.rho_growth;

            let feasible = project_simplex(&b);
            best = self.better(best, Some(self.candidate(feasible.clone())));
            if polish {
                best = self.better(best, self.refine(&sparsify(&feasible)));
            }
            if best.1 <= config.tol {
                return self.finish(best, it, config);
            }
        }
        self.finish(best, config.max_iters, config)
    }

    fn best_vertex(&self) -> Vec<f64> {
        let n = self.dim();
        let j = (0..n)
            .min_by(|&a, &c| {
                let va = self.hessian[(a, a)] - self.linear[a];
                let vc = self.hessian[(c, c)] - self.linear[c];
                va.total_cmp(&vc)
            })
            .unwrap_or(0);
        let mut b = vec![0.0; n];
        if n > 0 {
            b[j] = 1.0;
        }
        b
    }

    fn finish(&self, best: (Vec<f64>, f64, f64), iterations: usize, config: &AlmConfig) -> QpSolution {
        let (solution, residual, objective) = best;
        QpSolution {
            solution,
            objective,
            kkt_residual: residual,
            alm_iterations: iterations,
            converged: residual <= config.tol,
        }
    }

    /// (point, residual, objective)
    fn candidate(&self, b: Vec<f64>) -> (Vec<f64>, f64, f64) {
        let r = self.kkt_residual(&b);
        let o = self.objective(&b);
        (b, r, o)
    }

    /// Prefer converged points, then lower objective.
    fn better(
        &self,
        a: (Vec<f64>, f64, f64),
        b: Option<(Vec<f64>, f64, f64)>,
    ) -> (Vec<f64>, f64, f64) {
        match b {
            None => a,
            Some(b) => {
                let tie = 1e-12 * (1.0 + a.2.abs());
                if b.2 < a.2 - tie || (b.2 <= a.2 + tie && b.1 < a.1) {
                    b
                } else {
                    a
                }
            }
        }
    }

    /// Accelerated projected gradient on the nonnegative orthant with adaptive restart.
    fn minimize_lagrangian(&self, b: &mut Vec<f64>, mu: f64, rho: f64, lipschitz: f64, tol: f64) {
        let n = self.dim();
        let step = 1.0 / lipschitz;
        let grad = |x: &[f64]| -> Vec<f64> {
            let excess = x.iter().sum::<f64>() - 1.0;
            let shift = mu + rho * excess;
            self.gradient(x)
                .into_iter()
                .map(|g| g / self.scale + shift)
                .collect()
        };
        let mut y = b.clone();
        let mut t = 1.0f64;
        for _ in 0..INNER_MAX_ITERS {
            let gy = grad(&y);
            let next: Vec<f64> = y
                .iter()
                .zip(&gy)
                .map(|(yi, gi)| (yi - step * gi).max(0.0))
                .collect();
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let momentum = (t - 1.0) / t_next;
            // restart when the step opposes the momentum direction
            let restart = gy
                .iter()
                .zip(next.iter().zip(b.iter()))
                .map(|(g, (nx, bx))| g * (nx - bx))
                .sum::<f64>()
                > 0.0;
            let mut new_y = next.clone();
            if restart {
                t = 1.0;
            } else {
                for i in 0..n {
                    new_y[i] = (next[i] + momentum * (next[i] - b[i])).max(0.0);
                }
                t = t_next;
            }
            *b = next;
            y = new_y;

            let gb = grad(b);
            let pg = b
                .iter()
                .zip(&gb)
                .fold(0.0f64, |m, (x, g)| m.max((x - (x - g).max(0.0)).abs()));
            if pg <= tol {
                break;
            }
        }
    }

    /// Primal active-set iterations from a feasible point. On each face the
    /// step is taken in an orthonormal basis of `{p : Σp = 0}`. When the
    /// reduced Hessian is singular and the gradient has a component in its
    /// null space, the step follows that zero-curvature ray to the boundary.
    fn refine(&self, start: &[f64]) -> Option<(Vec<f64>, f64, f64)> {
        let n = self.dim();
        let mut b = start.to_vec();
        let mut free: Vec<bool> = b.iter().map(|&x| x > 0.0).collect();
        if !free.iter().any(|&f| f) {
            return None;
        }
        let mut obj = self.objective(&b);
        for _ in 0..(3 * n + 10) {
            let idx: Vec<usize> = (0..n).filter(|&j| free[j]).collect();
            let g: Vec<f64> = self.gradient(&b).iter().map(|v| v / self.scale).collect();
            let (step, ray) = self.face_step(&idx, &g);
            let step_norm = step.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if step_norm <= 1e-14 {
                // stationary on the face: check multipliers of the fixed variables
                let nu = -idx.iter().map(|&i| g[i]).sum::<f64>() / idx.len() as f64;
                let mut worst = (-1e-13, None);
                for j in 0..n {
                    if !free[j] && g[j] + nu < worst.0 {
                        worst = (g[j] + nu, Some(j));
                    }
                }
                match worst.1 {
                    Some(j) => {
                        free[j] = true;
                        continue;
                    }
                    None => break,
                }
            }
            let mut t = if ray { f64::INFINITY } else { 1.0 };
            let mut blocking = None;
            for (a, &i) in idx.iter().enumerate() {
                if step[a] < 0.0 {
                    let limit = -b[i] / step[a];
                    if limit < t {
                        t = limit;
                        blocking = Some(i);
                    }
                }
            }
            if !t.is_finite() {
                break;
            }
            let mut trial = b.clone();
            for (a, &i) in idx.iter().enumerate() {
                trial[i] = b[i] + t * step[a];
                if trial[i] <= 0.0 {
                    trial[i] = 0.0;
                    free[i] = false;
                }
            }
            if let Some(i) = blocking {
                trial[i] = 0.0;
                free[i] = false;
            }
            let total: f64 = trial.iter().sum();
            trial.iter_mut().for_each(|x| *x /= total);
            let trial_obj = self.objective(&trial);
            if trial_obj > obj + 1e-14 * (1.0 + obj.abs()) {
                break;
            }
            b = trial;
            obj = trial_obj;
        }
        Some(self.candidate(b))
    }

    /// Minimizer of the scaled quadratic model restricted to `idx` and
    /// `Σp = 0`, or a zero-curvature descent ray (`true`) if the model is
    /// unbounded below on the face.
    fn face_step(&self, idx: &[usize], g: &[f64]) -> (Vec<f64>, bool) {
        let w = idx.len();
        if w < 2 {
            return (vec![0.0; w], false);
        }
        // Householder reflector sending 1/√w to −e₁; its last w−1 columns span Σp = 0
        let mut v = DVector::from_element(w, 1.0 / (w as f64).sqrt());
        v[0] += 1.0;
        let vv = v.dot(&v);
        let reflector = DMatrix::<f64>::identity(w, w) - (&v * v.transpose()) * (2.0 / vv);
        let z = reflector.columns(1, w - 1).into_owned();
        let q = DMatrix::from_fn(w, w, |a, c| 2.0 * self.hessian[(idx[a], idx[c])] / self.scale);
        let reduced = z.transpose() * &q * &z;
        let gw = DVector::from_iterator(w, idx.iter().map(|&i| g[i]));
        let r = z.transpose() * gw;
        let eig = SymmetricEigen::new(reduced);
        let top = eig.eigenvalues.iter().fold(0.0f64, |m, &l| m.max(l));
        let cutoff = 1e-10 * top.max(1.0);
        let mut newton = DVector::zeros(w - 1);
        let mut null = DVector::zeros(w - 1);
        for (i, &l) in eig.eigenvalues.iter().enumerate() {
            let u = eig.eigenvectors.column(i);
            let c = u.dot(&r);
            if l > cutoff {
                newton -= u * (c / l);
            } else {
                null -= u * c;
            }
        }
        let ray = null.amax() > 1e-12;
        let reduced_step = if ray { null } else { newton };
        ((z * reduced_step).iter().copied().collect(), ray)
    }
}

/// A feasible point near `w`. Nearly feasible inputs are only renormalized,
/// since projecting them would lift exact zeros by rounding residue.
fn feasible_start(w: &[f64]) -> Vec<f64> {
    let total: f64 = w.iter().map(|&x| x.max(0.0)).sum();
    if total > 0.0 && (total - 1.0).abs() <= 1e-9 && w.iter().all(|&x| x >= -1e-12) {
        w.iter().map(|&x| x.max(0.0) / total).collect()
    } else {
        project_simplex(w)
    }
}

/// Drop entries below `1e-9 · max` and renormalize, so active-set refinement
/// starts on a small face.
fn sparsify(b: &[f64]) -> Vec<f64> {
    let top = b.iter().fold(0.0f64, |m, &x| m.max(x));
    let mut out: Vec<f64> = b.iter().map(|&x| if x > 1e-9 * top { x } else { 0.0 }).collect();
    let total: f64 = out.iter().sum();
    if total > 0.0 {
        out.iter_mut().for_each(|x| *x /= total);
    }
    out
}

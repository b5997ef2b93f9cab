//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, SymmetricEigen, SVD};

/// Relative cutoff below which singular values count as zero in pseudo-inverses.
pub const PINV_RCOND: f64 = 1e-10;

/// Euclidean projection onto the probability simplex `{b ≥ 0, Σb = 1}`.
pub fn project_simplex(v: &[f64]) -> Vec<f64> {
    let mut sorted = v.to_vec();
    sorted.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cumsum += s;
        let t = (cumsum - 1.0) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    v.iter().map(|&x| (x - theta).max(0.0)).collect()
}

/// Moore-Penrose pseudo-inverse of a symmetric matrix via its eigendecomposition.
pub fn symmetric_pinv(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    if n == 0 {
        return m.clone();
    }
    let eig = SymmetricEigen::new(m.clone());
    let largest = eig.eigenvalues.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let cutoff = PINV_RCOND * largest;
    let mut inv = DMatrix::zeros(n, n);
    for (idx, &lambda) in eig.eigenvalues.iter().enumerate() {
        if lambda.abs() <= cutoff || lambda == 0.0 {
            continue;
        }
        let v = eig.eigenvectors.column(idx);
        inv.ger(1.0 / lambda, &v, &v, 1.0);
    }
    inv
}

/// Largest eigenvalue magnitude of a symmetric matrix.
pub fn symmetric_spectral_norm(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .fold(0.0f64, |a, v| a.max(v.abs()))
}

/// Solve `m x = rhs` for symmetric (possibly singular, indefinite) `m`,
/// returning the minimum-norm least-squares solution.
pub fn symmetric_lstsq(m: &DMatrix<f64>, rhs: &[f64]) -> Vec<f64> {
    let pinv = symmetric_pinv(m);
    let x = pinv * nalgebra::DVector::from_column_slice(rhs);
    x.iter().copied().collect()
}

/// Column-orthonormal maximizer of `Tr(HᵀG)` for a tall `G` (`M × k`, `M ≥ k`).
///
/// `H = UVᵀ` from the compact SVD `G = UΣVᵀ`. When `G` is rank deficient the
/// columns of `U` paired with zero singular values are re-derived by
/// Gram-Schmidt against the standard basis so that `H` stays orthonormal.
pub fn polar_factor(g: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>) {
    let (m, k) = g.shape();
    assert!(m >= k, "polar_factor needs a tall matrix, got {m}×{k}");
    let svd = SVD::new(g.clone(), true, true);
    let mut u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    let sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    let largest = sigma.iter().fold(0.0f64, |a, &s| a.max(s));
    let cutoff = 1e-12 * largest.max(f64::MIN_POSITIVE);
    let trusted: Vec<bool> = sigma.iter().map(|&s| s > cutoff).collect();
    if trusted.iter().any(|t| !t) || !columns_orthonormal(&u, 1e-12) {
        u = complete_orthonormal(&u, &trusted);
    }
    (u * v_t, sigma)
}

fn columns_orthonormal(u: &DMatrix<f64>, tol: f64) -> bool {
    let gram = u.transpose() * u;
    gram.iter().enumerate().all(|(idx, &v)| {
        let (i, j) = (idx % gram.nrows(), idx / gram.nrows());
        let target = if i == j { 1.0 } else { 0.0 };
        (v - target).abs() <= tol
    })
}

/// Orthonormalize the trusted columns of `u` and fill the rest, in column
/// order, from the standard basis vectors that survive Gram-Schmidt.
fn complete_orthonormal(u: &DMatrix<f64>, trusted: &[bool]) -> DMatrix<f64> {
    let (m, k) = u.shape();
    let mut out: DMatrix<f64> = DMatrix::zeros(m, k);
    let mut basis: Vec<nalgebra::DVector<f64>> = Vec::with_capacity(k);
    let orthogonalize = |mut v: nalgebra::DVector<f64>, basis: &[nalgebra::DVector<f64>]| {
        for _ in 0..2 {
            for b in basis {
                let c = b.dot(&v);
                v.axpy(-c, b, 1.0);
            }
        }
        let n = v.norm();
        (n > 1e-8).then(|| v / n)
    };
    for (j, &t) in trusted.iter().enumerate() {
        if t {
            if let Some(v) = orthogonalize(u.column(j).into_owned(), &basis) {
                basis.push(v);
                continue;
            }
        }
        basis.push(nalgebra::DVector::zeros(0));
    }
    let mut next_unit = 0;
    for j in 0..k {
        if basis[j].len() == m {
            continue;
        }
        let filled: Vec<_> = basis.iter().filter(|b| b.len() == m).cloned().collect();
        loop {
            assert!(next_unit < m, "cannot complete an orthonormal basis");
            let mut e = nalgebra::DVector::zeros(m);
            e[next_unit] = 1.0;
            next_unit += 1;
            if let Some(v) = orthogonalize(e, &filled) {
                basis[j] = v;
                break;
            }
        }
    }
    for (j, b) in basis.iter().enumerate() {
        out.set_column(j, b);
    }
    out
}

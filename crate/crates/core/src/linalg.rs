//! Small dense helpers shared by the solvers.

use nalgebra::{DMatrix, DVector};

/// Minimum-norm solution of `min ||a z - b||_2`.
pub(crate) fn min_norm_lstsq(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    if a.ncols() == 0 {
        return DVector::zeros(0);
    }
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let cutoff = f64::EPSILON * a.nrows().max(a.ncols()) as f64 * smax;
    svd.solve(b, cutoff)
        .expect("SVD computed with both singular vector sets")
}

/// Solves `g z = rhs` for symmetric positive definite `g`, `None` otherwise.
pub(crate) fn spd_solve(g: DMatrix<f64>, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let chol = g.cholesky()?;
    let z = chol.solve(rhs);
    z.iter().all(|v| v.is_finite()).then_some(z)
}

/// Largest eigenvalue of `X^T X / n`, computed on the smaller Gram matrix.
pub(crate) fn gram_spectral_norm(x: &DMatrix<f64>) -> f64 {
    let n = x.nrows() as f64;
    let gram = if x.nrows() <= x.ncols() {
        x * x.transpose()
    } else {
        x.tr_mul(x)
    };
    gram.symmetric_eigenvalues().max().max(0.0) / n
}

/// Writes `sub` into a length-`p` vector at positions `idx`.
pub(crate) fn embed(p: usize, idx: &[usize], sub: &DVector<f64>) -> DVector<f64> {
    let mut out = DVector::zeros(p);
    for (k, &j) in idx.iter().enumerate() {
        out[j] = sub[k];
    }
    out
}

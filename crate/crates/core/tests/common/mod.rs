#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use refit_lab::{lasso_cd, Dataset, LassoFit, SolverOptions};

pub fn lasso(d: &Dataset, lambda: f64) -> LassoFit {
    lasso_cd(d, lambda, &SolverOptions::default()).unwrap()
}

/// Denoising model as a general dataset: `X = I_p`, so the general objective
/// is the orthogonal one divided by `n = p`.
pub fn identity_dataset(y: &DVector<f64>) -> Dataset {
    let p = y.len();
    Dataset::unnormalized(DMatrix::identity(p, p), y.clone()).unwrap()
}

pub fn vec(xs: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(xs)
}

/// `min (1/2n)||y - A b||^2 s.t. signs * b >= 0` by enumerating which
/// coordinates are free; each free set is solved through its normal
/// equations and kept only if it is feasible and dual feasible.
pub fn sls_enumeration_oracle(a: &DMatrix<f64>, y: &DVector<f64>, signs: &[f64]) -> DVector<f64> {
    let m = a.ncols();
    let n = a.nrows() as f64;
    let mut flipped = a.clone();
    for j in 0..m {
        flipped.column_mut(j).scale_mut(signs[j]);
    }
    let mut best: Option<(f64, DVector<f64>)> = None;
    for mask in 0u32..(1 << m) {
        let free: Vec<usize> = (0..m).filter(|j| mask & (1 << j) != 0).collect();
        let mut x = DVector::zeros(m);
        if !free.is_empty() {
            let af = flipped.select_columns(&free);
            let Some(z) = (af.transpose() * &af).lu().solve(&(af.transpose() * y)) else {
                continue;
            };
            if z.iter().any(|&v| v < 0.0) {
                continue;
            }
            for (k, &j) in free.iter().enumerate() {
                x[j] = z[k];
            }
        }
        let r = y - &flipped * &x;
        let w = flipped.transpose() * &r / n;
        if (0..m).any(|j| !free.contains(&j) && w[j] > 1e-10) {
            continue;
        }
        let obj = 0.5 * r.norm_squared() / n;
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, x));
        }
    }
    let x = best.expect("a KKT point exists").1;
    DVector::from_iterator(m, (0..m).map(|j| signs[j] * x[j]))
}

//! Sign-constrained least squares by an active-set (Lawson–Hanson) iteration.
//!
//! The columns are flipped by the prescribed signs so the problem becomes a
//! nonnegative least squares, solved with minimum-norm subproblems, and the
//! solution is flipped back.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::min_norm_lstsq;

/// Solution of `min (1/2n)||y - X_E b||^2  s.t.  signs ⊙ b >= 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedLsSolution {
    pub beta: DVector<f64>,
    /// KKT multipliers `mu >= 0` with `X_E^T (y - X_E b)/n + signs ⊙ mu = 0`.
    pub multipliers: DVector<f64>,
    /// Largest violation of stationarity/dual feasibility.
    pub stationarity: f64,
}

pub fn sign_constrained_ls(
    x_e: &DMatrix<f64>,
    y: &DVector<f64>,
    signs: &[f64],
) -> Result<SignedLsSolution> {
    let m = x_e.ncols();
    if m == 0 {
        return Err(Error::Dimension("sign-constrained LS needs at least one column".into()));
    }
    if x_e.nrows() != y.len() || signs.len() != m {
        return Err(Error::Dimension(format!(
            "design {}x{}, response {}, signs {}",
            x_e.nrows(),
            m,
            y.len(),
            signs.len()
        )));
    }
    if let Some(s) = signs.iter().find(|s| **s != 1.0 && **s != -1.0) {
        return Err(Error::InvalidParameter(format!("signs must be +1 or -1, got {s}")));
    }

    let n = x_e.nrows() as f64;
    let mut a = x_e.clone();
    for (j, mut col) in a.column_iter_mut().enumerate() {
        col *= signs[j];
    }
    let grad = |x: &DVector<f64>| a.tr_mul(&(y - &a * x)) / n;

    let scale = (a.tr_mul(y) / n).amax().max(f64::MIN_POSITIVE);
    let dual_tol = 1e-13 * scale.max(1.0);

    let mut x = DVector::zeros(m);
    let mut passive = vec![false; m];
    let mut excluded = vec![false; m];
    let mut w = grad(&x);
    let mut outer = 0;

    loop {
        let candidate = (0..m)
            .filter(|&j| !passive[j] && !excluded[j] && w[j] > dual_tol)
            .max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(entering) = candidate else { break };
        outer += 1;
        if outer > 3 * m {
            let residual = violation(&x, &w);
            return Err(Error::NoConvergence {
                iters: outer,
                residual,
            });
        }
        passive[entering] = true;

        let mut first = true;
        loop {
            let idx: Vec<usize> = (0..m).filter(|&j| passive[j]).collect();
            let z = min_norm_lstsq(&a.select_columns(&idx), y);
            if z.iter().all(|&v| v > 0.0) {
                for (k, &j) in idx.iter().enumerate() {
                    x[j] = z[k];
                }
                break;
            }
            let pos_entering = idx.iter().position(|&j| j == entering);
            if first && pos_entering.is_some_and(|k| z[k] <= 0.0) {
                // round-off made the entering column useless; skip it this round
                passive[entering] = false;
                excluded[entering] = true;
                break;
            }
            first = false;
            let mut alpha = 1.0f64;
            for (k, &j) in idx.iter().enumerate() {
                if z[k] <= 0.0 {
                    let denom = x[j] - z[k];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            for (k, &j) in idx.iter().enumerate() {
                x[j] += alpha * (z[k] - x[j]);
            }
            for &j in &idx {
                if x[j] <= 1e-15 * x.amax().max(1.0) {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
            if !passive.iter().any(|&b| b) {
                break;
            }
        }
        if !excluded[entering] {
            excluded.iter_mut().for_each(|e| *e = false);
        }
        w = grad(&x);
    }

    let beta = DVector::from_iterator(m, (0..m).map(|j| signs[j] * x[j]));
    let multipliers = -&w;
    let stationarity = violation(&x, &w);
    Ok(SignedLsSolution {
        beta,
        multipliers,
        stationarity,
    })
}

/// KKT violation of the flipped nonnegative problem.
fn violation(x: &DVector<f64>, w: &DVector<f64>) -> f64 {
    x.iter()
        .zip(w.iter())
        .map(|(&xj, &wj)| if xj > 0.0 { wj.abs() } else { wj.max(0.0) })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn column(v: &[f64]) -> DMatrix<f64> {
        DMatrix::from_column_slice(v.len(), 1, v)
    }

    #[test]
    fn one_column_unconstrained_optimum() {
        let r2 = 2f64.sqrt();
        let x = column(&[r2, 0.0]);
        let y = DVector::from_vec(vec![2.0 * r2, 0.7]);
        let sol = sign_constrained_ls(&x, &y, &[1.0]).unwrap();
        approx::assert_abs_diff_eq!(sol.beta[0], 2.0, epsilon = 1e-12);
        approx::assert_abs_diff_eq!(sol.multipliers[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn one_column_binding_constraint() {
        let r2 = 2f64.sqrt();
        let x = column(&[r2, 0.0]);
        let y = DVector::from_vec(vec![2.0 * r2, 0.7]);
        let sol = sign_constrained_ls(&x, &y, &[-1.0]).unwrap();
        assert_eq!(sol.beta[0], 0.0);
        assert!(sol.multipliers[0] > 0.0);
        // mu = X^T y / n with the constraint binding at zero
        approx::assert_abs_diff_eq!(sol.multipliers[0], 2.0, epsilon = 1e-12);
    }

    #[test]
    fn input_validation() {
        let x = column(&[1.0, 1.0]);
        let y = DVector::from_vec(vec![1.0, 1.0]);
        assert!(sign_constrained_ls(&x, &y, &[0.5]).is_err());
        assert!(sign_constrained_ls(&x, &y, &[1.0, 1.0]).is_err());
        assert!(sign_constrained_ls(&DMatrix::zeros(2, 0), &y, &[]).is_err());
    }

    #[test]
    fn rank_deficient_design() {
        // two identical columns, both allowed positive
        let x = DMatrix::from_row_slice(3, 2, &[1.0, 1.0, 2.0, 2.0, -1.0, -1.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, -1.0]);
        let sol = sign_constrained_ls(&x, &y, &[1.0, 1.0]).unwrap();
        approx::assert_abs_diff_eq!(sol.beta.sum(), 1.0, epsilon = 1e-12);
        assert!(sol.beta.iter().all(|&b| b >= 0.0));
        assert!(sol.stationarity <= 1e-10);
    }
}

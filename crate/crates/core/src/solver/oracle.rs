//! Exhaustive sign-pattern search for the Lasso on small problems.
//!
//! For each pattern `sigma` in `{-1, 0, +1}^p` the stationarity system on the
//! active set `A = {j : sigma_j != 0}`
//!
//! ```text
//! X_A^T X_A beta_A / n = X_A^T y / n - lambda sigma_A
//! ```
//!
//! is solved, and the candidate is kept when its signs reproduce `sigma` and the
//! inactive correlations stay within `lambda`. The minimal-objective candidate
//! wins; ties go to the smaller l1 norm, then to the lexicographically first
//! pattern with `-1 < 0 < +1`.

use nalgebra::DVector;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::spd_solve;
use crate::solver::cd::check_lambda;

pub const ORACLE_MAX_P: usize = 6;

pub fn lasso_bruteforce_oracle(d: &Dataset, lambda: f64) -> Result<DVector<f64>> {
    check_lambda(lambda)?;
    let p = d.p();
    if p > ORACLE_MAX_P {
        return Err(Error::TooLarge(p));
    }
    let n = d.n() as f64;
    let xty = d.x().tr_mul(d.y()) / n;
    let slack = 1e-9 * lambda.max(1e-300) + 1e-12;

    let mut best: Option<(f64, f64, DVector<f64>)> = None;
    let mut pattern = vec![-1i8; p];
    loop {
        if let Some(beta) = certify_pattern(d, &xty, lambda, &pattern, slack) {
            let obj = d.lasso_objective(&beta, lambda);
            let l1 = beta.lp_norm(1);
            let better = match &best {
                None => true,
                Some((bo, bl, _)) => {
                    let tie = 1e-13 * bo.abs().max(1.0);
                    obj < bo - tie || ((obj - bo).abs() <= tie && l1 < bl - 1e-13)
                }
            };
            if better {
                best = Some((obj, l1, beta));
            }
        }
        if !next_pattern(&mut pattern) {
            break;
        }
    }
    best.map(|(_, _, b)| b).ok_or(Error::NoKktPoint)
}

/// Odometer increment over `{-1, 0, 1}^p` in lexicographic order.
fn next_pattern(pattern: &mut [i8]) -> bool {
    for v in pattern.iter_mut().rev() {
        if *v < 1 {
            *v += 1;
            return true;
        }
        *v = -1;
    }
    false
}

fn certify_pattern(
    d: &Dataset,
    xty: &DVector<f64>,
    lambda: f64,
    pattern: &[i8],
    slack: f64,
) -> Option<DVector<f64>> {
    let p = d.p();
    let n = d.n() as f64;
    let active: Vec<usize> = (0..p).filter(|&j| pattern[j] != 0).collect();
    let mut beta = DVector::zeros(p);
    if !active.is_empty() {
        let xa = d.x().select_columns(&active);
        let g = xa.tr_mul(&xa) / n;
        let rhs = DVector::from_iterator(
            active.len(),
            active.iter().map(|&j| xty[j] - lambda * pattern[j] as f64),
        );
        let z = spd_solve(g, &rhs)?;
        for (k, &j) in active.iter().enumerate() {
            if z[k] * pattern[j] as f64 <= 0.0 {
                return None;
            }
            beta[j] = z[k];
        }
    }
    let corr = d.correlation(&d.residual(&beta));
    let inactive_ok = (0..p)
        .filter(|&j| pattern[j] == 0)
        .all(|j| corr[j].abs() <= lambda + slack);
    inactive_ok.then_some(beta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::checks::random_dataset;
    use crate::dataset::lambda_max;
    use nalgebra::DMatrix;

    #[test]
    fn single_column_closed_form() {
        let d = Dataset::new(
            DMatrix::from_element(2, 1, 1.0),
            DVector::from_vec(vec![1.0, 1.0]),
        )
        .unwrap();
        let b = lasso_bruteforce_oracle(&d, 0.5).unwrap();
        approx::assert_abs_diff_eq!(b[0], 0.5, epsilon = 1e-14);
    }

    #[test]
    fn zero_above_lambda_max() {
        let d = random_dataset(0, 8, 4, 0.3);
        let b = lasso_bruteforce_oracle(&d, lambda_max(&d) * 1.01).unwrap();
        assert!(b.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn too_large() {
        let d = random_dataset(0, 10, 7, 0.0);
        assert!(matches!(
            lasso_bruteforce_oracle(&d, 0.1),
            Err(Error::TooLarge(7))
        ));
    }

    #[test]
    fn pattern_enumeration_is_complete() {
        let mut pat = vec![-1i8; 3];
        let mut count = 1;
        while next_pattern(&mut pat) {
            count += 1;
        }
        assert_eq!(count, 27);
        assert_eq!(pat, vec![-1, -1, -1]);
    }
}

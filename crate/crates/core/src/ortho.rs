//! Closed forms for the denoising model `y = beta* + eps` (identity design),
//! where the Lasso, the Bregman refit and Bregman iterations reduce to
//! thresholding operators.
//!
//! These use the unnormalized objective `(1/2)||y - beta||^2`. To compare with
//! the general solvers, feed them `X = I_p` through [`Dataset::unnormalized`]
//! with every penalty divided by `n = p`.
//!
//! [`Dataset::unnormalized`]: crate::dataset::Dataset::unnormalized

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::subgradient::sign;

/// Parameters of the firm-thresholding (MCP) operator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSpec {
    mu: f64,
    gamma: f64,
}

impl ThresholdSpec {
    pub fn new(mu: f64, gamma: f64) -> Result<Self> {
        if !(mu > 0.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu must be positive, got {mu}")));
        }
        if !(gamma > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "gamma must exceed 1, got {gamma}"
            )));
        }
        Ok(Self { mu, gamma })
    }

    /// The MCP parameters of the orthogonal Bregman refit:
    /// `mu = (1/lambda1 + 1/lambda2)^-1`, `gamma = 1 + lambda1/lambda2`.
    pub fn bregman(lambda1: f64, lambda2: f64) -> Result<Self> {
        Self::new(1.0 / (1.0 / lambda1 + 1.0 / lambda2), 1.0 + lambda1 / lambda2)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
}

pub fn soft(y: f64, lam: f64) -> f64 {
    sign(y) * (y.abs() - lam).max(0.0)
}

/// Keeps `y` when `|y| > lam`; ties go to zero.
pub fn hard(y: f64, lam: f64) -> f64 {
    if y.abs() > lam {
        y
    } else {
        0.0
    }
}

pub fn firm(y: f64, spec: &ThresholdSpec) -> f64 {
    if y.abs() <= spec.mu * spec.gamma {
        spec.gamma / (spec.gamma - 1.0) * soft(y, spec.mu)
    } else {
        y
    }
}

pub fn soft_threshold(y: &DVector<f64>, lam: f64) -> DVector<f64> {
    y.map(|v| soft(v, lam))
}

pub fn hard_threshold(y: &DVector<f64>, lam: f64) -> DVector<f64> {
    y.map(|v| hard(v, lam))
}

pub fn firm_threshold(y: &DVector<f64>, spec: &ThresholdSpec) -> DVector<f64> {
    y.map(|v| firm(v, spec))
}

/// Lasso subgradient in the denoising model, `(y - ST(y, lambda1)) / lambda1`.
pub fn ortho_subgradient(y: &DVector<f64>, lambda1: f64) -> DVector<f64> {
    y.map(|v| {
        if v.abs() >= lambda1 {
            sign(v)
        } else {
            v / lambda1
        }
    })
}

/// Bregman refit in the denoising model.
///
/// Evaluated twice, as `ST(y + lambda2 rho, lambda2)` and as the firm
/// threshold with the parameters of [`ThresholdSpec::bregman`]; a disagreement
/// beyond round-off is reported as [`Error::InternalMismatch`].
pub fn ortho_bregman(y: &DVector<f64>, lambda1: f64, lambda2: f64) -> Result<DVector<f64>> {
    for (name, l) in [("lambda1", lambda1), ("lambda2", lambda2)] {
        if !(l > 0.0 && l.is_finite()) {
            return Err(Error::InvalidParameter(format!("{name} must be positive, got {l}")));
        }
    }
    let spec = ThresholdSpec::bregman(lambda1, lambda2)?;
    let rho = ortho_subgradient(y, lambda1);
    let mut out = DVector::zeros(y.len());
    for j in 0..y.len() {
        // ST(y + l2 rho, l2), with sign(y + l2 rho) = sign(y) folded in so the
        // |rho| = 1 branch returns y exactly
        let shifted = sign(y[j]) * (y[j].abs() - lambda2 * (1.0 - rho[j].abs())).max(0.0);
        let mcp = firm(y[j], &spec);
        let slack = 1e-12 * (1.0 + y[j].abs()) * (1.0 + lambda2 / lambda1);
        if (shifted - mcp).abs() > slack {
            return Err(Error::InternalMismatch {
                index: j,
                left: shifted,
                right: mcp,
            });
        }
        out[j] = mcp;
    }
    Ok(out)
}

/// Iterate `k + 1` of Bregman iterations at penalty `lambda` in the denoising
/// model: `MCP(y, lambda/(k+1), (k+1)/k)`, i.e. `(k+1) ST(y, lambda/(k+1))`
/// when `|y_j| <= lambda/k` and `y_j` otherwise.
pub fn ortho_bregman_iterations(y: &DVector<f64>, lambda: f64, k: usize) -> Result<DVector<f64>> {
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let kf = k as f64;
    Ok(y.map(|v| {
        if v.abs() <= lambda / kf {
            (kf + 1.0) * soft(v, lambda / (kf + 1.0))
        } else {
            v
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(xs: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(xs)
    }

    #[test]
    fn soft_examples() {
        assert_eq!(soft(3.0, 1.0), 2.0);
        assert_eq!(soft(-0.5, 1.0), 0.0);
        let y = v(&[1.5, -0.2, 0.0]);
        assert_eq!(soft_threshold(&y, 0.0), y);
    }

    #[test]
    fn hard_examples() {
        assert_eq!(hard(3.0, 1.0), 3.0);
        assert_eq!(hard(0.5, 1.0), 0.0);
        assert_eq!(hard(1.0, 1.0), 0.0);
        assert_eq!(hard(-1.0, 1.0), 0.0);
    }

    #[test]
    fn firm_examples() {
        let s = ThresholdSpec::new(1.0, 2.0).unwrap();
        assert_eq!(firm(1.5, &s), 1.0);
        assert_eq!(firm(3.0, &s), 3.0);
        let s = ThresholdSpec::new(0.5, 2.0).unwrap();
        approx::assert_abs_diff_eq!(firm(0.8, &s), 0.6, epsilon = 1e-15);
    }

    #[test]
    fn spec_validation() {
        assert!(ThresholdSpec::new(1.0, 1.0).is_err());
        assert!(ThresholdSpec::new(0.0, 2.0).is_err());
        assert!(ThresholdSpec::new(1.0, 1.0001).is_ok());
    }

    #[test]
    fn subgradient_examples() {
        let rho = ortho_subgradient(&v(&[1.5, 0.8, 0.0, -2.0]), 1.0);
        assert_eq!(rho, v(&[1.0, 0.8, 0.0, -1.0]));
    }

    #[test]
    fn bregman_examples() {
        let b = ortho_bregman(&v(&[0.8, 1.5]), 1.0, 1.0).unwrap();
        approx::assert_abs_diff_eq!(b[0], 0.6, epsilon = 1e-15);
        assert_eq!(b[1], 1.5);
    }

    #[test]
    fn bregman_extreme_limits() {
        let y = v(&[-2.3, -1.2, -0.7, -0.1, 0.0, 0.4, 0.95, 1.3, 4.0]);
        let lambda1 = 1.0;
        let hard_limit = ortho_bregman(&y, lambda1, 1e6).unwrap();
        assert!((hard_limit - hard_threshold(&y, lambda1)).amax() <= 1e-5);
        let soft_limit = ortho_bregman(&y, 1e6, 0.6).unwrap();
        assert!((soft_limit - soft_threshold(&y, 0.6)).amax() <= 1e-5);
    }

    #[test]
    fn bregman_iteration_examples() {
        let b = ortho_bregman_iterations(&v(&[0.8]), 1.0, 1).unwrap();
        approx::assert_abs_diff_eq!(b[0], 0.6, epsilon = 1e-15);
        let b = ortho_bregman_iterations(&v(&[0.6, -0.55]), 1.0, 2).unwrap();
        assert_eq!(b, v(&[0.6, -0.55]));
        let b = ortho_bregman_iterations(&v(&[0.0, 0.0]), 1.0, 3).unwrap();
        assert_eq!(b, v(&[0.0, 0.0]));
        assert!(ortho_bregman_iterations(&v(&[1.0]), 1.0, 0).is_err());
    }

    proptest! {
        #[test]
        fn subgradient_bounded_and_sign_aligned(
            y in proptest::collection::vec(-5.0f64..5.0, 1..20),
            l1 in 0.01f64..3.0,
        ) {
            let y = v(&y);
            let rho = ortho_subgradient(&y, l1);
            prop_assert!(rho.amax() <= 1.0);
            for j in 0..y.len() {
                prop_assert_eq!(sign(rho[j]), sign(y[j]));
            }
        }

        #[test]
        fn bregman_forms_agree(
            y in proptest::collection::vec(-5.0f64..5.0, 1..20),
            l1 in 0.01f64..3.0,
            l2 in 0.01f64..100.0,
        ) {
            prop_assert!(ortho_bregman(&v(&y), l1, l2).is_ok());
        }

        #[test]
        fn firm_shrinkage_sandwich(
            y in -5.0f64..5.0,
            mu in 0.05f64..2.0,
            gamma in 1.05f64..6.0,
        ) {
            let s = ThresholdSpec::new(mu, gamma).unwrap();
            if y.abs() <= mu * gamma {
                let out = firm(y, &s).abs();
                prop_assert!(out >= soft(y, mu * gamma).abs() - 1e-12);
                prop_assert!(out <= y.abs() + 1e-12);
            }
        }
    }
}

//! General solvers on `X = I_p` (penalties divided by `n = p`) against the
//! denoising closed forms.

mod common;

use common::{identity_dataset, lasso, vec};
use nalgebra::DVector;
use proptest::prelude::*;
use refit_lab::ortho::*;
use refit_lab::{bregman_iterations, bregman_lasso};

fn signal(max_len: usize) -> impl proptest::strategy::Strategy<Value = DVector<f64>> {
    proptest::collection::vec(-4.0f64..4.0, 1..max_len).prop_map(DVector::from_vec)
}

/// Keeps entries away from the hard-threshold tie `|y| = lambda`.
fn off_ties(y: &DVector<f64>, lambda: f64) -> bool {
    y.iter().all(|v| (v.abs() - lambda).abs() > 1e-3)
}

#[test]
fn worked_examples() {
    let y = vec(&[0.8]);
    approx::assert_abs_diff_eq!(ortho_bregman(&y, 1.0, 1.0).unwrap()[0], 0.6, epsilon = 1e-15);
    approx::assert_abs_diff_eq!(ortho_bregman_iterations(&y, 1.0, 1).unwrap()[0], 0.6, epsilon = 1e-15);
    let d = identity_dataset(&y);
    let fit = lasso(&d, 1.0);
    approx::assert_abs_diff_eq!(bregman_lasso(&d, &fit, 1.0).unwrap().beta[0], 0.6, epsilon = 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn lasso_is_soft_thresholding(y in signal(30), lambda in 0.05f64..3.0) {
        let d = identity_dataset(&y);
        let fit = lasso(&d, lambda / d.n() as f64);
        prop_assert!((&fit.beta - soft_threshold(&y, lambda)).amax() <= 1e-8);
    }

    #[test]
    fn bregman_refit_is_firm_thresholding(
        y in signal(30),
        lambda1 in 0.05f64..3.0,
        ratio in prop::sample::select(vec![0.5, 1.0, 2.0]),
    ) {
        let d = identity_dataset(&y);
        let n = d.n() as f64;
        let fit = lasso(&d, lambda1 / n);
        let lambda2 = ratio * lambda1;
        let general = bregman_lasso(&d, &fit, lambda2 / n).unwrap().beta;
        let closed = ortho_bregman(&y, lambda1, lambda2).unwrap();
        prop_assert!((&general - &closed).amax() <= 1e-8);
        let spec = ThresholdSpec::bregman(lambda1, lambda2).unwrap();
        prop_assert!((firm_threshold(&y, &spec) - closed).amax() <= 1e-12);
    }

    #[test]
    fn iterations_match_closed_form(y in signal(20), lambda in 0.05f64..3.0, k in 1usize..=5) {
        let d = identity_dataset(&y);
        let n = d.n() as f64;
        let general = bregman_iterations(&d, lambda / n, k + 1).unwrap().beta;
        let closed = ortho_bregman_iterations(&y, lambda, k).unwrap();
        prop_assert!((&general - closed).amax() <= 1e-8);
    }

    #[test]
    fn huge_lambda2_is_hard_thresholding(y in signal(30), lambda in 0.05f64..3.0) {
        prop_assume!(off_ties(&y, lambda));
        let d = identity_dataset(&y);
        let n = d.n() as f64;
        let fit = lasso(&d, lambda / n);
        let limit = bregman_lasso(&d, &fit, 1e6 * lambda / n).unwrap().beta;
        prop_assert!((&limit - hard_threshold(&y, lambda)).amax() <= 1e-5);
    }

    // the gap is |y| lambda2 / lambda1 on the kept entries, so |y| lambda2 <= 10
    #[test]
    fn huge_lambda1_is_soft_thresholding_at_lambda2(y in signal(30), lambda2 in 0.05f64..2.5) {
        let b = ortho_bregman(&y, 1e6, lambda2).unwrap();
        prop_assert!((b - soft_threshold(&y, lambda2)).amax() <= 1e-5);
    }

    #[test]
    fn subgradient_follows_signs(y in signal(30), lambda1 in 0.05f64..3.0) {
        let rho = ortho_subgradient(&y, lambda1);
        prop_assert!(rho.amax() <= 1.0);
        for (r, v) in rho.iter().zip(y.iter()) {
            prop_assert!(r * v >= 0.0);
        }
        let d = identity_dataset(&y);
        let fit = lasso(&d, lambda1 / d.n() as f64);
        prop_assert!((&fit.rho - &rho).amax() <= 1e-7);
    }

    #[test]
    fn firm_threshold_sandwich(y in signal(30), mu in 0.05f64..2.0, gamma in 1.01f64..5.0) {
        let spec = ThresholdSpec::new(mu, gamma).unwrap();
        let f = firm_threshold(&y, &spec);
        for j in 0..y.len() {
            if y[j].abs() <= mu * gamma {
                prop_assert!(f[j].abs() >= soft(y[j], mu * gamma).abs() - 1e-12);
                prop_assert!(f[j].abs() <= y[j].abs() + 1e-12);
            } else {
                prop_assert_eq!(f[j], y[j]);
            }
        }
    }
}

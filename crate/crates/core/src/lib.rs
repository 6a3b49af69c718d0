//! Lasso estimation followed by a refitting step, with certificates.
//!
//! The [`solver`] module fits the Lasso by coordinate descent. The [`refit`]
//! module post-processes a [`LassoFit`] with one of several strategies and
//! reports whether the result reduces the loss and respects the Lasso signs.
//! [`ortho`] has the closed forms for an identity design, and [`experiments`]
//! reproduces the simulation protocols with cross-validated tuning.
//!
//! ```
//! use nalgebra::{DMatrix, DVector};
//! use refit_lab::{lasso_cd, sls_lasso, Dataset, SolverOptions};
//!
//! let d = Dataset::new(
//!     DMatrix::from_row_slice(3, 2, &[1.0, 0.2, -1.0, 0.5, 0.5, 1.0]),
//!     DVector::from_vec(vec![1.0, -0.8, 0.9]),
//! )
//! .unwrap();
//! let fit = lasso_cd(&d, 0.1, &SolverOptions::default()).unwrap();
//! let refit = sls_lasso(&d, &fit).unwrap();
//! assert_eq!(refit.sign_certified, Some(true));
//! ```

pub mod checks;
pub mod dataset;
pub mod error;
pub mod experiments;
pub mod fit;
mod linalg;
pub mod ortho;
pub mod refit;
pub mod solver;
pub mod subgradient;

pub use dataset::{lambda_max, normalize_columns, Dataset, GroundTruth};
pub use error::{Error, Result};
pub use fit::{LassoFit, RefitResult, Strategy};
pub use refit::{
    boosted_lasso, boosted_support_lasso, bregman_iterations, bregman_lasso, certify_refitting,
    certify_sign_consistency, l1ball_refit, ls_lasso, project_l1_ball, relaxed_lasso, sls_lasso,
    Refitter, StrategyParams,
};
pub use solver::{lasso_bruteforce_oracle, lasso_cd, lasso_path, SolverOptions};
pub use subgradient::{bregman_divergence, equicorrelation_set, subgradient_from_fit};

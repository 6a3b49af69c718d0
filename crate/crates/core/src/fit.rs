use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::Error;
use crate::subgradient::{equicorrelation_set, subgradient_from_fit, support, EQUICORRELATION_TOL};

/// A Lasso solution together with its KKT objects.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub beta: DVector<f64>,
    pub lambda: f64,
    /// Canonical subgradient `X^T (y - X beta) / (lambda n)`.
    pub rho: DVector<f64>,
    pub support: Vec<usize>,
    pub equicorrelation: Vec<usize>,
    pub kkt_residual: f64,
}

impl LassoFit {
    /// Derives the subgradient, support, equicorrelation set and KKT residual
    /// from a coefficient vector.
    pub fn from_beta(d: &Dataset, beta: DVector<f64>, lambda: f64) -> Self {
        let rho = subgradient_from_fit(d, &beta, lambda);
        let kkt_residual = kkt_residual(&beta, &(&rho * lambda), lambda);
        Self {
            support: support(&beta),
            equicorrelation: equicorrelation_set(&rho, EQUICORRELATION_TOL),
            beta,
            lambda,
            rho,
            kkt_residual,
        }
    }

    /// Number of nonzero coefficients.
    pub fn s_hat(&self) -> usize {
        self.support.len()
    }
}

/// Largest violation of the Lasso KKT conditions given the correlations
/// `g = X^T (y - X beta) / n`.
pub(crate) fn kkt_residual(beta: &DVector<f64>, g: &DVector<f64>, lambda: f64) -> f64 {
    beta.iter()
        .zip(g.iter())
        .map(|(&b, &gj)| {
            if b > 0.0 {
                (gj - lambda).abs()
            } else if b < 0.0 {
                (gj + lambda).abs()
            } else {
                (gj.abs() - lambda).max(0.0)
            }
        })
        .fold(0.0, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    Ls,
    Sls,
    Boosted,
    BoostedSupport,
    Bregman,
    BregmanIter,
    Relaxed,
    L1Ball,
}

impl Strategy {
    pub const ALL: [Strategy; 8] = [
        Strategy::Ls,
        Strategy::Sls,
        Strategy::Boosted,
        Strategy::BoostedSupport,
        Strategy::Bregman,
        Strategy::BregmanIter,
        Strategy::Relaxed,
        Strategy::L1Ball,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Ls => "ls",
            Strategy::Sls => "sls",
            Strategy::Boosted => "boosted",
            Strategy::BoostedSupport => "boosted_support",
            Strategy::Bregman => "bregman",
            Strategy::BregmanIter => "bregman_iter",
            Strategy::Relaxed => "relaxed",
            Strategy::L1Ball => "l1ball",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown strategy '{s}'")))
    }
}

/// Output of one refitting strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct RefitResult {
    pub beta: DVector<f64>,
    pub strategy: Strategy,
    /// Every tuning parameter the strategy consumed, by name.
    pub params: BTreeMap<String, f64>,
    pub refit_certified: bool,
    /// `None` where sign consistency does not apply.
    pub sign_certified: Option<bool>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.name().parse::<Strategy>().unwrap(), s);
        }
        assert!("lasso2".parse::<Strategy>().is_err());
    }

    #[test]
    fn kkt_residual_cases() {
        let beta = DVector::from_vec(vec![1.0, -2.0, 0.0, 0.0]);
        let g = DVector::from_vec(vec![0.5, -0.5, 0.2, -0.7]);
        // coordinate 3 exceeds lambda by 0.2
        approx::assert_abs_diff_eq!(kkt_residual(&beta, &g, 0.5), 0.2, epsilon = 1e-15);
        let g = DVector::from_vec(vec![0.4, -0.5, 0.2, 0.0]);
        approx::assert_abs_diff_eq!(kkt_residual(&beta, &g, 0.5), 0.1, epsilon = 1e-15);
    }
}

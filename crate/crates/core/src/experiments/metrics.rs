use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::dataset::GroundTruth;
use crate::error::{Error, Result};
use crate::subgradient::sign;

/// Quality of an estimate against the truth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MetricsReport {
    /// `||X (beta* - beta)||_2^2`.
    pub prediction: f64,
    /// `||beta* - beta||_1`.
    pub estimation: f64,
    pub sparsity: usize,
    pub tp: usize,
    pub fp: usize,
    /// Fraction of coordinates whose sign differs from `beta*` (`sign(0) = 0`).
    pub hamming: f64,
}

impl MetricsReport {
    pub const MEASURES: [&'static str; 6] =
        ["prediction", "estimation", "sparsity", "tp", "fp", "hamming"];

    /// Values in the order of [`Self::MEASURES`].
    pub fn values(&self) -> [f64; 6] {
        [
            self.prediction,
            self.estimation,
            self.sparsity as f64,
            self.tp as f64,
            self.fp as f64,
            self.hamming,
        ]
    }
}

pub fn metrics(truth: &GroundTruth, x: &DMatrix<f64>, beta: &DVector<f64>) -> Result<MetricsReport> {
    let p = truth.beta_star.len();
    if beta.len() != p || x.ncols() != p {
        return Err(Error::Dimension(format!(
            "beta* has length {p}, estimate {}, design has {} columns",
            beta.len(),
            x.ncols()
        )));
    }
    let diff = &truth.beta_star - beta;
    let mut report = MetricsReport {
        prediction: (x * &diff).norm_squared(),
        estimation: diff.lp_norm(1),
        sparsity: 0,
        tp: 0,
        fp: 0,
        hamming: 0.0,
    };
    let mut mismatches = 0usize;
    for j in 0..p {
        let selected = beta[j] != 0.0;
        let relevant = truth.beta_star[j] != 0.0;
        report.sparsity += selected as usize;
        report.tp += (selected && relevant) as usize;
        report.fp += (selected && !relevant) as usize;
        mismatches += (sign(beta[j]) != sign(truth.beta_star[j])) as usize;
    }
    report.hamming = mismatches as f64 / p as f64;
    Ok(report)
}

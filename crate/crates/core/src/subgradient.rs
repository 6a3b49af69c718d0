//! The canonical Lasso subgradient, the equicorrelation set, and the l1 Bregman
//! divergence built from them.

use nalgebra::DVector;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Default band for `|rho_j| = 1`, one order looser than solver accuracy.
pub const EQUICORRELATION_TOL: f64 = 1e-6;

/// Slack used when validating that `rho` lies in the subdifferential.
pub const SUBGRADIENT_TOL: f64 = 1e-8;

/// `X^T (y - X beta) / (lambda n)`.
///
/// This is the subgradient read off the KKT conditions; it is unique even
/// when the Lasso solution is not.
pub fn subgradient_from_fit(d: &Dataset, beta: &DVector<f64>, lambda: f64) -> DVector<f64> {
    d.correlation(&d.residual(beta)) / lambda
}

/// Indices with `|rho_j| >= 1 - tol`, in increasing order.
pub fn equicorrelation_set(rho: &DVector<f64>, tol: f64) -> Vec<usize> {
    rho.iter()
        .enumerate()
        .filter(|(_, r)| r.abs() >= 1.0 - tol)
        .map(|(j, _)| j)
        .collect()
}

/// `{j : beta_j != 0}`.
pub fn support(beta: &DVector<f64>) -> Vec<usize> {
    beta.iter()
        .enumerate()
        .filter(|(_, b)| **b != 0.0)
        .map(|(j, _)| j)
        .collect()
}

/// Sign with `sign(0) = 0`.
pub fn sign(v: f64) -> f64 {
    if v > 0.0 {
        1.0
    } else if v < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Bregman divergence of the l1 norm, `||z||_1 - ||w||_1 - <rho, z - w>`.
///
/// `rho` must be a subgradient of `||.||_1` at `w`; the value then reduces to
/// `||z||_1 - <rho, z>` and lies in `[0, 2||z||_1]`.
pub fn bregman_divergence(z: &DVector<f64>, w: &DVector<f64>, rho: &DVector<f64>) -> Result<f64> {
    if z.len() != w.len() || z.len() != rho.len() {
        return Err(Error::Dimension(format!(
            "bregman divergence needs equal lengths, got {}, {}, {}",
            z.len(),
            w.len(),
            rho.len()
        )));
    }
    for j in 0..w.len() {
        let ok = if w[j] == 0.0 {
            rho[j].abs() <= 1.0 + SUBGRADIENT_TOL
        } else {
            (rho[j] - sign(w[j])).abs() <= SUBGRADIENT_TOL
        };
        if !ok {
            return Err(Error::InvalidSubgradient(j));
        }
    }
    let value: f64 = z
        .iter()
        .zip(rho.iter())
        .map(|(&zj, &rj)| zj.abs() - rj.clamp(-1.0, 1.0) * zj)
        .sum();
    Ok(value.max(0.0))
}

//! Design/response pairs and the column normalization every solver assumes.
//!
//! Columns are rescaled once, at construction, so that `||X_j||_2^2 = n`. The
//! per-column divisors are kept so that coefficients can be mapped back to the
//! units of the raw design.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative slack allowed on `||X_j||^2 = n`.
pub const NORMALIZATION_TOL: f64 = 1e-8;

/// Rescales every column of `x` to squared norm `n`.
///
/// Returns the normalized matrix and the divisor applied to each column, so
/// that `raw[:, j] = normalized[:, j] * scale[j]`.
pub fn normalize_columns(x: &DMatrix<f64>) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let n = x.nrows() as f64;
    let mut out = x.clone();
    let mut scale = DVector::zeros(x.ncols());
    for (j, mut col) in out.column_iter_mut().enumerate() {
        let norm = col.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::ZeroColumn(j));
        }
        let s = norm / n.sqrt();
        if s != 1.0 {
            col /= s;
        }
        scale[j] = s;
    }
    Ok((out, scale))
}

/// A design matrix with normalized columns and a response vector.
#[derive(Debug, Clone)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
    scale: DVector<f64>,
    col_sq_norms: Vec<f64>,
}

impl Dataset {
    /// Builds a dataset, normalizing the columns of `x`.
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        check_dims(&x, &y)?;
        let (x, scale) = normalize_columns(&x)?;
        Ok(Self::assemble(x, y, scale))
    }

    /// Builds a dataset whose columns are used as given.
    ///
    /// The solvers accept any column norms; this is how the identity design of
    /// the denoising model (`||X_j||^2 = 1`) is fed to them.
    pub fn unnormalized(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        check_dims(&x, &y)?;
        if let Some(j) = x.column_iter().position(|c| c.norm_squared() == 0.0) {
            return Err(Error::ZeroColumn(j));
        }
        let scale = DVector::from_element(x.ncols(), 1.0);
        Ok(Self::assemble(x, y, scale))
    }

    fn assemble(x: DMatrix<f64>, y: DVector<f64>, scale: DVector<f64>) -> Self {
        let col_sq_norms = x.column_iter().map(|c| c.norm_squared()).collect();
        Self {
            x,
            y,
            scale,
            col_sq_norms,
        }
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn p(&self) -> usize {
        self.x.ncols()
    }

    /// Divisors applied to the raw columns (all ones for unnormalized data).
    pub fn scale(&self) -> &DVector<f64> {
        &self.scale
    }

    pub fn col_sq_norm(&self, j: usize) -> f64 {
        self.col_sq_norms[j]
    }

    pub fn is_normalized(&self) -> bool {
        let n = self.n() as f64;
        self.col_sq_norms
            .iter()
            .all(|&s| (s - n).abs() <= NORMALIZATION_TOL * n)
    }

    /// Same design, different response. Used for residual refits.
    pub fn with_response(&self, y: DVector<f64>) -> Result<Self> {
        check_dims(&self.x, &y)?;
        Ok(Self {
            x: self.x.clone(),
            y,
            scale: self.scale.clone(),
            col_sq_norms: self.col_sq_norms.clone(),
        })
    }

    /// Column-submatrix dataset on `cols`, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Self {
        let x = self.x.select_columns(cols);
        let scale = DVector::from_iterator(cols.len(), cols.iter().map(|&j| self.scale[j]));
        let col_sq_norms = cols.iter().map(|&j| self.col_sq_norms[j]).collect();
        Self {
            x,
            y: self.y.clone(),
            scale,
            col_sq_norms,
        }
    }

    /// Row subset, used for cross-validation folds. Columns are not renormalized.
    pub fn select_rows(&self, rows: &[usize]) -> Self {
        let x = self.x.select_rows(rows);
        let y = DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.y[i]));
        Self::assemble(x, y, self.scale.clone())
    }

    pub fn residual(&self, beta: &DVector<f64>) -> DVector<f64> {
        &self.y - &self.x * beta
    }

    /// `X^T r / n`.
    pub fn correlation(&self, r: &DVector<f64>) -> DVector<f64> {
        self.x.tr_mul(r) / self.n() as f64
    }

    /// Lasso objective `(1/2n)||y - X beta||^2 + lambda ||beta||_1`.
    pub fn lasso_objective(&self, beta: &DVector<f64>, lambda: f64) -> f64 {
        let r = self.residual(beta);
        0.5 * r.norm_squared() / self.n() as f64 + lambda * beta.lp_norm(1)
    }

    /// Maps coefficients from normalized to raw-design coordinates.
    pub fn back_scale(&self, beta: &DVector<f64>) -> DVector<f64> {
        beta.component_div(&self.scale)
    }
}

fn check_dims(x: &DMatrix<f64>, y: &DVector<f64>) -> Result<()> {
    if x.nrows() == 0 || x.ncols() == 0 {
        return Err(Error::Dimension(format!(
            "design must be non-empty, got {}x{}",
            x.nrows(),
            x.ncols()
        )));
    }
    if x.nrows() != y.len() {
        return Err(Error::Dimension(format!(
            "design has {} rows but response has length {}",
            x.nrows(),
            y.len()
        )));
    }
    Ok(())
}

/// `||X^T y / n||_inf`, the smallest penalty at which the Lasso is zero.
pub fn lambda_max(d: &Dataset) -> f64 {
    d.correlation(d.y()).amax()
}

/// The sparse vector that generated a simulated response.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruth {
    pub beta_star: DVector<f64>,
    pub sigma: f64,
    pub support_star: Vec<usize>,
    pub s: usize,
}

impl GroundTruth {
    pub fn new(beta_star: DVector<f64>, sigma: f64) -> Self {
        let support_star: Vec<usize> = beta_star
            .iter()
            .enumerate()
            .filter(|(_, &b)| b != 0.0)
            .map(|(j, _)| j)
            .collect();
        let s = support_star.len();
        Self {
            beta_star,
            sigma,
            support_star,
            s,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn already_normalized_column_is_unchanged() {
        let x = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let (xn, scale) = normalize_columns(&x).unwrap();
        assert_eq!(xn, x);
        assert_eq!(scale[0], 1.0);
    }

    #[test]
    fn uniform_column_is_rescaled() {
        let x = DMatrix::from_row_slice(2, 1, &[2.0, 2.0]);
        let (xn, scale) = normalize_columns(&x).unwrap();
        approx::assert_abs_diff_eq!(xn[(0, 0)], 1.0, epsilon = 1e-15);
        approx::assert_abs_diff_eq!(xn[(1, 0)], 1.0, epsilon = 1e-15);
        approx::assert_abs_diff_eq!(scale[0], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn zero_column_is_rejected() {
        let x = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 2.0, 0.0]);
        assert!(matches!(normalize_columns(&x), Err(Error::ZeroColumn(1))));
        assert!(matches!(
            Dataset::new(x, DVector::zeros(2)),
            Err(Error::ZeroColumn(1))
        ));
    }

    #[test]
    fn response_length_must_match() {
        let x = DMatrix::from_element(3, 1, 1.0);
        assert!(matches!(
            Dataset::new(x, DVector::zeros(2)),
            Err(Error::Dimension(_))
        ));
    }

    #[test]
    fn lambda_max_small_cases() {
        let x = DMatrix::from_row_slice(2, 1, &[1.0, 1.0]);
        let d = Dataset::new(x.clone(), DVector::from_vec(vec![1.0, 1.0])).unwrap();
        assert_eq!(lambda_max(&d), 1.0);
        let d = Dataset::new(x, DVector::zeros(2)).unwrap();
        assert_eq!(lambda_max(&d), 0.0);
    }

    #[test]
    fn back_scale_recovers_raw_fit() {
        let raw = DMatrix::from_row_slice(3, 2, &[1.0, 4.0, 2.0, -2.0, 0.5, 3.0]);
        let d = Dataset::new(raw.clone(), DVector::zeros(3)).unwrap();
        assert!(d.is_normalized());
        let beta = DVector::from_vec(vec![0.7, -1.3]);
        let lhs = d.x() * &beta;
        let rhs = &raw * d.back_scale(&beta);
        approx::assert_relative_eq!(lhs, rhs, epsilon = 1e-12);
    }

    #[test]
    fn ground_truth_support() {
        let g = GroundTruth::new(DVector::from_vec(vec![0.0, 1.0, 0.0, -1.0]), 0.5);
        assert_eq!(g.support_star, vec![1, 3]);
        assert_eq!(g.s, 2);
    }
}

//! Data generation for the simulation protocols, and CSV design loading.

use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::seq::index::sample;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::dataset::{normalize_columns, GroundTruth};
use crate::error::{Error, Result};

/// Correlated Gaussian design: `X_j = sqrt(n) m_j / ||m_j||` with
/// `m_j = kappa zeta + (1 - kappa) xi_j` and `zeta, xi_j ~ N(0, I_n)`.
pub fn gen_synthetic_design<R: Rng + ?Sized>(
    n: usize,
    p: usize,
    kappa: f64,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if !(0.0..=1.0).contains(&kappa) {
        return Err(Error::InvalidParameter(format!(
            "kappa must lie in [0, 1], got {kappa}"
        )));
    }
    if n == 0 || p == 0 {
        return Err(Error::Dimension("design needs n >= 1 and p >= 1".into()));
    }
    let zeta: DVector<f64> = DVector::from_fn(n, |_, _| rng.sample(StandardNormal));
    let mut x = DMatrix::zeros(n, p);
    let root_n = (n as f64).sqrt();
    for j in 0..p {
        let xi: DVector<f64> = DVector::from_fn(n, |_, _| rng.sample(StandardNormal));
        let mixed = &zeta * kappa + xi * (1.0 - kappa);
        let norm = mixed.norm();
        if !(norm > 1e-12 * root_n) {
            return Err(Error::DegenerateColumn(j));
        }
        x.set_column(j, &(mixed * (root_n / norm)));
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BetaMode {
    /// Every nonzero is `+1`.
    Ones,
    /// Nonzeros are `+1` or `-1` with equal probability.
    PmOnes,
}

/// Places the nonzeros of `beta*` on `support`. The returned truth has
/// `sigma = 0`; set it once the noise level is known.
pub fn make_beta_star<R: Rng + ?Sized>(
    p: usize,
    s: usize,
    mode: BetaMode,
    support: &[usize],
    rng: &mut R,
) -> Result<GroundTruth> {
    if support.len() != s {
        return Err(Error::InvalidParameter(format!(
            "support has {} indices, expected s = {s}",
            support.len()
        )));
    }
    let mut beta = DVector::zeros(p);
    for &j in support {
        if j >= p {
            return Err(Error::Dimension(format!("support index {j} out of range for p = {p}")));
        }
        beta[j] = match mode {
            BetaMode::Ones => 1.0,
            BetaMode::PmOnes => {
                if rng.random_bool(0.5) {
                    1.0
                } else {
                    -1.0
                }
            }
        };
    }
    Ok(GroundTruth::new(beta, 0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CorrMode {
    /// Uniformly random support.
    Normal,
    /// A random seed column plus its `s - 1` most correlated columns.
    High,
}

/// Pearson correlation of two equally long vectors (0 for a constant vector).
pub fn pearson<'a>(
    a: impl IntoIterator<Item = &'a f64> + Clone,
    b: impl IntoIterator<Item = &'a f64> + Clone,
) -> f64 {
    let (mut n, mut sa, mut sb) = (0.0, 0.0, 0.0);
    for (x, y) in a.clone().into_iter().zip(b.clone()) {
        n += 1.0;
        sa += x;
        sb += y;
    }
    let (ma, mb) = (sa / n, sb / n);
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.into_iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    if va == 0.0 || vb == 0.0 {
        0.0
    } else {
        cov / (va * vb).sqrt()
    }
}

/// Chooses `s` support indices. In high-correlation mode the first index is
/// drawn uniformly and the rest are the columns with the largest absolute
/// Pearson correlation with it (lower index on ties). The seed column comes
/// first in the returned list.
pub fn select_support<R: Rng + ?Sized>(
    x: &DMatrix<f64>,
    s: usize,
    mode: CorrMode,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let p = x.ncols();
    if s > p {
        return Err(Error::InvalidParameter(format!("s = {s} exceeds p = {p}")));
    }
    if s == 0 {
        return Ok(Vec::new());
    }
    match mode {
        CorrMode::Normal => {
            let mut idx = sample(rng, p, s).into_vec();
            idx.sort_unstable();
            Ok(idx)
        }
        CorrMode::High => {
            let first = rng.random_range(0..p);
            let seed_col = x.column(first);
            let mut others: Vec<(usize, f64)> = (0..p)
                .filter(|&j| j != first)
                .map(|j| (j, pearson(seed_col.iter(), x.column(j).iter()).abs()))
                .collect();
            others.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            let mut out = vec![first];
            out.extend(others.into_iter().take(s - 1).map(|(j, _)| j));
            Ok(out)
        }
    }
}

/// Noise level giving `||X beta*||_2 / sqrt(n sigma^2) = snr`.
pub fn snr_to_sigma(x: &DMatrix<f64>, beta_star: &DVector<f64>, snr: f64) -> Result<f64> {
    if !(snr > 0.0) {
        return Err(Error::InvalidParameter(format!("snr must be positive, got {snr}")));
    }
    let signal = (x * beta_star).norm();
    if signal == 0.0 {
        return Err(Error::ZeroSignal);
    }
    Ok(signal / ((x.nrows() as f64).sqrt() * snr))
}

/// `y = X beta* + sigma * N(0, I_n)`; also returns the realized noise.
pub fn gen_response<R: Rng + ?Sized>(
    x: &DMatrix<f64>,
    beta_star: &DVector<f64>,
    sigma: f64,
    rng: &mut R,
) -> Result<(DVector<f64>, DVector<f64>)> {
    if x.ncols() != beta_star.len() {
        return Err(Error::Dimension(format!(
            "design has {} columns, beta* has length {}",
            x.ncols(),
            beta_star.len()
        )));
    }
    let eps: DVector<f64> =
        DVector::from_fn(x.nrows(), |_, _| sigma * rng.sample::<f64, _>(StandardNormal));
    Ok((x * beta_star + &eps, eps))
}

/// Reads a rectangular numeric CSV (no quoting, optional header line).
pub fn read_matrix_csv(path: &Path, header: bool) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(header)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_error(path, e))?;
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(path, e))?;
        let line = record.position().map_or(0, |p| p.line());
        let row = record
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.parse::<f64>().map_err(|_| Error::Parse {
                    path: path.to_path_buf(),
                    line,
                    col: c + 1,
                    msg: format!("'{cell}' is not a number"),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.is_empty() || rows[0].is_empty() {
        return Err(Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            col: 1,
            msg: "no numeric rows".into(),
        });
    }
    let cols = rows[0].len();
    Ok(DMatrix::from_fn(rows.len(), cols, |i, j| rows[i][j]))
}

/// First `p` columns of a CSV design, normalized to squared norm `n`.
pub fn load_design_csv(path: &Path, p: usize, header: bool) -> Result<DMatrix<f64>> {
    let raw = read_matrix_csv(path, header)?;
    if raw.ncols() < p {
        return Err(Error::Dimension(format!(
            "{} has {} columns, fewer than p = {p}",
            path.display(),
            raw.ncols()
        )));
    }
    let (x, _) = normalize_columns(&raw.columns(0, p).into_owned())?;
    Ok(x)
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line());
    match e.into_kind() {
        csv::ErrorKind::Io(source) => Error::Io {
            path: path.to_path_buf(),
            source,
        },
        kind => Error::Parse {
            path: path.to_path_buf(),
            line,
            col: 0,
            msg: format!("{kind:?}"),
        },
    }
}

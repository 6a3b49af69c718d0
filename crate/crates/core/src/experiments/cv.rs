//! K-fold cross-validation over one or two tuning parameters.

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::{lambda_max, Dataset};
use crate::error::{Error, Result};
use crate::fit::{LassoFit, Strategy};
use crate::linalg::embed;
use crate::refit::{Refitter, StrategyParams};
use crate::solver::{lasso_cd, lasso_path};

/// Largest number of Bregman iterations offered to cross-validation.
pub const MAX_BREGMAN_ITERATIONS: usize = 10;

/// The plain Lasso or a refitting strategy on top of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Estimator {
    Lasso,
    Refit(Strategy),
}

impl Estimator {
    pub fn all() -> Vec<Estimator> {
        std::iter::once(Estimator::Lasso)
            .chain(Strategy::ALL.iter().map(|&s| Estimator::Refit(s)))
            .collect()
    }

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Lasso => "lasso",
            Estimator::Refit(s) => s.name(),
        }
    }

    /// The kind of second tuning parameter, if any.
    pub fn second_kind(self) -> SecondKind {
        match self {
            Estimator::Refit(Strategy::Boosted | Strategy::BoostedSupport | Strategy::Bregman) => {
                SecondKind::Lambda2
            }
            Estimator::Refit(Strategy::Relaxed) => SecondKind::Phi,
            Estimator::Refit(Strategy::BregmanIter) => SecondKind::K,
            _ => SecondKind::None,
        }
    }

    /// Strategy parameters for a value of the second tuning parameter.
    pub fn params(self, second: Option<f64>) -> Result<StrategyParams> {
        let missing = || Error::InvalidParameter(format!("{self} needs a second parameter"));
        Ok(match self.second_kind() {
            SecondKind::None => StrategyParams::default(),
            SecondKind::Lambda2 => StrategyParams::lambda2(second.ok_or_else(missing)?),
            SecondKind::Phi => StrategyParams::phi(second.ok_or_else(missing)?),
            SecondKind::K => StrategyParams::k(to_k(second.ok_or_else(missing)?)?),
        })
    }
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl Serialize for Estimator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(self.name())
    }
}

impl FromStr for Estimator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "lasso" {
            Ok(Estimator::Lasso)
        } else {
            s.parse().map(Estimator::Refit)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SecondKind {
    None,
    Lambda2,
    Phi,
    K,
}

impl SecondKind {
    /// Whether a larger value regularizes more.
    fn larger_is_stronger(self) -> bool {
        !matches!(self, SecondKind::K)
    }
}

fn to_k(v: f64) -> Result<usize> {
    if v >= 1.0 && v.fract() == 0.0 {
        Ok(v as usize)
    } else {
        Err(Error::InvalidParameter(format!("k must be a positive integer, got {v}")))
    }
}

/// `count` points from `lo` to `hi`, equally spaced on a log scale.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || count == 0 {
        return Err(Error::InvalidParameter(format!(
            "log grid needs 0 < lo <= hi and count >= 1, got [{lo}, {hi}] x {count}"
        )));
    }
    if count == 1 {
        return Ok(vec![hi]);
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..count)
        .map(|i| match i {
            0 => lo,
            _ if i == count - 1 => hi,
            _ => (a + (b - a) * i as f64 / (count - 1) as f64).exp(),
        })
        .collect())
}

/// `count` points from `lo` to `hi`, equally spaced.
pub fn uniform_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(hi >= lo) || count == 0 {
        return Err(Error::InvalidParameter(format!(
            "uniform grid needs lo <= hi and count >= 1, got [{lo}, {hi}] x {count}"
        )));
    }
    if count == 1 {
        return Ok(vec![hi]);
    }
    Ok((0..count)
        .map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CVSpec {
    pub folds: usize,
    pub grid1: Vec<f64>,
    pub grid2: Option<Vec<f64>>,
    pub seed: u64,
}

impl CVSpec {
    pub fn new(folds: usize, grid1: Vec<f64>, grid2: Option<Vec<f64>>, seed: u64) -> Result<Self> {
        if folds < 2 {
            return Err(Error::InvalidParameter(format!("folds must be >= 2, got {folds}")));
        }
        if grid1.is_empty() || grid2.as_ref().is_some_and(|g| g.is_empty()) {
            return Err(Error::InvalidParameter("CV grids must be nonempty".into()));
        }
        Ok(Self {
            folds,
            grid1,
            grid2,
            seed,
        })
    }

    /// The default 3-fold grids for `estimator` on `d`: `points1` log-spaced
    /// penalties in `[0.01 lambda_max, lambda_max]`, and `points2` values of the
    /// second parameter (the same penalty grid for `lambda2`, a uniform grid in
    /// `[0.001, 0.999]` for `phi`, and `k = 1, ..., min(points2, 10)`).
    pub fn for_estimator(
        d: &Dataset,
        estimator: Estimator,
        points1: usize,
        points2: usize,
        seed: u64,
    ) -> Result<Self> {
        let lmax = lambda_max(d);
        if lmax == 0.0 {
            return Err(Error::InvalidParameter(
                "lambda_max is zero; nothing to cross-validate".into(),
            ));
        }
        let grid1 = log_grid(0.01 * lmax, lmax, points1)?;
        let grid2 = match estimator.second_kind() {
            SecondKind::None => None,
            SecondKind::Lambda2 => Some(log_grid(0.01 * lmax, lmax, points2)?),
            SecondKind::Phi => Some(uniform_grid(0.001, 0.999, points2)?),
            SecondKind::K => Some(
                (1..=points2.clamp(1, MAX_BREGMAN_ITERATIONS))
                    .map(|k| k as f64)
                    .collect(),
            ),
        };
        Self::new(3, grid1, grid2, seed)
    }
}

/// Held-out error of one grid cell.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvCell {
    pub lambda1: f64,
    pub second: Option<f64>,
    /// Mean over folds of the per-fold mean squared prediction error.
    pub mse: f64,
    pub fold_mse: Vec<f64>,
}

/// Cells ordered from strongest to weakest regularization.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvTable {
    pub cells: Vec<CvCell>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CvChoice {
    pub lambda1: f64,
    pub second: Option<f64>,
    pub mse: f64,
}

/// Row indices of each fold: a seeded shuffle split into contiguous blocks.
pub fn fold_assignment(n: usize, folds: usize, seed: u64) -> Vec<Vec<usize>> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    (0..folds)
        .map(|f| idx[f * n / folds..(f + 1) * n / folds].to_vec())
        .collect()
}

/// Selects the grid cell with the smallest held-out error; ties go to the
/// larger `lambda1`, then to the stronger second parameter.
pub fn cross_validate(
    d: &Dataset,
    estimator: Estimator,
    cv: &CVSpec,
    refitter: &Refitter,
) -> Result<(CvChoice, CvTable)> {
    if cv.folds < 2 || cv.grid1.is_empty() {
        return Err(Error::InvalidParameter("invalid CV specification".into()));
    }
    if d.n() < cv.folds {
        return Err(Error::InvalidParameter(format!(
            "n = {} is smaller than the number of folds {}",
            d.n(),
            cv.folds
        )));
    }
    let kind = estimator.second_kind();
    if (kind == SecondKind::None) != cv.grid2.is_none() {
        return Err(Error::InvalidParameter(format!(
            "second grid does not match estimator {estimator}"
        )));
    }

    let mut lambdas = cv.grid1.clone();
    sort_strong_first(&mut lambdas, true)?;
    let seconds: Option<Vec<f64>> = match &cv.grid2 {
        Some(g) => {
            let mut g = g.clone();
            sort_strong_first(&mut g, kind.larger_is_stronger())?;
            if kind == SecondKind::K {
                g.iter().try_for_each(|&v| to_k(v).map(|_| ()))?;
            }
            Some(g)
        }
        None => None,
    };

    let folds = fold_assignment(d.n(), cv.folds, cv.seed);
    let per_fold: Vec<Vec<Vec<f64>>> = folds
        .par_iter()
        .map(|test| {
            let train_idx: Vec<usize> = (0..d.n()).filter(|i| !test.contains(i)).collect();
            let train = d.select_rows(&train_idx);
            let held = d.select_rows(test);
            let estimates = grid_estimates(&train, estimator, &lambdas, seconds.as_deref(), refitter)?;
            Ok(estimates
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|b| held.residual(b).norm_squared() / held.n() as f64)
                        .collect()
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let width = seconds.as_ref().map_or(1, |s| s.len());
    let mut cells = Vec::with_capacity(lambdas.len() * width);
    for (i, &lambda1) in lambdas.iter().enumerate() {
        for j in 0..width {
            let fold_mse: Vec<f64> = per_fold.iter().map(|f| f[i][j]).collect();
            cells.push(CvCell {
                lambda1,
                second: seconds.as_ref().map(|s| s[j]),
                mse: fold_mse.iter().sum::<f64>() / fold_mse.len() as f64,
                fold_mse,
            });
        }
    }

    let mut best = &cells[0];
    for cell in &cells[1..] {
        if cell.mse < best.mse - 1e-12 * best.mse.abs() {
            best = cell;
        }
    }
    let choice = CvChoice {
        lambda1: best.lambda1,
        second: best.second,
        mse: best.mse,
    };
    Ok((choice, CvTable { cells }))
}

/// The estimate of `estimator` on all of `d` at one grid cell.
pub fn fit_estimator(
    d: &Dataset,
    estimator: Estimator,
    lambda1: f64,
    second: Option<f64>,
    refitter: &Refitter,
) -> Result<DVector<f64>> {
    let params = estimator.params(second)?;
    let wrap = |e| Error::AtGridCell {
        lambda1,
        second,
        source: Box::new(e),
    };
    match estimator {
        Estimator::Lasso => Ok(lasso_cd(d, lambda1, &refitter.solver).map_err(wrap)?.beta),
        Estimator::Refit(Strategy::BregmanIter) => Ok(refitter
            .bregman_iterations(d, lambda1, params.k.unwrap())
            .map_err(wrap)?
            .beta),
        Estimator::Refit(s) => {
            let fit = lasso_cd(d, lambda1, &refitter.solver).map_err(wrap)?;
            Ok(refitter.run(d, &fit, s, &params).map_err(wrap)?.beta)
        }
    }
}

fn sort_strong_first(v: &mut [f64], larger_is_stronger: bool) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidParameter("CV grid values must be finite".into()));
    }
    v.sort_by(|a, b| if larger_is_stronger { b.total_cmp(a) } else { a.total_cmp(b) });
    if v.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidParameter("CV grid values must be distinct".into()));
    }
    Ok(())
}

/// Estimates on `train` for every cell, indexed `[lambda][second]`.
fn grid_estimates(
    train: &Dataset,
    estimator: Estimator,
    lambdas: &[f64],
    seconds: Option<&[f64]>,
    refitter: &Refitter,
) -> Result<Vec<Vec<DVector<f64>>>> {
    if estimator == Estimator::Refit(Strategy::BregmanIter) {
        let ks: Vec<usize> = seconds.unwrap().iter().map(|&v| v as usize).collect();
        let kmax = *ks.iter().max().unwrap();
        return lambdas
            .iter()
            .map(|&lambda| {
                let iterates = refitter
                    .bregman_iterates(train, lambda, kmax)
                    .map_err(|e| cell_error(lambda, None, e))?;
                Ok(ks.iter().map(|&k| iterates[k - 1].clone()).collect())
            })
            .collect();
    }

    let path = lasso_path(train, lambdas, &refitter.solver)?;
    let cold = Refitter {
        solver: crate::solver::SolverOptions {
            warm_start: None,
            ..refitter.solver.clone()
        },
        l1ball: refitter.l1ball.clone(),
    };
    path.iter()
        .map(|fit| {
            let lambda = fit.lambda;
            let at = |second: Option<f64>| move |e| cell_error(lambda, second, e);
            match estimator {
                Estimator::Lasso => Ok(vec![fit.beta.clone()]),
                Estimator::Refit(s @ (Strategy::Ls | Strategy::Sls | Strategy::L1Ball)) => {
                    let r = cold.run(train, fit, s, &StrategyParams::default()).map_err(at(None))?;
                    Ok(vec![r.beta])
                }
                Estimator::Refit(Strategy::Boosted) => {
                    let residual = train.with_response(train.residual(&fit.beta))?;
                    let deltas = lasso_path(&residual, seconds.unwrap(), &cold.solver).map_err(at(None))?;
                    Ok(deltas.iter().map(|delta| &fit.beta + &delta.beta).collect())
                }
                Estimator::Refit(Strategy::BoostedSupport) => {
                    on_support(train, fit, seconds.unwrap(), |sub, grid| {
                        let sub = sub.with_response(train.residual(&fit.beta))?;
                        let deltas = lasso_path(&sub, grid, &cold.solver).map_err(at(None))?;
                        Ok(deltas.into_iter().map(|f| f.beta).collect())
                    })
                    .map(|deltas| deltas.into_iter().map(|dl| &fit.beta + dl).collect())
                }
                Estimator::Refit(Strategy::Relaxed) => {
                    let phis = seconds.unwrap();
                    let penalties: Vec<f64> = phis.iter().map(|phi| phi * lambda).collect();
                    on_support(train, fit, &penalties, |sub, grid| {
                        let fits = lasso_path(sub, grid, &cold.solver).map_err(at(None))?;
                        Ok(fits.into_iter().map(|f| f.beta).collect())
                    })
                }
                Estimator::Refit(Strategy::Bregman) => {
                    let mut warm = fit.beta.clone();
                    seconds
                        .unwrap()
                        .iter()
                        .map(|&lambda2| {
                            let runner = Refitter {
                                solver: refitter.solver.with_warm_start(warm.clone()),
                                l1ball: refitter.l1ball.clone(),
                            };
                            let r = runner.bregman(train, fit, lambda2).map_err(at(Some(lambda2)))?;
                            warm = r.beta.clone();
                            Ok(r.beta)
                        })
                        .collect()
                }
                Estimator::Refit(Strategy::BregmanIter) => unreachable!(),
            }
        })
        .collect()
}

/// Runs `solve` on the support columns and embeds each result; an empty
/// support yields zeros.
fn on_support(
    train: &Dataset,
    fit: &LassoFit,
    grid: &[f64],
    solve: impl Fn(&Dataset, &[f64]) -> Result<Vec<DVector<f64>>>,
) -> Result<Vec<DVector<f64>>> {
    let p = train.p();
    if fit.support.is_empty() {
        return Ok(vec![DVector::zeros(p); grid.len()]);
    }
    let sub = train.select_columns(&fit.support);
    Ok(solve(&sub, grid)?
        .iter()
        .map(|b| embed(p, &fit.support, b))
        .collect())
}

fn cell_error(lambda1: f64, second: Option<f64>, source: Error) -> Error {
    Error::AtGridCell {
        lambda1,
        second,
        source: Box::new(source),
    }
}

//! Cyclic coordinate descent for l1-type penalties.
//!
//! The engine minimizes
//!
//! ```text
//! (1/2n) ||y - X beta||^2 + sum_j ( w+_j max(beta_j, 0) + w-_j max(-beta_j, 0) )
//! ```
//!
//! with nonnegative weights. The plain Lasso uses `w+ = w- = lambda`. The
//! Bregman penalty `lambda (||beta||_1 - <rho, beta>)` is the tilted case
//! `w+ = lambda (1 - rho)`, `w- = lambda (1 + rho)`, which keeps every quantity
//! on the scale of the data even when `lambda` is very large.
//!
//! Convergence is declared on the KKT residual. Once the support stops
//! changing, the engine tries a direct solve of the stationarity equations on
//! the support and keeps it when it certifies.

use nalgebra::{DMatrix, DVector};

use crate::dataset::{lambda_max, Dataset};
use crate::error::{Error, Result};
use crate::fit::LassoFit;
use crate::linalg::spd_solve;
use crate::subgradient::support;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    /// Cap on coordinate sweeps.
    pub max_iters: usize,
    /// Target KKT residual.
    pub tol: f64,
    pub warm_start: Option<DVector<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iters: 100_000,
            tol: 1e-10,
            warm_start: None,
        }
    }
}

impl SolverOptions {
    pub fn with_warm_start(&self, beta: DVector<f64>) -> Self {
        Self {
            warm_start: Some(beta),
            ..self.clone()
        }
    }

    fn validate(&self, p: usize) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("max_iters must be at least 1".into()));
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if let Some(w) = &self.warm_start {
            if w.len() != p {
                return Err(Error::Dimension(format!(
                    "warm start has length {}, expected {p}",
                    w.len()
                )));
            }
        }
        Ok(())
    }
}

/// Asymmetric per-coordinate l1 weights.
#[derive(Debug, Clone)]
pub(crate) struct Penalty {
    plus: Vec<f64>,
    minus: Vec<f64>,
}

impl Penalty {
    pub(crate) fn uniform(p: usize, lambda: f64) -> Self {
        Self {
            plus: vec![lambda; p],
            minus: vec![lambda; p],
        }
    }

    /// `lambda (|b| - rho b)` per coordinate; `rho` is clamped to `[-1, 1]`.
    pub(crate) fn tilted(lambda: f64, rho: &DVector<f64>) -> Self {
        let (plus, minus) = rho
            .iter()
            .map(|r| {
                let r = r.clamp(-1.0, 1.0);
                (lambda * (1.0 - r), lambda * (1.0 + r))
            })
            .unzip();
        Self { plus, minus }
    }

    fn value(&self, beta: &DVector<f64>) -> f64 {
        beta.iter()
            .enumerate()
            .map(|(j, &b)| {
                if b > 0.0 {
                    self.plus[j] * b
                } else {
                    -self.minus[j] * b
                }
            })
            .sum()
    }

    /// Signed weight acting on a coordinate with the sign of `b`.
    fn active_weight(&self, j: usize, b: f64) -> f64 {
        if b > 0.0 {
            self.plus[j]
        } else {
            -self.minus[j]
        }
    }

    fn violation(&self, beta: &DVector<f64>, g: &DVector<f64>) -> f64 {
        (0..beta.len())
            .map(|j| {
                let (b, gj) = (beta[j], g[j]);
                if b > 0.0 {
                    (gj - self.plus[j]).abs()
                } else if b < 0.0 {
                    (gj + self.minus[j]).abs()
                } else {
                    (gj - self.plus[j]).max(-self.minus[j] - gj).max(0.0)
                }
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub(crate) struct CdOutcome {
    pub beta: DVector<f64>,
    /// Objective after every sweep, when requested.
    #[cfg_attr(not(test), allow(dead_code))]
    pub trace: Vec<f64>,
}

struct Engine<'a> {
    x: &'a DMatrix<f64>,
    y: &'a DVector<f64>,
    n: f64,
    a: Vec<f64>,
    pen: &'a Penalty,
    beta: DVector<f64>,
    r: DVector<f64>,
}

impl Engine<'_> {
    /// Updates coordinate `j`; returns the change scaled to gradient units.
    fn update(&mut self, j: usize) -> f64 {
        let col = self.x.column(j);
        let old = self.beta[j];
        let z = col.dot(&self.r) / self.n + self.a[j] * old;
        let new = if z > self.pen.plus[j] {
            (z - self.pen.plus[j]) / self.a[j]
        } else if z < -self.pen.minus[j] {
            (z + self.pen.minus[j]) / self.a[j]
        } else {
            0.0
        };
        let delta = new - old;
        if delta != 0.0 {
            self.r.axpy(-delta, &col, 1.0);
            self.beta[j] = new;
        }
        self.a[j] * delta.abs()
    }

    fn refresh(&mut self) -> DVector<f64> {
        self.r = self.y - self.x * &self.beta;
        self.x.tr_mul(&self.r) / self.n
    }

    fn objective_of(&self, beta: &DVector<f64>, r: &DVector<f64>) -> f64 {
        0.5 * r.norm_squared() / self.n + self.pen.value(beta)
    }

    fn objective(&self) -> f64 {
        self.objective_of(&self.beta, &self.r)
    }

    /// Solves the stationarity equations on the current support with the
    /// current signs, dropping coordinates whose sign does not survive.
    fn polish(&self) -> Option<DVector<f64>> {
        let mut b = self.beta.clone();
        let mut s = support(&b);
        // more columns than rows: the objective is linear along the null
        // space of X_s, so walk to a basic point first
        while s.len() > self.x.nrows() {
            let xs = self.x.select_columns(&s);
            let eig = xs.tr_mul(&xs).symmetric_eigen();
            let v = eig.eigenvectors.column(eig.eigenvalues.imin()).into_owned();
            let slope: f64 = s
                .iter()
                .enumerate()
                .map(|(k, &j)| self.pen.active_weight(j, b[j]) * v[k])
                .sum();
            let dir = if slope > 0.0 { -v } else { v };
            let (k, t) = (0..s.len())
                .filter(|&k| dir[k] * b[s[k]] < 0.0)
                .map(|k| (k, -b[s[k]] / dir[k]))
                .min_by(|x, y| x.1.total_cmp(&y.1))?;
            for (i, &j) in s.iter().enumerate() {
                b[j] += t * dir[i];
            }
            b[s[k]] = 0.0;
            s.remove(k);
        }
        while !s.is_empty() {
            let xs = self.x.select_columns(&s);
            let g = xs.tr_mul(&xs) / self.n;
            let rhs = DVector::from_iterator(
                s.len(),
                s.iter().enumerate().map(|(k, &j)| {
                    xs.column(k).dot(self.y) / self.n - self.pen.active_weight(j, b[j])
                }),
            );
            let z = spd_solve(g, &rhs)?;
            let kept: Vec<usize> = (0..s.len()).filter(|&k| z[k] * b[s[k]] > 0.0).collect();
            if kept.len() == s.len() {
                let mut cand = DVector::zeros(b.len());
                for (k, &j) in s.iter().enumerate() {
                    cand[j] = z[k];
                }
                return Some(cand);
            }
            s = kept.into_iter().map(|k| s[k]).collect();
        }
        None
    }
}

/// Active-set sweeps between two full sweeps.
const ACTIVE_SWEEPS: usize = 100;

pub(crate) fn weighted_cd(
    d: &Dataset,
    pen: &Penalty,
    opts: &SolverOptions,
    record_trace: bool,
) -> Result<CdOutcome> {
    opts.validate(d.p())?;
    let p = d.p();
    let n = d.n() as f64;
    let beta = opts.warm_start.clone().unwrap_or_else(|| DVector::zeros(p));
    let r = d.residual(&beta);
    let mut eng = Engine {
        x: d.x(),
        y: d.y(),
        n,
        a: (0..p).map(|j| d.col_sq_norm(j) / n).collect(),
        pen,
        beta,
        r,
    };
    let mut trace = Vec::new();
    let g = eng.refresh();
    let mut residual = pen.violation(&eng.beta, &g);
    if record_trace {
        trace.push(eng.objective());
    }
    let mut sweeps = 0;
    let mut last_support: Option<Vec<usize>> = None;
    let inner_tol = opts.tol * 0.1;

    while residual > opts.tol {
        if sweeps >= opts.max_iters {
            return Err(Error::NoConvergence {
                iters: sweeps,
                residual,
            });
        }
        for j in 0..p {
            eng.update(j);
        }
        sweeps += 1;
        if record_trace {
            trace.push(eng.objective());
        }
        // sweep the active set until it settles; the cap hands badly
        // conditioned supports over to the polish step
        for _ in 0..ACTIVE_SWEEPS {
            let active = support(&eng.beta);
            if active.is_empty() || sweeps >= opts.max_iters {
                break;
            }
            let change = active.iter().map(|&j| eng.update(j)).fold(0.0, f64::max);
            sweeps += 1;
            if record_trace {
                trace.push(eng.objective());
            }
            if change <= inner_tol {
                break;
            }
        }

        let g = eng.refresh();
        residual = pen.violation(&eng.beta, &g);
        if residual <= opts.tol {
            break;
        }
        let s = support(&eng.beta);
        if last_support.as_ref() == Some(&s) {
            if let Some(cand) = eng.polish() {
                let rc = d.residual(&cand);
                let gc = d.correlation(&rc);
                let rc_res = pen.violation(&cand, &gc);
                let obj = eng.objective();
                let obj_c = eng.objective_of(&cand, &rc);
                if rc_res < residual && obj_c <= obj + 1e-14 * obj.abs().max(1.0) {
                    eng.beta = cand;
                    eng.r = rc;
                    residual = rc_res;
                    if record_trace {
                        trace.push(obj_c);
                    }
                }
            }
        }
        last_support = Some(s);
    }

    // one more polish attempt at a converged point tightens the subgradient
    if residual > 0.0 {
        if let Some(cand) = eng.polish() {
            let rc = d.residual(&cand);
            let rc_res = pen.violation(&cand, &d.correlation(&rc));
            if rc_res < residual {
                eng.beta = cand;
            }
        }
    }

    Ok(CdOutcome {
        beta: eng.beta,
        trace,
    })
}

/// Lasso by cyclic coordinate descent,
/// `argmin (1/2n)||y - X beta||^2 + lambda ||beta||_1`.
pub fn lasso_cd(d: &Dataset, lambda: f64, opts: &SolverOptions) -> Result<LassoFit> {
    check_lambda(lambda)?;
    let beta = if lambda >= lambda_max(d) && opts.warm_start.is_none() {
        opts.validate(d.p())?;
        DVector::zeros(d.p())
    } else {
        weighted_cd(d, &Penalty::uniform(d.p(), lambda), opts, false)?.beta
    };
    let fit = LassoFit::from_beta(d, beta, lambda);
    if fit.kkt_residual > opts.tol {
        return Err(Error::NoConvergence {
            iters: opts.max_iters,
            residual: fit.kkt_residual,
        });
    }
    Ok(fit)
}

/// Warm-started Lasso fits along a strictly decreasing grid.
pub fn lasso_path(d: &Dataset, grid: &[f64], opts: &SolverOptions) -> Result<Vec<LassoFit>> {
    for (i, &l) in grid.iter().enumerate() {
        check_lambda(l)?;
        if i > 0 && l >= grid[i - 1] {
            return Err(Error::InvalidParameter(
                "lambda grid must be strictly decreasing".into(),
            ));
        }
    }
    let mut fits: Vec<LassoFit> = Vec::with_capacity(grid.len());
    for &l in grid {
        let run = match fits.last() {
            Some(prev) => opts.with_warm_start(prev.beta.clone()),
            None => opts.clone(),
        };
        fits.push(lasso_cd(d, l, &run).map_err(|e| e.at_lambda(l))?);
    }
    Ok(fits)
}

pub(crate) fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "lambda must be positive and finite, got {lambda}"
        )))
    }
}

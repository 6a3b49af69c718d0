//! Second-step estimators built on a Lasso fit, and the two certificates that
//! define a refitting.
//!
//! Every strategy returns a [`RefitResult`] carrying its coefficients, the
//! parameters it consumed, and whether it passed [`certify_refitting`] (the
//! residual norm did not grow) and [`certify_sign_consistency`] (the
//! coefficients respect the Lasso subgradient).

use std::collections::BTreeMap;

use nalgebra::DVector;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::fit::{LassoFit, RefitResult, Strategy};
use crate::linalg::{embed, gram_spectral_norm, min_norm_lstsq};
use crate::solver::{check_lambda, lasso_cd, sign_constrained_ls, weighted_cd, Penalty, SolverOptions};
use crate::subgradient::sign;

/// Slack on the residual-norm comparison.
pub const REFIT_TOL: f64 = 1e-9;
/// Slack on coefficient magnitudes in the sign check.
pub const SIGN_TOL: f64 = 1e-6;

/// How the l1-ball radius is chosen. Only `s_hat * lambda` is supported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RadiusMode {
    #[default]
    SHatLambda,
}

/// Tuning parameters of a strategy; exactly the ones it needs must be set.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StrategyParams {
    pub lambda2: Option<f64>,
    pub phi: Option<f64>,
    pub k: Option<usize>,
    pub radius_mode: Option<RadiusMode>,
}

impl StrategyParams {
    pub fn lambda2(lambda2: f64) -> Self {
        Self {
            lambda2: Some(lambda2),
            ..Default::default()
        }
    }

    pub fn phi(phi: f64) -> Self {
        Self {
            phi: Some(phi),
            ..Default::default()
        }
    }

    pub fn k(k: usize) -> Self {
        Self {
            k: Some(k),
            ..Default::default()
        }
    }

    fn check_for(&self, strategy: Strategy) -> Result<()> {
        let needs = (
            matches!(
                strategy,
                Strategy::Boosted | Strategy::BoostedSupport | Strategy::Bregman
            ),
            strategy == Strategy::Relaxed,
            strategy == Strategy::BregmanIter,
        );
        let has = (self.lambda2.is_some(), self.phi.is_some(), self.k.is_some());
        for (name, need, have) in [
            ("lambda2", needs.0, has.0),
            ("phi", needs.1, has.1),
            ("k", needs.2, has.2),
        ] {
            if need && !have {
                return Err(Error::InvalidParameter(format!(
                    "strategy {strategy} requires {name}"
                )));
            }
            if have && !need {
                return Err(Error::InvalidParameter(format!(
                    "strategy {strategy} does not take {name}"
                )));
            }
        }
        if self.radius_mode.is_some() && strategy != Strategy::L1Ball {
            return Err(Error::InvalidParameter(format!(
                "strategy {strategy} does not take a radius mode"
            )));
        }
        Ok(())
    }
}

/// Options for the projected-gradient solve of the l1-ball refit.
#[derive(Debug, Clone, PartialEq)]
pub struct L1BallOptions {
    pub max_iters: usize,
    /// Target norm of the gradient mapping, in gradient units.
    pub tol: f64,
}

impl Default for L1BallOptions {
    fn default() -> Self {
        Self {
            max_iters: 200_000,
            tol: 1e-10,
        }
    }
}

/// Strategy runner with explicit solver options. The free functions of this
/// module use the defaults.
#[derive(Debug, Clone, Default)]
pub struct Refitter {
    pub solver: SolverOptions,
    pub l1ball: L1BallOptions,
}

impl Refitter {
    pub fn new(solver: SolverOptions) -> Self {
        Self {
            solver,
            ..Default::default()
        }
    }

    /// Dispatches on `strategy`, validating `params` first.
    pub fn run(
        &self,
        d: &Dataset,
        fit: &LassoFit,
        strategy: Strategy,
        params: &StrategyParams,
    ) -> Result<RefitResult> {
        params.check_for(strategy)?;
        match strategy {
            Strategy::Ls => self.ls(d, fit),
            Strategy::Sls => self.sls(d, fit),
            Strategy::Boosted => self.boosted(d, fit, params.lambda2.unwrap()),
            Strategy::BoostedSupport => self.boosted_support(d, fit, params.lambda2.unwrap()),
            Strategy::Bregman => self.bregman(d, fit, params.lambda2.unwrap()),
            Strategy::BregmanIter => self.bregman_iterations(d, fit.lambda, params.k.unwrap()),
            Strategy::Relaxed => self.relaxed(d, fit, params.phi.unwrap()),
            Strategy::L1Ball => self.l1ball(d, fit),
        }
    }

    pub fn ls(&self, d: &Dataset, fit: &LassoFit) -> Result<RefitResult> {
        let beta = if fit.support.is_empty() {
            DVector::zeros(d.p())
        } else {
            let xs = d.x().select_columns(&fit.support);
            embed(d.p(), &fit.support, &min_norm_lstsq(&xs, d.y()))
        };
        Ok(finish(d, fit, beta, Strategy::Ls, params_with(fit, &[])))
    }

    pub fn sls(&self, d: &Dataset, fit: &LassoFit) -> Result<RefitResult> {
        let e = &fit.equicorrelation;
        let beta = if e.is_empty() {
            DVector::zeros(d.p())
        } else {
            let signs: Vec<f64> = e.iter().map(|&j| sign(fit.rho[j])).collect();
            let sol = sign_constrained_ls(&d.x().select_columns(e), d.y(), &signs)?;
            embed(d.p(), e, &sol.beta)
        };
        Ok(finish(d, fit, beta, Strategy::Sls, params_with(fit, &[])))
    }

    pub fn boosted(&self, d: &Dataset, fit: &LassoFit, lambda2: f64) -> Result<RefitResult> {
        check_lambda(lambda2)?;
        let residual = d.with_response(d.residual(&fit.beta))?;
        let delta = lasso_cd(&residual, lambda2, &self.cold())?;
        let beta = &fit.beta + &delta.beta;
        Ok(finish(
            d,
            fit,
            beta,
            Strategy::Boosted,
            params_with(fit, &[("lambda2", lambda2)]),
        ))
    }

    pub fn boosted_support(
        &self,
        d: &Dataset,
        fit: &LassoFit,
        lambda2: f64,
    ) -> Result<RefitResult> {
        check_lambda(lambda2)?;
        let params = params_with(fit, &[("lambda2", lambda2)]);
        if fit.support.is_empty() {
            let beta = DVector::zeros(d.p());
            return Ok(finish(d, fit, beta, Strategy::BoostedSupport, params));
        }
        let sub = d
            .select_columns(&fit.support)
            .with_response(d.residual(&fit.beta))?;
        let delta = lasso_cd(&sub, lambda2, &self.cold())?;
        let beta = &fit.beta + embed(d.p(), &fit.support, &delta.beta);
        Ok(finish(d, fit, beta, Strategy::BoostedSupport, params))
    }

    pub fn bregman(&self, d: &Dataset, fit: &LassoFit, lambda2: f64) -> Result<RefitResult> {
        check_lambda(lambda2)?;
        check_lambda(fit.lambda)?;
        let out = weighted_cd(d, &Penalty::tilted(lambda2, &fit.rho), &self.solver, false)?;
        Ok(finish(
            d,
            fit,
            out.beta,
            Strategy::Bregman,
            params_with(fit, &[("lambda2", lambda2)]),
        ))
    }

    /// `k` Bregman iterations at a fixed penalty, starting from zero.
    ///
    /// The refitting certificate is taken against the first iterate, which is
    /// the plain Lasso at `lambda`.
    pub fn bregman_iterations(&self, d: &Dataset, lambda: f64, k: usize) -> Result<RefitResult> {
        check_lambda(lambda)?;
        if k == 0 {
            return Err(Error::InvalidParameter("k must be at least 1".into()));
        }
        let mut iterates = self.bregman_iterates(d, lambda, k)?;
        let last = iterates.pop().unwrap();
        let first = iterates.into_iter().next().unwrap_or_else(|| last.clone());
        let fit = LassoFit::from_beta(d, first, lambda);
        let mut params = BTreeMap::new();
        params.insert("lambda".to_string(), lambda);
        params.insert("k".to_string(), k as f64);
        Ok(RefitResult {
            refit_certified: certify_refitting(d, &fit, &last, REFIT_TOL),
            beta: last,
            strategy: Strategy::BregmanIter,
            params,
            sign_certified: None,
        })
    }

    /// All iterates `beta_1, ..., beta_k` of Bregman iterations at `lambda`.
    pub(crate) fn bregman_iterates(
        &self,
        d: &Dataset,
        lambda: f64,
        k: usize,
    ) -> Result<Vec<DVector<f64>>> {
        let mut rho = DVector::zeros(d.p());
        let mut beta = DVector::zeros(d.p());
        let mut out = Vec::with_capacity(k);
        for _ in 0..k {
            let opts = self.solver.with_warm_start(beta.clone());
            beta = weighted_cd(d, &Penalty::tilted(lambda, &rho), &opts, false)?.beta;
            rho += d.correlation(&d.residual(&beta)) / lambda;
            out.push(beta.clone());
        }
        Ok(out)
    }

    pub fn relaxed(&self, d: &Dataset, fit: &LassoFit, phi: f64) -> Result<RefitResult> {
        if !(phi > 0.0 && phi < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "phi must lie in (0, 1), got {phi}"
            )));
        }
        let params = params_with(fit, &[("phi", phi)]);
        if fit.support.is_empty() {
            let beta = DVector::zeros(d.p());
            return Ok(finish(d, fit, beta, Strategy::Relaxed, params));
        }
        let sub = d.select_columns(&fit.support);
        let sub_fit = lasso_cd(&sub, phi * fit.lambda, &self.cold())?;
        let beta = embed(d.p(), &fit.support, &sub_fit.beta);
        Ok(finish(d, fit, beta, Strategy::Relaxed, params))
    }

    /// Least squares over `{b : ||b - beta_hat||_1 <= s_hat lambda}` by
    /// accelerated projected gradient with restarts.
    pub fn l1ball(&self, d: &Dataset, fit: &LassoFit) -> Result<RefitResult> {
        let radius = fit.s_hat() as f64 * fit.lambda;
        let params = params_with(fit, &[("radius", radius)]);
        let beta = if radius == 0.0 {
            fit.beta.clone()
        } else {
            project_ls_onto_ball(d, &fit.beta, radius, &self.l1ball)?
        };
        Ok(finish(d, fit, beta, Strategy::L1Ball, params))
    }

    /// Solver options without the warm start, for subproblems of another size.
    fn cold(&self) -> SolverOptions {
        SolverOptions {
            warm_start: None,
            ..self.solver.clone()
        }
    }
}

fn params_with(fit: &LassoFit, extra: &[(&str, f64)]) -> BTreeMap<String, f64> {
    let mut params = BTreeMap::new();
    params.insert("lambda1".to_string(), fit.lambda);
    for (k, v) in extra {
        params.insert((*k).to_string(), *v);
    }
    params
}

fn finish(
    d: &Dataset,
    fit: &LassoFit,
    beta: DVector<f64>,
    strategy: Strategy,
    params: BTreeMap<String, f64>,
) -> RefitResult {
    RefitResult {
        refit_certified: certify_refitting(d, fit, &beta, REFIT_TOL),
        sign_certified: Some(certify_sign_consistency(fit, &beta, SIGN_TOL)),
        beta,
        strategy,
        params,
    }
}

fn project_ls_onto_ball(
    d: &Dataset,
    center: &DVector<f64>,
    radius: f64,
    opts: &L1BallOptions,
) -> Result<DVector<f64>> {
    let lip = gram_spectral_norm(d.x());
    if lip == 0.0 {
        return Ok(center.clone());
    }
    let step = 1.0 / lip;
    let loss = |b: &DVector<f64>| 0.5 * d.residual(b).norm_squared() / d.n() as f64;
    let project = |v: DVector<f64>| center + project_l1_ball(&(v - center), radius);
    // norm of the gradient mapping, in gradient units
    let mapping_gap = |b: &DVector<f64>| {
        let grad = -d.correlation(&d.residual(b));
        (project(b - grad * step) - b).amax() * lip
    };

    let mut x = center.clone();
    let mut momentum = x.clone();
    let mut t = 1.0f64;
    let mut best = x.clone();
    let mut best_loss = loss(&x);
    let mut prev_loss = best_loss;
    let mut gap = f64::INFINITY;
    for iter in 0..opts.max_iters {
        let grad = -d.correlation(&d.residual(&momentum));
        let next = project(&momentum - grad * step);
        gap = (&next - &momentum).amax() * lip;
        let next_loss = loss(&next);
        if next_loss < best_loss {
            best_loss = next_loss;
            best = next.clone();
        }
        if gap <= opts.tol {
            return Ok(best);
        }
        if iter % 25 == 24 {
            let pattern: Vec<i8> = (&next - center).iter().map(|&u| sign(u) as i8).collect();
            for on_boundary in [true, false] {
                if let Some(cand) = ball_face_solve(d, center, radius, &pattern, on_boundary) {
                    if mapping_gap(&cand) <= opts.tol {
                        return Ok(cand);
                    }
                }
            }
        }
        if next_loss > prev_loss {
            // restart the momentum from the last accepted point
            t = 1.0;
            momentum = x.clone();
            continue;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        momentum = &next + (&next - &x) * ((t - 1.0) / t_next);
        x = next;
        t = t_next;
        prev_loss = next_loss;
    }
    Err(Error::NoConvergence {
        iters: opts.max_iters,
        residual: gap,
    })
}

/// Exact minimizer over `{b : sign(b - center) = pattern}`, either on the
/// sphere (`on_boundary`) or with the constraint inactive. Coordinates whose
/// sign does not survive are dropped and the system re-solved.
fn ball_face_solve(
    d: &Dataset,
    center: &DVector<f64>,
    radius: f64,
    pattern: &[i8],
    on_boundary: bool,
) -> Option<DVector<f64>> {
    let mut active: Vec<usize> = (0..pattern.len()).filter(|&j| pattern[j] != 0).collect();
    let n = d.n() as f64;
    let r0 = d.residual(center);
    while !active.is_empty() && active.len() <= d.n() {
        let m = active.len();
        let xa = d.x().select_columns(&active);
        let c = xa.tr_mul(&r0) / n;
        let g = xa.tr_mul(&xa) / n;
        let u = if on_boundary {
            // [G s; s^T 0] [u; mu] = [c; radius]
            let mut k = nalgebra::DMatrix::zeros(m + 1, m + 1);
            k.view_mut((0, 0), (m, m)).copy_from(&g);
            let mut rhs = DVector::zeros(m + 1);
            for (i, &j) in active.iter().enumerate() {
                let s = pattern[j] as f64;
                k[(i, m)] = s;
                k[(m, i)] = s;
                rhs[i] = c[i];
            }
            rhs[m] = radius;
            let sol = k.lu().solve(&rhs)?;
            if !(sol[m] >= 0.0) {
                return None;
            }
            sol.rows(0, m).into_owned()
        } else {
            let u = g.lu().solve(&c)?;
            if u.lp_norm(1) > radius {
                return None;
            }
            u
        };
        let kept: Vec<usize> = (0..m)
            .filter(|&i| u[i] * pattern[active[i]] as f64 > 0.0)
            .collect();
        if kept.len() == m {
            let mut out = center.clone();
            for (i, &j) in active.iter().enumerate() {
                out[j] += u[i];
            }
            return Some(out);
        }
        active = kept.into_iter().map(|i| active[i]).collect();
    }
    None
}

/// Euclidean projection of `v` onto `{u : ||u||_1 <= radius}` (sort-based).
pub fn project_l1_ball(v: &DVector<f64>, radius: f64) -> DVector<f64> {
    if v.lp_norm(1) <= radius {
        return v.clone();
    }
    if radius <= 0.0 {
        return DVector::zeros(v.len());
    }
    let mut u: Vec<f64> = v.iter().map(|x| x.abs()).collect();
    u.sort_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &ui) in u.iter().enumerate() {
        cumsum += ui;
        let t = (cumsum - radius) / (i + 1) as f64;
        if ui > t {
            theta = t;
        } else {
            break;
        }
    }
    v.map(|x| sign(x) * (x.abs() - theta).max(0.0))
}

/// True iff `||y - X beta||_2 <= ||y - X beta_hat||_2 + tol`.
pub fn certify_refitting(d: &Dataset, fit: &LassoFit, beta: &DVector<f64>, tol: f64) -> bool {
    d.residual(beta).norm() <= d.residual(&fit.beta).norm() + tol
}

/// Checks the componentwise sign conditions against the fit's subgradient:
/// `rho_j = +1` forces `beta_j >= 0`, `rho_j = -1` forces `beta_j <= 0`, and
/// `|rho_j| < 1` forces `beta_j = 0`. Membership in the equicorrelation set
/// decides `|rho_j| = 1`; `tol` is the magnitude slack on `beta_j`.
pub fn certify_sign_consistency(fit: &LassoFit, beta: &DVector<f64>, tol: f64) -> bool {
    (0..beta.len()).all(|j| {
        if fit.equicorrelation.binary_search(&j).is_ok() {
            if fit.rho[j] > 0.0 {
                beta[j] >= -tol
            } else {
                beta[j] <= tol
            }
        } else {
            beta[j].abs() <= tol
        }
    })
}

pub fn ls_lasso(d: &Dataset, fit: &LassoFit) -> Result<RefitResult> {
    Refitter::default().ls(d, fit)
}

pub fn sls_lasso(d: &Dataset, fit: &LassoFit) -> Result<RefitResult> {
    Refitter::default().sls(d, fit)
}

pub fn boosted_lasso(d: &Dataset, fit: &LassoFit, lambda2: f64) -> Result<RefitResult> {
    Refitter::default().boosted(d, fit, lambda2)
}

pub fn boosted_support_lasso(d: &Dataset, fit: &LassoFit, lambda2: f64) -> Result<RefitResult> {
    Refitter::default().boosted_support(d, fit, lambda2)
}

pub fn bregman_lasso(d: &Dataset, fit: &LassoFit, lambda2: f64) -> Result<RefitResult> {
    Refitter::default().bregman(d, fit, lambda2)
}

pub fn bregman_iterations(d: &Dataset, lambda: f64, k: usize) -> Result<RefitResult> {
    Refitter::default().bregman_iterations(d, lambda, k)
}

pub fn relaxed_lasso(d: &Dataset, fit: &LassoFit, phi: f64) -> Result<RefitResult> {
    Refitter::default().relaxed(d, fit, phi)
}

pub fn l1ball_refit(d: &Dataset, fit: &LassoFit) -> Result<RefitResult> {
    Refitter::default().l1ball(d, fit)
}

//! Randomized self-checks: the solver against the exhaustive oracle, KKT
//! residuals, the orthogonal closed forms and the refitting certificates.
//!
//! The instance generators are public so tests and examples share them.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::dataset::{lambda_max, Dataset, GroundTruth};
use crate::error::{Error, Result};
use crate::experiments::{gen_response, gen_synthetic_design};
use crate::fit::Strategy;
use crate::ortho;
use crate::refit::{
    bregman_iterations, certify_refitting, certify_sign_consistency, ls_lasso, Refitter,
    StrategyParams, REFIT_TOL, SIGN_TOL,
};
use crate::solver::{lasso_bruteforce_oracle, lasso_cd, SolverOptions};

/// A simulated instance with its truth and realized noise.
#[derive(Debug, Clone)]
pub struct RandomInstance {
    pub dataset: Dataset,
    pub truth: GroundTruth,
    pub eps: DVector<f64>,
}

/// Correlated Gaussian design with mixing `kappa`, up to three Gaussian
/// nonzero coefficients and noise level `0.5`, all from `seed`.
pub fn random_instance(seed: u64, n: usize, p: usize, kappa: f64) -> RandomInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = gen_synthetic_design(n, p, kappa, &mut rng).expect("valid design parameters");
    let mut beta = DVector::zeros(p);
    for j in 0..p.min(3) {
        beta[j] = 2.0 * rng.sample::<f64, _>(StandardNormal);
    }
    let truth = GroundTruth::new(beta, 0.5);
    let (y, eps) = gen_response(&x, &truth.beta_star, truth.sigma, &mut rng).unwrap();
    RandomInstance {
        dataset: Dataset::new(x, y).expect("generated columns are nonzero"),
        truth,
        eps,
    }
}

pub fn random_dataset(seed: u64, n: usize, p: usize, kappa: f64) -> Dataset {
    random_instance(seed, n, p, kappa).dataset
}

/// Small instance with `n <= 12`, `p <= 6` and random correlation, for the
/// exhaustive oracle.
pub fn small_dataset(seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_0ac1e);
    let n = rng.random_range(2..=12);
    let p = rng.random_range(1..=6);
    let kappa = rng.random_range(0.0..0.8);
    random_dataset(rng.random(), n, p, kappa)
}

/// A correlated three-column instance on which least squares on the Lasso
/// support flips the sign of coordinate 1, while sign-constrained least
/// squares cannot. Returns the data and `lambda`.
pub fn sign_flip_instance() -> (Dataset, f64) {
    let x = DMatrix::from_row_slice(
        6,
        3,
        &[
            -0.2, -0.1, 0.6, //
            0.4, 1.1, 0.1, //
            1.0, 1.3, 0.4, //
            -0.8, -1.1, -0.3, //
            1.1, 1.1, 0.7, //
            -0.4, -0.2, -1.7,
        ],
    );
    let y = DVector::from_vec(vec![0.5, 0.1, -2.7, 4.4, -2.8, -2.2]);
    let d = Dataset::new(x, y).unwrap();
    let lambda = 0.3 * lambda_max(&d);
    (d, lambda)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Kkt,
    Brute,
    Ortho,
    Certificates,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kkt" => Ok(Suite::Kkt),
            "brute" => Ok(Suite::Brute),
            "ortho" => Ok(Suite::Ortho),
            "certificates" => Ok(Suite::Certificates),
            "all" => Ok(Suite::All),
            _ => Err(Error::InvalidParameter(format!(
                "unknown suite '{s}' (expected kkt, brute, ortho, certificates or all)"
            ))),
        }
    }
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

fn report(name: &str, passed: bool, detail: String) -> CheckReport {
    CheckReport {
        name: name.to_string(),
        passed,
        detail,
    }
}

pub fn run_suite(suite: Suite) -> Vec<CheckReport> {
    match suite {
        Suite::Kkt => kkt_suite(),
        Suite::Brute => brute_suite(),
        Suite::Ortho => ortho_suite(),
        Suite::Certificates => certificate_suite(),
        Suite::All => [kkt_suite(), brute_suite(), ortho_suite(), certificate_suite()].concat(),
    }
}

const FRACTIONS: [f64; 3] = [0.1, 0.5, 1.0];

fn kkt_suite() -> Vec<CheckReport> {
    let mut worst = 0.0f64;
    let mut failures = 0;
    let mut count = 0;
    for seed in 0..30 {
        let d = random_dataset(seed, 30, 60, 0.3 * (seed % 3) as f64);
        for frac in FRACTIONS {
            count += 1;
            match lasso_cd(&d, frac * lambda_max(&d), &SolverOptions::default()) {
                Ok(fit) => worst = worst.max(fit.kkt_residual),
                Err(_) => failures += 1,
            }
        }
    }
    vec![report(
        "kkt residual",
        failures == 0 && worst <= 1e-8,
        format!("{count} fits, {failures} failed, worst residual {worst:.2e}"),
    )]
}

fn brute_suite() -> Vec<CheckReport> {
    let (mut obj_gap, mut coef_gap) = (0.0f64, 0.0f64);
    let mut failures = 0;
    for seed in 0..100 {
        let d = small_dataset(seed);
        for frac in FRACTIONS {
            let lambda = frac * lambda_max(&d);
            match (
                lasso_cd(&d, lambda, &SolverOptions::default()),
                lasso_bruteforce_oracle(&d, lambda),
            ) {
                (Ok(fit), Ok(oracle)) => {
                    obj_gap = obj_gap.max(
                        (d.lasso_objective(&fit.beta, lambda) - d.lasso_objective(&oracle, lambda))
                            .abs(),
                    );
                    coef_gap = coef_gap.max((&fit.beta - &oracle).amax());
                }
                _ => failures += 1,
            }
        }
    }
    vec![report(
        "cd vs enumeration",
        failures == 0 && obj_gap <= 1e-10 && coef_gap <= 1e-6,
        format!("300 problems, {failures} failed, objective gap {obj_gap:.2e}, coefficient gap {coef_gap:.2e}"),
    )]
}

fn ortho_suite() -> Vec<CheckReport> {
    let p = 25;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let y = DVector::from_fn(p, |_, _| 2.0 * rng.sample::<f64, _>(StandardNormal));
    let d = Dataset::unnormalized(DMatrix::identity(p, p), y.clone()).unwrap();
    let n = p as f64;
    let lambda = 0.9;
    let mut out = Vec::new();

    let gap = |a: &DVector<f64>, b: &DVector<f64>| (a - b).amax();
    let run = || -> Result<Vec<(&'static str, f64, f64)>> {
        let fit = lasso_cd(&d, lambda / n, &SolverOptions::default())?;
        let mut rows = vec![(
            "lasso = soft threshold",
            gap(&fit.beta, &ortho::soft_threshold(&y, lambda)),
            1e-8,
        )];
        for ratio in [0.5, 1.0, 2.0] {
            let b = Refitter::default().bregman(&d, &fit, ratio * lambda / n)?;
            let closed = ortho::ortho_bregman(&y, lambda, ratio * lambda)?;
            rows.push(("bregman = firm threshold", gap(&b.beta, &closed), 1e-8));
        }
        for k in 1..=5 {
            let it = bregman_iterations(&d, lambda / n, k + 1)?;
            let closed = ortho::ortho_bregman_iterations(&y, lambda, k)?;
            rows.push(("bregman iterations closed form", gap(&it.beta, &closed), 1e-8));
        }
        let limit = Refitter::default().bregman(&d, &fit, 1e6 * lambda / n)?;
        rows.push((
            "large lambda2 = hard threshold",
            gap(&limit.beta, &ortho::hard_threshold(&y, lambda)),
            1e-5,
        ));
        Ok(rows)
    };
    match run() {
        Ok(rows) => {
            for (name, g, tol) in rows {
                out.push(report(name, g <= tol, format!("gap {g:.2e} (tol {tol:.0e})")));
            }
        }
        Err(e) => out.push(report("orthogonal closed forms", false, e.to_string())),
    }
    out
}

fn certificate_suite() -> Vec<CheckReport> {
    let mut out = Vec::new();
    let refitter = Refitter::default();
    let mut refit_fail: Vec<String> = Vec::new();
    let mut sls_sign_fail = 0;
    let mut errors = 0;
    for seed in 0..20 {
        let d = random_dataset(1000 + seed, 25, 40, 0.5);
        let lambda = 0.3 * lambda_max(&d);
        let Ok(fit) = lasso_cd(&d, lambda, &SolverOptions::default()) else {
            errors += 1;
            continue;
        };
        for s in Strategy::ALL {
            let params = match s {
                Strategy::Boosted | Strategy::BoostedSupport | Strategy::Bregman => {
                    StrategyParams::lambda2(0.7 * lambda)
                }
                Strategy::Relaxed => StrategyParams::phi(0.5),
                Strategy::BregmanIter => continue,
                _ => StrategyParams::default(),
            };
            match refitter.run(&d, &fit, s, &params) {
                Ok(r) => {
                    if !r.refit_certified {
                        refit_fail.push(format!("{s}@{seed}"));
                    }
                    if s == Strategy::Sls && r.sign_certified != Some(true) {
                        sls_sign_fail += 1;
                    }
                }
                Err(_) => errors += 1,
            }
        }
    }
    out.push(report(
        "refitting certificate",
        refit_fail.is_empty() && errors == 0,
        format!("20 instances x 7 strategies, {errors} errors, failures {refit_fail:?}"),
    ));
    out.push(report(
        "sls sign consistency",
        sls_sign_fail == 0 && errors == 0,
        format!("{sls_sign_fail} failures"),
    ));

    let (d, lambda) = sign_flip_instance();
    let flip = lasso_cd(&d, lambda, &SolverOptions::default())
        .and_then(|fit| Ok((fit.clone(), ls_lasso(&d, &fit)?)));
    match flip {
        Ok((fit, ls)) => {
            let ls_consistent = certify_sign_consistency(&fit, &ls.beta, SIGN_TOL);
            let reduces = certify_refitting(&d, &fit, &ls.beta, REFIT_TOL);
            out.push(report(
                "ls flips a lasso sign",
                !ls_consistent && reduces,
                format!("lasso {:?}, ls {:?}", fit.beta.as_slice(), ls.beta.as_slice()),
            ));
        }
        Err(e) => out.push(report("ls flips a lasso sign", false, e.to_string())),
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generators_are_deterministic() {
        assert_eq!(random_dataset(3, 10, 5, 0.2).y(), random_dataset(3, 10, 5, 0.2).y());
        let d = small_dataset(8);
        assert!(d.n() <= 12 && d.p() <= 6);
    }

    #[test]
    fn suite_names() {
        assert_eq!("ortho".parse::<Suite>().unwrap(), Suite::Ortho);
        assert!("nope".parse::<Suite>().is_err());
    }
}

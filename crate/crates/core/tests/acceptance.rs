//! The acceptance criteria, run in order with one PASS/FAIL line each.
//! Runs without the test harness so timings are not shared with other tests.

use std::cell::Cell;
use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use refit_lab::checks::{random_instance, sign_flip_instance, small_dataset, RandomInstance};
use refit_lab::experiments::{
    gen_response, gen_synthetic_design, run_scenario, Estimator, GridSettings, Scenario,
    ScenarioOutput, SyntheticConfig,
};
use refit_lab::ortho::{hard_threshold, ortho_bregman, ortho_bregman_iterations, soft_threshold};
use refit_lab::refit::{REFIT_TOL, SIGN_TOL};
use refit_lab::*;

thread_local! {
    static WORST_KKT: Cell<f64> = const { Cell::new(0.0) };
    static FITS: Cell<usize> = const { Cell::new(0) };
}

/// Every Lasso fit of the corpus goes through here so criterion 2 sees it.
fn lasso(d: &Dataset, lambda: f64) -> LassoFit {
    let fit = lasso_cd(d, lambda, &SolverOptions::default()).expect("lasso converges");
    WORST_KKT.with(|w| w.set(w.get().max(fit.kkt_residual)));
    FITS.with(|f| f.set(f.get() + 1));
    fit
}

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Outcome {
    Outcome { passed, detail }
}

/// Instance `i` of the shared corpus: alternating wide and tall designs with
/// varying correlation and penalty level.
fn corpus(i: u64) -> (RandomInstance, f64) {
    let (n, p) = if i.is_multiple_of(2) { (25, 40) } else { (40, 15) };
    let kappa = [0.0, 0.3, 0.6][(i % 3) as usize];
    let inst = random_instance(10_000 + i, n, p, kappa);
    let frac = [0.1, 0.25, 0.5, 0.8][(i % 4) as usize];
    let lambda = frac * lambda_max(&inst.dataset);
    (inst, lambda)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (mut obj, mut coef) = (0.0f64, 0.0f64);
    for seed in 0..200 {
        let d = small_dataset(seed);
        for frac in [0.1, 0.5, 1.0] {
            let lambda = frac * lambda_max(&d);
            let fit = lasso(&d, lambda);
            let oracle = lasso_bruteforce_oracle(&d, lambda).unwrap();
            obj = obj.max((d.lasso_objective(&fit.beta, lambda) - d.lasso_objective(&oracle, lambda)).abs());
            coef = coef.max((&fit.beta - &oracle).amax());
        }
    }
    let t = start.elapsed();
    outcome(
        obj <= 1e-10 && coef <= 1e-6 && t < Duration::from_secs(30),
        format!("600 problems, objective gap {obj:.1e}, coefficient gap {coef:.1e}, {t:.2?}"),
    )
}

fn strategy_params(s: Strategy, lambda: f64) -> StrategyParams {
    match s {
        Strategy::Boosted | Strategy::BoostedSupport => StrategyParams::lambda2(0.7 * lambda),
        Strategy::Bregman => StrategyParams::lambda2(lambda),
        Strategy::Relaxed => StrategyParams::phi(0.5),
        Strategy::BregmanIter => StrategyParams::k(3),
        _ => StrategyParams::default(),
    }
}

fn criterion_3() -> Outcome {
    let refitter = Refitter::default();
    let strategies = [
        Strategy::Ls,
        Strategy::Sls,
        Strategy::Boosted,
        Strategy::BoostedSupport,
        Strategy::Bregman,
        Strategy::Relaxed,
        Strategy::L1Ball,
    ];
    let mut failures = Vec::new();
    for i in 0..100 {
        let (inst, lambda) = corpus(i);
        let d = &inst.dataset;
        let fit = lasso(d, lambda);
        for s in strategies {
            match refitter.run(d, &fit, s, &strategy_params(s, lambda)) {
                Ok(r) if certify_refitting(d, &fit, &r.beta, REFIT_TOL) => {}
                Ok(_) => failures.push(format!("{s}@{i}")),
                Err(e) => failures.push(format!("{s}@{i}: {e}")),
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!("100 instances x 7 strategies, failures {failures:?}"),
    )
}

fn criterion_4() -> Outcome {
    let mut failures = 0;
    for i in 0..100 {
        let (inst, lambda) = corpus(i);
        let fit = lasso(&inst.dataset, lambda);
        let sls = sls_lasso(&inst.dataset, &fit).unwrap();
        failures += !certify_sign_consistency(&fit, &sls.beta, SIGN_TOL) as usize;
    }
    let (d, lambda) = sign_flip_instance();
    let fit = lasso(&d, lambda);
    let ls = ls_lasso(&d, &fit).unwrap();
    let ls_fails = !certify_sign_consistency(&fit, &ls.beta, SIGN_TOL);
    outcome(
        failures == 0 && ls_fails,
        format!("sls failures {failures}/100; constructed instance ls sign-inconsistent: {ls_fails}"),
    )
}

fn criterion_5() -> Outcome {
    let mut worst = 0.0f64;
    let mut above = 0.0f64;
    for i in 0..50 {
        let (inst, lambda) = corpus(i);
        let d = &inst.dataset;
        let fit = lasso(d, lambda);
        for lambda2 in [lambda, 2.0 * lambda] {
            worst = worst.max((boosted_lasso(d, &fit, lambda2).unwrap().beta - &fit.beta).amax());
        }
        let lmax = lambda_max(d);
        let null_fit = lasso(d, 1.2 * lmax);
        let lambda2 = (0.1 + 0.015 * i as f64) * lmax;
        let b = boosted_lasso(d, &null_fit, lambda2).unwrap();
        above = above.max((b.beta - lasso(d, lambda2).beta).amax());
    }
    outcome(
        worst <= 1e-8 && above <= 1e-8,
        format!("gap to the fit {worst:.1e}; above lambda_max gap to the lasso {above:.1e}"),
    )
}

fn criterion_6() -> Outcome {
    let mut violations = 0;
    let mut pairs = 0;
    let mut slack = f64::INFINITY;
    for i in 0..100 {
        let inst = random_instance(20_000 + i, 40, [15, 60][(i % 2) as usize], 0.3);
        let d = &inst.dataset;
        let n = d.n() as f64;
        let noise = (d.x().transpose() * &inst.eps / n).amax();
        let lambda1 = 2.0 * noise * (1.0 + 0.5 * (i % 5) as f64);
        let fit = lasso(d, lambda1);
        let err = |b: &DVector<f64>| (d.x() * (&inst.truth.beta_star - b)).norm_squared() / n;
        for t in [0.1, 0.3, 0.5, 0.7, 0.9] {
            let lambda2 = lambda1 * (0.5 + 0.5 * t);
            let b = boosted_lasso(d, &fit, lambda2).unwrap().beta;
            let lhs = err(&b) + (2.0 * lambda2 - lambda1) * (&b - &fit.beta).lp_norm(1);
            let rhs = err(&fit.beta);
            pairs += 1;
            slack = slack.min(rhs - lhs);
            violations += (lhs > rhs + 1e-8) as usize;
        }
    }

    let (n, p, sigma, delta) = (50, 20, 1.0, 0.1);
    let lambda = 2.0 * sigma * (2.0 * (p as f64 / delta).ln() / n as f64).sqrt();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let x = gen_synthetic_design(n, p, 0.3, &mut rng).unwrap();
    let held = (0..2000)
        .filter(|_| {
            let (_, eps) = gen_response(&x, &DVector::zeros(p), sigma, &mut rng).unwrap();
            (x.transpose() * eps / n as f64).amax() <= lambda / 2.0
        })
        .count();
    let freq = held as f64 / 2000.0;
    outcome(
        violations == 0 && pairs == 500 && freq >= 0.9,
        format!("{violations} violations in {pairs} pairs (min slack {slack:.1e}); event frequency {freq:.3}"),
    )
}

fn criterion_7() -> Outcome {
    let mut violations = 0;
    let mut slack = f64::INFINITY;
    for i in 0..100 {
        let (inst, lambda) = corpus(i);
        let d = &inst.dataset;
        let fit = lasso(d, lambda);
        for ratio in [0.5, 1.0, 2.0] {
            let b = bregman_lasso(d, &fit, ratio * lambda).unwrap().beta;
            let lhs = (d.x() * (&fit.beta - &b)).norm_squared() + d.residual(&b).norm_squared();
            let rhs = d.residual(&fit.beta).norm_squared();
            slack = slack.min(rhs - lhs);
            violations += (lhs > rhs + 1e-6) as usize;
        }
    }
    outcome(violations == 0, format!("{violations} violations in 300 cases (min slack {slack:.1e})"))
}

fn criterion_8() -> Outcome {
    let mut worst = 0.0f64;
    for i in 0..50 {
        let (inst, lambda) = corpus(i);
        let d = &inst.dataset;
        let fit = lasso(d, lambda);
        let b = bregman_lasso(d, &fit, 1e6 * lambda).unwrap().beta;
        worst = worst.max((b - sls_lasso(d, &fit).unwrap().beta).amax());
    }
    outcome(worst <= 1e-4, format!("max gap {worst:.1e} over 50 instances"))
}

fn criterion_9() -> Outcome {
    let (mut st, mut firm, mut iter, mut hard) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let p = rng.random_range(1..40);
        let y = DVector::from_fn(p, |_, _| 2.0 * rng.sample::<f64, _>(StandardNormal));
        let lambda: f64 = rng.random_range(0.1..2.0);
        let n = p as f64;
        let d = Dataset::unnormalized(DMatrix::identity(p, p), y.clone()).unwrap();
        let fit = lasso(&d, lambda / n);
        st = st.max((&fit.beta - soft_threshold(&y, lambda)).amax());
        for ratio in [0.5, 1.0, 2.0] {
            let b = bregman_lasso(&d, &fit, ratio * lambda / n).unwrap().beta;
            firm = firm.max((b - ortho_bregman(&y, lambda, ratio * lambda).unwrap()).amax());
        }
        for k in 1..=5 {
            let b = bregman_iterations(&d, lambda / n, k + 1).unwrap().beta;
            iter = iter.max((b - ortho_bregman_iterations(&y, lambda, k).unwrap()).amax());
        }
        if y.iter().all(|v| (v.abs() - lambda).abs() > 1e-3) {
            let b = bregman_lasso(&d, &fit, 1e6 * lambda / n).unwrap().beta;
            hard = hard.max((b - hard_threshold(&y, lambda)).amax());
        }
    }
    outcome(
        st <= 1e-8 && firm <= 1e-8 && iter <= 1e-8 && hard <= 1e-5,
        format!("soft {st:.1e}, firm {firm:.1e}, iterations {iter:.1e}, hard {hard:.1e}"),
    )
}

fn criterion_2() -> Outcome {
    let worst = WORST_KKT.with(Cell::get);
    let fits = FITS.with(Cell::get);
    outcome(worst <= 1e-8, format!("{fits} fits, worst kkt residual {worst:.1e}"))
}

fn low_correlation(grids: &GridSettings) -> (ScenarioOutput, Duration) {
    let scenario = Scenario::Synthetic(SyntheticConfig::low_correlation(0, 20));
    let start = Instant::now();
    let out = run_scenario(&scenario, &Estimator::all(), grids, &Refitter::default()).unwrap();
    (out, start.elapsed())
}

fn median(out: &ScenarioOutput, e: Estimator, measure: &str) -> f64 {
    let mut v = out.values(e, measure);
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len().is_multiple_of(2) {
        0.5 * (v[m - 1] + v[m])
    } else {
        v[m]
    }
}

fn write_outputs(out: &ScenarioOutput, dir: &Path) -> (Vec<u8>, Vec<u8>) {
    fs::create_dir_all(dir).unwrap();
    out.write_csv(&dir.join("results.csv")).unwrap();
    out.write_summary(&dir.join("summary.json")).unwrap();
    (
        fs::read(dir.join("results.csv")).unwrap(),
        fs::read(dir.join("summary.json")).unwrap(),
    )
}

fn criterion_10(full: &ScenarioOutput, full_time: Duration) -> Outcome {
    let lasso = Estimator::Lasso;
    let sls = Estimator::Refit(Strategy::Sls);
    let (est_l, est_s) = (median(full, lasso, "estimation"), median(full, sls, "estimation"));
    let (sp_l, sp_s) = (median(full, lasso, "sparsity"), median(full, sls, "sparsity"));
    let (reduced, reduced_time) = low_correlation(&GridSettings::reduced());
    let (r_est_l, r_est_s) = (median(&reduced, lasso, "estimation"), median(&reduced, sls, "estimation"));
    let passed = full.failures.is_empty()
        && est_s <= est_l
        && sp_s <= sp_l
        && full_time < Duration::from_secs(300)
        && reduced.failures.is_empty()
        && reduced_time < Duration::from_secs(60);
    outcome(
        passed,
        format!(
            "full grids {full_time:.1?}, {} failures: median estimation sls {est_s:.3} vs lasso {est_l:.3}, \
             median sparsity sls {sp_s} vs lasso {sp_l}; 10x10 grids {reduced_time:.1?}, {} failures \
             (estimation sls {r_est_s:.3} vs lasso {r_est_l:.3})",
            full.failures.len(),
            reduced.failures.len()
        ),
    )
}

fn criterion_11(first: &(Vec<u8>, Vec<u8>), dir: &Path) -> Outcome {
    let (again, _) = low_correlation(&GridSettings::default());
    let second = write_outputs(&again, &dir.join("second"));
    outcome(
        first.0 == second.0 && first.1 == second.1,
        format!(
            "results.csv {} bytes, summary.json {} bytes, identical: {}",
            first.0.len(),
            first.1.len(),
            first == &second
        ),
    )
}

fn main() -> ExitCode {
    let dir = tempfile::tempdir().unwrap();
    let mut results: Vec<(u32, Outcome)> = Vec::new();
    let mut report = |k: u32, o: Outcome| {
        println!("criterion {k:>2} {}: {}", if o.passed { "PASS" } else { "FAIL" }, o.detail);
        results.push((k, o));
    };
    report(1, criterion_1());
    let later = [
        (3, criterion_3 as fn() -> Outcome),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let mut deferred = Vec::new();
    for (k, f) in later {
        deferred.push((k, f()));
    }
    // criterion 2 covers every fit above
    report(2, criterion_2());
    for (k, o) in deferred {
        report(k, o);
    }
    let (full, full_time) = low_correlation(&GridSettings::default());
    let first = write_outputs(&full, &dir.path().join("first"));
    report(10, criterion_10(&full, full_time));
    report(11, criterion_11(&first, dir.path()));

    let failed: Vec<u32> = results.iter().filter(|r| !r.1.passed).map(|r| r.0).collect();
    println!("{} criteria, {} failed {failed:?}", results.len(), failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Three-fold cross-validation over the default grids for a few estimators,
//! then a refit at the chosen cell on the full data.

use refit_lab::checks::random_instance;
use refit_lab::experiments::{cross_validate, fit_estimator, metrics, CVSpec, Estimator};
use refit_lab::{Refitter, Result, Strategy};

pub fn run() -> Result<()> {
    let inst = random_instance(5, 40, 100, 0.3);
    let d = &inst.dataset;
    let refitter = Refitter::default();
    println!("{:<16} {:>10} {:>10} {:>10} {:>8}", "estimator", "lambda1", "second", "cv mse", "est.err");
    for e in [
        Estimator::Lasso,
        Estimator::Refit(Strategy::Sls),
        Estimator::Refit(Strategy::Relaxed),
        Estimator::Refit(Strategy::BregmanIter),
    ] {
        let cv = CVSpec::for_estimator(d, e, 20, 20, 1)?;
        let (choice, table) = cross_validate(d, e, &cv, &refitter)?;
        let beta = fit_estimator(d, e, choice.lambda1, choice.second, &refitter)?;
        let m = metrics(&inst.truth, d.x(), &beta)?;
        let second = choice.second.map_or("-".to_string(), |v| format!("{v:.4}"));
        println!(
            "{:<16} {:>10.4} {:>10} {:>10.4} {:>8.4}   ({} cells)",
            e.name(),
            choice.lambda1,
            second,
            choice.mse,
            m.estimation,
            table.cells.len()
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    run()
}

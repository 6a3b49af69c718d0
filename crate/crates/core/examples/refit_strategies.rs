//! Every refitting strategy on one Lasso fit, with both certificates and the
//! estimation error against the known truth.

use refit_lab::checks::random_instance;
use refit_lab::experiments::metrics;
use refit_lab::{lambda_max, lasso_cd, Refitter, Result, SolverOptions, Strategy, StrategyParams};

pub fn run() -> Result<()> {
    let inst = random_instance(3, 40, 200, 0.3);
    let d = &inst.dataset;
    let fit = lasso_cd(d, 0.25 * lambda_max(d), &SolverOptions::default())?;
    let lasso = metrics(&inst.truth, d.x(), &fit.beta)?;
    println!("lasso: s_hat {}, estimation error {:.4}", fit.s_hat(), lasso.estimation);

    let refitter = Refitter::default();
    println!(
        "\n{:<16} {:>9} {:>7} {:>7} {:>10}",
        "strategy", "est.err", "s_hat", "refit", "sign"
    );
    for s in Strategy::ALL {
        let params = match s {
            Strategy::Boosted | Strategy::BoostedSupport => StrategyParams::lambda2(0.5 * fit.lambda),
            Strategy::Bregman => StrategyParams::lambda2(2.0 * fit.lambda),
            Strategy::Relaxed => StrategyParams::phi(0.3),
            Strategy::BregmanIter => StrategyParams::k(3),
            _ => StrategyParams::default(),
        };
        let r = refitter.run(d, &fit, s, &params)?;
        let m = metrics(&inst.truth, d.x(), &r.beta)?;
        let sign = r.sign_certified.map_or("-".to_string(), |b| b.to_string());
        println!(
            "{:<16} {:>9.4} {:>7} {:>7} {:>10}",
            s.name(),
            m.estimation,
            m.sparsity,
            r.refit_certified,
            sign
        );
    }
    Ok(())
}

fn main() -> Result<()> {
    run()
}

//! Fit the Lasso on a correlated design, check the KKT conditions and walk a
//! warm-started regularization path.
//!
//! ```text
//! cargo run --release --example solve_lasso
//! ```

use refit_lab::checks::random_instance;
use refit_lab::experiments::log_grid;
use refit_lab::{lambda_max, lasso_cd, lasso_path, Result, SolverOptions};

pub fn run() -> Result<()> {
    let inst = random_instance(7, 50, 120, 0.3);
    let d = &inst.dataset;
    let lmax = lambda_max(d);
    println!("n = {}, p = {}, lambda_max = {lmax:.4}", d.n(), d.p());
    println!("true support: {:?}", inst.truth.support_star);

    let fit = lasso_cd(d, 0.2 * lmax, &SolverOptions::default())?;
    println!(
        "lambda = {:.4}: support {:?}, equicorrelation {:?}, kkt residual {:.1e}",
        fit.lambda, fit.support, fit.equicorrelation, fit.kkt_residual
    );
    for &j in &fit.support {
        println!("  beta[{j}] = {:+.4}  (truth {:+.4})", fit.beta[j], inst.truth.beta_star[j]);
    }

    let mut grid = log_grid(0.05 * lmax, lmax, 8)?;
    grid.reverse();
    let path = lasso_path(d, &grid, &SolverOptions::default())?;
    println!("\n{:>10} {:>8} {:>12}", "lambda", "s_hat", "objective");
    for f in &path {
        println!("{:>10.4} {:>8} {:>12.6}", f.lambda, f.s_hat(), d.lasso_objective(&f.beta, f.lambda));
    }
    Ok(())
}

fn main() -> Result<()> {
    run()
}

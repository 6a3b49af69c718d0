//! As the second penalty grows, the Bregman refit converges to least squares
//! under the Lasso sign constraints. Plain least squares on the support can
//! flip a sign instead.

use refit_lab::checks::{random_dataset, sign_flip_instance};
use refit_lab::{bregman_lasso, lambda_max, lasso_cd, ls_lasso, sls_lasso, Result, SolverOptions};

pub fn run() -> Result<()> {
    let d = random_dataset(11, 30, 60, 0.5);
    let fit = lasso_cd(&d, 0.2 * lambda_max(&d), &SolverOptions::default())?;
    let sls = sls_lasso(&d, &fit)?;
    println!("lasso support {:?}", fit.support);
    println!("{:>12} {:>14} {:>10}", "lambda2/l1", "max|b - sls|", "s_hat");
    for ratio in [0.1, 0.5, 1.0, 10.0, 1e2, 1e4, 1e6] {
        let b = bregman_lasso(&d, &fit, ratio * fit.lambda)?;
        let s_hat = b.beta.iter().filter(|v| **v != 0.0).count();
        println!("{ratio:>12.0e} {:>14.2e} {s_hat:>10}", (&b.beta - &sls.beta).amax());
    }

    let (d, lambda) = sign_flip_instance();
    let fit = lasso_cd(&d, lambda, &SolverOptions::default())?;
    let ls = ls_lasso(&d, &fit)?;
    let sls = sls_lasso(&d, &fit)?;
    println!("\nlasso {:.3?}", fit.beta.as_slice());
    println!("ls    {:.3?}  sign consistent: {:?}", ls.beta.as_slice(), ls.sign_certified);
    println!("sls   {:.3?}  sign consistent: {:?}", sls.beta.as_slice(), sls.sign_certified);
    Ok(())
}

fn main() -> Result<()> {
    run()
}

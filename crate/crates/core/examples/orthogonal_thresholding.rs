//! On the identity design the Lasso is soft thresholding, the Bregman refit is
//! firm thresholding and a huge second penalty gives hard thresholding. The
//! general solvers see `X = I_p` with every penalty divided by `p`.

use nalgebra::{DMatrix, DVector};
use refit_lab::ortho::{hard_threshold, ortho_bregman, ortho_bregman_iterations, soft_threshold};
use refit_lab::{bregman_iterations, bregman_lasso, lasso_cd, Dataset, Result, SolverOptions};

pub fn run() -> Result<()> {
    let y = DVector::from_iterator(13, (0..13).map(|i| -3.0 + 0.5 * i as f64));
    let (lambda1, lambda2) = (1.0, 1.0);
    println!("{:>6} {:>8} {:>8} {:>8} {:>8}", "y", "soft", "firm", "hard", "iter k=2");
    let st = soft_threshold(&y, lambda1);
    let firm = ortho_bregman(&y, lambda1, lambda2)?;
    let ht = hard_threshold(&y, lambda1);
    let it = ortho_bregman_iterations(&y, lambda1, 2)?;
    for j in 0..y.len() {
        println!("{:>6.2} {:>8.3} {:>8.3} {:>8.3} {:>8.3}", y[j], st[j], firm[j], ht[j], it[j]);
    }

    let p = y.len();
    let n = p as f64;
    let d = Dataset::unnormalized(DMatrix::identity(p, p), y.clone())?;
    let fit = lasso_cd(&d, lambda1 / n, &SolverOptions::default())?;
    let b = bregman_lasso(&d, &fit, lambda2 / n)?;
    let iters = bregman_iterations(&d, lambda1 / n, 3)?;
    println!("\ngeneral solver vs closed form:");
    println!("  lasso      {:.1e}", (&fit.beta - &st).amax());
    println!("  bregman    {:.1e}", (&b.beta - &firm).amax());
    println!("  iterations {:.1e}", (&iters.beta - &it).amax());
    Ok(())
}

fn main() -> Result<()> {
    run()
}

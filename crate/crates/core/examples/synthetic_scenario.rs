//! The low-correlation synthetic scenario (n = 40, p = 200, s = 4, sigma = 0.5,
//! kappa = 0.3) with every estimator, summarized by medians.
//!
//! ```text
//! cargo run --release --example synthetic_scenario            # 3 replicas, 10x10 grids
//! cargo run --release --example synthetic_scenario -- 20 full  # 20 replicas, 50x50 grids
//! ```

use refit_lab::experiments::{run_scenario, Estimator, GridSettings, Scenario, SyntheticConfig};
use refit_lab::{Refitter, Result};

pub fn run_with(replicas: usize, grids: GridSettings) -> Result<()> {
    let scenario = Scenario::Synthetic(SyntheticConfig::low_correlation(0, replicas));
    let out = run_scenario(&scenario, &Estimator::all(), &grids, &Refitter::default())?;
    println!("{replicas} replicas, {} failures", out.failures.len());
    let summary = out.summary();
    println!("{:<16} {:>10} {:>10} {:>9} {:>9}", "median", "prediction", "estimation", "sparsity", "hamming");
    for (name, measures) in &summary.strategies {
        let m = |k: &str| measures.get(k).map_or(f64::NAN, |q| q.median);
        println!(
            "{name:<16} {:>10.4} {:>10.4} {:>9.1} {:>9.4}",
            m("prediction"),
            m("estimation"),
            m("sparsity"),
            m("hamming")
        );
    }
    Ok(())
}

pub fn run() -> Result<()> {
    run_with(3, GridSettings::reduced())
}

fn main() -> Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let replicas = args.first().and_then(|a| a.parse().ok()).unwrap_or(3);
    let grids = if args.get(1).map(String::as_str) == Some("full") {
        GridSettings::default()
    } else {
        GridSettings::reduced()
    };
    run_with(replicas, grids)
}

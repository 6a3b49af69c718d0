//! The semi-real protocol on a design file: the first `p` columns, a support
//! of correlated columns and a target signal-to-noise ratio.
//!
//! Without an argument a 72-row stand-in design is generated; pass a CSV path
//! (no header) to use real data.

use std::path::PathBuf;

use refit_lab::experiments::{
    run_scenario, standin_design, write_matrix_csv, CorrModeName, Estimator, GridSettings,
    Scenario, SemiRealConfig,
};
use refit_lab::{Refitter, Result, Strategy};

pub fn run_on(design_path: PathBuf) -> Result<()> {
    let strategies = [
        Estimator::Lasso,
        Estimator::Refit(Strategy::Ls),
        Estimator::Refit(Strategy::Sls),
        Estimator::Refit(Strategy::Bregman),
    ];
    for corr_mode in [CorrModeName::Normal, CorrModeName::High] {
        let scenario = Scenario::SemiReal(SemiRealConfig {
            design_path: design_path.clone(),
            header: false,
            p: 150,
            s: 5,
            snr: 3.0,
            corr_mode,
            seed: 0,
            replicas: 2,
        });
        let out = run_scenario(&scenario, &strategies, &GridSettings::reduced(), &Refitter::default())?;
        println!("{corr_mode:?} correlation, {} failures", out.failures.len());
        for e in strategies {
            let est = out.values(e, "estimation");
            let ham = out.values(e, "hamming");
            println!("  {:<10} estimation {:.3?}  hamming {:.3?}", e.name(), est, ham);
        }
    }
    Ok(())
}

pub fn run() -> Result<()> {
    let path = std::env::temp_dir().join(format!("refit_lab_standin_{}.csv", std::process::id()));
    write_matrix_csv(&path, &standin_design(72, 200, 0))?;
    let res = run_on(path.clone());
    let _ = std::fs::remove_file(&path);
    res
}

fn main() -> Result<()> {
    match std::env::args().nth(1) {
        Some(p) => run_on(p.into()),
        None => run(),
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use refit_lab::checks::{run_suite, Suite};
use refit_lab::experiments::{
    read_matrix_csv, run_scenario, CorrModeName, Estimator, GridSettings, Scenario, SemiRealConfig,
    SyntheticConfig,
};
use refit_lab::{
    lasso_cd, Dataset, Error, LassoFit, Refitter, Result, SolverOptions, Strategy, StrategyParams,
};

#[derive(Parser)]
#[command(name = "refit-lab", version, about = "Lasso fits, refits and simulation runs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fit the Lasso and write the fit as JSON.
    Solve(SolveArgs),
    /// Refit a saved Lasso fit with one strategy.
    Refit(RefitArgs),
    /// Run a replicated simulation scenario.
    Experiment(ExperimentArgs),
    /// Run the built-in oracle and certificate checks.
    OracleCheck {
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

#[derive(Args)]
struct DataArgs {
    /// Design matrix, comma separated, one row per observation.
    x: PathBuf,
    /// Response, one value per line (or a single row).
    y: PathBuf,
    /// Skip one header line in both files.
    #[arg(long)]
    header: bool,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 100_000)]
    max_iters: usize,
}

impl SolverArgs {
    fn options(&self) -> SolverOptions {
        SolverOptions {
            max_iters: self.max_iters,
            tol: self.tol,
            warm_start: None,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    lambda: f64,
    /// Output file (stdout when absent).
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Also report coefficients in the units of the raw design.
    #[arg(long)]
    back_scale: bool,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Args)]
struct RefitArgs {
    /// Fit written by `solve`.
    fit: PathBuf,
    #[command(flatten)]
    data: DataArgs,
    #[arg(long)]
    strategy: Strategy,
    #[arg(long)]
    lambda2: Option<f64>,
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(short, long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    solver: SolverArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScenarioKind {
    Synthetic,
    Semireal,
}

#[derive(Clone, Copy, ValueEnum)]
enum CorrArg {
    Normal,
    High,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long, value_enum)]
    scenario: ScenarioKind,
    #[arg(long, default_value_t = 40)]
    n: usize,
    #[arg(long, default_value_t = 200)]
    p: usize,
    #[arg(long, default_value_t = 4)]
    s: usize,
    #[arg(long, default_value_t = 0.3)]
    kappa: f64,
    #[arg(long, default_value_t = 0.5)]
    sigma: f64,
    /// Design CSV for the semi-real scenario.
    #[arg(long)]
    design: Option<PathBuf>,
    #[arg(long)]
    header: bool,
    #[arg(long, default_value_t = 3.0)]
    snr: f64,
    #[arg(long, value_enum, default_value = "normal")]
    corr: CorrArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    replicas: usize,
    /// Comma-separated estimator names, or `all`.
    #[arg(long, default_value = "all")]
    strategies: String,
    #[arg(long, default_value_t = 3)]
    folds: usize,
    #[arg(long, default_value_t = 50)]
    grid_points: usize,
    #[arg(long, default_value_t = 50)]
    grid2_points: usize,
    /// Directory for results.csv and summary.json.
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverArgs,
}

/// What `solve` writes and `refit` reads.
#[derive(Serialize, Deserialize)]
struct FitFile {
    lambda: f64,
    beta: Vec<f64>,
    rho: Vec<f64>,
    support: Vec<usize>,
    equicorrelation: Vec<usize>,
    kkt_residual: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    beta_raw_units: Option<Vec<f64>>,
}

#[derive(Serialize)]
struct RefitFile {
    strategy: Strategy,
    beta: Vec<f64>,
    params: std::collections::BTreeMap<String, f64>,
    refit_certified: bool,
    sign_certified: Option<bool>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_numerical() { 3 } else { 2 })
        }
    }
}

fn configure_threads() -> Result<()> {
    let Ok(v) = std::env::var("REFIT_LAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = v
        .parse()
        .ok()
        .filter(|&t| t > 0)
        .ok_or_else(|| Error::InvalidParameter(format!("REFIT_LAB_THREADS must be a positive integer, got '{v}'")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| Error::InvalidParameter(e.to_string()))
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Solve(a) => solve(a),
        Command::Refit(a) => refit(a),
        Command::Experiment(a) => experiment(a),
        Command::OracleCheck { suite } => {
            let reports = run_suite(suite.parse::<Suite>()?);
            for r in &reports {
                println!("{r}");
            }
            let failed = reports.iter().filter(|r| !r.passed).count();
            println!("{} checks, {failed} failed", reports.len());
            Ok(if failed == 0 {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            })
        }
    }
}

fn load_data(a: &DataArgs) -> Result<Dataset> {
    let x = read_matrix_csv(&a.x, a.header)?;
    let y = as_vector(read_matrix_csv(&a.y, a.header)?, &a.y)?;
    Dataset::new(x, y)
}

fn as_vector(m: DMatrix<f64>, path: &Path) -> Result<DVector<f64>> {
    if m.ncols() == 1 {
        Ok(m.column(0).into_owned())
    } else if m.nrows() == 1 {
        Ok(m.row(0).transpose())
    } else {
        Err(Error::Dimension(format!(
            "{}: response must be a single row or column, got {}x{}",
            path.display(),
            m.nrows(),
            m.ncols()
        )))
    }
}

fn emit<T: Serialize>(value: &T, out: Option<&Path>) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    match out {
        Some(path) => fs::write(path, text).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn solve(a: SolveArgs) -> Result<ExitCode> {
    let d = load_data(&a.data)?;
    let fit = lasso_cd(&d, a.lambda, &a.solver.options())?;
    let file = FitFile {
        lambda: fit.lambda,
        beta: fit.beta.as_slice().to_vec(),
        rho: fit.rho.as_slice().to_vec(),
        support: fit.support.clone(),
        equicorrelation: fit.equicorrelation.clone(),
        kkt_residual: fit.kkt_residual,
        beta_raw_units: a.back_scale.then(|| d.back_scale(&fit.beta).as_slice().to_vec()),
    };
    emit(&file, a.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn refit(a: RefitArgs) -> Result<ExitCode> {
    let d = load_data(&a.data)?;
    let text = fs::read_to_string(&a.fit).map_err(|source| Error::Io {
        path: a.fit.clone(),
        source,
    })?;
    let saved: FitFile = serde_json::from_str(&text)?;
    if saved.beta.len() != d.p() {
        return Err(Error::Dimension(format!(
            "fit has {} coefficients, design has {} columns",
            saved.beta.len(),
            d.p()
        )));
    }
    let fit = LassoFit::from_beta(&d, DVector::from_vec(saved.beta), saved.lambda);
    let params = StrategyParams {
        lambda2: a.lambda2,
        phi: a.phi,
        k: a.k,
        radius_mode: None,
    };
    let r = Refitter::new(a.solver.options()).run(&d, &fit, a.strategy, &params)?;
    let file = RefitFile {
        strategy: r.strategy,
        beta: r.beta.as_slice().to_vec(),
        params: r.params,
        refit_certified: r.refit_certified,
        sign_certified: r.sign_certified,
    };
    emit(&file, a.out.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn experiment(a: ExperimentArgs) -> Result<ExitCode> {
    let scenario = match a.scenario {
        ScenarioKind::Synthetic => Scenario::Synthetic(SyntheticConfig {
            n: a.n,
            p: a.p,
            s: a.s,
            kappa: a.kappa,
            sigma: a.sigma,
            seed: a.seed,
            replicas: a.replicas,
        }),
        ScenarioKind::Semireal => Scenario::SemiReal(SemiRealConfig {
            design_path: a.design.clone().ok_or_else(|| {
                Error::InvalidParameter("--design is required for the semireal scenario".into())
            })?,
            header: a.header,
            p: a.p,
            s: a.s,
            snr: a.snr,
            corr_mode: match a.corr {
                CorrArg::Normal => CorrModeName::Normal,
                CorrArg::High => CorrModeName::High,
            },
            seed: a.seed,
            replicas: a.replicas,
        }),
    };
    let strategies: Vec<Estimator> = if a.strategies == "all" {
        Estimator::all()
    } else {
        a.strategies
            .split(',')
            .map(|s| s.trim().parse())
            .collect::<Result<_>>()?
    };
    let grids = GridSettings {
        folds: a.folds,
        points1: a.grid_points,
        points2: a.grid2_points,
    };
    let output = run_scenario(&scenario, &strategies, &grids, &Refitter::new(a.solver.options()))?;
    fs::create_dir_all(&a.out).map_err(|source| Error::Io {
        path: a.out.clone(),
        source,
    })?;
    output.write_csv(&a.out.join("results.csv"))?;
    output.write_summary(&a.out.join("summary.json"))?;
    for f in &output.failures {
        let who = f.strategy.map_or("data generation".to_string(), |s| s.to_string());
        eprintln!("replica {} ({who}): {}", f.replica, f.message);
    }
    println!("failures: {}", output.failures.len());
    Ok(ExitCode::SUCCESS)
}

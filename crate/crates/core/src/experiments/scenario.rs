//! Replicated simulation runs and their tabular outputs.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use super::cv::{cross_validate, fit_estimator, CVSpec, CvChoice, Estimator};
use super::design::{
    gen_response, gen_synthetic_design, load_design_csv, make_beta_star, select_support,
    snr_to_sigma, BetaMode, CorrMode,
};
use super::metrics::{metrics, MetricsReport};
use crate::dataset::{Dataset, GroundTruth};
use crate::error::{Error, Result};
use crate::refit::Refitter;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyntheticConfig {
    pub n: usize,
    pub p: usize,
    pub s: usize,
    pub kappa: f64,
    pub sigma: f64,
    pub seed: u64,
    pub replicas: usize,
}

impl SyntheticConfig {
    /// The low-correlation setting: `n = 40, p = 200, s = 4, sigma = 0.5,
    /// kappa = 0.3`.
    pub fn low_correlation(seed: u64, replicas: usize) -> Self {
        Self {
            n: 40,
            p: 200,
            s: 4,
            kappa: 0.3,
            sigma: 0.5,
            seed,
            replicas,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemiRealConfig {
    pub design_path: PathBuf,
    /// Skip one header line in the design file.
    pub header: bool,
    pub p: usize,
    pub s: usize,
    pub snr: f64,
    pub corr_mode: CorrModeName,
    pub seed: u64,
    pub replicas: usize,
}

/// Serializable mirror of [`CorrMode`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrModeName {
    Normal,
    High,
}

impl From<CorrModeName> for CorrMode {
    fn from(m: CorrModeName) -> Self {
        match m {
            CorrModeName::Normal => CorrMode::Normal,
            CorrModeName::High => CorrMode::High,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "scenario", rename_all = "snake_case")]
pub enum Scenario {
    Synthetic(SyntheticConfig),
    SemiReal(SemiRealConfig),
}

impl Scenario {
    pub fn seed(&self) -> u64 {
        match self {
            Scenario::Synthetic(c) => c.seed,
            Scenario::SemiReal(c) => c.seed,
        }
    }

    pub fn replicas(&self) -> usize {
        match self {
            Scenario::Synthetic(c) => c.replicas,
            Scenario::SemiReal(c) => c.replicas,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        match self {
            Scenario::Synthetic(c) => {
                if c.n == 0 || c.p == 0 {
                    return bad("n and p must be at least 1".into());
                }
                if c.s > c.p {
                    return bad(format!("s = {} exceeds p = {}", c.s, c.p));
                }
                if !(0.0..=1.0).contains(&c.kappa) {
                    return bad(format!("kappa must lie in [0, 1], got {}", c.kappa));
                }
                if !(c.sigma >= 0.0 && c.sigma.is_finite()) {
                    return bad(format!("sigma must be nonnegative, got {}", c.sigma));
                }
            }
            Scenario::SemiReal(c) => {
                if c.s > c.p {
                    return bad(format!("s = {} exceeds p = {}", c.s, c.p));
                }
                if !(c.snr > 0.0) {
                    return bad(format!("snr must be positive, got {}", c.snr));
                }
            }
        }
        Ok(())
    }
}

/// Grid sizes for cross-validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSettings {
    pub folds: usize,
    pub points1: usize,
    pub points2: usize,
}

impl Default for GridSettings {
    fn default() -> Self {
        Self {
            folds: 3,
            points1: 50,
            points2: 50,
        }
    }
}

impl GridSettings {
    /// The 10 x 10 grid used for quick runs.
    pub fn reduced() -> Self {
        Self {
            folds: 3,
            points1: 10,
            points2: 10,
        }
    }
}

/// One simulated data set.
#[derive(Debug, Clone)]
pub struct Replica {
    pub index: usize,
    pub dataset: Dataset,
    pub truth: GroundTruth,
    /// Realized noise.
    pub eps: DVector<f64>,
    pub cv_seed: u64,
}

/// Random stream of one replica: the master seed, stream `index`.
pub fn replica_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

pub fn synthetic_replica(c: &SyntheticConfig, index: usize) -> Result<Replica> {
    let mut rng = replica_rng(c.seed, index);
    let x = gen_synthetic_design(c.n, c.p, c.kappa, &mut rng)?;
    let support: Vec<usize> = (0..c.s).collect();
    let mut truth = make_beta_star(c.p, c.s, BetaMode::Ones, &support, &mut rng)?;
    truth.sigma = c.sigma;
    let (y, eps) = gen_response(&x, &truth.beta_star, c.sigma, &mut rng)?;
    Ok(Replica {
        index,
        dataset: Dataset::new(x, y)?,
        truth,
        eps,
        cv_seed: rng.next_u64(),
    })
}

/// A semi-real replica on an already loaded and normalized design.
pub fn semireal_replica(c: &SemiRealConfig, x: &DMatrix<f64>, index: usize) -> Result<Replica> {
    let mut rng = replica_rng(c.seed, index);
    let support = select_support(x, c.s, c.corr_mode.into(), &mut rng)?;
    let mut truth = make_beta_star(x.ncols(), c.s, BetaMode::PmOnes, &support, &mut rng)?;
    truth.sigma = snr_to_sigma(x, &truth.beta_star, c.snr)?;
    let (y, eps) = gen_response(x, &truth.beta_star, truth.sigma, &mut rng)?;
    Ok(Replica {
        index,
        dataset: Dataset::new(x.clone(), y)?,
        truth,
        eps,
        cv_seed: rng.next_u64(),
    })
}

/// One long-format result line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub replica: usize,
    pub strategy: Estimator,
    pub measure: &'static str,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Selection {
    pub replica: usize,
    pub strategy: Estimator,
    pub choice: CvChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Failure {
    pub replica: usize,
    /// `None` when the data generation itself failed.
    pub strategy: Option<Estimator>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioOutput {
    pub scenario: Scenario,
    pub grids: GridSettings,
    pub strategies: Vec<Estimator>,
    pub rows: Vec<ResultRow>,
    pub selections: Vec<Selection>,
    pub failures: Vec<Failure>,
}

/// Median and quartiles of one measure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartiles {
    pub count: usize,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

impl Quartiles {
    /// Linear interpolation between order statistics. `None` for no data.
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let at = |q: f64| {
            let pos = q * (v.len() - 1) as f64;
            let lo = pos.floor() as usize;
            let hi = pos.ceil() as usize;
            v[lo] + (v[hi] - v[lo]) * (pos - lo as f64)
        };
        Some(Self {
            count: v.len(),
            q1: at(0.25),
            median: at(0.5),
            q3: at(0.75),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub config: Scenario,
    pub grids: GridSettings,
    pub replicas: usize,
    pub failures: usize,
    /// strategy -> measure -> quartiles
    pub strategies: BTreeMap<String, BTreeMap<String, Quartiles>>,
}

impl ScenarioOutput {
    /// Values of `measure` for `strategy`, in replica order.
    pub fn values(&self, strategy: Estimator, measure: &str) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.strategy == strategy && r.measure == measure)
            .map(|r| r.value)
            .collect()
    }

    pub fn summary(&self) -> Summary {
        let mut strategies = BTreeMap::new();
        for &e in &self.strategies {
            let mut per_measure = BTreeMap::new();
            for m in MetricsReport::MEASURES {
                if let Some(q) = Quartiles::of(&self.values(e, m)) {
                    per_measure.insert(m.to_string(), q);
                }
            }
            strategies.insert(e.name().to_string(), per_measure);
        }
        Summary {
            config: self.scenario.clone(),
            grids: self.grids,
            replicas: self.scenario.replicas(),
            failures: self.failures.len(),
            strategies,
        }
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        writeln!(w, "replica,strategy,measure,value").map_err(io)?;
        for r in &self.rows {
            writeln!(w, "{},{},{},{}", r.replica, r.strategy, r.measure, r.value).map_err(io)?;
        }
        w.flush().map_err(io)
    }

    pub fn write_summary(&self, path: &Path) -> Result<()> {
        let io = |source| Error::Io {
            path: path.to_path_buf(),
            source,
        };
        let mut w = BufWriter::new(File::create(path).map_err(io)?);
        serde_json::to_writer_pretty(&mut w, &self.summary())?;
        writeln!(w).map_err(io)?;
        w.flush().map_err(io)
    }
}

/// Generates every replica, cross-validates each strategy on it, refits at the
/// chosen cell on the full replica and scores the estimate against the truth.
///
/// Failures of a replica or of one strategy on a replica are recorded and the
/// batch continues. Output order depends only on the inputs.
pub fn run_scenario(
    scenario: &Scenario,
    strategies: &[Estimator],
    grids: &GridSettings,
    refitter: &Refitter,
) -> Result<ScenarioOutput> {
    scenario.validate()?;
    if strategies.is_empty() {
        return Err(Error::InvalidParameter("no strategies requested".into()));
    }
    let design = match scenario {
        Scenario::SemiReal(c) => Some(load_design_csv(&c.design_path, c.p, c.header)?),
        Scenario::Synthetic(_) => None,
    };

    let outcomes: Vec<ReplicaOutcome> = (0..scenario.replicas())
        .into_par_iter()
        .map(|index| {
            let replica = match (scenario, &design) {
                (Scenario::Synthetic(c), _) => synthetic_replica(c, index),
                (Scenario::SemiReal(c), Some(x)) => semireal_replica(c, x, index),
                (Scenario::SemiReal(_), None) => unreachable!(),
            };
            match replica {
                Ok(r) => run_replica(&r, strategies, grids, refitter),
                Err(e) => ReplicaOutcome {
                    failures: vec![Failure {
                        replica: index,
                        strategy: None,
                        message: e.to_string(),
                    }],
                    ..Default::default()
                },
            }
        })
        .collect();

    let mut out = ScenarioOutput {
        scenario: scenario.clone(),
        grids: *grids,
        strategies: strategies.to_vec(),
        rows: Vec::new(),
        selections: Vec::new(),
        failures: Vec::new(),
    };
    for o in outcomes {
        out.rows.extend(o.rows);
        out.selections.extend(o.selections);
        out.failures.extend(o.failures);
    }
    Ok(out)
}

#[derive(Debug, Default)]
struct ReplicaOutcome {
    rows: Vec<ResultRow>,
    selections: Vec<Selection>,
    failures: Vec<Failure>,
}

fn run_replica(
    r: &Replica,
    strategies: &[Estimator],
    grids: &GridSettings,
    refitter: &Refitter,
) -> ReplicaOutcome {
    let results: Vec<(Estimator, Result<(CvChoice, MetricsReport)>)> = strategies
        .par_iter()
        .map(|&e| (e, evaluate(r, e, grids, refitter)))
        .collect();
    let mut out = ReplicaOutcome::default();
    for (strategy, res) in results {
        match res {
            Ok((choice, report)) => {
                out.selections.push(Selection {
                    replica: r.index,
                    strategy,
                    choice,
                });
                for (measure, value) in MetricsReport::MEASURES.iter().zip(report.values()) {
                    out.rows.push(ResultRow {
                        replica: r.index,
                        strategy,
                        measure,
                        value,
                    });
                }
            }
            Err(e) => out.failures.push(Failure {
                replica: r.index,
                strategy: Some(strategy),
                message: e.to_string(),
            }),
        }
    }
    out
}

fn evaluate(
    r: &Replica,
    estimator: Estimator,
    grids: &GridSettings,
    refitter: &Refitter,
) -> Result<(CvChoice, MetricsReport)> {
    let mut cv = CVSpec::for_estimator(&r.dataset, estimator, grids.points1, grids.points2, r.cv_seed)?;
    cv.folds = grids.folds;
    let (choice, _) = cross_validate(&r.dataset, estimator, &cv, refitter)?;
    let beta = fit_estimator(&r.dataset, estimator, choice.lambda1, choice.second, refitter)?;
    Ok((choice, metrics(&r.truth, r.dataset.x(), &beta)?))
}

/// A stand-in for an expression design: `rows x cols` values driven by a few
/// latent factors, so that some columns are strongly correlated.
pub fn standin_design(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    const FACTORS: usize = 6;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let factors = DMatrix::from_fn(rows, FACTORS, |_, _| rng.sample::<f64, _>(StandardNormal));
    let mut x = DMatrix::zeros(rows, cols);
    for j in 0..cols {
        let k = rng.random_range(0..FACTORS);
        let loading: f64 = rng.random_range(0.0..1.5);
        let level: f64 = rng.random_range(1.0..10.0);
        for i in 0..rows {
            let noise: f64 = rng.sample(StandardNormal);
            x[(i, j)] = level + loading * factors[(i, k)] + noise;
        }
    }
    x
}

/// Writes a matrix as comma-separated rows without a header.
pub fn write_matrix_csv(path: &Path, x: &DMatrix<f64>) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut w = BufWriter::new(File::create(path).map_err(io)?);
    for row in x.row_iter() {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(",")).map_err(io)?;
    }
    w.flush().map_err(io)
}

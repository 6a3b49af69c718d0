//! Simulation protocols: data generation, cross-validation, performance
//! measures and replicated scenario runs.

pub mod cv;
pub mod design;
pub mod metrics;
pub mod scenario;

pub use cv::{
    cross_validate, fit_estimator, fold_assignment, log_grid, uniform_grid, CVSpec, CvCell,
    CvChoice, CvTable, Estimator, SecondKind, MAX_BREGMAN_ITERATIONS,
};
pub use design::{
    gen_response, gen_synthetic_design, load_design_csv, make_beta_star, pearson,
    read_matrix_csv, select_support, snr_to_sigma, BetaMode, CorrMode,
};
pub use metrics::{metrics, MetricsReport};
pub use scenario::{
    replica_rng, run_scenario, semireal_replica, standin_design, synthetic_replica,
    write_matrix_csv, CorrModeName, Failure, GridSettings, Quartiles, Replica, ResultRow,
    Scenario, ScenarioOutput, SemiRealConfig, Summary, SyntheticConfig,
};

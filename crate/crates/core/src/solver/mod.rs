//! Lasso solvers: coordinate descent, an exhaustive KKT oracle for small
//! problems, and sign-constrained least squares.

mod cd;
mod nnls;
mod oracle;

pub use cd::{lasso_cd, lasso_path, SolverOptions};
pub(crate) use cd::{check_lambda, weighted_cd, Penalty};
pub use nnls::{sign_constrained_ls, SignedLsSolution};
pub use oracle::{lasso_bruteforce_oracle, ORACLE_MAX_P};

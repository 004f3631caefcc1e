//! Penalized regression paths and cross-validated tuning.

pub mod adaptive;
pub mod cv;
pub mod penalty;
pub mod solver;

pub use adaptive::{adaptive_weights, resolve_adaptive, weights_from_pilot};
pub use cv::{cv_select, fold_assignment, CvResult};
pub use penalty::{
    soft_threshold, univariate_mcp_solution, Lasso, Mcp, Penalty, PenaltyKind, PenaltyRegistry, PenaltySpec, Scad,
};
pub use solver::{
    fit_default_path, fit_path, lambda_grid, penalized_objective, LambdaGrid, PathPoint, PathSolution, DEFAULT_NLAMBDA,
};

use crate::data::Dataset;
use crate::error::Result;

/// Evaluates `penalty.derivative` for a spec (λ-scaled, before penalty factors).
pub fn penalty_derivative(spec: &PenaltySpec, u: f64, lambda: f64) -> Result<f64> {
    Ok(spec.build()?.derivative(u, lambda))
}

/// Support chosen by `folds`-fold CV for one penalty kind.
pub fn select_support(
    data: &Dataset,
    kind: PenaltyKind,
    folds: usize,
    seed: u64,
) -> Result<crate::measures::VariableSet> {
    Ok(cv_select(data, &PenaltySpec::for_kind(kind), folds, seed)?
        .chosen_support()
        .clone())
}

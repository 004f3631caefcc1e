//! Simulation designs, replications and their aggregation.

pub mod aggregate;
pub mod replication;
pub mod scenario;

pub use aggregate::{aggregate, sigma_sweep, simulate, tidy_sweep, AggregateRow, AggregateTable, SweepPoint};
pub use replication::{
    assess_against, candidates_from_fits, fit_models_under_check, run_models_under_check, run_replication,
    run_replications, MethodFit, MethodReport, ReplicationReport, WeightedEstimate, CV_FOLDS,
};
pub use scenario::{default_sigmas, generate_scenario, linspace, Scenario, ScenarioSpec};

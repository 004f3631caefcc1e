//! Candidate model sets and their data-driven weights.

pub mod candidates;
pub mod weighting;

pub use candidates::{all_subsets, collect_candidates, complexity_prior, CandidateSet, Provenance};
pub use weighting::{
    arm_split, arm_weights, bicp_log_weights, bicp_weights, compute_weights, Arm, Bicp, Weighting, WeightingConfig,
    WeightingRegistry,
};

use crate::data::Dataset;
use crate::error::Result;
use crate::paths::{fit_default_path, PathSolution, PenaltySpec};

/// Cap on candidate size: min(n − 4, 200). Leaves ARM refits on half the
/// data some headroom and bounds the cost of very long p ≫ n paths.
pub fn default_max_size(n: usize) -> usize {
    n.saturating_sub(4).min(200)
}

/// Full-data Lasso, SCAD and MCP paths on their default grids.
pub fn candidate_paths(data: &Dataset) -> Result<Vec<PathSolution>> {
    [PenaltySpec::lasso(), PenaltySpec::scad(), PenaltySpec::mcp()]
        .iter()
        .map(|spec| fit_default_path(data, spec))
        .collect()
}

/// Candidates from [`candidate_paths`], capped at [`default_max_size`].
pub fn build_candidates(data: &Dataset) -> Result<CandidateSet> {
    Ok(collect_candidates(
        &candidate_paths(data)?,
        Some(default_max_size(data.n())),
    ))
}

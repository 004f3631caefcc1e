//! One simulated dataset: select with the four methods, weight the
//! candidates, and compare estimated with true F and G.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::Scenario;
use crate::data::Dataset;
use crate::ensemble::{collect_candidates, compute_weights, default_max_size, CandidateSet, WeightingConfig};
use crate::error::Result;
use crate::measures::{assess, f_measure, g_measure, CandidateEnsemble, VariableSet};
use crate::numeric::derive_seed;
use crate::paths::{cv_select, fit_default_path, CvResult, PathSolution, PenaltyKind, PenaltySpec};

pub const CV_FOLDS: usize = 5;

/// Outcome of tuning one selector.
#[derive(Debug, Clone)]
pub struct MethodFit {
    pub method: PenaltyKind,
    pub result: std::result::Result<CvResult, String>,
}

impl MethodFit {
    pub fn selected(&self) -> Option<&VariableSet> {
        self.result.as_ref().ok().map(|cv| cv.chosen_support())
    }
}

/// Lasso, adaptive Lasso, MCP and SCAD, each tuned by 5-fold CV with the
/// same folds. A failing method is reported, not propagated.
pub fn fit_models_under_check(data: &Dataset, seed: u64) -> Vec<MethodFit> {
    PenaltyKind::ALL
        .par_iter()
        .map(|&method| MethodFit {
            method,
            result: cv_select(data, &PenaltySpec::for_kind(method), CV_FOLDS, seed).map_err(|e| e.to_string()),
        })
        .collect()
}

/// The four selected supports (or error messages), in [`PenaltyKind::ALL`] order.
pub fn run_models_under_check(
    data: &Dataset,
    seed: u64,
) -> Vec<(PenaltyKind, std::result::Result<VariableSet, String>)> {
    fit_models_under_check(data, seed)
        .into_iter()
        .map(|m| {
            let sel = m.result.map(|cv| cv.chosen_support().clone());
            (m.method, sel)
        })
        .collect()
}

/// Candidates from the Lasso, SCAD and MCP full-data paths, reusing the
/// paths already computed during tuning when available.
pub fn candidates_from_fits(data: &Dataset, fits: &[MethodFit]) -> Result<CandidateSet> {
    let mut paths: Vec<PathSolution> = Vec::new();
    for kind in [PenaltyKind::Lasso, PenaltyKind::Scad, PenaltyKind::Mcp] {
        match fits
            .iter()
            .find(|f| f.method == kind)
            .and_then(|f| f.result.as_ref().ok())
        {
            Some(cv) => paths.push(cv.path.clone()),
            None => paths.push(fit_default_path(data, &PenaltySpec::for_kind(kind))?),
        }
    }
    Ok(collect_candidates(&paths, Some(default_max_size(data.n()))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightedEstimate {
    pub weighting: String,
    pub f_hat: f64,
    pub g_hat: f64,
    pub sd_f: f64,
    pub sd_g: f64,
    pub d_f: f64,
    pub d_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub method: PenaltyKind,
    pub selected: Option<VariableSet>,
    pub error: Option<String>,
    pub true_f: f64,
    pub true_g: f64,
    pub estimates: Vec<WeightedEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationReport {
    pub replication: u64,
    pub true_support: VariableSet,
    pub n_candidates: usize,
    pub methods: Vec<MethodReport>,
    /// Weightings that failed on this dataset, with the reason.
    pub weighting_errors: Vec<(String, String)>,
}

impl ReplicationReport {
    pub fn method(&self, kind: PenaltyKind) -> Option<&MethodReport> {
        self.methods.iter().find(|m| m.method == kind)
    }
}

/// Seeds for replication `rep`: (data, cv, arm).
fn replication_seeds(master: u64, rep: u64) -> (u64, u64, u64) {
    let base = derive_seed(master, rep);
    (rep, derive_seed(base, 1), derive_seed(base, 2))
}

/// Assessment of each selected model against every weighted ensemble.
pub fn assess_against(
    truth: &VariableSet,
    fits: &[MethodFit],
    ensembles: &[(String, CandidateEnsemble)],
) -> Vec<MethodReport> {
    fits.iter()
        .map(|fit| match fit.selected() {
            Some(sel) => {
                let true_f = f_measure(sel, truth);
                let true_g = g_measure(sel, truth);
                let estimates = ensembles
                    .iter()
                    .map(|(name, ens)| {
                        let r = assess(sel, ens);
                        WeightedEstimate {
                            weighting: name.clone(),
                            f_hat: r.f_hat,
                            g_hat: r.g_hat,
                            sd_f: r.sd_f,
                            sd_g: r.sd_g,
                            d_f: (r.f_hat - true_f).abs(),
                            d_g: (r.g_hat - true_g).abs(),
                        }
                    })
                    .collect();
                MethodReport {
                    method: fit.method,
                    selected: Some(sel.clone()),
                    error: None,
                    true_f,
                    true_g,
                    estimates,
                }
            }
            None => MethodReport {
                method: fit.method,
                selected: None,
                error: fit.result.as_ref().err().cloned(),
                true_f: f64::NAN,
                true_g: f64::NAN,
                estimates: Vec::new(),
            },
        })
        .collect()
}

/// Full pipeline on replication `rep` of `scenario`. The weighting configs'
/// own seeds are replaced by a stream derived from (scenario seed, rep), so
/// a replication gives the same numbers alone or inside a batch.
pub fn run_replication(scenario: &Scenario, rep: u64, weightings: &[WeightingConfig]) -> Result<ReplicationReport> {
    let (data_stream, cv_seed, arm_seed) = replication_seeds(scenario.spec().seed, rep);
    let data = scenario.generate(data_stream);
    let fits = fit_models_under_check(&data, cv_seed);
    let candidates = candidates_from_fits(&data, &fits)?;

    let mut ensembles = Vec::new();
    let mut weighting_errors = Vec::new();
    for cfg in weightings {
        let mut cfg = cfg.clone();
        cfg.seed = arm_seed;
        match compute_weights(&data, &candidates, &cfg) {
            Ok(ens) => ensembles.push((cfg.method.clone(), ens)),
            Err(e) => weighting_errors.push((cfg.method.clone(), e.to_string())),
        }
    }
    Ok(ReplicationReport {
        replication: rep,
        true_support: scenario.true_support().clone(),
        n_candidates: candidates.len(),
        methods: assess_against(scenario.true_support(), &fits, &ensembles),
        weighting_errors,
    })
}

/// Replications 0..reps, run in parallel and returned in index order.
pub fn run_replications(
    scenario: &Scenario,
    reps: usize,
    weightings: &[WeightingConfig],
) -> Result<Vec<ReplicationReport>> {
    (0..reps as u64)
        .into_par_iter()
        .map(|r| run_replication(scenario, r, weightings))
        .collect()
}

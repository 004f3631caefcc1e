//! Means and standard errors over replications, and the σ sweep.

use serde::{Deserialize, Serialize};

use super::replication::{run_replications, ReplicationReport};
use super::scenario::{Scenario, ScenarioSpec};
use crate::data::Family;
use crate::ensemble::WeightingConfig;
use crate::error::{PaviError, Result};
use crate::numeric::{mean, sample_sd};
use crate::paths::PenaltyKind;

/// Per-replication quantities that get aggregated.
pub const TRUE_MEASURES: [&str; 2] = ["F", "G"];
pub const ESTIMATED_MEASURES: [&str; 6] = ["F_hat", "G_hat", "sd_F", "sd_G", "d_F", "d_G"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: PenaltyKind,
    /// `None` for the true measures, which do not depend on a weighting.
    pub weighting: Option<String>,
    pub measure: String,
    pub mean: f64,
    /// Sample sd / √count.
    pub se: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AggregateTable {
    pub reps: usize,
    pub rows: Vec<AggregateRow>,
}

impl AggregateTable {
    pub fn get(&self, method: PenaltyKind, weighting: Option<&str>, measure: &str) -> Option<&AggregateRow> {
        self.rows
            .iter()
            .find(|r| r.method == method && r.weighting.as_deref() == weighting && r.measure == measure)
    }

    /// Mean of a row, NaN if absent.
    pub fn mean_of(&self, method: PenaltyKind, weighting: Option<&str>, measure: &str) -> f64 {
        self.get(method, weighting, measure).map_or(f64::NAN, |r| r.mean)
    }
}

fn row(method: PenaltyKind, weighting: Option<&str>, measure: &str, values: &[f64]) -> AggregateRow {
    AggregateRow {
        method,
        weighting: weighting.map(str::to_string),
        measure: measure.to_string(),
        mean: mean(values),
        se: if values.is_empty() {
            f64::NAN
        } else {
            sample_sd(values) / (values.len() as f64).sqrt()
        },
        count: values.len(),
    }
}

/// Aggregates reports in replication order. Methods or weightings that
/// failed in a replication are left out of that replication's values.
pub fn aggregate(reports: &[ReplicationReport]) -> AggregateTable {
    let mut weightings: Vec<String> = Vec::new();
    for r in reports {
        for m in &r.methods {
            for e in &m.estimates {
                if !weightings.contains(&e.weighting) {
                    weightings.push(e.weighting.clone());
                }
            }
        }
    }
    let mut rows = Vec::new();
    for method in PenaltyKind::ALL {
        let reps: Vec<_> = reports
            .iter()
            .filter_map(|r| r.method(method))
            .filter(|m| m.selected.is_some())
            .collect();
        let f: Vec<f64> = reps.iter().map(|m| m.true_f).collect();
        let g: Vec<f64> = reps.iter().map(|m| m.true_g).collect();
        rows.push(row(method, None, "F", &f));
        rows.push(row(method, None, "G", &g));
        for w in &weightings {
            let est: Vec<_> = reps
                .iter()
                .filter_map(|m| m.estimates.iter().find(|e| &e.weighting == w))
                .collect();
            let pick =
                |f: fn(&super::replication::WeightedEstimate) -> f64| est.iter().map(|e| f(e)).collect::<Vec<f64>>();
            rows.push(row(method, Some(w), "F_hat", &pick(|e| e.f_hat)));
            rows.push(row(method, Some(w), "G_hat", &pick(|e| e.g_hat)));
            rows.push(row(method, Some(w), "sd_F", &pick(|e| e.sd_f)));
            rows.push(row(method, Some(w), "sd_G", &pick(|e| e.sd_g)));
            rows.push(row(method, Some(w), "d_F", &pick(|e| e.d_f)));
            rows.push(row(method, Some(w), "d_G", &pick(|e| e.d_g)));
        }
    }
    AggregateTable {
        reps: reports.len(),
        rows,
    }
}

/// `reps` replications of `spec` and their aggregate.
pub fn simulate(
    spec: &ScenarioSpec,
    reps: usize,
    weightings: &[WeightingConfig],
) -> Result<(Vec<ReplicationReport>, AggregateTable)> {
    let scenario = Scenario::new(spec.clone())?;
    let reports = run_replications(&scenario, reps, weightings)?;
    let table = aggregate(&reports);
    Ok((reports, table))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub sigma: f64,
    pub table: AggregateTable,
}

/// Aggregates `reps` replications at each σ. Every σ reuses the scenario's
/// seed, so the designs differ only through the noise scale.
pub fn sigma_sweep(
    spec: &ScenarioSpec,
    sigmas: &[f64],
    reps: usize,
    weightings: &[WeightingConfig],
) -> Result<Vec<SweepPoint>> {
    if spec.family != Family::Gaussian {
        return Err(PaviError::FamilyMismatch {
            expected: "gaussian".into(),
            found: spec.family.to_string(),
        });
    }
    sigmas
        .iter()
        .map(|&sigma| {
            let (_, table) = simulate(&spec.clone().with_sigma(sigma), reps, weightings)?;
            Ok(SweepPoint { sigma, table })
        })
        .collect()
}

/// Tidy rows (σ, method, weighting, measure, mean, se); the true measures
/// carry weighting "truth".
pub fn tidy_sweep(points: &[SweepPoint]) -> Vec<(f64, String, String, String, f64, f64)> {
    points
        .iter()
        .flat_map(|pt| {
            pt.table.rows.iter().map(move |r| {
                (
                    pt.sigma,
                    r.method.name().to_string(),
                    r.weighting.clone().unwrap_or_else(|| "truth".into()),
                    r.measure.clone(),
                    r.mean,
                    r.se,
                )
            })
        })
        .collect()
}

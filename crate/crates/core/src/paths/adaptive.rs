//! Adaptive-Lasso weights from a cross-validated Lasso pilot.

use super::cv::cv_select;
use super::penalty::{PenaltyKind, PenaltySpec};
use super::solver::Standardized;
use crate::data::Dataset;
use crate::error::Result;

/// wⱼ = 1/|β̃ⱼ|^γ; zero pilot coefficients map to +∞.
pub fn weights_from_pilot(pilot: &[f64], gamma: f64) -> Vec<f64> {
    pilot
        .iter()
        .map(|&b| if b == 0.0 { f64::INFINITY } else { b.abs().powf(-gamma) })
        .collect()
}

/// Pilot is a CV-tuned Lasso; its coefficients are taken on the
/// standardized scale, where the adaptive penalty is applied.
pub fn adaptive_weights(data: &Dataset, gamma: f64, folds: usize, seed: u64) -> Result<Vec<f64>> {
    let pilot = cv_select(data, &PenaltySpec::lasso(), folds, seed)?;
    let pt = pilot.chosen_point();
    let (_, beta) = Standardized::new(data).to_standardized(pt.intercept, &pt.coefficients);
    Ok(weights_from_pilot(&beta, gamma))
}

/// Fills in missing adaptive weights; other specs pass through unchanged.
pub fn resolve_adaptive(data: &Dataset, spec: &PenaltySpec, folds: usize, seed: u64) -> Result<PenaltySpec> {
    spec.validate()?;
    if spec.kind == PenaltyKind::AdaptiveLasso && spec.adaptive_weights.is_none() {
        let w = adaptive_weights(data, spec.gamma, folds, seed)?;
        return Ok(PenaltySpec::adaptive_lasso(spec.gamma, Some(w)));
    }
    Ok(spec.clone())
}

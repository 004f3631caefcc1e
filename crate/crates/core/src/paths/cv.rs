//! K-fold cross-validation over a shared λ grid.

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::adaptive::resolve_adaptive;
use super::penalty::PenaltySpec;
use super::solver::{fit_path, lambda_grid, PathPoint, PathSolution, DEFAULT_NLAMBDA};
use crate::data::{Dataset, Family};
use crate::error::{PaviError, Result};
use crate::measures::VariableSet;
use crate::numeric::{bernoulli_log_lik, rng_for, sigmoid};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub chosen_lambda: f64,
    pub chosen_index: usize,
    /// Mean held-out loss for each λ in the common range.
    pub cv_losses: Vec<f64>,
    /// Fold id (0-based) per observation.
    pub fold_assignment: Vec<usize>,
    /// Full-data path; `cv_losses[i]` belongs to `path.points[i]`.
    pub path: PathSolution,
}

impl CvResult {
    pub fn chosen_point(&self) -> &PathPoint {
        &self.path.points[self.chosen_index]
    }

    pub fn chosen_support(&self) -> &VariableSet {
        &self.chosen_point().support
    }
}

/// Seeded fold ids. Gaussian: a random permutation dealt round-robin.
/// Binomial: each class shuffled separately and dealt round-robin, the
/// second class continuing where the first stopped, so both classes spread
/// evenly over the folds.
pub fn fold_assignment(data: &Dataset, folds: usize, seed: u64) -> Result<Vec<usize>> {
    let n = data.n();
    if folds < 2 {
        return Err(PaviError::InvalidConfig(format!("need at least 2 folds, got {folds}")));
    }
    if n < folds {
        return Err(PaviError::CrossValidation(format!(
            "{folds} folds for {n} observations"
        )));
    }
    let mut rng = rng_for(seed, 0xF01D);
    let mut ids = vec![0; n];
    match data.family() {
        Family::Gaussian => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            for (k, &i) in perm.iter().enumerate() {
                ids[i] = k % folds;
            }
        }
        Family::Binomial => {
            let (zeros, ones) = data.class_counts();
            if zeros < 2 || ones < 2 {
                return Err(PaviError::CrossValidation(format!(
                    "cannot stratify: class sizes {zeros} and {ones} leave a training fold with one class"
                )));
            }
            let y = data.y();
            let mut next = 0;
            for class in [0.0, 1.0] {
                let mut members: Vec<usize> = (0..n).filter(|&i| y[i] == class).collect();
                members.shuffle(&mut rng);
                for i in members {
                    ids[i] = next % folds;
                    next += 1;
                }
            }
        }
    }
    Ok(ids)
}

/// Summed held-out loss for each computed point of `path`.
fn held_out_losses(path: &PathSolution, test: &Dataset) -> Vec<f64> {
    let y = test.y();
    path.points
        .iter()
        .map(|pt| {
            (0..test.n())
                .map(|i| {
                    let eta = pt.linear_predictor(test, i);
                    match test.family() {
                        Family::Gaussian => (y[i] - eta).powi(2),
                        Family::Binomial => -2.0 * bernoulli_log_lik(y[i], sigmoid(eta)),
                    }
                })
                .sum()
        })
        .collect()
}

/// Chooses λ by K-fold CV: mean squared error (gaussian) or mean binomial
/// deviance, averaged over all held-out observations. Fold paths reuse the
/// full-data grid; the comparison covers the λ prefix every fit reached.
/// Ties go to the larger λ.
pub fn cv_select(data: &Dataset, penalty: &PenaltySpec, folds: usize, seed: u64) -> Result<CvResult> {
    let penalty = resolve_adaptive(data, penalty, folds, seed)?;
    let ids = fold_assignment(data, folds, seed)?;
    let grid = lambda_grid(data, &penalty, DEFAULT_NLAMBDA)?;
    let path = fit_path(data, &penalty, &grid)?;

    let fold_losses: Vec<Vec<f64>> = (0..folds)
        .into_par_iter()
        .map(|k| -> Result<Vec<f64>> {
            let train: Vec<usize> = (0..data.n()).filter(|&i| ids[i] != k).collect();
            let test: Vec<usize> = (0..data.n()).filter(|&i| ids[i] == k).collect();
            let train = data.subset_rows(&train);
            let test = data.subset_rows(&test);
            let fold_path = fit_path(&train, &penalty, &grid)?;
            Ok(held_out_losses(&fold_path, &test))
        })
        .collect::<Result<_>>()?;

    let common = fold_losses.iter().map(Vec::len).fold(path.len(), usize::min);
    let n = data.n() as f64;
    let cv_losses: Vec<f64> = (0..common)
        .map(|l| fold_losses.iter().map(|f| f[l]).sum::<f64>() / n)
        .collect();
    let mut best = 0;
    for (l, &loss) in cv_losses.iter().enumerate() {
        if loss < cv_losses[best] {
            best = l;
        }
    }
    Ok(CvResult {
        chosen_lambda: path.points[best].lambda,
        chosen_index: best,
        cv_losses,
        fold_assignment: ids,
        path,
    })
}

//! Unpenalized maximum-likelihood refits on a fixed support.
//!
//! The intercept is always present and never part of the support. Gaussian
//! fits use the ML scale √(RSS/n); logistic fits use Newton/IRLS with
//! step-halving so the log-likelihood never decreases between iterations.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Family};
use crate::error::{PaviError, Result};
use crate::measures::VariableSet;
use crate::numeric::{bernoulli_log_lik, sigmoid};

pub const SIGMA_FLOOR: f64 = 1e-8;
pub const IRLS_TOL: f64 = 1e-8;
pub const IRLS_MAX_ITER: usize = 100;
pub const IRLS_MAX_HALVINGS: usize = 20;
/// Linear predictors beyond this magnitude indicate (quasi-)separation.
const SEPARATION_ETA: f64 = 30.0;
/// Relative pivot below which a Gram matrix is treated as rank deficient.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FittedModel {
    pub family: Family,
    pub support: VariableSet,
    pub intercept: f64,
    /// Coefficients aligned with `support.indices()`.
    pub coefficients: Vec<f64>,
    /// ML residual scale; present only for gaussian fits.
    pub sigma_hat: Option<f64>,
    pub log_lik: f64,
    pub converged: bool,
    pub n_obs: usize,
    pub iterations: usize,
}

impl FittedModel {
    pub fn linear_predictor(&self, data: &Dataset, row: usize) -> f64 {
        let mut eta = self.intercept;
        for (&idx, &b) in self.support.indices().iter().zip(&self.coefficients) {
            eta += b * data.x()[(row, idx - 1)];
        }
        eta
    }

    fn linear_predictors(&self, data: &Dataset) -> Vec<f64> {
        let mut eta = vec![self.intercept; data.n()];
        for (col, &b) in self.support.columns().zip(&self.coefficients) {
            for (e, &x) in eta.iter_mut().zip(data.column(col)) {
                *e += b * x;
            }
        }
        eta
    }

    fn check_compatible(&self, data: &Dataset) -> Result<()> {
        if data.family() != self.family {
            return Err(PaviError::FamilyMismatch {
                expected: self.family.to_string(),
                found: data.family().to_string(),
            });
        }
        if let Some(m) = self.support.max_index() {
            if m > data.p() {
                return Err(PaviError::DimensionMismatch(format!(
                    "model uses variable {m} but data has p={}",
                    data.p()
                )));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub aic: f64,
    pub bic: f64,
    pub deviance: f64,
}

fn design(data: &Dataset, support: &VariableSet) -> DMatrix<f64> {
    let n = data.n();
    let cols: Vec<usize> = support.columns().collect();
    let mut a = DMatrix::<f64>::zeros(n, cols.len() + 1);
    a.column_mut(0).fill(1.0);
    for (k, &c) in cols.iter().enumerate() {
        a.column_mut(k + 1).copy_from_slice(data.column(c));
    }
    a
}

fn check_capacity(data: &Dataset, support: &VariableSet) -> Result<()> {
    support.check_dimension(data.p())?;
    if support.len() + 2 > data.n() {
        return Err(PaviError::SupportExceedsCapacity {
            size: support.len(),
            n: data.n(),
        });
    }
    Ok(())
}

/// Solves `gram · b = rhs` for symmetric PSD `gram`. Falls back to the
/// minimal-norm pseudo-inverse solution when the matrix is numerically
/// rank deficient; the flag reports whether the fast path was taken.
pub(crate) fn solve_normal_equations(gram: &DMatrix<f64>, rhs: &DVector<f64>) -> (DVector<f64>, bool) {
    if let Some(chol) = gram.clone().cholesky() {
        let l = chol.l_dirty();
        let well_posed = (0..gram.nrows()).all(|i| {
            let d = gram[(i, i)];
            d > 0.0 && l[(i, i)] * l[(i, i)] / d > RANK_TOL
        });
        if well_posed {
            return (chol.solve(rhs), true);
        }
    }
    let svd = gram.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = (smax * RANK_TOL).max(f64::MIN_POSITIVE);
    let sol = svd.solve(rhs, eps).unwrap_or_else(|_| DVector::zeros(rhs.len()));
    (sol, false)
}

/// Least-squares fit of y on the support columns plus intercept.
pub fn fit_gaussian(data: &Dataset, support: &VariableSet) -> Result<FittedModel> {
    if data.family() != Family::Gaussian {
        return Err(PaviError::FamilyMismatch {
            expected: "gaussian".into(),
            found: data.family().to_string(),
        });
    }
    check_capacity(data, support)?;
    let n = data.n() as f64;
    let a = design(data, support);
    let gram = a.tr_mul(&a);
    let rhs = a.tr_mul(data.y());
    let (beta, full_rank) = solve_normal_equations(&gram, &rhs);
    let resid = data.y() - &a * &beta;
    let rss = resid.norm_squared();
    let sigma = (rss / n).sqrt().max(SIGMA_FLOOR);
    let log_lik = gaussian_log_lik(rss, data.n(), sigma);
    Ok(FittedModel {
        family: Family::Gaussian,
        support: support.clone(),
        intercept: beta[0],
        coefficients: beta.iter().skip(1).copied().collect(),
        sigma_hat: Some(sigma),
        log_lik,
        converged: full_rank,
        n_obs: data.n(),
        iterations: 1,
    })
}

fn gaussian_log_lik(rss: f64, n: usize, sigma: f64) -> f64 {
    let n = n as f64;
    -0.5 * n * (2.0 * std::f64::consts::PI).ln() - n * sigma.ln() - rss / (2.0 * sigma * sigma)
}

fn logistic_log_lik(y: &DVector<f64>, eta: &DVector<f64>) -> f64 {
    y.iter()
        .zip(eta.iter())
        .map(|(&yi, &e)| bernoulli_log_lik(yi, sigmoid(e)))
        .sum()
}

/// Logistic regression MLE by IRLS with step-halving.
pub fn fit_logistic(data: &Dataset, support: &VariableSet) -> Result<FittedModel> {
    fit_logistic_traced(data, support, None)
}

pub(crate) fn fit_logistic_traced(
    data: &Dataset,
    support: &VariableSet,
    mut trace: Option<&mut Vec<f64>>,
) -> Result<FittedModel> {
    if data.family() != Family::Binomial {
        return Err(PaviError::FamilyMismatch {
            expected: "binomial".into(),
            found: data.family().to_string(),
        });
    }
    check_capacity(data, support)?;
    let n = data.n();
    let y = data.y();
    let a = design(data, support);
    let k = a.ncols();

    let mut beta = DVector::<f64>::zeros(k);
    let mut eta = DVector::<f64>::zeros(n);
    let mut ll = logistic_log_lik(y, &eta);
    if let Some(t) = trace.as_deref_mut() {
        t.push(ll);
    }
    let mut converged = false;
    let mut full_rank = true;
    let mut separated = false;
    let mut iterations = 0;

    for _ in 0..IRLS_MAX_ITER {
        iterations += 1;
        let mut resid = DVector::<f64>::zeros(n);
        let mut aw = a.clone();
        for i in 0..n {
            let p = sigmoid(eta[i]);
            resid[i] = y[i] - p;
            let w = (p * (1.0 - p)).max(1e-10);
            aw.row_mut(i).scale_mut(w);
        }
        let grad = a.tr_mul(&resid);
        let hess = aw.tr_mul(&a);
        let (delta, ok) = solve_normal_equations(&hess, &grad);
        full_rank &= ok;

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..=IRLS_MAX_HALVINGS {
            let cand = &beta + &delta * step;
            let cand_eta = &a * &cand;
            let cand_ll = logistic_log_lik(y, &cand_eta);
            if cand_ll.is_finite() && cand_ll >= ll {
                accepted = Some((cand, cand_eta, cand_ll));
                break;
            }
            step *= 0.5;
        }
        let Some((new_beta, new_eta, new_ll)) = accepted else {
            // no ascent direction left; treat as converged at the current point
            converged = true;
            break;
        };
        let change = (new_ll - ll).abs() / (ll.abs() + 0.1);
        beta = new_beta;
        eta = new_eta;
        ll = new_ll;
        if let Some(t) = trace.as_deref_mut() {
            t.push(ll);
        }
        if ll > -(n as f64) * 1e-9 {
            separated = true;
            break;
        }
        if change < IRLS_TOL {
            converged = true;
            break;
        }
    }
    if eta.iter().any(|e| e.abs() > SEPARATION_ETA) {
        separated = true;
    }

    Ok(FittedModel {
        family: Family::Binomial,
        support: support.clone(),
        intercept: beta[0],
        coefficients: beta.iter().skip(1).copied().collect(),
        sigma_hat: None,
        log_lik: ll,
        converged: converged && full_rank && !separated,
        n_obs: n,
        iterations,
    })
}

/// Fits whichever model the data family calls for.
pub fn fit(data: &Dataset, support: &VariableSet) -> Result<FittedModel> {
    match data.family() {
        Family::Gaussian => fit_gaussian(data, support),
        Family::Binomial => fit_logistic(data, support),
    }
}

/// Log-likelihood of held-out data under a fitted model.
///
/// Gaussian scoring drops the shared −½ log 2π constant and uses the
/// training scale: Σ [−log σ̂ − (y − ŷ)² / (2σ̂²)].
pub fn holdout_log_lik(model: &FittedModel, test: &Dataset) -> Result<f64> {
    model.check_compatible(test)?;
    let eta = model.linear_predictors(test);
    let y = test.y();
    Ok(match model.family {
        Family::Binomial => eta
            .iter()
            .zip(y.iter())
            .map(|(&e, &yi)| bernoulli_log_lik(yi, sigmoid(e)))
            .sum(),
        Family::Gaussian => {
            let sigma = model.sigma_hat.unwrap_or(1.0).max(SIGMA_FLOOR);
            let rss: f64 = eta.iter().zip(y.iter()).map(|(&e, &yi)| (yi - e).powi(2)).sum();
            -(test.n() as f64) * sigma.ln() - rss / (2.0 * sigma * sigma)
        }
    })
}

/// AIC, BIC and deviance of a fitted model evaluated on `data`.
///
/// Parameter count is |support| + 1. Gaussian deviance is the residual sum
/// of squares; binomial deviance is −2 log-likelihood (saturated model 0).
pub fn diagnostics(model: &FittedModel, data: &Dataset) -> Result<FitDiagnostics> {
    model.check_compatible(data)?;
    let eta = model.linear_predictors(data);
    let y = data.y();
    let (log_lik, deviance) = match model.family {
        Family::Binomial => {
            let ll: f64 = eta
                .iter()
                .zip(y.iter())
                .map(|(&e, &yi)| bernoulli_log_lik(yi, sigmoid(e)))
                .sum();
            (ll, (-2.0 * ll).max(0.0))
        }
        Family::Gaussian => {
            let rss: f64 = eta.iter().zip(y.iter()).map(|(&e, &yi)| (yi - e).powi(2)).sum();
            let sigma = model.sigma_hat.unwrap_or(1.0).max(SIGMA_FLOOR);
            (gaussian_log_lik(rss, data.n(), sigma), rss)
        }
    };
    let k = (model.support.len() + 1) as f64;
    Ok(FitDiagnostics {
        aic: -2.0 * log_lik + 2.0 * k,
        bic: -2.0 * log_lik + k * (data.n() as f64).ln(),
        deviance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn gaussian_data(x: DMatrix<f64>, y: Vec<f64>) -> Dataset {
        Dataset::new(x, DVector::from_vec(y), Family::Gaussian).unwrap()
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize, p: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n, p, |_, _| rng.sample(StandardNormal))
    }

    /// Gauss-Jordan inverse with partial pivoting; test-only oracle.
    fn invert(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let k = m.len();
        let mut aug: Vec<Vec<f64>> = m
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.extend((0..k).map(|j| if i == j { 1.0 } else { 0.0 }));
                r
            })
            .collect();
        for col in 0..k {
            let piv = (col..k)
                .max_by(|&a, &b| aug[a][col].abs().partial_cmp(&aug[b][col].abs()).unwrap())
                .unwrap();
            aug.swap(col, piv);
            let d = aug[col][col];
            for v in aug[col].iter_mut() {
                *v /= d;
            }
            for r in 0..k {
                if r != col {
                    let f = aug[r][col];
                    let pivot_row = aug[col].clone();
                    for (v, pv) in aug[r].iter_mut().zip(pivot_row) {
                        *v -= f * pv;
                    }
                }
            }
        }
        aug.into_iter().map(|r| r[k..].to_vec()).collect()
    }

    #[test]
    fn noiseless_line_is_recovered() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = xs.iter().map(|x| 1.0 + 2.0 * x).collect();
        let d = gaussian_data(DMatrix::from_vec(10, 1, xs), y);
        let m = fit_gaussian(&d, &VariableSet::from_unsorted([1])).unwrap();
        assert!((m.intercept - 1.0).abs() < 1e-10);
        assert!((m.coefficients[0] - 2.0).abs() < 1e-10);
        assert_eq!(m.sigma_hat, Some(SIGMA_FLOOR));
    }

    #[test]
    fn intercept_only_gaussian() {
        let y = vec![1.0, 2.0, 4.0, 5.0];
        let d = gaussian_data(DMatrix::from_vec(4, 1, vec![0.0, 1.0, 0.0, 1.0]), y);
        let m = fit_gaussian(&d, &VariableSet::empty()).unwrap();
        assert!((m.intercept - 3.0).abs() < 1e-12);
        // population sd of (1,2,4,5) = sqrt(10/4)
        assert!((m.sigma_hat.unwrap() - 2.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn matches_explicit_normal_equations() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let x = random_matrix(&mut rng, 20, 3);
        let y: Vec<f64> = (0..20)
            .map(|i| 0.5 + x[(i, 0)] - 2.0 * x[(i, 2)] + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let d = gaussian_data(x.clone(), y.clone());
        let m = fit_gaussian(&d, &VariableSet::from_unsorted([1, 2, 3])).unwrap();
        // oracle: (AᵀA)⁻¹ Aᵀy by hand
        let rows: Vec<[f64; 4]> = (0..20).map(|i| [1.0, x[(i, 0)], x[(i, 1)], x[(i, 2)]]).collect();
        let mut ata = vec![vec![0.0; 4]; 4];
        let mut aty = vec![0.0; 4];
        for (r, &yi) in rows.iter().zip(&y) {
            for a in 0..4 {
                aty[a] += r[a] * yi;
                for b in 0..4 {
                    ata[a][b] += r[a] * r[b];
                }
            }
        }
        let inv = invert(&ata);
        let beta: Vec<f64> = (0..4).map(|a| (0..4).map(|b| inv[a][b] * aty[b]).sum()).collect();
        assert!((m.intercept - beta[0]).abs() < 1e-8);
        for j in 0..3 {
            assert!((m.coefficients[j] - beta[j + 1]).abs() < 1e-8);
        }
        assert!(m.converged);
    }

    #[test]
    fn rss_is_minimal_under_perturbation() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let x = random_matrix(&mut rng, 30, 4);
        let y: Vec<f64> = (0..30)
            .map(|i| x[(i, 1)] + rng.sample::<f64, _>(StandardNormal))
            .collect();
        let d = gaussian_data(x, y);
        let support = VariableSet::from_unsorted([1, 2, 4]);
        let m = fit_gaussian(&d, &support).unwrap();
        let rss = |b0: f64, b: &[f64]| -> f64 {
            (0..d.n())
                .map(|i| {
                    let mut e = b0;
                    for (c, bj) in support.columns().zip(b) {
                        e += bj * d.x()[(i, c)];
                    }
                    (d.y()[i] - e).powi(2)
                })
                .sum()
        };
        let base = rss(m.intercept, &m.coefficients);
        for _ in 0..100 {
            let db0: f64 = rng.random_range(-0.1..0.1);
            let db: Vec<f64> = m.coefficients.iter().map(|b| b + rng.random_range(-0.1..0.1)).collect();
            assert!(base <= rss(m.intercept + db0, &db) + 1e-12);
        }
    }

    #[test]
    fn rank_deficient_gaussian_is_flagged() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut x = random_matrix(&mut rng, 15, 2);
        let c0: Vec<f64> = x.column(0).iter().copied().collect();
        x.column_mut(1).copy_from_slice(&c0);
        let y: Vec<f64> = c0.iter().map(|v| 2.0 * v + 1.0).collect();
        let d = gaussian_data(x, y);
        let m = fit_gaussian(&d, &VariableSet::from_unsorted([1, 2])).unwrap();
        assert!(!m.converged);
        // minimal-norm solution splits the coefficient evenly
        assert!((m.coefficients[0] - 1.0).abs() < 1e-6);
        assert!((m.coefficients[1] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn capacity_error() {
        let d = gaussian_data(DMatrix::from_element(4, 3, 1.0), vec![1.0, 2.0, 3.0, 4.0]);
        let err = fit_gaussian(&d, &VariableSet::from_unsorted([1, 2, 3])).unwrap_err();
        assert!(matches!(err, PaviError::SupportExceedsCapacity { .. }));
    }

    fn binomial(x: DMatrix<f64>, y: Vec<f64>) -> Dataset {
        Dataset::new(x, DVector::from_vec(y), Family::Binomial).unwrap()
    }

    #[test]
    fn balanced_intercept_only_logistic() {
        let y: Vec<f64> = (0..10).map(|i| (i % 2) as f64).collect();
        let d = binomial(DMatrix::from_element(10, 1, 0.0), y);
        let m = fit_logistic(&d, &VariableSet::empty()).unwrap();
        assert!(m.intercept.abs() < 1e-12);
        assert!((m.log_lik - 10.0 * 0.5f64.ln()).abs() < 1e-12);
        assert!(m.converged);
    }

    #[test]
    fn separable_logistic_does_not_crash() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64 - 9.5).collect();
        let y: Vec<f64> = xs.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
        let d = binomial(DMatrix::from_vec(20, 1, xs), y);
        let m = fit_logistic(&d, &VariableSet::from_unsorted([1])).unwrap();
        assert!(!m.converged);
        assert!(m.log_lik.is_finite());
        assert!(m.log_lik > -1e-3);
    }

    fn synthetic_logistic(seed: u64, n: usize) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_matrix(&mut rng, n, 3);
        let y: Vec<f64> = (0..n)
            .map(|i| {
                let eta = 0.3 + 1.2 * x[(i, 0)] - 0.8 * x[(i, 1)];
                if rng.random::<f64>() < sigmoid(eta) {
                    1.0
                } else {
                    0.0
                }
            })
            .collect();
        binomial(x, y)
    }

    fn score(d: &Dataset, m: &FittedModel) -> Vec<f64> {
        // independent evaluation of ∂ℓ/∂β: Σ (y − π) [1, x_S]
        let mut g = vec![0.0; m.coefficients.len() + 1];
        for i in 0..d.n() {
            let r = d.y()[i] - sigmoid(m.linear_predictor(d, i));
            g[0] += r;
            for (k, c) in m.support.columns().enumerate() {
                g[k + 1] += r * d.x()[(i, c)];
            }
        }
        g
    }

    #[test]
    fn score_vanishes_at_mle() {
        for seed in 0..20 {
            let d = synthetic_logistic(seed, 40);
            let m = fit_logistic(&d, &VariableSet::from_unsorted([1, 2, 3])).unwrap();
            if !m.converged {
                continue;
            }
            let g = score(&d, &m);
            let gmax = g.iter().fold(0.0f64, |a, v| a.max(v.abs()));
            assert!(gmax < 1e-6, "seed {seed}: score {gmax}");
        }
    }

    #[test]
    fn score_matches_finite_differences() {
        let d = synthetic_logistic(3, 60);
        let support = VariableSet::from_unsorted([1, 2]);
        let m = fit_logistic(&d, &support).unwrap();
        // perturb the fitted model and compare analytic score with central differences
        let mut shifted = m.clone();
        shifted.coefficients[0] += 0.3;
        let ll = |mm: &FittedModel| -> f64 {
            (0..d.n())
                .map(|i| bernoulli_log_lik(d.y()[i], sigmoid(mm.linear_predictor(&d, i))))
                .sum()
        };
        let analytic = score(&d, &shifted);
        let h = 1e-6;
        let mut plus = shifted.clone();
        plus.coefficients[1] += h;
        let mut minus = shifted.clone();
        minus.coefficients[1] -= h;
        let fd = (ll(&plus) - ll(&minus)) / (2.0 * h);
        assert!((fd - analytic[2]).abs() < 1e-5);
    }

    #[test]
    fn irls_log_lik_is_monotone() {
        for seed in 0..20 {
            let d = synthetic_logistic(100 + seed, 50);
            let mut trace = Vec::new();
            fit_logistic_traced(&d, &VariableSet::from_unsorted([1, 2, 3]), Some(&mut trace)).unwrap();
            for w in trace.windows(2) {
                assert!(w[1] >= w[0], "seed {seed}: {trace:?}");
            }
        }
    }

    #[test]
    fn non_binary_refused_for_logistic() {
        let d = gaussian_data(DMatrix::from_element(4, 1, 1.0), vec![0.0, 1.0, 2.0, 3.0]);
        assert!(fit_logistic(&d, &VariableSet::empty()).is_err());
    }

    #[test]
    fn holdout_examples() {
        let y: Vec<f64> = (0..10).map(|i| (i % 2) as f64).collect();
        let d = binomial(DMatrix::from_element(10, 1, 0.0), y);
        let m = fit_logistic(&d, &VariableSet::empty()).unwrap();
        let ll = holdout_log_lik(&m, &d).unwrap();
        assert!((ll - 10.0 * 0.5f64.ln()).abs() < 1e-12);

        let g = gaussian_data(DMatrix::from_vec(3, 1, vec![1.0, 2.0, 3.0]), vec![2.0, 4.0, 6.0]);
        let unit = FittedModel {
            family: Family::Gaussian,
            support: VariableSet::from_unsorted([1]),
            intercept: 0.0,
            coefficients: vec![2.0],
            sigma_hat: Some(1.0),
            log_lik: 0.0,
            converged: true,
            n_obs: 3,
            iterations: 1,
        };
        assert_eq!(holdout_log_lik(&unit, &g).unwrap(), 0.0);

        let wide = FittedModel {
            support: VariableSet::from_unsorted([5]),
            ..unit
        };
        assert!(matches!(
            holdout_log_lik(&wide, &g),
            Err(PaviError::DimensionMismatch(_))
        ));
        assert!(holdout_log_lik(&m, &g).is_err());
    }

    #[test]
    fn diagnostics_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 50;
        let x = random_matrix(&mut rng, n, 3);
        let y: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let d = gaussian_data(x, y);
        let m0 = fit_gaussian(&d, &VariableSet::empty()).unwrap();
        let diag0 = diagnostics(&m0, &d).unwrap();
        let mean = d.y().mean();
        let rss: f64 = d.y().iter().map(|v| (v - mean).powi(2)).sum();
        assert!((diag0.deviance - rss).abs() < 1e-10);
        let k = 1.0;
        assert!(((diag0.aic - diag0.bic) - (2.0 * k - k * (n as f64).ln())).abs() < 1e-10);

        // nested supports never increase deviance
        let mut prev = diag0.deviance;
        for s in [vec![1], vec![1, 2], vec![1, 2, 3]] {
            let m = fit_gaussian(&d, &VariableSet::from_unsorted(s)).unwrap();
            let dev = diagnostics(&m, &d).unwrap().deviance;
            assert!(dev <= prev + 1e-8);
            prev = dev;
        }
    }

    #[test]
    fn separating_logistic_has_near_zero_deviance() {
        let xs: Vec<f64> = (0..30).map(|i| i as f64 - 14.5).collect();
        let y: Vec<f64> = xs.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
        let d = binomial(DMatrix::from_vec(30, 1, xs), y);
        let m = fit_logistic(&d, &VariableSet::from_unsorted([1])).unwrap();
        let diag = diagnostics(&m, &d).unwrap();
        assert!(diag.deviance < 1e-3);
    }

    #[test]
    fn logistic_deviance_nesting() {
        let d = synthetic_logistic(77, 80);
        let dev = |s: Vec<usize>| {
            let m = fit_logistic(&d, &VariableSet::from_unsorted(s)).unwrap();
            diagnostics(&m, &d).unwrap().deviance
        };
        let d0 = dev(vec![]);
        let d1 = dev(vec![1]);
        let d13 = dev(vec![1, 3]);
        assert!(d1 <= d0 + 1e-8);
        assert!(d13 <= d1 + 1e-8);
    }
}

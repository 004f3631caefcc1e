//! Data-driven candidate weights: ARM (split, refit, score held-out
//! likelihood) and BIC-p (full-data BIC plus the complexity prior).

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::candidates::{complexity_prior, CandidateSet};
use crate::data::{Dataset, Family};
use crate::error::{PaviError, Result};
use crate::glm;
use crate::measures::CandidateEnsemble;
use crate::numeric::{normalize_log_weights, rng_for};

pub const DEFAULT_PSI: f64 = 1.0;
pub const DEFAULT_SPLITS: usize = 100;
pub const DEFAULT_TRAIN_FRACTION: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightingConfig {
    /// Registered strategy name ("arm" or "bicp" by default).
    pub method: String,
    pub psi: f64,
    pub splits: usize,
    pub seed: u64,
    pub train_fraction: f64,
}

impl WeightingConfig {
    pub fn new(method: &str, seed: u64) -> Self {
        WeightingConfig {
            method: method.to_string(),
            psi: DEFAULT_PSI,
            splits: DEFAULT_SPLITS,
            seed,
            train_fraction: DEFAULT_TRAIN_FRACTION,
        }
    }

    pub fn arm(seed: u64) -> Self {
        Self::new("arm", seed)
    }

    pub fn bicp() -> Self {
        Self::new("bicp", 0)
    }

    pub fn with_psi(mut self, psi: f64) -> Self {
        self.psi = psi;
        self
    }

    pub fn with_splits(mut self, splits: usize) -> Self {
        self.splits = splits;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.psi >= 0.0 && self.psi.is_finite()) {
            return Err(PaviError::InvalidConfig(format!("psi must be >= 0, got {}", self.psi)));
        }
        if self.splits < 1 {
            return Err(PaviError::InvalidConfig("splits must be >= 1".into()));
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return Err(PaviError::InvalidConfig(format!(
                "train_fraction must lie in (0, 1), got {}",
                self.train_fraction
            )));
        }
        Ok(())
    }
}

/// A weighting strategy: candidates in, normalized ensemble out.
pub trait Weighting: Send + Sync {
    fn name(&self) -> &'static str;
    fn weights(&self, data: &Dataset, candidates: &CandidateSet, config: &WeightingConfig)
        -> Result<CandidateEnsemble>;
}

pub struct Arm;
pub struct Bicp;

impl Weighting for Arm {
    fn name(&self) -> &'static str {
        "arm"
    }

    fn weights(
        &self,
        data: &Dataset,
        candidates: &CandidateSet,
        config: &WeightingConfig,
    ) -> Result<CandidateEnsemble> {
        arm_weights(data, candidates, config)
    }
}

impl Weighting for Bicp {
    fn name(&self) -> &'static str {
        "bicp"
    }

    fn weights(
        &self,
        data: &Dataset,
        candidates: &CandidateSet,
        config: &WeightingConfig,
    ) -> Result<CandidateEnsemble> {
        bicp_weights(data, candidates, config)
    }
}

pub type WeightingConstructor = fn() -> Box<dyn Weighting>;

/// Name → constructor table for weighting strategies.
pub struct WeightingRegistry {
    entries: Vec<(&'static str, WeightingConstructor)>,
}

impl WeightingRegistry {
    pub fn empty() -> Self {
        WeightingRegistry { entries: Vec::new() }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("arm", || Box::new(Arm));
        r.register("bicp", || Box::new(Bicp));
        r
    }

    pub fn register(&mut self, name: &'static str, ctor: WeightingConstructor) {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, ctor));
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn create(&self, name: &str) -> Result<Box<dyn Weighting>> {
        let key = name.trim().to_ascii_lowercase();
        let key = if key == "bic-p" || key == "bic_p" {
            "bicp".to_string()
        } else {
            key
        };
        self.entries
            .iter()
            .find(|(n, _)| *n == key)
            .map(|(_, ctor)| ctor())
            .ok_or_else(|| PaviError::UnknownStrategy {
                kind: "weighting",
                name: name.to_string(),
            })
    }
}

/// Looks up `config.method` in the builtin registry and runs it.
pub fn compute_weights(
    data: &Dataset,
    candidates: &CandidateSet,
    config: &WeightingConfig,
) -> Result<CandidateEnsemble> {
    WeightingRegistry::builtin()
        .create(&config.method)?
        .weights(data, candidates, config)
}

fn ensemble_from_log_weights(candidates: &CandidateSet, log_w: &[f64]) -> Result<CandidateEnsemble> {
    let w = normalize_log_weights(log_w).ok_or(PaviError::NoFittableCandidates)?;
    CandidateEnsemble::new(candidates.members().to_vec(), w)
}

/// Normalized weights from maximized log-likelihoods:
/// log wₖ = ℓₖ − sₖ·log(n)/2 − ψ·Cₖ. Entries of −∞ are unfittable.
pub fn bicp_log_weights(log_liks: &[f64], sizes: &[usize], n: usize, p: usize, psi: f64) -> Vec<f64> {
    log_liks
        .iter()
        .zip(sizes)
        .map(|(&ll, &s)| {
            if ll == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                ll - s as f64 * (n as f64).ln() / 2.0 - psi * complexity_prior(s, p)
            }
        })
        .collect()
}

/// Full-data MLE per candidate, weighted by exp(−I/2 − ψC) with
/// I = −2ℓ + s·log n. Candidates that cannot be fitted get weight 0.
pub fn bicp_weights(data: &Dataset, candidates: &CandidateSet, config: &WeightingConfig) -> Result<CandidateEnsemble> {
    config.validate()?;
    let log_liks: Vec<f64> = candidates
        .members()
        .par_iter()
        .map(|m| match glm::fit(data, m) {
            Ok(fit) => Ok(fit.log_lik),
            Err(PaviError::SupportExceedsCapacity { .. }) => Ok(f64::NEG_INFINITY),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let sizes: Vec<usize> = candidates.members().iter().map(|m| m.len()).collect();
    let log_w = bicp_log_weights(&log_liks, &sizes, data.n(), data.p(), config.psi);
    ensemble_from_log_weights(candidates, &log_w)
}

/// Row indices (D₁, D₂) for split `split` of the ARM procedure.
/// |D₁| = ⌊n·train_fraction⌋. Binomial splits are stratified: each class is
/// shuffled, the classes are concatenated and D₁ takes a systematic sample,
/// so class proportions in D₁ match the data.
pub fn arm_split(data: &Dataset, config: &WeightingConfig, split: usize) -> Result<(Vec<usize>, Vec<usize>)> {
    let n = data.n();
    let n1 = (n as f64 * config.train_fraction).floor() as usize;
    if n1 == 0 || n1 >= n {
        return Err(PaviError::InvalidConfig(format!(
            "train_fraction {} leaves an empty side for n={n}",
            config.train_fraction
        )));
    }
    let mut rng = rng_for(config.seed, split as u64);
    let order: Vec<usize> = match data.family() {
        Family::Gaussian => {
            let mut perm: Vec<usize> = (0..n).collect();
            perm.shuffle(&mut rng);
            return Ok((perm[..n1].to_vec(), perm[n1..].to_vec()));
        }
        Family::Binomial => {
            let y = data.y();
            let mut all = Vec::with_capacity(n);
            for class in [0.0, 1.0] {
                let mut members: Vec<usize> = (0..n).filter(|&i| y[i] == class).collect();
                members.shuffle(&mut rng);
                all.extend(members);
            }
            all
        }
    };
    let (mut d1, mut d2) = (Vec::with_capacity(n1), Vec::with_capacity(n - n1));
    for (k, &i) in order.iter().enumerate() {
        // position k goes to D₁ when ⌊(k+1)·n1/n⌋ steps up
        if (k + 1) * n1 / n > k * n1 / n {
            d1.push(i);
        } else {
            d2.push(i);
        }
    }
    Ok((d1, d2))
}

/// Per-split log-weights: −ψCₖ + held-out log-likelihood of the D₁ refit.
fn arm_split_log_weights(
    data: &Dataset,
    candidates: &CandidateSet,
    config: &WeightingConfig,
    split: usize,
) -> Result<Vec<f64>> {
    let (d1, d2) = arm_split(data, config, split)?;
    let train = data.subset_rows(&d1);
    let test = data.subset_rows(&d2);
    candidates
        .members()
        .iter()
        .map(|m| {
            if m.len() + 2 > train.n() {
                return Ok(f64::NEG_INFINITY);
            }
            let fit = glm::fit(&train, m)?;
            let ll = glm::holdout_log_lik(&fit, &test)?;
            Ok(-config.psi * complexity_prior(m.len(), data.p()) + ll)
        })
        .collect()
}

/// ARM weights averaged over `config.splits` seeded splits. Each split is
/// normalized in the log domain; the average is taken in split order, so
/// the result does not depend on how many threads ran the splits.
pub fn arm_weights(data: &Dataset, candidates: &CandidateSet, config: &WeightingConfig) -> Result<CandidateEnsemble> {
    config.validate()?;
    let per_split: Vec<Option<Vec<f64>>> = (0..config.splits)
        .into_par_iter()
        .map(|l| arm_split_log_weights(data, candidates, config, l).map(|lw| normalize_log_weights(&lw)))
        .collect::<Result<_>>()?;
    let mut total = vec![0.0; candidates.len()];
    let mut used = 0usize;
    for w in per_split.iter().flatten() {
        for (t, v) in total.iter_mut().zip(w) {
            *t += v;
        }
        used += 1;
    }
    if used == 0 {
        return Err(PaviError::NoFittableCandidates);
    }
    let mut w: Vec<f64> = total.iter().map(|t| t / used as f64).collect();
    let sum: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= sum);
    CandidateEnsemble::new(candidates.members().to_vec(), w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::VariableSet;
    use crate::numeric::sigmoid;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn vs(ix: &[usize]) -> VariableSet {
        VariableSet::new(ix.iter().copied()).unwrap()
    }

    fn logistic_data(seed: u64, n: usize, p: usize, beta: &[f64]) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = DVector::from_fn(n, |i, _| {
            let eta: f64 = beta.iter().enumerate().map(|(j, b)| b * x[(i, j)]).sum();
            if rng.random::<f64>() < sigmoid(eta) {
                1.0
            } else {
                0.0
            }
        });
        Dataset::new(x, y, Family::Binomial).unwrap()
    }

    fn linear_data(seed: u64, n: usize, p: usize, beta: &[f64], sigma: f64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let y = DVector::from_fn(n, |i, _| {
            let eta: f64 = beta.iter().enumerate().map(|(j, b)| b * x[(i, j)]).sum();
            eta + sigma * rng.sample::<f64, _>(StandardNormal)
        });
        Dataset::new(x, y, Family::Gaussian).unwrap()
    }

    #[test]
    fn config_validation() {
        assert!(WeightingConfig::arm(1).validate().is_ok());
        assert!(WeightingConfig::arm(1).with_psi(-1.0).validate().is_err());
        assert!(WeightingConfig::arm(1).with_splits(0).validate().is_err());
        let mut c = WeightingConfig::bicp();
        c.train_fraction = 1.0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn registry_resolves_names() {
        let r = WeightingRegistry::builtin();
        assert_eq!(r.names(), vec!["arm", "bicp"]);
        assert_eq!(r.create("BIC-p").unwrap().name(), "bicp");
        assert!(matches!(r.create("bma"), Err(PaviError::UnknownStrategy { .. })));
    }

    #[test]
    fn bicp_hand_case() {
        let lw = bicp_log_weights(&[-10.0, -12.0], &[1, 1], 100, 8, 1.0);
        let w = normalize_log_weights(&lw).unwrap();
        let e2 = 2f64.exp();
        assert!((w[0] - e2 / (1.0 + e2)).abs() < 1e-12);
        assert!((w[1] - 1.0 / (1.0 + e2)).abs() < 1e-12);
        assert!((w[0] - 0.8808).abs() < 1e-4);
    }

    #[test]
    fn bicp_symmetric_and_psi_monotone() {
        let w = normalize_log_weights(&bicp_log_weights(&[-5.0, -5.0], &[2, 2], 50, 8, 1.0)).unwrap();
        assert!((w[0] - 0.5).abs() < 1e-15);
        let share = |psi: f64| normalize_log_weights(&bicp_log_weights(&[-5.0, -5.0], &[1, 3], 50, 8, psi)).unwrap()[1];
        let mut prev = share(0.0);
        for psi in [0.5, 1.0, 2.0, 4.0] {
            let s = share(psi);
            assert!(s < prev);
            prev = s;
        }
    }

    #[test]
    fn bicp_psi_zero_is_plain_bic() {
        let d = logistic_data(3, 80, 4, &[1.0, -1.0]);
        let cands = CandidateSet::from_members(vec![vs(&[1]), vs(&[1, 2]), vs(&[1, 2, 3]), vs(&[4])]);
        let ens = bicp_weights(&d, &cands, &WeightingConfig::bicp().with_psi(0.0)).unwrap();
        let bic: Vec<f64> = cands
            .members()
            .iter()
            .map(|m| {
                let f = glm::fit(&d, m).unwrap();
                -2.0 * f.log_lik + m.len() as f64 * (80f64).ln()
            })
            .collect();
        let min = bic.iter().cloned().fold(f64::INFINITY, f64::min);
        let raw: Vec<f64> = bic.iter().map(|b| (-(b - min) / 2.0).exp()).collect();
        let z: f64 = raw.iter().sum();
        for (w, r) in ens.weights().iter().zip(&raw) {
            assert!((w - r / z).abs() < 1e-12);
        }
    }

    #[test]
    fn unfittable_candidates_get_zero_weight() {
        let d = linear_data(4, 8, 7, &[1.0], 0.5);
        let cands = CandidateSet::from_members(vec![vs(&[1]), vs(&[1, 2, 3, 4, 5, 6, 7])]);
        let ens = bicp_weights(&d, &cands, &WeightingConfig::bicp()).unwrap();
        assert_eq!(ens.weights()[1], 0.0);
        assert_eq!(ens.len(), 3);
        let arm = arm_weights(&d, &cands, &WeightingConfig::arm(1).with_splits(5)).unwrap();
        assert_eq!(arm.weights()[1], 0.0);

        let only_big = CandidateSet::from_members(vec![vs(&[1, 2, 3, 4, 5, 6, 7])]);
        let tiny = Dataset::new(
            d.x().rows(0, 1).into_owned(),
            d.y().rows(0, 1).into_owned(),
            Family::Gaussian,
        )
        .unwrap();
        assert!(matches!(
            bicp_weights(&tiny, &only_big, &WeightingConfig::bicp()),
            Err(PaviError::NoFittableCandidates)
        ));
    }

    #[test]
    fn splits_have_requested_sizes_and_strata() {
        let d = logistic_data(5, 101, 2, &[0.5]);
        let (zeros, ones) = d.class_counts();
        let cfg = WeightingConfig::arm(9);
        let (d1, d2) = arm_split(&d, &cfg, 3).unwrap();
        assert_eq!(d1.len(), 50);
        assert_eq!(d2.len(), 51);
        let ones_in_d1 = d1.iter().filter(|&&i| d.y()[i] == 1.0).count();
        assert!((ones_in_d1 as f64 - ones as f64 / 2.0).abs() <= 1.0);
        assert!(d1.len() - ones_in_d1 > 0 && zeros > 0);
        let mut all: Vec<usize> = d1.iter().chain(&d2).copied().collect();
        all.sort();
        assert_eq!(all, (0..101).collect::<Vec<_>>());
        assert_eq!(arm_split(&d, &cfg, 3).unwrap(), (d1, d2));
    }

    #[test]
    fn arm_duplicate_columns_split_evenly() {
        let base = linear_data(6, 40, 1, &[2.0], 1.0);
        let x = DMatrix::from_fn(40, 2, |i, _| base.x()[(i, 0)]);
        let d = Dataset::new(x, base.y().clone(), Family::Gaussian).unwrap();
        let cands = CandidateSet::from_members(vec![vs(&[1]), vs(&[2])]);
        let ens = arm_weights(&d, &cands, &WeightingConfig::arm(2).with_psi(0.0).with_splits(10)).unwrap();
        assert!((ens.weights()[0] - ens.weights()[1]).abs() < 1e-12);
    }

    #[test]
    fn arm_single_candidate_gets_everything() {
        let d = linear_data(7, 30, 3, &[1.0], 1.0);
        let ens = arm_weights(
            &d,
            &CandidateSet::from_members(vec![]),
            &WeightingConfig::arm(3).with_splits(4),
        )
        .unwrap();
        assert_eq!(ens.weights(), &[1.0]);
    }

    #[test]
    fn arm_matches_direct_bernoulli_products() {
        let d = logistic_data(8, 16, 2, &[1.0, -0.5]);
        let cands = CandidateSet::from_members(vec![vs(&[1]), vs(&[2])]);
        for psi in [0.0, 1.0] {
            let cfg = WeightingConfig::arm(11).with_psi(psi).with_splits(1);
            let ens = arm_weights(&d, &cands, &cfg).unwrap();
            let (d1, d2) = arm_split(&d, &cfg, 0).unwrap();
            let train = d.subset_rows(&d1);
            let raw: Vec<f64> = cands
                .members()
                .iter()
                .map(|m| {
                    let fit = glm::fit(&train, m).unwrap();
                    let mut prod = 1.0;
                    for &i in &d2 {
                        let mut eta = fit.intercept;
                        for (&c, &b) in m.indices().iter().zip(&fit.coefficients) {
                            eta += b * d.x()[(i, c - 1)];
                        }
                        let pr = 1.0 / (1.0 + (-eta).exp());
                        prod *= if d.y()[i] == 1.0 { pr } else { 1.0 - pr };
                    }
                    (-psi * complexity_prior(m.len(), 2)).exp() * prod
                })
                .collect();
            let z: f64 = raw.iter().sum();
            for (w, r) in ens.weights().iter().zip(&raw) {
                assert!((w - r / z).abs() < 1e-12, "{w} vs {}", r / z);
            }
        }
    }

    #[test]
    fn large_binomial_weights_survive_underflow() {
        let d = logistic_data(9, 500, 6, &[1.5, -1.0, 0.5]);
        let cands = CandidateSet::from_members(vec![vs(&[1]), vs(&[1, 2]), vs(&[1, 2, 3]), vs(&[4, 5, 6])]);
        for cfg in [WeightingConfig::bicp(), WeightingConfig::arm(1).with_splits(5)] {
            let ens = compute_weights(&d, &cands, &cfg).unwrap();
            assert!(ens.weights().iter().all(|w| w.is_finite() && *w >= 0.0));
            assert!((ens.weights().iter().sum::<f64>() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn arm_is_deterministic() {
        let d = logistic_data(10, 60, 4, &[1.0, 1.0]);
        let cands = super::super::all_subsets(4).unwrap();
        let cfg = WeightingConfig::arm(77).with_splits(8);
        let a = arm_weights(&d, &cands, &cfg).unwrap();
        let b = arm_weights(&d, &cands, &cfg).unwrap();
        assert_eq!(a.weights(), b.weights());
    }

    #[test]
    fn permuting_candidates_permutes_weights() {
        let d = linear_data(12, 50, 4, &[1.0, 0.5], 1.0);
        let cands = super::super::all_subsets(4).unwrap();
        let order: Vec<usize> = (0..cands.len()).rev().collect();
        let perm = cands.permuted(&order);
        for cfg in [WeightingConfig::bicp(), WeightingConfig::arm(5).with_splits(4)] {
            let a = compute_weights(&d, &cands, &cfg).unwrap();
            let b = compute_weights(&d, &perm, &cfg).unwrap();
            for (new, &old) in order.iter().enumerate() {
                assert!((b.weights()[new] - a.weights()[old]).abs() < 1e-12);
            }
        }
    }
}

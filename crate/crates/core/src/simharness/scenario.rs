//! The five simulation designs.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Family};
use crate::error::{PaviError, Result};
use crate::measures::VariableSet;
use crate::numeric::{rng_for, sigmoid};

/// AR correlation used by Examples 4 and 5.
pub const AR_RHO: f64 = 0.4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioSpec {
    pub example_id: u32,
    pub family: Family,
    pub n: usize,
    pub p: usize,
    /// Noise standard deviation; ignored for binomial.
    pub sigma: f64,
    pub seed: u64,
    /// Overrides the example's coefficient vector (length p).
    pub beta: Option<Vec<f64>>,
}

impl ScenarioSpec {
    /// Defaults for an example: its n, p and β; σ = 1; seed 42.
    pub fn example(example_id: u32, family: Family) -> Result<Self> {
        let (n, p) = match example_id {
            1 => (200, 8),
            2 => (1000, 8),
            3 => (200, 2000),
            4 => (200, 30),
            5 => (200, 200),
            other => return Err(PaviError::UnknownExample(other)),
        };
        Ok(ScenarioSpec {
            example_id,
            family,
            n,
            p,
            sigma: 1.0,
            seed: 42,
            beta: None,
        })
    }

    pub fn with_n(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn with_sigma(mut self, sigma: f64) -> Self {
        self.sigma = sigma;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=5).contains(&self.example_id) {
            return Err(PaviError::UnknownExample(self.example_id));
        }
        if self.n < 2 || self.p < 1 {
            return Err(PaviError::InvalidConfig(format!(
                "need n >= 2 and p >= 1, got n={} p={}",
                self.n, self.p
            )));
        }
        if self.family == Family::Gaussian && !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(PaviError::InvalidConfig(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if let Some(b) = &self.beta {
            if b.len() != self.p {
                return Err(PaviError::DimensionMismatch(format!(
                    "beta has {} entries for p={}",
                    b.len(),
                    self.p
                )));
            }
        }
        Ok(())
    }

    pub fn coefficients(&self) -> Vec<f64> {
        if let Some(b) = &self.beta {
            return b.clone();
        }
        let mut beta = vec![0.0; self.p];
        let head: Vec<f64> = match self.example_id {
            1..=3 => vec![3.0, 1.5, 2.0],
            _ => [10.5; 5].into_iter().chain([5.5; 5]).chain([0.5; 5]).collect(),
        };
        for (b, h) in beta.iter_mut().zip(head) {
            *b = h;
        }
        beta
    }
}

/// Correlation matrix 0.4^|j−k| over each block, zero across blocks.
fn block_ar_correlation(p: usize, blocks: &[(usize, usize)]) -> DMatrix<f64> {
    let mut sigma = DMatrix::<f64>::zeros(p, p);
    for &(start, end) in blocks {
        for j in start..end {
            for k in start..end {
                sigma[(j, k)] = AR_RHO.powi((j as i32 - k as i32).abs());
            }
        }
    }
    sigma
}

/// A spec with its coefficient vector and covariance factor resolved.
#[derive(Debug, Clone)]
pub struct Scenario {
    spec: ScenarioSpec,
    beta: Vec<f64>,
    /// Lower-triangular L with LLᵀ = Σ; `None` means identity.
    factor: Option<DMatrix<f64>>,
    truth: VariableSet,
}

impl Scenario {
    pub fn new(spec: ScenarioSpec) -> Result<Self> {
        spec.validate()?;
        let beta = spec.coefficients();
        let p = spec.p;
        let factor = match spec.example_id {
            4 => Some(block_ar_correlation(p, &[(0, p)])),
            5 => {
                let split = 15.min(p);
                Some(block_ar_correlation(p, &[(0, split), (split, p)]))
            }
            _ => None,
        }
        .map(|sigma| {
            sigma
                .cholesky()
                .expect("AR correlation matrices are positive definite")
                .unpack()
        });
        let truth = VariableSet::from_zero_based((0..p).filter(|&j| beta[j] != 0.0));
        Ok(Scenario {
            spec,
            beta,
            factor,
            truth,
        })
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn true_support(&self) -> &VariableSet {
        &self.truth
    }

    /// Dataset for replication `rep`, drawn from the stream (seed, rep).
    pub fn generate(&self, rep: u64) -> Dataset {
        let (n, p) = (self.spec.n, self.spec.p);
        let mut rng = rng_for(self.spec.seed, rep);
        let z = DMatrix::from_fn(n, p, |_, _| rng.sample::<f64, _>(StandardNormal));
        let x = match &self.factor {
            Some(l) => z * l.transpose(),
            None => z,
        };
        let mut eta = DVector::<f64>::zeros(n);
        for (j, &b) in self.beta.iter().enumerate() {
            if b != 0.0 {
                eta.axpy(b, &x.column(j), 1.0);
            }
        }
        let y = match self.spec.family {
            Family::Gaussian => DVector::from_fn(n, |i, _| {
                eta[i] + self.spec.sigma * rng.sample::<f64, _>(StandardNormal)
            }),
            Family::Binomial => DVector::from_fn(n, |i, _| {
                if rng.random::<f64>() < sigmoid(eta[i]) {
                    1.0
                } else {
                    0.0
                }
            }),
        };
        Dataset::new(x, y, self.spec.family).expect("generated data is finite and well-formed")
    }
}

/// One dataset from `spec` (replication 0) with its true support.
pub fn generate_scenario(spec: &ScenarioSpec) -> Result<(Dataset, VariableSet)> {
    let s = Scenario::new(spec.clone())?;
    Ok((s.generate(0), s.truth.clone()))
}

/// `count` evenly spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..count)
            .map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Nine σ values evenly spaced over [0.01, 5].
pub fn default_sigmas() -> Vec<f64> {
    linspace(0.01, 5.0, 9)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pearson(a: &[f64], b: &[f64]) -> f64 {
        let n = a.len() as f64;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        cov / (va * vb).sqrt()
    }

    #[test]
    fn example_defaults() {
        let (d, truth) = generate_scenario(&ScenarioSpec::example(1, Family::Binomial).unwrap()).unwrap();
        assert_eq!((d.n(), d.p()), (200, 8));
        assert_eq!(truth, VariableSet::new([1, 2, 3]).unwrap());
        assert_eq!(ScenarioSpec::example(2, Family::Gaussian).unwrap().n, 1000);
        assert_eq!(ScenarioSpec::example(3, Family::Gaussian).unwrap().p, 2000);
        assert!(matches!(
            ScenarioSpec::example(6, Family::Gaussian),
            Err(PaviError::UnknownExample(6))
        ));

        let s4 = Scenario::new(ScenarioSpec::example(4, Family::Gaussian).unwrap()).unwrap();
        assert_eq!(*s4.true_support(), VariableSet::new(1..=15).unwrap());
        assert_eq!(
            &s4.beta()[..15],
            &[10.5, 10.5, 10.5, 10.5, 10.5, 5.5, 5.5, 5.5, 5.5, 5.5, 0.5, 0.5, 0.5, 0.5, 0.5]
        );
        assert!(s4.beta()[15..].iter().all(|&b| b == 0.0));
    }

    #[test]
    fn ar_design_has_expected_correlation() {
        let spec = ScenarioSpec::example(4, Family::Gaussian).unwrap().with_n(5000);
        let (d, _) = generate_scenario(&spec).unwrap();
        let r = pearson(d.column(0), d.column(1));
        assert!((r - 0.4).abs() < 0.05, "{r}");
        let r2 = pearson(d.column(0), d.column(2));
        assert!((r2 - 0.16).abs() < 0.05, "{r2}");
    }

    #[test]
    fn example5_blocks_are_independent() {
        let spec = ScenarioSpec::example(5, Family::Gaussian).unwrap().with_n(5000);
        let (d, _) = generate_scenario(&spec).unwrap();
        assert!(pearson(d.column(14), d.column(15)).abs() < 0.1);
        assert!((pearson(d.column(15), d.column(16)) - 0.4).abs() < 0.05);
    }

    #[test]
    fn replications_are_reproducible_and_distinct() {
        let s = Scenario::new(ScenarioSpec::example(1, Family::Gaussian).unwrap()).unwrap();
        assert_eq!(s.generate(3), s.generate(3));
        assert_ne!(s.generate(3), s.generate(4));
    }

    #[test]
    fn sigma_grid() {
        let s = default_sigmas();
        assert_eq!(s.len(), 9);
        assert_eq!(s[0], 0.01);
        assert!((s[8] - 5.0).abs() < 1e-12);
        assert!((s[1] - s[0] - 4.99 / 8.0).abs() < 1e-12);
    }
}

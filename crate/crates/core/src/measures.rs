//! Set arithmetic over predictor index sets and the F/G agreement measures.
//!
//! Every measure is computed from integer cardinalities with a single final
//! division, so small hand examples are reproducible bit for bit.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PaviError, Result};

/// A set of 1-based predictor labels, kept strictly increasing.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VariableSet(Vec<usize>);

impl VariableSet {
    pub fn empty() -> Self {
        VariableSet(Vec::new())
    }

    /// Builds a set from arbitrary indices, rejecting zero and duplicates.
    pub fn new<I: IntoIterator<Item = usize>>(indices: I) -> Result<Self> {
        let mut v: Vec<usize> = indices.into_iter().collect();
        if v.contains(&0) {
            return Err(PaviError::InvalidSet("indices are 1-based; found 0".into()));
        }
        v.sort_unstable();
        if let Some(w) = v.windows(2).find(|w| w[0] == w[1]) {
            return Err(PaviError::InvalidSet(format!("duplicate index {}", w[0])));
        }
        Ok(VariableSet(v))
    }

    /// Builds a set, silently merging duplicates.
    pub fn from_unsorted<I: IntoIterator<Item = usize>>(indices: I) -> Self {
        let mut v: Vec<usize> = indices.into_iter().filter(|&i| i > 0).collect();
        v.sort_unstable();
        v.dedup();
        VariableSet(v)
    }

    /// Builds a set from 0-based column positions.
    pub fn from_zero_based<I: IntoIterator<Item = usize>>(cols: I) -> Self {
        Self::from_unsorted(cols.into_iter().map(|c| c + 1))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn indices(&self) -> &[usize] {
        &self.0
    }

    /// 0-based column positions, in increasing order.
    pub fn columns(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().map(|&i| i - 1)
    }

    pub fn contains(&self, index: usize) -> bool {
        self.0.binary_search(&index).is_ok()
    }

    pub fn max_index(&self) -> Option<usize> {
        self.0.last().copied()
    }

    pub fn check_dimension(&self, p: usize) -> Result<()> {
        match self.max_index() {
            Some(m) if m > p => Err(PaviError::IndexOutOfRange { index: m, p }),
            _ => Ok(()),
        }
    }

    pub fn intersection_size(&self, other: &VariableSet) -> usize {
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }
}

impl fmt::Display for VariableSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for i in &self.0 {
            if !first {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
            first = false;
        }
        Ok(())
    }
}

impl FromStr for VariableSet {
    type Err = PaviError;

    /// Parses the comma-separated text form; the empty string is the empty set.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(VariableSet::empty());
        }
        let mut out = Vec::new();
        for tok in s.split(',') {
            let tok = tok.trim();
            let i: usize = tok
                .parse()
                .map_err(|_| PaviError::InvalidSet(format!("not a positive integer: '{tok}'")))?;
            out.push(i);
        }
        VariableSet::new(out)
    }
}

/// |a ∇ b|.
pub fn sym_diff_size(a: &VariableSet, b: &VariableSet) -> usize {
    a.len() + b.len() - 2 * a.intersection_size(b)
}

pub fn precision(selected: &VariableSet, reference: &VariableSet) -> f64 {
    match (selected.is_empty(), reference.is_empty()) {
        (true, true) => 1.0,
        (true, false) => 0.0,
        _ => selected.intersection_size(reference) as f64 / selected.len() as f64,
    }
}

pub fn recall(selected: &VariableSet, reference: &VariableSet) -> f64 {
    match (selected.is_empty(), reference.is_empty()) {
        (true, true) => 1.0,
        (false, true) => 0.0,
        _ => selected.intersection_size(reference) as f64 / reference.len() as f64,
    }
}

/// Harmonic mean of precision and recall: 2|a∩b| / (|a|+|b|).
pub fn f_measure(a: &VariableSet, b: &VariableSet) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => (2 * a.intersection_size(b)) as f64 / (a.len() + b.len()) as f64,
    }
}

/// Geometric mean of precision and recall: |a∩b| / √(|a|·|b|).
pub fn g_measure(a: &VariableSet, b: &VariableSet) -> f64 {
    match (a.is_empty(), b.is_empty()) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => a.intersection_size(b) as f64 / ((a.len() * b.len()) as f64).sqrt(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Measure {
    F,
    G,
}

impl Measure {
    pub fn eval(self, a: &VariableSet, b: &VariableSet) -> f64 {
        match self {
            Measure::F => f_measure(a, b),
            Measure::G => g_measure(a, b),
        }
    }
}

/// Weighted collection of distinct candidate supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateEnsemble {
    candidates: Vec<VariableSet>,
    weights: Vec<f64>,
}

/// Tolerance on |Σw − 1| accepted by [`CandidateEnsemble::new`].
pub const WEIGHT_SUM_TOL: f64 = 1e-10;

impl CandidateEnsemble {
    pub fn new(candidates: Vec<VariableSet>, weights: Vec<f64>) -> Result<Self> {
        if candidates.len() != weights.len() {
            return Err(PaviError::DimensionMismatch(format!(
                "{} candidates but {} weights",
                candidates.len(),
                weights.len()
            )));
        }
        if candidates.is_empty() {
            return Err(PaviError::InvalidSet("ensemble has no candidates".into()));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return Err(PaviError::InvalidSet(format!("invalid weight {w}")));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(PaviError::InvalidSet(format!("weights sum to {total}")));
        }
        let mut seen = std::collections::HashSet::with_capacity(candidates.len());
        for c in &candidates {
            if !seen.insert(c) {
                return Err(PaviError::InvalidSet(format!("duplicate candidate {{{c}}}")));
            }
        }
        Ok(CandidateEnsemble { candidates, weights })
    }

    /// All mass on a single support.
    pub fn point_mass(set: VariableSet) -> Self {
        CandidateEnsemble {
            candidates: vec![set],
            weights: vec![1.0],
        }
    }

    pub fn candidates(&self) -> &[VariableSet] {
        &self.candidates
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&VariableSet, f64)> {
        self.candidates.iter().zip(self.weights.iter().copied())
    }

    /// Σₖ wₖ |𝒜ᵏ ∇ target| / |target|; the weak-consistency statistic.
    pub fn weighted_sym_diff_ratio(&self, target: &VariableSet) -> f64 {
        let num: f64 = self.iter().map(|(c, w)| w * sym_diff_size(c, target) as f64).sum();
        num / target.len().max(1) as f64
    }
}

fn weighted_mean(model: &VariableSet, ensemble: &CandidateEnsemble, m: Measure) -> f64 {
    ensemble.iter().map(|(c, w)| w * m.eval(model, c)).sum()
}

/// F̂ = Σₖ wₖ F(model; 𝒜ᵏ).
pub fn estimate_f(model: &VariableSet, ensemble: &CandidateEnsemble) -> f64 {
    weighted_mean(model, ensemble, Measure::F)
}

/// Ĝ = Σₖ wₖ G(model; 𝒜ᵏ).
pub fn estimate_g(model: &VariableSet, ensemble: &CandidateEnsemble) -> f64 {
    weighted_mean(model, ensemble, Measure::G)
}

/// Weighted root-mean-square deviation of the per-candidate measure about its weighted mean.
pub fn sd_estimate(model: &VariableSet, ensemble: &CandidateEnsemble, m: Measure) -> f64 {
    let mean = weighted_mean(model, ensemble, m);
    let var: f64 = ensemble
        .iter()
        .map(|(c, w)| {
            let d = m.eval(model, c) - mean;
            w * d * d
        })
        .sum();
    var.max(0.0).sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateContribution {
    pub candidate: usize,
    pub weight: f64,
    pub f: f64,
    pub g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessmentReport {
    pub f_hat: f64,
    pub g_hat: f64,
    pub sd_f: f64,
    pub sd_g: f64,
    pub per_candidate: Vec<CandidateContribution>,
}

/// Estimated F and G of one model-under-check, with spreads and per-candidate terms.
pub fn assess(model: &VariableSet, ensemble: &CandidateEnsemble) -> AssessmentReport {
    let per_candidate: Vec<CandidateContribution> = ensemble
        .iter()
        .enumerate()
        .map(|(k, (c, w))| CandidateContribution {
            candidate: k,
            weight: w,
            f: f_measure(model, c),
            g: g_measure(model, c),
        })
        .collect();
    let f_hat: f64 = per_candidate.iter().map(|c| c.weight * c.f).sum();
    let g_hat: f64 = per_candidate.iter().map(|c| c.weight * c.g).sum();
    let spread = |mean: f64, get: fn(&CandidateContribution) -> f64| {
        per_candidate
            .iter()
            .map(|c| c.weight * (get(c) - mean).powi(2))
            .sum::<f64>()
            .max(0.0)
            .sqrt()
    };
    AssessmentReport {
        f_hat,
        g_hat,
        sd_f: spread(f_hat, |c| c.f),
        sd_g: spread(g_hat, |c| c.g),
        per_candidate,
    }
}

//! Candidate model sets and the model-space complexity term.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{PaviError, Result};
use crate::measures::VariableSet;
use crate::paths::PathSolution;

/// Largest p accepted by [`all_subsets`].
pub const MAX_ALL_SUBSETS_P: usize = 20;

/// Where a candidate came from: the solver name and λ index on its path.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub solver: String,
    pub lambda_index: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct CandidateSet {
    members: Vec<VariableSet>,
    provenance: Vec<Vec<Provenance>>,
}

impl CandidateSet {
    /// Deduplicates `members`, keeping first occurrences, and appends the
    /// empty model if it is missing.
    pub fn from_members<I: IntoIterator<Item = VariableSet>>(members: I) -> Self {
        let mut seen = std::collections::HashSet::new();
        let members: Vec<VariableSet> = members.into_iter().filter(|m| seen.insert(m.clone())).collect();
        let provenance = vec![Vec::new(); members.len()];
        let mut set = CandidateSet { members, provenance };
        set.ensure_empty();
        set
    }

    fn ensure_empty(&mut self) {
        if !self.members.iter().any(VariableSet::is_empty) {
            self.members.push(VariableSet::empty());
            self.provenance.push(Vec::new());
        }
    }

    pub fn members(&self) -> &[VariableSet] {
        &self.members
    }

    pub fn provenance(&self) -> &[Vec<Provenance>] {
        &self.provenance
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn max_size(&self) -> usize {
        self.members.iter().map(VariableSet::len).max().unwrap_or(0)
    }

    /// Same members in a different order; `order[k]` is the old position of new member k.
    pub fn permuted(&self, order: &[usize]) -> Self {
        CandidateSet {
            members: order.iter().map(|&k| self.members[k].clone()).collect(),
            provenance: order.iter().map(|&k| self.provenance[k].clone()).collect(),
        }
    }
}

/// Union of all supports along `paths`, deduplicated, plus the empty model.
/// Members larger than `max_size` are dropped.
pub fn collect_candidates(paths: &[PathSolution], max_size: Option<usize>) -> CandidateSet {
    let mut set = CandidateSet::default();
    let mut index: HashMap<VariableSet, usize> = HashMap::new();
    for path in paths {
        let solver = path.penalty.kind.name().to_string();
        for (l, pt) in path.points.iter().enumerate() {
            if max_size.is_some_and(|m| pt.support.len() > m) {
                continue;
            }
            let tag = Provenance {
                solver: solver.clone(),
                lambda_index: l,
            };
            match index.get(&pt.support) {
                Some(&k) => set.provenance[k].push(tag),
                None => {
                    index.insert(pt.support.clone(), set.members.len());
                    set.members.push(pt.support.clone());
                    set.provenance.push(vec![tag]);
                }
            }
        }
    }
    set.ensure_empty();
    set
}

/// Every subset of {1, …, p}, ordered by bitmask.
pub fn all_subsets(p: usize) -> Result<CandidateSet> {
    if p > MAX_ALL_SUBSETS_P {
        return Err(PaviError::TooManySubsets(p));
    }
    let members: Vec<VariableSet> = (0u32..(1u32 << p))
        .map(|mask| VariableSet::from_zero_based((0..p).filter(|&j| mask >> j & 1 == 1)))
        .collect();
    let provenance = vec![Vec::new(); members.len()];
    Ok(CandidateSet { members, provenance })
}

/// C = s·log(e·p/s) + 2·log(s+2), with the first term taken as 0 at s = 0.
pub fn complexity_prior(s: usize, p: usize) -> f64 {
    let sf = s as f64;
    let search = if s == 0 {
        0.0
    } else {
        sf * (std::f64::consts::E * p as f64 / sf).ln()
    };
    search + 2.0 * (sf + 2.0).ln()
}

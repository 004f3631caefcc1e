//! Penalty strategies. Each penalty is a trait object registered by name so
//! the path solver, the CLI and the simulation harness select them at runtime.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{PaviError, Result};

pub const DEFAULT_SCAD_A: f64 = 3.7;
pub const DEFAULT_MCP_A: f64 = 3.0;

pub fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// A separable penalty pλ(|β|) on standardized coefficients.
pub trait Penalty: Send + Sync {
    fn name(&self) -> &'static str;

    /// pλ(u) for u ≥ 0.
    fn value(&self, u: f64, lambda: f64) -> f64;

    /// p'λ(u) for u ≥ 0.
    fn derivative(&self, u: f64, lambda: f64) -> f64;

    /// Global minimizer of ½(z − β)² + pλ(|β|).
    fn univariate_solution(&self, z: f64, lambda: f64) -> f64;

    fn is_convex(&self) -> bool;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Lasso;

impl Penalty for Lasso {
    fn name(&self) -> &'static str {
        "lasso"
    }

    fn value(&self, u: f64, lambda: f64) -> f64 {
        lambda * u
    }

    fn derivative(&self, _u: f64, lambda: f64) -> f64 {
        lambda
    }

    fn univariate_solution(&self, z: f64, lambda: f64) -> f64 {
        soft_threshold(z, lambda)
    }

    fn is_convex(&self) -> bool {
        true
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Scad {
    pub a: f64,
}

impl Penalty for Scad {
    fn name(&self) -> &'static str {
        "scad"
    }

    fn value(&self, u: f64, lambda: f64) -> f64 {
        let a = self.a;
        if u <= lambda {
            lambda * u
        } else if u <= a * lambda {
            (2.0 * a * lambda * u - u * u - lambda * lambda) / (2.0 * (a - 1.0))
        } else {
            lambda * lambda * (a + 1.0) / 2.0
        }
    }

    fn derivative(&self, u: f64, lambda: f64) -> f64 {
        if u <= lambda {
            lambda
        } else {
            (self.a * lambda - u).max(0.0) / (self.a - 1.0)
        }
    }

    fn univariate_solution(&self, z: f64, lambda: f64) -> f64 {
        let a = self.a;
        let az = z.abs();
        if az <= 2.0 * lambda {
            soft_threshold(z, lambda)
        } else if az <= a * lambda {
            ((a - 1.0) * z - z.signum() * a * lambda) / (a - 2.0)
        } else {
            z
        }
    }

    fn is_convex(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Mcp {
    pub a: f64,
}

impl Penalty for Mcp {
    fn name(&self) -> &'static str {
        "mcp"
    }

    fn value(&self, u: f64, lambda: f64) -> f64 {
        if u <= self.a * lambda {
            lambda * u - u * u / (2.0 * self.a)
        } else {
            self.a * lambda * lambda / 2.0
        }
    }

    fn derivative(&self, u: f64, lambda: f64) -> f64 {
        (self.a * lambda - u).max(0.0) / self.a
    }

    fn univariate_solution(&self, z: f64, lambda: f64) -> f64 {
        univariate_mcp_solution(z, lambda, self.a)
    }

    fn is_convex(&self) -> bool {
        false
    }
}

/// Closed-form minimizer of ½(z − β)² + MCP(|β|) for a > 1.
pub fn univariate_mcp_solution(z: f64, lambda: f64, a: f64) -> f64 {
    if z.abs() <= a * lambda {
        soft_threshold(z, lambda) / (1.0 - 1.0 / a)
    } else {
        z
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PenaltyKind {
    Lasso,
    AdaptiveLasso,
    Scad,
    Mcp,
}

impl PenaltyKind {
    pub const ALL: [PenaltyKind; 4] = [
        PenaltyKind::Lasso,
        PenaltyKind::AdaptiveLasso,
        PenaltyKind::Mcp,
        PenaltyKind::Scad,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PenaltyKind::Lasso => "lasso",
            PenaltyKind::AdaptiveLasso => "adlasso",
            PenaltyKind::Scad => "scad",
            PenaltyKind::Mcp => "mcp",
        }
    }
}

impl fmt::Display for PenaltyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PenaltyKind {
    type Err = PaviError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lasso" => Ok(PenaltyKind::Lasso),
            "adlasso" | "adaptive_lasso" | "adaptive-lasso" => Ok(PenaltyKind::AdaptiveLasso),
            "scad" => Ok(PenaltyKind::Scad),
            "mcp" => Ok(PenaltyKind::Mcp),
            other => Err(PaviError::UnknownStrategy {
                kind: "penalty",
                name: other.to_string(),
            }),
        }
    }
}

/// Penalty configuration: kind plus its shape parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PenaltySpec {
    pub kind: PenaltyKind,
    /// Concavity parameter; SCAD needs a > 2, MCP a > 1.
    pub a: f64,
    /// Adaptive-Lasso exponent.
    pub gamma: f64,
    /// Per-variable multipliers for the adaptive Lasso; +∞ excludes a variable.
    pub adaptive_weights: Option<Vec<f64>>,
}

impl PenaltySpec {
    pub fn lasso() -> Self {
        PenaltySpec {
            kind: PenaltyKind::Lasso,
            a: 0.0,
            gamma: 1.0,
            adaptive_weights: None,
        }
    }

    pub fn scad() -> Self {
        PenaltySpec {
            kind: PenaltyKind::Scad,
            a: DEFAULT_SCAD_A,
            ..Self::lasso()
        }
    }

    pub fn mcp() -> Self {
        PenaltySpec {
            kind: PenaltyKind::Mcp,
            a: DEFAULT_MCP_A,
            ..Self::lasso()
        }
    }

    pub fn adaptive_lasso(gamma: f64, weights: Option<Vec<f64>>) -> Self {
        PenaltySpec {
            kind: PenaltyKind::AdaptiveLasso,
            a: 0.0,
            gamma,
            adaptive_weights: weights,
        }
    }

    /// Default spec for a kind (adaptive weights left unset).
    pub fn for_kind(kind: PenaltyKind) -> Self {
        match kind {
            PenaltyKind::Lasso => Self::lasso(),
            PenaltyKind::AdaptiveLasso => Self::adaptive_lasso(1.0, None),
            PenaltyKind::Scad => Self::scad(),
            PenaltyKind::Mcp => Self::mcp(),
        }
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    pub fn validate(&self) -> Result<()> {
        match self.kind {
            PenaltyKind::Scad if !(self.a > 2.0) => Err(PaviError::InvalidPenalty(format!(
                "SCAD requires a > 2, got {}",
                self.a
            ))),
            PenaltyKind::Mcp if !(self.a > 1.0) => {
                Err(PaviError::InvalidPenalty(format!("MCP requires a > 1, got {}", self.a)))
            }
            PenaltyKind::AdaptiveLasso => {
                if !(self.gamma >= 0.0) {
                    return Err(PaviError::InvalidPenalty(format!(
                        "gamma must be >= 0, got {}",
                        self.gamma
                    )));
                }
                if let Some(w) = &self.adaptive_weights {
                    if w.iter().any(|v| v.is_nan() || *v <= 0.0) {
                        return Err(PaviError::InvalidPenalty("adaptive weights must be positive".into()));
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Resolves the penalty strategy through the registry.
    pub fn build(&self) -> Result<Box<dyn Penalty>> {
        self.validate()?;
        PenaltyRegistry::builtin().create(self.kind.name(), self.a)
    }

    /// Per-variable multipliers on λ (1 unless adaptive).
    pub fn penalty_factors(&self, p: usize) -> Result<Vec<f64>> {
        match (&self.kind, &self.adaptive_weights) {
            (PenaltyKind::AdaptiveLasso, Some(w)) => {
                if w.len() != p {
                    return Err(PaviError::DimensionMismatch(format!(
                        "{} adaptive weights for p={p}",
                        w.len()
                    )));
                }
                Ok(w.clone())
            }
            (PenaltyKind::AdaptiveLasso, None) => Err(PaviError::InvalidPenalty(
                "adaptive lasso needs adaptive weights (see adaptive_weights)".into(),
            )),
            _ => Ok(vec![1.0; p]),
        }
    }
}

pub type PenaltyConstructor = fn(f64) -> Box<dyn Penalty>;

/// Name → constructor table for penalty strategies.
pub struct PenaltyRegistry {
    entries: Vec<(&'static str, PenaltyConstructor)>,
}

impl PenaltyRegistry {
    pub fn empty() -> Self {
        PenaltyRegistry { entries: Vec::new() }
    }

    pub fn builtin() -> Self {
        let mut r = Self::empty();
        r.register("lasso", |_| Box::new(Lasso));
        // adaptive weights enter through penalty factors; the kernel is the Lasso's
        r.register("adlasso", |_| Box::new(Lasso));
        r.register("scad", |a| Box::new(Scad { a }));
        r.register("mcp", |a| Box::new(Mcp { a }));
        r
    }

    pub fn register(&mut self, name: &'static str, ctor: PenaltyConstructor) {
        self.entries.retain(|(n, _)| *n != name);
        self.entries.push((name, ctor));
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.entries.iter().map(|(n, _)| *n).collect()
    }

    pub fn create(&self, name: &str, a: f64) -> Result<Box<dyn Penalty>> {
        self.entries
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, ctor)| ctor(a))
            .ok_or_else(|| PaviError::UnknownStrategy {
                kind: "penalty",
                name: name.to_string(),
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute-force scan of ½(z − β)² + pλ(|β|) over β ∈ [−5, 5].
    fn grid_minimizer(p: &dyn Penalty, z: f64, lambda: f64) -> f64 {
        let step = 1e-5;
        let steps = (10.0 / step) as i64;
        let mut best = (f64::INFINITY, 0.0);
        for k in 0..=steps {
            let b = -5.0 + k as f64 * step;
            let obj = 0.5 * (z - b).powi(2) + p.value(b.abs(), lambda);
            if obj < best.0 {
                best = (obj, b);
            }
        }
        best.1
    }

    #[test]
    fn soft_threshold_examples() {
        assert_eq!(soft_threshold(3.0, 1.0), 2.0);
        assert_eq!(soft_threshold(-0.5, 1.0), 0.0);
        assert_eq!(soft_threshold(-3.0, 1.0), -2.0);
    }

    #[test]
    fn derivative_examples() {
        let lambda = 0.5;
        let scad = Scad { a: 3.7 };
        assert_eq!(scad.derivative(lambda / 2.0, lambda), lambda);
        let mcp = Mcp { a: 3.0 };
        assert_eq!(mcp.derivative(3.0 * lambda, lambda), 0.0);
        assert_eq!(mcp.derivative(0.0, lambda), lambda);
        assert_eq!(Lasso.derivative(10.0, lambda), lambda);
        assert_eq!(scad.derivative(3.7 * lambda + 1.0, lambda), 0.0);
    }

    #[test]
    fn derivative_matches_value_slope() {
        let lambda = 0.6;
        let pens: [Box<dyn Penalty>; 3] = [Box::new(Lasso), Box::new(Scad { a: 3.7 }), Box::new(Mcp { a: 3.0 })];
        for p in &pens {
            for k in 1..60 {
                let u = k as f64 * 0.05;
                let h = 1e-6;
                let fd = (p.value(u + h, lambda) - p.value(u - h, lambda)) / (2.0 * h);
                assert!((fd - p.derivative(u, lambda)).abs() < 1e-5, "{} at u={u}", p.name());
            }
        }
    }

    #[test]
    fn mcp_univariate_examples() {
        let (lambda, a) = (1.0, 3.0);
        assert_eq!(univariate_mcp_solution(2.0 * a * lambda, lambda, a), 2.0 * a * lambda);
        assert_eq!(univariate_mcp_solution(lambda / 2.0, lambda, a), 0.0);
        let closed = univariate_mcp_solution(1.5, 1.0, 3.0);
        assert!((closed - 0.75).abs() < 1e-15);
        let scanned = grid_minimizer(&Mcp { a: 3.0 }, 1.5, 1.0);
        assert!((closed - scanned).abs() < 1e-4);
    }

    #[test]
    fn univariate_solutions_match_grid_scan() {
        let pens: [Box<dyn Penalty>; 3] = [Box::new(Lasso), Box::new(Scad { a: 3.7 }), Box::new(Mcp { a: 3.0 })];
        for p in &pens {
            for &lambda in &[0.3, 1.0] {
                for k in -8..=8 {
                    let z = k as f64 * 0.55;
                    let closed = p.univariate_solution(z, lambda);
                    let scanned = grid_minimizer(p.as_ref(), z, lambda);
                    assert!(
                        (closed - scanned).abs() < 1e-4,
                        "{} z={z} λ={lambda}: {closed} vs {scanned}",
                        p.name()
                    );
                }
            }
        }
    }

    #[test]
    fn validation() {
        assert!(PenaltySpec::scad().with_a(2.0).validate().is_err());
        assert!(PenaltySpec::mcp().with_a(1.0).validate().is_err());
        assert!(PenaltySpec::mcp().with_a(1.5).validate().is_ok());
        assert!(PenaltySpec::adaptive_lasso(1.0, Some(vec![1.0, -1.0]))
            .validate()
            .is_err());
    }

    #[test]
    fn registry_lookup() {
        let r = PenaltyRegistry::builtin();
        assert_eq!(r.names(), vec!["lasso", "adlasso", "scad", "mcp"]);
        assert_eq!(r.create("mcp", 3.0).unwrap().name(), "mcp");
        assert!(r.create("ridge", 1.0).is_err());
        assert_eq!(
            "adaptive_lasso".parse::<PenaltyKind>().unwrap(),
            PenaltyKind::AdaptiveLasso
        );
    }
}

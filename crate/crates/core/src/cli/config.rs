//! Run configuration: defaults, overlaid by a JSON file, overlaid by flags.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::data::Family;
use crate::ensemble::{WeightingConfig, WeightingRegistry};
use crate::error::{PaviError, Result};
use crate::paths::PenaltyKind;
use crate::simharness::linspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Assess,
    Simulate,
    Sweep,
    Paths,
    Diagnostics,
}

impl fmt::Display for Command {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Command::Assess => "assess",
            Command::Simulate => "simulate",
            Command::Sweep => "sweep",
            Command::Paths => "paths",
            Command::Diagnostics => "diagnostics",
        })
    }
}

/// Fully resolved settings for one command.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: Command,
    /// Input CSV (assess, paths, diagnostics).
    pub data: Option<PathBuf>,
    /// Response column name; default "y".
    pub response: String,
    /// Default gaussian.
    pub family: Family,
    /// Model list file (assess, diagnostics).
    pub models: Option<PathBuf>,
    /// Also assess the Lasso/adaptive Lasso/MCP/SCAD selections; default true.
    pub selectors: bool,
    /// Default ["arm", "bicp"].
    pub weighting: Vec<String>,
    /// Default 1.
    pub psi: f64,
    /// ARM splits; default 100.
    pub splits: usize,
    /// CV folds; default 5.
    pub folds: usize,
    /// Repetitions (assess) or replications (simulate, sweep); default 100.
    pub reps: usize,
    /// Default 42.
    pub seed: u64,
    /// Output directory; default "pavi-out".
    pub out: PathBuf,
    /// Emit AIC/BIC/deviance per model (assess); default false.
    pub diagnostics: bool,
    /// Simulation example 1..5; default 1.
    pub example: u32,
    /// Overrides the example's n.
    pub n: Option<usize>,
    /// Noise level for gaussian simulate; default 1.
    pub sigma: f64,
    /// "lo:hi:count" or a comma list; default "0.01:5:9".
    pub sigmas: String,
    /// Penalty for the paths command; default lasso.
    pub penalty: PenaltyKind,
    /// Adaptive-Lasso exponent; default 1.
    pub gamma: f64,
}

impl RunConfig {
    pub fn defaults(command: Command) -> Self {
        RunConfig {
            command,
            data: None,
            response: "y".into(),
            family: Family::Gaussian,
            models: None,
            selectors: true,
            weighting: vec!["arm".into(), "bicp".into()],
            psi: 1.0,
            splits: 100,
            folds: 5,
            reps: 100,
            seed: 42,
            out: PathBuf::from("pavi-out"),
            diagnostics: false,
            example: 1,
            n: None,
            sigma: 1.0,
            sigmas: "0.01:5:9".into(),
            penalty: PenaltyKind::Lasso,
            gamma: 1.0,
        }
    }

    /// Defaults, then `file` (JSON), then `flags`.
    pub fn resolve(command: Command, file: Option<&Path>, flags: &ConfigOverlay) -> Result<Self> {
        let mut cfg = Self::defaults(command);
        if let Some(path) = file {
            let text = std::fs::read_to_string(path)?;
            let overlay: ConfigOverlay = serde_json::from_str(&text)?;
            overlay.check()?;
            overlay.apply(&mut cfg);
        }
        flags.check()?;
        flags.apply(&mut cfg);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let registry = WeightingRegistry::builtin();
        if self.weighting.is_empty() {
            return Err(PaviError::InvalidConfig("at least one weighting is required".into()));
        }
        for w in &self.weighting {
            registry.create(w)?;
        }
        if self.reps == 0 {
            return Err(PaviError::InvalidConfig("reps must be >= 1".into()));
        }
        if self.folds < 2 {
            return Err(PaviError::InvalidConfig("folds must be >= 2".into()));
        }
        self.weighting_configs()[0].validate()
    }

    pub fn weighting_configs(&self) -> Vec<WeightingConfig> {
        self.weighting
            .iter()
            .map(|m| {
                let mut c = WeightingConfig::new(&m.trim().to_ascii_lowercase(), self.seed)
                    .with_psi(self.psi)
                    .with_splits(self.splits);
                if c.method == "bic-p" || c.method == "bic_p" {
                    c.method = "bicp".into();
                }
                c
            })
            .collect()
    }

    pub fn sigma_values(&self) -> Result<Vec<f64>> {
        parse_sigmas(&self.sigmas)
    }

    pub fn require_data(&self) -> Result<&Path> {
        self.data
            .as_deref()
            .ok_or_else(|| PaviError::InvalidConfig(format!("{} needs --data", self.command)))
    }
}

/// "lo:hi:count" (evenly spaced, inclusive) or "a,b,c".
pub fn parse_sigmas(text: &str) -> Result<Vec<f64>> {
    let bad = || PaviError::InvalidConfig(format!("cannot parse sigma list '{text}'"));
    let values: Vec<f64> = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').map(str::trim).collect();
        if parts.len() != 3 {
            return Err(bad());
        }
        let lo: f64 = parts[0].parse().map_err(|_| bad())?;
        let hi: f64 = parts[1].parse().map_err(|_| bad())?;
        let count: usize = parts[2].parse().map_err(|_| bad())?;
        linspace(lo, hi, count)
    } else {
        text.split(',')
            .map(|t| t.trim().parse::<f64>().map_err(|_| bad()))
            .collect::<Result<_>>()?
    };
    if values.is_empty() || values.iter().any(|s| !(*s > 0.0 && s.is_finite())) {
        return Err(PaviError::InvalidConfig(format!("sigmas must be positive: '{text}'")));
    }
    Ok(values)
}

/// Optional settings from a config file or the command line.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverlay {
    pub data: Option<PathBuf>,
    pub response: Option<String>,
    pub family: Option<Family>,
    pub models: Option<PathBuf>,
    pub selectors: Option<bool>,
    pub weighting: Option<Vec<String>>,
    pub psi: Option<f64>,
    pub splits: Option<usize>,
    pub folds: Option<usize>,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub diagnostics: Option<bool>,
    pub example: Option<u32>,
    pub n: Option<usize>,
    pub sigma: Option<f64>,
    pub sigmas: Option<String>,
    pub penalty: Option<String>,
    pub gamma: Option<f64>,
}

impl ConfigOverlay {
    pub fn apply(&self, cfg: &mut RunConfig) {
        macro_rules! set {
            ($($field:ident),*) => {
                $(if let Some(v) = &self.$field { cfg.$field = v.clone(); })*
            };
        }
        set!(
            response,
            family,
            selectors,
            weighting,
            psi,
            splits,
            folds,
            reps,
            seed,
            out,
            diagnostics,
            example,
            sigma,
            sigmas,
            gamma
        );
        if self.data.is_some() {
            cfg.data = self.data.clone();
        }
        if self.models.is_some() {
            cfg.models = self.models.clone();
        }
        if self.n.is_some() {
            cfg.n = self.n;
        }
        if let Some(p) = &self.penalty {
            // unknown names surface when the command parses the penalty
            if let Ok(kind) = PenaltyKind::from_str(p) {
                cfg.penalty = kind;
            }
        }
    }

    /// Penalty name validity, checked separately so `apply` stays infallible.
    pub fn check(&self) -> Result<()> {
        if let Some(p) = &self.penalty {
            PenaltyKind::from_str(p)?;
        }
        Ok(())
    }
}

//! The subcommands. Each one writes its TSV files under `cfg.out` and also
//! returns the values, so tests can check them without reparsing.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{Command, RunConfig};
use super::io::{format_g6, load_dataset, parse_model_list, read_tsv, write_tsv, NamedModel, Table};
use super::{CliError, CliResult, Context};
use crate::data::Dataset;
use crate::ensemble::{build_candidates, compute_weights, CandidateSet};
use crate::error::{PaviError, Result};
use crate::glm;
use crate::measures::{assess, CandidateEnsemble, VariableSet};
use crate::numeric::derive_seed;
use crate::paths::{cv_select, fit_default_path, resolve_adaptive, PathSolution, PenaltyKind, PenaltySpec};
use crate::simharness::aggregate::{ESTIMATED_MEASURES, TRUE_MEASURES};
use crate::simharness::{
    sigma_sweep, simulate, tidy_sweep, AggregateRow, AggregateTable, ReplicationReport, ScenarioSpec,
};

/// One (model, weighting) line of an assessment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AssessRow {
    pub model: String,
    pub weighting: String,
    pub variables: VariableSet,
    pub f_hat: f64,
    pub g_hat: f64,
    pub sd_f: f64,
    pub sd_g: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRow {
    pub model: String,
    pub variables: VariableSet,
    pub aic: f64,
    pub bic: f64,
    pub deviance: f64,
}

fn penalty_spec(kind: PenaltyKind, gamma: f64) -> PenaltySpec {
    match kind {
        PenaltyKind::AdaptiveLasso => PenaltySpec::adaptive_lasso(gamma, None),
        other => PenaltySpec::for_kind(other),
    }
}

/// Every model against every ensemble, models outermost.
pub fn assess_with_ensembles(models: &[NamedModel], ensembles: &[(String, CandidateEnsemble)]) -> Vec<AssessRow> {
    models
        .iter()
        .flat_map(|m| {
            ensembles.iter().map(move |(w, ens)| {
                let r = assess(&m.set, ens);
                AssessRow {
                    model: m.name.clone(),
                    weighting: w.clone(),
                    variables: m.set.clone(),
                    f_hat: r.f_hat,
                    g_hat: r.g_hat,
                    sd_f: r.sd_f,
                    sd_g: r.sd_g,
                }
            })
        })
        .collect()
}

fn load(cfg: &RunConfig) -> CliResult<Dataset> {
    let path = cfg.require_data().with_context(|| cfg.command.to_string())?;
    load_dataset(path, &cfg.response, cfg.family).with_context(|| format!("loading {}", path.display()))
}

fn load_models(cfg: &RunConfig, p: usize) -> CliResult<Vec<NamedModel>> {
    match &cfg.models {
        Some(path) => {
            let ctx = || format!("reading {}", path.display());
            let text = fs::read_to_string(path).map_err(PaviError::from).with_context(ctx)?;
            parse_model_list(&text, Some(p)).with_context(ctx)
        }
        None => Ok(Vec::new()),
    }
}

fn write_table(cfg: &RunConfig, name: &str, table: &Table, written: &mut Vec<PathBuf>) -> CliResult<()> {
    let path = cfg.out.join(name);
    write_tsv(&path, table).with_context(|| format!("writing {}", path.display()))?;
    written.push(path);
    Ok(())
}

struct RepOutcome {
    selections: Vec<VariableSet>,
    rows: Vec<AssessRow>,
}

/// Repetition `rep` of an assessment: fresh CV folds and ARM splits, the
/// same candidate set.
fn assess_rep(
    data: &Dataset,
    candidates: &CandidateSet,
    fixed: &[NamedModel],
    cfg: &RunConfig,
    rep: u64,
) -> CliResult<RepOutcome> {
    let base = derive_seed(cfg.seed, rep);
    let (cv_seed, arm_seed) = (derive_seed(base, 1), derive_seed(base, 2));

    let selectors: Vec<PenaltyKind> = if cfg.selectors {
        PenaltyKind::ALL.to_vec()
    } else {
        Vec::new()
    };
    let selections: Vec<VariableSet> = selectors
        .par_iter()
        .map(|&kind| {
            cv_select(data, &penalty_spec(kind, cfg.gamma), cfg.folds, cv_seed)
                .map(|cv| cv.chosen_support().clone())
                .with_context(|| format!("selector {kind}, repetition {rep}"))
        })
        .collect::<CliResult<_>>()?;

    let mut ensembles = Vec::new();
    for mut w in cfg.weighting_configs() {
        w.seed = arm_seed;
        let ens = compute_weights(data, candidates, &w)
            .with_context(|| format!("weighting {}, repetition {rep}", w.method))?;
        ensembles.push((w.method.clone(), ens));
    }

    let mut models = fixed.to_vec();
    models.extend(selectors.iter().zip(&selections).map(|(k, s)| NamedModel {
        name: k.name().to_string(),
        set: s.clone(),
    }));
    Ok(RepOutcome {
        selections,
        rows: assess_with_ensembles(&models, &ensembles),
    })
}

/// Most frequent set; ties go to the one seen first.
fn modal_set(sets: &[&VariableSet]) -> VariableSet {
    let mut best: Option<(&VariableSet, usize)> = None;
    for s in sets {
        let count = sets.iter().filter(|t| *t == s).count();
        if best.is_none_or(|(_, c)| count > c) {
            best = Some((s, count));
        }
    }
    best.map(|(s, _)| s.clone()).unwrap_or_default()
}

fn diagnostics_rows(data: &Dataset, models: &[NamedModel]) -> CliResult<Vec<DiagnosticsRow>> {
    models
        .iter()
        .map(|m| {
            let ctx = || format!("model '{}'", m.name);
            let fit = glm::fit(data, &m.set).with_context(ctx)?;
            let d = glm::diagnostics(&fit, data).with_context(ctx)?;
            Ok(DiagnosticsRow {
                model: m.name.clone(),
                variables: m.set.clone(),
                aic: d.aic,
                bic: d.bic,
                deviance: d.deviance,
            })
        })
        .collect()
}

fn diagnostics_table(rows: &[DiagnosticsRow]) -> Table {
    let mut t = Table::new(&["model", "size", "variables", "AIC", "BIC", "deviance"]);
    for r in rows {
        t.push(vec![
            r.model.clone(),
            r.variables.len().to_string(),
            r.variables.to_string(),
            format_g6(r.aic),
            format_g6(r.bic),
            format_g6(r.deviance),
        ]);
    }
    t
}

#[derive(Debug, Clone, PartialEq)]
pub struct AssessOutput {
    pub rows: Vec<AssessRow>,
    pub diagnostics: Option<Vec<DiagnosticsRow>>,
    pub files: Vec<PathBuf>,
}

/// Assesses the listed models, plus the four CV-tuned selections unless
/// `selectors` is off. Candidates come from the full-data Lasso, SCAD and
/// MCP paths and stay fixed across repetitions; reported values are means
/// over repetitions. A selector's variable list is its most frequent choice.
pub fn cmd_assess(cfg: &RunConfig) -> CliResult<AssessOutput> {
    let data = load(cfg)?;
    let fixed = load_models(cfg, data.p())?;
    if fixed.is_empty() && !cfg.selectors {
        return Err(PaviError::InvalidConfig("no models to assess: give --models or enable selectors".into()).into());
    }
    if cfg.selectors {
        if let Some(m) = fixed
            .iter()
            .find(|m| PenaltyKind::ALL.iter().any(|k| k.name() == m.name))
        {
            return Err(PaviError::ModelList(format!("model name '{}' is reserved for a selector", m.name)).into());
        }
    }
    let candidates = build_candidates(&data).context("building candidate set")?;

    let outcomes: Vec<RepOutcome> = (0..cfg.reps as u64)
        .into_par_iter()
        .map(|rep| assess_rep(&data, &candidates, &fixed, cfg, rep))
        .collect::<CliResult<_>>()?;

    let n_sel = outcomes[0].selections.len();
    let modal: Vec<VariableSet> = (0..n_sel)
        .map(|k| modal_set(&outcomes.iter().map(|o| &o.selections[k]).collect::<Vec<_>>()))
        .collect();
    let n_w = cfg.weighting.len();
    let reps = outcomes.len() as f64;
    let rows: Vec<AssessRow> = outcomes[0]
        .rows
        .iter()
        .enumerate()
        .map(|(i, first)| {
            let avg = |get: fn(&AssessRow) -> f64| outcomes.iter().map(|o| get(&o.rows[i])).sum::<f64>() / reps;
            let model_idx = i / n_w;
            let variables = if model_idx < fixed.len() {
                first.variables.clone()
            } else {
                modal[model_idx - fixed.len()].clone()
            };
            AssessRow {
                model: first.model.clone(),
                weighting: first.weighting.clone(),
                variables,
                f_hat: avg(|r| r.f_hat),
                g_hat: avg(|r| r.g_hat),
                sd_f: avg(|r| r.sd_f),
                sd_g: avg(|r| r.sd_g),
            }
        })
        .collect();

    let mut files = Vec::new();
    let mut t = Table::new(&[
        "model",
        "weighting",
        "size",
        "variables",
        "F_hat",
        "G_hat",
        "sd_F",
        "sd_G",
    ]);
    for r in &rows {
        t.push(vec![
            r.model.clone(),
            r.weighting.clone(),
            r.variables.len().to_string(),
            r.variables.to_string(),
            format_g6(r.f_hat),
            format_g6(r.g_hat),
            format_g6(r.sd_f),
            format_g6(r.sd_g),
        ]);
    }
    write_table(cfg, "assess.tsv", &t, &mut files)?;

    let diagnostics = if cfg.diagnostics {
        let mut models = fixed.clone();
        models.extend(PenaltyKind::ALL.iter().zip(&modal).map(|(k, s)| NamedModel {
            name: k.name().to_string(),
            set: s.clone(),
        }));
        let d = diagnostics_rows(&data, &models)?;
        write_table(cfg, "diagnostics.tsv", &diagnostics_table(&d), &mut files)?;
        Some(d)
    } else {
        None
    };
    Ok(AssessOutput {
        rows,
        diagnostics,
        files,
    })
}

/// AIC, BIC and deviance of each listed model refitted on the full data.
pub fn cmd_diagnostics(cfg: &RunConfig) -> CliResult<(Vec<DiagnosticsRow>, Vec<PathBuf>)> {
    let data = load(cfg)?;
    let models = load_models(cfg, data.p())?;
    if models.is_empty() {
        return Err(PaviError::InvalidConfig("diagnostics needs --models".into()).into());
    }
    let rows = diagnostics_rows(&data, &models)?;
    let mut files = Vec::new();
    write_table(cfg, "diagnostics.tsv", &diagnostics_table(&rows), &mut files)?;
    Ok((rows, files))
}

const WIDE_MEASURES: [&str; 8] = ["F", "G", "F_hat", "G_hat", "sd_F", "sd_G", "d_F", "d_G"];

/// One row per (method, weighting): the true F and G, then each estimated
/// quantity, every mean followed by its standard error.
pub fn aggregate_to_table(table: &AggregateTable) -> Table {
    let mut header: Vec<String> = vec!["method".into(), "weighting".into()];
    for m in WIDE_MEASURES {
        header.push(m.into());
        header.push(format!("se_{m}"));
    }
    header.extend(["n_selected".into(), "n_weighted".into(), "reps".into()]);
    let mut out = Table::new(&header);

    let mut weightings: Vec<&str> = Vec::new();
    for r in &table.rows {
        if let Some(w) = r.weighting.as_deref() {
            if !weightings.contains(&w) {
                weightings.push(w);
            }
        }
    }
    for method in PenaltyKind::ALL {
        for &w in &weightings {
            let mut row = vec![method.name().to_string(), w.to_string()];
            let mut n_selected = 0;
            let mut n_weighted = 0;
            for m in WIDE_MEASURES {
                let weighting = if TRUE_MEASURES.contains(&m) { None } else { Some(w) };
                match table.get(method, weighting, m) {
                    Some(r) => {
                        row.push(format_g6(r.mean));
                        row.push(format_g6(r.se));
                        if weighting.is_none() {
                            n_selected = r.count;
                        } else {
                            n_weighted = r.count;
                        }
                    }
                    None => row.extend(["NaN".to_string(), "NaN".to_string()]),
                }
            }
            row.extend([n_selected.to_string(), n_weighted.to_string(), table.reps.to_string()]);
            out.push(row);
        }
    }
    out
}

/// Inverse of [`aggregate_to_table`] up to the printed precision.
pub fn read_aggregate_table(path: &Path) -> Result<AggregateTable> {
    let t = read_tsv(path)?;
    let col = |name: &str| {
        t.column(name)
            .ok_or_else(|| PaviError::MissingColumn(format!("{name} in {}", path.display())))
    };
    let num = |row: usize, c: usize| -> Result<f64> {
        t.rows[row][c].parse().map_err(|_| PaviError::Parse {
            row: row + 1,
            column: t.header[c].clone(),
            message: format!("'{}' is not a number", t.rows[row][c]),
        })
    };
    let count = |row: usize, c: usize| -> Result<usize> {
        t.rows[row][c].parse().map_err(|_| PaviError::Parse {
            row: row + 1,
            column: t.header[c].clone(),
            message: format!("'{}' is not a count", t.rows[row][c]),
        })
    };
    let (c_method, c_weighting, c_sel, c_w, c_reps) = (
        col("method")?,
        col("weighting")?,
        col("n_selected")?,
        col("n_weighted")?,
        col("reps")?,
    );
    let mut rows: Vec<AggregateRow> = Vec::new();
    let mut reps = 0;
    for method in PenaltyKind::ALL {
        let lines: Vec<usize> = (0..t.rows.len())
            .filter(|&i| t.rows[i][c_method] == method.name())
            .collect();
        for (k, &i) in lines.iter().enumerate() {
            reps = count(i, c_reps)?;
            if k == 0 {
                for m in TRUE_MEASURES {
                    rows.push(AggregateRow {
                        method,
                        weighting: None,
                        measure: m.into(),
                        mean: num(i, col(m)?)?,
                        se: num(i, col(&format!("se_{m}"))?)?,
                        count: count(i, c_sel)?,
                    });
                }
            }
            for m in ESTIMATED_MEASURES {
                rows.push(AggregateRow {
                    method,
                    weighting: Some(t.rows[i][c_weighting].clone()),
                    measure: m.into(),
                    mean: num(i, col(m)?)?,
                    se: num(i, col(&format!("se_{m}"))?)?,
                    count: count(i, c_w)?,
                });
            }
        }
    }
    Ok(AggregateTable { reps, rows })
}

fn replications_table(reports: &[ReplicationReport]) -> Table {
    let mut t = Table::new(&[
        "rep",
        "method",
        "size",
        "selected",
        "weighting",
        "F",
        "G",
        "F_hat",
        "G_hat",
        "sd_F",
        "sd_G",
        "d_F",
        "d_G",
        "error",
    ]);
    for r in reports {
        for m in &r.methods {
            let (size, sel) = match &m.selected {
                Some(s) => (s.len().to_string(), s.to_string()),
                None => ("NA".into(), "NA".into()),
            };
            let head = vec![r.replication.to_string(), m.method.name().to_string(), size, sel];
            let err = m.error.clone().unwrap_or_default().replace(['\t', '\n'], " ");
            if m.estimates.is_empty() {
                let mut row = head.clone();
                row.push("NA".into());
                row.extend([m.true_f, m.true_g].iter().map(|v| format_g6(*v)));
                row.extend(std::iter::repeat_n("NaN".to_string(), 6));
                row.push(err.clone());
                t.push(row);
            }
            for e in &m.estimates {
                let mut row = head.clone();
                row.push(e.weighting.clone());
                row.extend(
                    [m.true_f, m.true_g, e.f_hat, e.g_hat, e.sd_f, e.sd_g, e.d_f, e.d_g]
                        .iter()
                        .map(|v| format_g6(*v)),
                );
                row.push(err.clone());
                t.push(row);
            }
        }
    }
    t
}

fn scenario_spec(cfg: &RunConfig) -> CliResult<ScenarioSpec> {
    let mut spec = ScenarioSpec::example(cfg.example, cfg.family)
        .context("scenario")?
        .with_seed(cfg.seed)
        .with_sigma(cfg.sigma);
    if let Some(n) = cfg.n {
        spec = spec.with_n(n);
    }
    spec.validate().context("scenario")?;
    Ok(spec)
}

/// Replications of one example: `simulate_ex{K}_{family}.tsv` (aggregate)
/// and `replications_ex{K}_{family}.tsv` (per replication).
pub fn cmd_simulate(cfg: &RunConfig) -> CliResult<(AggregateTable, Vec<PathBuf>)> {
    let spec = scenario_spec(cfg)?;
    let (reports, table) = simulate(&spec, cfg.reps, &cfg.weighting_configs())
        .with_context(|| format!("example {} ({})", spec.example_id, spec.family))?;
    let tag = format!("ex{}_{}", spec.example_id, spec.family);
    let mut files = Vec::new();
    write_table(
        cfg,
        &format!("simulate_{tag}.tsv"),
        &aggregate_to_table(&table),
        &mut files,
    )?;
    write_table(
        cfg,
        &format!("replications_{tag}.tsv"),
        &replications_table(&reports),
        &mut files,
    )?;
    Ok((table, files))
}

/// Tidy σ sweep: `sweep_ex{K}_{family}.tsv` with one row per
/// (σ, method, weighting, measure).
pub fn cmd_sweep(cfg: &RunConfig) -> CliResult<(Table, Vec<PathBuf>)> {
    let spec = scenario_spec(cfg)?;
    let sigmas = cfg.sigma_values().context("sweep")?;
    let points = sigma_sweep(&spec, &sigmas, cfg.reps, &cfg.weighting_configs())
        .with_context(|| format!("sweep over example {}", spec.example_id))?;
    let mut t = Table::new(&["sigma", "method", "weighting", "measure", "mean", "se"]);
    for (sigma, method, weighting, measure, mean, se) in tidy_sweep(&points) {
        t.push(vec![
            format_g6(sigma),
            method,
            weighting,
            measure,
            format_g6(mean),
            format_g6(se),
        ]);
    }
    let mut files = Vec::new();
    write_table(
        cfg,
        &format!("sweep_ex{}_{}.tsv", spec.example_id, spec.family),
        &t,
        &mut files,
    )?;
    Ok((t, files))
}

/// Regularization path for one penalty: `paths_{penalty}.tsv` (one row per
/// λ) and `coefficients_{penalty}.tsv` (nonzero coefficients, long format).
/// Adaptive-Lasso weights come from a CV-tuned Lasso pilot.
pub fn cmd_paths(cfg: &RunConfig) -> CliResult<(PathSolution, Vec<PathBuf>)> {
    let data = load(cfg)?;
    let mut spec = penalty_spec(cfg.penalty, cfg.gamma);
    if spec.kind == PenaltyKind::AdaptiveLasso {
        spec = resolve_adaptive(&data, &spec, cfg.folds, cfg.seed).context("adaptive weights")?;
    }
    let path = fit_default_path(&data, &spec).with_context(|| format!("{} path", cfg.penalty))?;

    let names = data.column_names();
    let mut summary = Table::new(&[
        "index",
        "lambda",
        "df",
        "deviance_ratio",
        "converged",
        "intercept",
        "variables",
    ]);
    let mut coefs = Table::new(&["index", "lambda", "variable", "name", "coefficient"]);
    for (i, pt) in path.points.iter().enumerate() {
        summary.push(vec![
            (i + 1).to_string(),
            format_g6(pt.lambda),
            pt.support.len().to_string(),
            format_g6(pt.deviance_ratio),
            pt.converged.to_string(),
            format_g6(pt.intercept),
            pt.support.to_string(),
        ]);
        for col in pt.support.columns() {
            coefs.push(vec![
                (i + 1).to_string(),
                format_g6(pt.lambda),
                (col + 1).to_string(),
                names.map_or_else(|| format!("x{}", col + 1), |n| n[col].clone()),
                format_g6(pt.coefficients[col]),
            ]);
        }
    }
    let mut files = Vec::new();
    let tag = cfg.penalty.name();
    write_table(cfg, &format!("paths_{tag}.tsv"), &summary, &mut files)?;
    write_table(cfg, &format!("coefficients_{tag}.tsv"), &coefs, &mut files)?;
    Ok((path, files))
}

/// Runs the configured command and returns the files it wrote.
pub fn run(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    match cfg.command {
        Command::Assess => cmd_assess(cfg).map(|o| o.files),
        Command::Simulate => cmd_simulate(cfg).map(|(_, f)| f),
        Command::Sweep => cmd_sweep(cfg).map(|(_, f)| f),
        Command::Paths => cmd_paths(cfg).map(|(_, f)| f),
        Command::Diagnostics => cmd_diagnostics(cfg).map(|(_, f)| f),
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        PaviError::from(e).into()
    }
}

//! Cyclic coordinate descent along a decreasing λ grid.
//!
//! Columns are standardized internally (mean 0, variance 1 with divisor n)
//! and the intercept is never penalized. Binomial fits wrap the weighted
//! least-squares kernel in a quadratic-approximation loop. SCAD and MCP are
//! handled by local linear approximation: a few re-weighted Lasso solves per
//! λ with per-coordinate thresholds p'λ(|βⱼ|).

use serde::{Deserialize, Serialize};

use super::penalty::{soft_threshold, Penalty, PenaltySpec};
use crate::data::{Dataset, Family};
use crate::error::{PaviError, Result};
use crate::measures::VariableSet;
use crate::numeric::{bernoulli_log_lik, sigmoid};

pub const DEFAULT_NLAMBDA: usize = 100;
pub const CD_TOL: f64 = 1e-7;
pub const LLA_STEPS: usize = 5;
pub const MIN_WORKING_WEIGHT: f64 = 1e-5;
/// Paths stop once this fraction of the null deviance is explained.
pub const SATURATION_DEV_RATIO: f64 = 0.999;
const MAX_SWEEPS: usize = 10_000;
const MAX_OUTER: usize = 200;
/// Outer and sweep budgets per re-weighting step for non-convex penalties.
const MAX_OUTER_LLA: usize = 25;
const MAX_SWEEPS_LLA: usize = 500;
const CONSTANT_COLUMN_SD: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaGrid {
    values: Vec<f64>,
}

impl LambdaGrid {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(PaviError::InvalidConfig("empty lambda grid".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(PaviError::InvalidConfig("lambda values must be positive".into()));
        }
        if values.windows(2).any(|w| w[1] >= w[0]) {
            return Err(PaviError::InvalidConfig(
                "lambda grid must be strictly decreasing".into(),
            ));
        }
        Ok(LambdaGrid { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn lambda_max(&self) -> f64 {
        self.values[0]
    }

    fn truncated(&self, len: usize) -> Self {
        LambdaGrid {
            values: self.values[..len].to_vec(),
        }
    }
}

/// Column-standardized copy of the design.
#[derive(Debug, Clone)]
pub(crate) struct Standardized {
    pub n: usize,
    pub p: usize,
    cols: Vec<f64>,
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub usable: Vec<bool>,
}

impl Standardized {
    pub fn new(data: &Dataset) -> Self {
        let (n, p) = (data.n(), data.p());
        let mut cols = vec![0.0; n * p];
        let mut mean = vec![0.0; p];
        let mut scale = vec![1.0; p];
        let mut usable = vec![false; p];
        for j in 0..p {
            let c = data.column(j);
            let m = c.iter().sum::<f64>() / n as f64;
            let var = c.iter().map(|v| (v - m).powi(2)).sum::<f64>() / n as f64;
            let sd = var.sqrt();
            mean[j] = m;
            if sd > CONSTANT_COLUMN_SD * (1.0 + m.abs()) {
                scale[j] = sd;
                usable[j] = true;
                for (dst, &v) in cols[j * n..(j + 1) * n].iter_mut().zip(c) {
                    *dst = (v - m) / sd;
                }
            }
        }
        Standardized {
            n,
            p,
            cols,
            mean,
            scale,
            usable,
        }
    }

    #[inline]
    pub fn col(&self, j: usize) -> &[f64] {
        &self.cols[j * self.n..(j + 1) * self.n]
    }

    /// (intercept, coefficients) on the original scale.
    pub fn to_original(&self, beta0: f64, beta: &[f64]) -> (f64, Vec<f64>) {
        let mut b0 = beta0;
        let coefs: Vec<f64> = beta
            .iter()
            .enumerate()
            .map(|(j, &b)| {
                if b == 0.0 {
                    0.0
                } else {
                    let bo = b / self.scale[j];
                    b0 -= bo * self.mean[j];
                    bo
                }
            })
            .collect();
        (b0, coefs)
    }

    /// (intercept, coefficients) on the standardized scale.
    pub fn to_standardized(&self, intercept: f64, coefs: &[f64]) -> (f64, Vec<f64>) {
        let mut b0 = intercept;
        let beta: Vec<f64> = coefs
            .iter()
            .enumerate()
            .map(|(j, &b)| {
                b0 += b * self.mean[j];
                b * self.scale[j]
            })
            .collect();
        (b0, beta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathPoint {
    pub lambda: f64,
    /// Intercept on the original scale.
    pub intercept: f64,
    /// Coefficients on the original scale, one per column.
    pub coefficients: Vec<f64>,
    pub support: VariableSet,
    pub converged: bool,
    pub deviance_ratio: f64,
}

impl PathPoint {
    pub fn linear_predictor(&self, data: &Dataset, row: usize) -> f64 {
        self.intercept
            + self
                .support
                .columns()
                .map(|c| self.coefficients[c] * data.x()[(row, c)])
                .sum::<f64>()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSolution {
    /// The requested grid; `points` may stop early once the fit saturates.
    pub grid: LambdaGrid,
    pub points: Vec<PathPoint>,
    pub family: Family,
    pub penalty: PenaltySpec,
}

impl PathSolution {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn supports(&self) -> impl Iterator<Item = &VariableSet> {
        self.points.iter().map(|pt| &pt.support)
    }

    pub fn computed_grid(&self) -> LambdaGrid {
        self.grid.truncated(self.points.len())
    }

    pub fn all_converged(&self) -> bool {
        self.points.iter().all(|pt| pt.converged)
    }
}

/// Gradient of the smooth loss at the null (intercept-only) model, per column.
fn null_gradient(std: &Standardized, y: &[f64]) -> Vec<f64> {
    let n = std.n as f64;
    let ybar = y.iter().sum::<f64>() / n;
    (0..std.p)
        .map(|j| {
            if !std.usable[j] {
                return 0.0;
            }
            std.col(j).iter().zip(y).map(|(x, yi)| x * (yi - ybar)).sum::<f64>() / n
        })
        .collect()
}

/// Log-spaced grid from λ_max (smallest λ with an empty fit) down to r·λ_max.
pub fn lambda_grid(data: &Dataset, penalty: &PenaltySpec, nlambda: usize) -> Result<LambdaGrid> {
    if nlambda < 2 {
        return Err(PaviError::InvalidConfig(format!(
            "grid length must be >= 2, got {nlambda}"
        )));
    }
    let std = Standardized::new(data);
    let factors = penalty.penalty_factors(data.p())?;
    lambda_grid_with(&std, data, &factors, nlambda)
}

fn lambda_grid_with(std: &Standardized, data: &Dataset, factors: &[f64], nlambda: usize) -> Result<LambdaGrid> {
    if !std.usable.iter().any(|&u| u) {
        return Err(PaviError::DegenerateDesign("every column is constant".into()));
    }
    let grad = null_gradient(std, data.y().as_slice());
    let mut lmax = 0.0f64;
    for j in 0..std.p {
        if std.usable[j] && factors[j].is_finite() && factors[j] > 0.0 {
            lmax = lmax.max(grad[j].abs() / factors[j]);
        }
    }
    if lmax == 0.0 {
        // every usable column excluded or orthogonal to y
        lmax = grad.iter().fold(0.0f64, |a, g| a.max(g.abs()));
    }
    if !(lmax > 0.0) {
        return Err(PaviError::DegenerateDesign(
            "response is constant or orthogonal to every column".into(),
        ));
    }
    // nudge so that rounding in the solver cannot admit a variable at λ_max
    let lmax = lmax * (1.0 + 1e-10);
    let ratio: f64 = if data.n() < data.p() { 0.01 } else { 1e-4 };
    let values = (0..nlambda)
        .map(|l| lmax * ratio.powf(l as f64 / (nlambda - 1) as f64))
        .collect();
    LambdaGrid::new(values)
}

/// Mutable solver state on the standardized scale.
#[derive(Debug, Clone)]
pub(crate) struct CdState {
    pub beta0: f64,
    pub beta: Vec<f64>,
    /// Linear predictor β0 + X̃β.
    pub eta: Vec<f64>,
}

impl CdState {
    fn null(std: &Standardized, data: &Dataset) -> Self {
        let y = data.y().as_slice();
        let ybar = y.iter().sum::<f64>() / std.n as f64;
        let beta0 = match data.family() {
            Family::Gaussian => ybar,
            Family::Binomial => {
                let p = ybar.clamp(1e-10, 1.0 - 1e-10);
                (p / (1.0 - p)).ln()
            }
        };
        CdState {
            beta0,
            beta: vec![0.0; std.p],
            eta: vec![beta0; std.n],
        }
    }
}

/// One weighted Lasso problem:
/// min (1/2n) Σ wᵢ (zᵢ − β0 − x̃ᵢβ)² + Σ tⱼ|βⱼ|, with tⱼ = ∞ meaning excluded.
/// Without weights every wᵢ = 1 and each usable column has unit curvature.
pub(crate) struct WeightedProblem<'a> {
    pub std: &'a Standardized,
    pub weights: Option<&'a [f64]>,
    pub thresholds: &'a [f64],
}

impl WeightedProblem<'_> {
    /// Coordinates that can ever enter.
    pub fn candidates(&self) -> Vec<usize> {
        (0..self.std.p)
            .filter(|&j| self.std.usable[j] && self.thresholds[j].is_finite())
            .collect()
    }

    /// One pass over `coords` (plus the intercept). Updates β and the
    /// residual r = z − η in place; returns the largest coefficient change.
    pub fn sweep(&self, coords: &[usize], beta0: &mut f64, beta: &mut [f64], resid: &mut [f64]) -> f64 {
        let n = self.std.n as f64;
        let mut max_change = 0.0f64;

        let d0 = match self.weights {
            None => resid.iter().sum::<f64>() / n,
            Some(w) => {
                let sw: f64 = w.iter().sum();
                w.iter().zip(resid.iter()).map(|(wi, ri)| wi * ri).sum::<f64>() / sw
            }
        };
        if d0 != 0.0 {
            *beta0 += d0;
            resid.iter_mut().for_each(|r| *r -= d0);
            max_change = max_change.max(d0.abs());
        }

        for &j in coords {
            let t = self.thresholds[j];
            let x = self.std.col(j);
            let (g, v) = match self.weights {
                None => (x.iter().zip(resid.iter()).map(|(a, b)| a * b).sum::<f64>() / n, 1.0),
                Some(w) => {
                    let (mut g, mut v) = (0.0, 0.0);
                    for ((a, b), wi) in x.iter().zip(resid.iter()).zip(w) {
                        let wa = wi * a;
                        g += wa * b;
                        v += wa * a;
                    }
                    (g / n, v / n)
                }
            };
            if v <= 0.0 {
                continue;
            }
            let old = beta[j];
            let new = soft_threshold(g + v * old, t) / v;
            if new != old {
                let d = new - old;
                resid.iter_mut().zip(x).for_each(|(r, xi)| *r -= d * xi);
                beta[j] = new;
                max_change = max_change.max(d.abs());
            }
        }
        max_change
    }

    /// Sweeps over the nonzero coordinates until they settle.
    #[allow(clippy::too_many_arguments)]
    fn solve_active(
        &self,
        all: &[usize],
        beta0: &mut f64,
        beta: &mut [f64],
        resid: &mut [f64],
        tol: f64,
        sweeps: &mut usize,
        max_sweeps: usize,
    ) -> bool {
        loop {
            let active: Vec<usize> = all.iter().copied().filter(|&j| beta[j] != 0.0).collect();
            let change = self.sweep(&active, beta0, beta, resid);
            *sweeps += 1;
            if change < tol {
                return true;
            }
            if *sweeps >= max_sweeps {
                return false;
            }
        }
    }

    /// Active-set cycling to convergence: sweeps over the nonzero set
    /// alternate with full sweeps until a full sweep changes nothing.
    pub fn solve(&self, beta0: &mut f64, beta: &mut [f64], resid: &mut [f64], tol: f64) -> bool {
        let all = self.candidates();
        let mut sweeps = 0;
        loop {
            if !self.solve_active(&all, beta0, beta, resid, tol, &mut sweeps, MAX_SWEEPS) {
                return false;
            }
            let change = self.sweep(&all, beta0, beta, resid);
            sweeps += 1;
            if change < tol {
                return true;
            }
            if sweeps >= MAX_SWEEPS {
                return false;
            }
        }
    }
}

/// Solves the (possibly re-weighted) Lasso at fixed thresholds, warm-started from `state`.
/// `limits`: for binomial fits, a deviance floor at which to give up
/// (unconverged) and tighter outer and sweep budgets; used where separation makes
/// the iterates diverge.
fn solve_thresholds(
    std: &Standardized,
    data: &Dataset,
    thresholds: &[f64],
    state: &mut CdState,
    limits: Option<(f64, usize, usize)>,
) -> bool {
    let y = data.y().as_slice();
    match data.family() {
        Family::Gaussian => {
            let prob = WeightedProblem {
                std,
                weights: None,
                thresholds,
            };
            let mut resid: Vec<f64> = y.iter().zip(&state.eta).map(|(yi, e)| yi - e).collect();
            let ok = prob.solve(&mut state.beta0, &mut state.beta, &mut resid, CD_TOL);
            state.eta = y.iter().zip(&resid).map(|(yi, r)| yi - r).collect();
            ok
        }
        Family::Binomial => solve_logistic(std, y, thresholds, state, limits),
    }
}

/// Quadratic-approximation loop for the logistic loss. Each outer step
/// re-weights at the current η and solves the weighted problem on the
/// nonzero set only; once that settles, one sweep over every coordinate
/// checks whether anything else wants to enter.
fn solve_logistic(
    std: &Standardized,
    y: &[f64],
    thresholds: &[f64],
    state: &mut CdState,
    limits: Option<(f64, usize, usize)>,
) -> bool {
    let (stop_dev, max_outer, max_sweeps) = match limits {
        Some((d, o, s)) => (Some(d), o, s),
        None => (None, MAX_OUTER, MAX_SWEEPS),
    };
    let n = std.n;
    let mut w = vec![0.0; n];
    let mut resid = vec![0.0; n];
    let mut z = vec![0.0; n];
    let mut all: Vec<usize> = Vec::new();
    let mut check_all = false;
    let mut sweeps = 0;
    for _ in 0..max_outer {
        for i in 0..n {
            let p = sigmoid(state.eta[i]);
            w[i] = (p * (1.0 - p)).max(MIN_WORKING_WEIGHT);
            resid[i] = (y[i] - p) / w[i];
            z[i] = state.eta[i] + resid[i];
        }
        let prob = WeightedProblem {
            std,
            weights: Some(&w),
            thresholds,
        };
        if all.is_empty() {
            all = prob.candidates();
        }
        let old0 = state.beta0;
        let old = state.beta.clone();
        let inner_ok = if check_all {
            prob.sweep(&all, &mut state.beta0, &mut state.beta, &mut resid);
            true
        } else {
            prob.solve_active(
                &all,
                &mut state.beta0,
                &mut state.beta,
                &mut resid,
                CD_TOL,
                &mut sweeps,
                max_sweeps,
            )
        };
        for i in 0..n {
            state.eta[i] = z[i] - resid[i];
        }
        let change = state
            .beta
            .iter()
            .zip(&old)
            .fold((state.beta0 - old0).abs(), |m, (a, b)| m.max((a - b).abs()));
        if let Some(limit) = stop_dev {
            let dev: f64 = -2.0
                * y.iter()
                    .zip(&state.eta)
                    .map(|(&yi, &e)| bernoulli_log_lik(yi, sigmoid(e)))
                    .sum::<f64>();
            if dev <= limit {
                return false;
            }
        }
        if change < CD_TOL && inner_ok {
            if check_all {
                return true;
            }
            check_all = true;
        } else {
            check_all = false;
        }
    }
    false
}

fn deviance(data: &Dataset, eta: &[f64]) -> f64 {
    let y = data.y().as_slice();
    match data.family() {
        Family::Gaussian => y.iter().zip(eta).map(|(yi, e)| (yi - e).powi(2)).sum(),
        Family::Binomial => {
            -2.0 * y
                .iter()
                .zip(eta)
                .map(|(&yi, &e)| bernoulli_log_lik(yi, sigmoid(e)))
                .sum::<f64>()
        }
    }
}

fn null_deviance(data: &Dataset) -> f64 {
    let y = data.y().as_slice();
    let ybar = y.iter().sum::<f64>() / y.len() as f64;
    match data.family() {
        Family::Gaussian => y.iter().map(|v| (v - ybar).powi(2)).sum(),
        Family::Binomial => -2.0 * y.iter().map(|&v| bernoulli_log_lik(v, ybar)).sum::<f64>(),
    }
}

/// Solves one λ, warm-started from `state`. Convex penalties take a single
/// solve; non-convex ones take up to [`LLA_STEPS`] re-weighted solves.
fn solve_lambda(
    std: &Standardized,
    data: &Dataset,
    penalty: &dyn Penalty,
    factors: &[f64],
    lambda: f64,
    state: &mut CdState,
    null_dev: f64,
) -> bool {
    let steps = if penalty.is_convex() { 1 } else { LLA_STEPS };
    // without shrinkage of large coefficients a separable fit has no finite optimum
    let limits =
        (!penalty.is_convex()).then_some(((1.0 - SATURATION_DEV_RATIO) * null_dev, MAX_OUTER_LLA, MAX_SWEEPS_LLA));
    let mut converged = true;
    let mut thresholds = vec![f64::INFINITY; std.p];
    for step in 0..steps {
        for j in 0..std.p {
            thresholds[j] = if std.usable[j] && factors[j].is_finite() {
                factors[j] * penalty.derivative(state.beta[j].abs(), lambda)
            } else {
                f64::INFINITY
            };
        }
        let before = state.beta.clone();
        converged = solve_thresholds(std, data, &thresholds, state, limits);
        if step > 0 {
            let change = state
                .beta
                .iter()
                .zip(&before)
                .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
            if change < CD_TOL {
                break;
            }
        }
    }
    converged
}

/// Penalized path over `grid` with warm starts. Stops early (truncating
/// `points`) once the explained-deviance fraction reaches
/// [`SATURATION_DEV_RATIO`].
pub fn fit_path(data: &Dataset, penalty: &PenaltySpec, grid: &LambdaGrid) -> Result<PathSolution> {
    let kernel = penalty.build()?;
    let factors = penalty.penalty_factors(data.p())?;
    let std = Standardized::new(data);
    if !std.usable.iter().any(|&u| u) {
        return Err(PaviError::DegenerateDesign("every column is constant".into()));
    }
    let null_dev = null_deviance(data);
    let mut state = CdState::null(&std, data);
    let mut points = Vec::with_capacity(grid.len());
    for &lambda in grid.values() {
        let converged = solve_lambda(&std, data, kernel.as_ref(), &factors, lambda, &mut state, null_dev);
        let (intercept, coefficients) = std.to_original(state.beta0, &state.beta);
        let support = VariableSet::from_zero_based((0..std.p).filter(|&j| state.beta[j] != 0.0));
        let dev_ratio = if null_dev > 0.0 {
            1.0 - deviance(data, &state.eta) / null_dev
        } else {
            1.0
        };
        points.push(PathPoint {
            lambda,
            intercept,
            coefficients,
            support,
            converged,
            deviance_ratio: dev_ratio,
        });
        if dev_ratio >= SATURATION_DEV_RATIO {
            break;
        }
    }
    Ok(PathSolution {
        grid: grid.clone(),
        points,
        family: data.family(),
        penalty: penalty.clone(),
    })
}

/// Convenience: default grid then path.
pub fn fit_default_path(data: &Dataset, penalty: &PenaltySpec) -> Result<PathSolution> {
    let grid = lambda_grid(data, penalty, DEFAULT_NLAMBDA)?;
    fit_path(data, penalty, &grid)
}

/// Penalized objective at a path point, on the standardized scale:
/// loss/n + Σ fⱼ pλ(|β̃ⱼ|), where loss is ½RSS (gaussian) or −log-lik (binomial).
pub fn penalized_objective(data: &Dataset, penalty: &PenaltySpec, point: &PathPoint) -> Result<f64> {
    let kernel = penalty.build()?;
    let factors = penalty.penalty_factors(data.p())?;
    let std = Standardized::new(data);
    let (_, beta) = std.to_standardized(point.intercept, &point.coefficients);
    let eta: Vec<f64> = (0..data.n()).map(|i| point.linear_predictor(data, i)).collect();
    Ok(objective_std(
        data,
        kernel.as_ref(),
        &factors,
        point.lambda,
        &eta,
        &beta,
    ))
}

pub(crate) fn objective_std(
    data: &Dataset,
    penalty: &dyn Penalty,
    factors: &[f64],
    lambda: f64,
    eta: &[f64],
    beta: &[f64],
) -> f64 {
    let n = data.n() as f64;
    // ½RSS/n for gaussian, −ℓ/n for binomial
    let loss = 0.5 * deviance(data, eta) / n;
    let pen: f64 = beta
        .iter()
        .zip(factors)
        .filter(|(b, _)| **b != 0.0)
        .map(|(b, f)| f * penalty.value(b.abs(), lambda))
        .sum();
    loss + pen
}

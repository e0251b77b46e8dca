//! Working models: propensity score, outcome regression and contrast.
//!
//! Two families are supported. The frequency family is the nonparametric
//! maximum likelihood estimator for discrete covariates (cell frequencies and
//! cell means). The spline family regresses on a cubic B-spline basis of one
//! continuous covariate, optionally interacted with the first covariate.

mod basis;
pub(crate) mod cells;
mod design;
mod linalg;

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

pub use basis::{basis_dimension, spline_basis};
use cells::CellStats;
use design::{boundary_knots, SplineDesign};
use linalg::least_squares;

use crate::data::Dataset;
use crate::error::{Error, Result};

pub const DEFAULT_TRUNCATION: (f64, f64) = (0.05, 0.95);
pub const DEFAULT_SPLINE_DF: usize = 6;
const MIN_SPLINE_DF: usize = 4;
const IRLS_MAX_ITER: usize = 50;
const IRLS_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Frequency,
    Spline,
}

impl std::str::FromStr for Family {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frequency" => Ok(Family::Frequency),
            "spline" => Ok(Family::Spline),
            other => Err(Error::Config(format!("unknown nuisance family `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuisanceConfig {
    pub family: Family,
    pub spline_df: usize,
    pub truncation: (f64, f64),
    pub interaction_with_first_covariate: bool,
    /// Interaction in the logistic propensity design; without it the first
    /// covariate enters as a main effect.
    pub propensity_interaction: bool,
    /// Column carrying the spline; defaults to the last covariate.
    pub spline_covariate: Option<usize>,
}

impl Default for NuisanceConfig {
    fn default() -> Self {
        Self::frequency()
    }
}

impl NuisanceConfig {
    pub fn frequency() -> Self {
        Self {
            family: Family::Frequency,
            spline_df: DEFAULT_SPLINE_DF,
            truncation: DEFAULT_TRUNCATION,
            interaction_with_first_covariate: false,
            propensity_interaction: false,
            spline_covariate: None,
        }
    }

    pub fn spline(interaction_with_first_covariate: bool) -> Self {
        Self {
            family: Family::Spline,
            interaction_with_first_covariate,
            propensity_interaction: interaction_with_first_covariate,
            ..Self::frequency()
        }
    }

    pub fn with_truncation(mut self, lo: f64, hi: f64) -> Self {
        self.truncation = (lo, hi);
        self
    }

    pub fn with_spline_df(mut self, df: usize) -> Self {
        self.spline_df = df;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.truncation;
        if !(0.0 < lo && lo < hi && hi < 1.0) {
            return Err(Error::Config(format!("truncation ({lo}, {hi}) must satisfy 0 < lo < hi < 1")));
        }
        if self.family == Family::Spline && self.spline_df < MIN_SPLINE_DF {
            return Err(Error::Config(format!("spline_df must be at least {MIN_SPLINE_DF}")));
        }
        Ok(())
    }

    pub(crate) fn spline_covariate_index(&self, dim: usize) -> usize {
        self.spline_covariate.unwrap_or(dim - 1).min(dim - 1)
    }
}

type PropensityFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;
type OutcomeFn = Arc<dyn Fn(u8, &[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum PropensityModel {
    Frequency(CellStats),
    Logistic { design: SplineDesign, beta: DVector<f64> },
    LinearProbability { design: SplineDesign, beta: DVector<f64> },
    Known(PropensityFn),
}

/// Fitted `π̂(1, x)`, clipped to the truncation bounds.
#[derive(Clone)]
pub struct PropensityFit {
    model: PropensityModel,
    trained_on: Vec<usize>,
    truncation: (f64, f64),
}

impl fmt::Debug for PropensityFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.model {
            PropensityModel::Frequency(_) => "frequency",
            PropensityModel::Logistic { .. } => "logistic",
            PropensityModel::LinearProbability { .. } => "linear_probability",
            PropensityModel::Known(_) => "known",
        };
        f.debug_struct("PropensityFit")
            .field("model", &kind)
            .field("trained_on", &self.trained_on.len())
            .field("truncation", &self.truncation)
            .finish()
    }
}

impl PropensityFit {
    /// Wraps a known propensity function (oracle or test use).
    pub fn known(f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static, truncation: (f64, f64)) -> Self {
        Self { model: PropensityModel::Known(Arc::new(f)), trained_on: Vec::new(), truncation }
    }

    /// Probability of treatment 1 at `x`.
    pub fn predict(&self, x: &[f64]) -> f64 {
        let raw = match &self.model {
            PropensityModel::Frequency(stats) => stats.mean(x),
            PropensityModel::Logistic { design, beta } => sigmoid(design.linear_predictor(x, beta)),
            PropensityModel::LinearProbability { design, beta } => design.linear_predictor(x, beta),
            PropensityModel::Known(f) => f(x),
        };
        let (lo, hi) = self.truncation;
        if raw.is_nan() {
            return 0.5f64.clamp(lo, hi);
        }
        raw.clamp(lo, hi)
    }

    /// `π̂(a, x)`.
    pub fn prob(&self, a: u8, x: &[f64]) -> f64 {
        let p = self.predict(x);
        if a == 1 {
            p
        } else {
            1.0 - p
        }
    }

    pub fn trained_on(&self) -> &[usize] {
        &self.trained_on
    }

    pub fn truncation(&self) -> (f64, f64) {
        self.truncation
    }

    /// Name of the fitted model, e.g. `logistic` or the fallback `linear_probability`.
    pub fn kind(&self) -> &'static str {
        match self.model {
            PropensityModel::Frequency(_) => "frequency",
            PropensityModel::Logistic { .. } => "logistic",
            PropensityModel::LinearProbability { .. } => "linear_probability",
            PropensityModel::Known(_) => "known",
        }
    }
}

#[derive(Clone)]
enum OutcomeModel {
    Frequency([CellStats; 2]),
    Spline([(SplineDesign, DVector<f64>); 2]),
    Known(OutcomeFn),
}

/// Fitted `μ̂(a, x)` with the derived contrast `τ̂(x) = μ̂(1, x) − μ̂(0, x)`.
#[derive(Clone)]
pub struct OutcomeFit {
    model: OutcomeModel,
    trained_on: Vec<usize>,
}

impl fmt::Debug for OutcomeFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.model {
            OutcomeModel::Frequency(_) => "frequency",
            OutcomeModel::Spline(_) => "spline",
            OutcomeModel::Known(_) => "known",
        };
        f.debug_struct("OutcomeFit").field("model", &kind).field("trained_on", &self.trained_on.len()).finish()
    }
}

impl OutcomeFit {
    pub fn known(f: impl Fn(u8, &[f64]) -> f64 + Send + Sync + 'static) -> Self {
        Self { model: OutcomeModel::Known(Arc::new(f)), trained_on: Vec::new() }
    }

    pub fn predict(&self, a: u8, x: &[f64]) -> f64 {
        let arm = usize::from(a == 1);
        match &self.model {
            OutcomeModel::Frequency(arms) => arms[arm].mean(x),
            OutcomeModel::Spline(arms) => arms[arm].0.linear_predictor(x, &arms[arm].1),
            OutcomeModel::Known(f) => f(a, x),
        }
    }

    pub fn contrast(&self, x: &[f64]) -> f64 {
        self.predict(1, x) - self.predict(0, x)
    }

    pub fn trained_on(&self) -> &[usize] {
        &self.trained_on
    }
}

fn sigmoid(eta: f64) -> f64 {
    if eta >= 0.0 {
        1.0 / (1.0 + (-eta).exp())
    } else {
        let e = eta.exp();
        e / (1.0 + e)
    }
}

/// Fits `π̂(1, ·)` on the observations in `idx`.
pub fn fit_propensity(ds: &Dataset, idx: &[usize], cfg: &NuisanceConfig) -> Result<PropensityFit> {
    cfg.validate()?;
    if idx.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let treated = ds.treated_count(idx);
    if treated == 0 || treated == idx.len() {
        return Err(Error::PropensityDegenerate(format!(
            "{} of {} training observations treated",
            treated,
            idx.len()
        )));
    }
    let model = match cfg.family {
        Family::Frequency => {
            let mut stats = CellStats::default();
            for &i in idx {
                let o = ds.get(i);
                stats.add(&o.x, f64::from(u8::from(o.treated())));
            }
            PropensityModel::Frequency(stats)
        }
        Family::Spline => fit_logistic_spline(ds, idx, cfg)?,
    };
    Ok(PropensityFit { model, trained_on: idx.to_vec(), truncation: cfg.truncation })
}

fn fit_logistic_spline(ds: &Dataset, idx: &[usize], cfg: &NuisanceConfig) -> Result<PropensityModel> {
    fit_logistic_spline_with(ds, idx, cfg, IRLS_MAX_ITER)
}

fn fit_logistic_spline_with(
    ds: &Dataset,
    idx: &[usize],
    cfg: &NuisanceConfig,
    max_iter: usize,
) -> Result<PropensityModel> {
    let cfg = &NuisanceConfig { interaction_with_first_covariate: cfg.propensity_interaction, ..cfg.clone() };
    let dim = ds.dim();
    let df = feasible_df(dim, cfg, idx.len())?;
    let bounds = boundary_knots(ds, idx, cfg.spline_covariate_index(dim))?;
    let design = SplineDesign::new(dim, cfg, bounds, df)?;
    let x = design.matrix(ds, idx);
    let a = DVector::from_iterator(idx.len(), idx.iter().map(|&i| f64::from(u8::from(ds.get(i).treated()))));

    if let Some(beta) = irls(&x, &a, max_iter) {
        return Ok(PropensityModel::Logistic { design, beta });
    }
    let beta = least_squares(&x, &a, None)
        .ok_or_else(|| Error::PropensityDegenerate("linear-probability fallback failed".into()))?;
    Ok(PropensityModel::LinearProbability { design, beta })
}

/// Logistic regression by iteratively reweighted least squares; `None` when
/// the coefficients fail to settle within the iteration budget.
fn irls(x: &nalgebra::DMatrix<f64>, a: &DVector<f64>, max_iter: usize) -> Option<DVector<f64>> {
    let mut beta = DVector::zeros(x.ncols());
    for _ in 0..max_iter {
        let eta = x * &beta;
        let p = eta.map(sigmoid);
        let w = p.map(|v| (v * (1.0 - v)).max(1e-10));
        let z = DVector::from_iterator(eta.len(), (0..eta.len()).map(|i| eta[i] + (a[i] - p[i]) / w[i]));
        let next = least_squares(x, &z, Some(&w))?;
        let delta = (&next - &beta).amax();
        beta = next;
        if delta < IRLS_TOL {
            return Some(beta);
        }
    }
    None
}

/// Largest spline df ≥ 4 (capped at the configured value) whose design fits in `count` rows.
fn feasible_df(dim: usize, cfg: &NuisanceConfig, count: usize) -> Result<usize> {
    (MIN_SPLINE_DF..=cfg.spline_df)
        .rev()
        .find(|&df| SplineDesign::columns_for(dim, cfg, df) <= count)
        .ok_or_else(|| {
            Error::OutcomeFit(format!(
                "{count} observations cannot support a spline design with df >= {MIN_SPLINE_DF}"
            ))
        })
}

/// Fits `μ̂(a, ·)` per arm on the observations in `idx`.
pub fn fit_outcome(ds: &Dataset, idx: &[usize], cfg: &NuisanceConfig) -> Result<OutcomeFit> {
    cfg.validate()?;
    if idx.is_empty() {
        return Err(Error::EmptyIndexSet);
    }
    let (treated, control): (Vec<usize>, Vec<usize>) = idx.iter().partition(|&&i| ds.get(i).treated());
    if treated.is_empty() || control.is_empty() {
        return Err(Error::OutcomeFit("both treatment arms must be represented".into()));
    }
    let model = match cfg.family {
        Family::Frequency => {
            let arm = |ix: &[usize]| {
                let mut s = CellStats::default();
                for &i in ix {
                    s.add(&ds.get(i).x, ds.get(i).y);
                }
                s
            };
            OutcomeModel::Frequency([arm(&control), arm(&treated)])
        }
        Family::Spline => {
            let dim = ds.dim();
            let bounds = boundary_knots(ds, idx, cfg.spline_covariate_index(dim))?;
            let arm = |ix: &[usize]| -> Result<(SplineDesign, DVector<f64>)> {
                let df = feasible_df(dim, cfg, ix.len())?;
                let design = SplineDesign::new(dim, cfg, bounds, df)?;
                let x = design.matrix(ds, ix);
                let y = DVector::from_iterator(ix.len(), ix.iter().map(|&i| ds.get(i).y));
                let beta = least_squares(&x, &y, None)
                    .ok_or_else(|| Error::OutcomeFit("least-squares solve failed".into()))?;
                Ok((design, beta))
            };
            OutcomeModel::Spline([arm(&control)?, arm(&treated)?])
        }
    };
    Ok(OutcomeFit { model, trained_on: idx.to_vec() })
}

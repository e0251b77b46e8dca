use rayon::prelude::*;

use super::crossfit::adaptive_smoothing_value;
use super::tuning::TuningConfig;
use super::{Estimate, Method};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::folds::make_fold_plan;
use crate::nuisance::NuisanceConfig;
use crate::rng::derive_seed;

/// Label under which the fold-plan seeds of repeated cross-fitting are derived.
pub const CROSS_FIT_LABEL: &str = "cross-fit";

/// Seed of the `r`-th fold plan used by [`repeated_cross_fit`].
pub fn repeat_plan_seed(seed: u64, r: usize) -> u64 {
    derive_seed(seed, CROSS_FIT_LABEL, r as u64)
}

/// Averages the adaptive smoothing estimator over `repeats` independent fold plans.
///
/// Both the point estimate and `σ̂` are plain means of the per-plan values.
pub fn repeated_cross_fit(
    ds: &Dataset,
    repeats: usize,
    seed: u64,
    tc: &TuningConfig,
    cfg: &NuisanceConfig,
    clamp: f64,
) -> Result<Estimate> {
    if repeats == 0 {
        return Err(Error::Config("repeats must be at least 1".into()));
    }
    let estimates = (0..repeats)
        .into_par_iter()
        .map(|r| {
            let plan = make_fold_plan(ds.n(), repeat_plan_seed(seed, r))?;
            adaptive_smoothing_value(ds, &plan, tc, cfg, clamp)
        })
        .collect::<Result<Vec<_>>>()?;
    let k = estimates.len() as f64;
    Ok(Estimate {
        value: estimates.iter().map(|e| e.value).sum::<f64>() / k,
        sigma: estimates.iter().map(|e| e.sigma).sum::<f64>() / k,
        n: ds.n(),
        method: Method::AdaptiveSmoothing,
    })
}

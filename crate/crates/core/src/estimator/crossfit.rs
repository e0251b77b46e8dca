//! Cross-fitted estimators built on a [`FoldPlan`].

use super::tuning::{select_bandwidth, TuningConfig};
use super::{psi, smooth_decision_unchecked, Estimate, Method, SmoothingParams, T0Mode};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::folds::FoldPlan;
use crate::nuisance::{fit_outcome, fit_propensity, NuisanceConfig, OutcomeFit, PropensityFit};

/// Working models trained on each half `I_j`.
#[derive(Debug, Clone)]
pub struct HalfFits {
    pub outcome: [OutcomeFit; 2],
    pub propensity: [PropensityFit; 2],
}

impl HalfFits {
    pub fn fit(ds: &Dataset, plan: &FoldPlan, cfg: &NuisanceConfig) -> Result<Self> {
        check_plan(ds, plan)?;
        Ok(Self {
            outcome: [fit_outcome(ds, plan.half(0), cfg)?, fit_outcome(ds, plan.half(1), cfg)?],
            propensity: [fit_propensity(ds, plan.half(0), cfg)?, fit_propensity(ds, plan.half(1), cfg)?],
        })
    }
}

fn check_plan(ds: &Dataset, plan: &FoldPlan) -> Result<()> {
    if plan.n() != ds.n() {
        return Err(Error::Config(format!("fold plan covers {} indices but dataset has {}", plan.n(), ds.n())));
    }
    Ok(())
}

/// Cross-fitted plug-in estimator with the hard decision `𝟙{τ̂ > 0}`.
pub fn plug_in_value(ds: &Dataset, plan: &FoldPlan, cfg: &NuisanceConfig) -> Result<Estimate> {
    let fits = HalfFits::fit(ds, plan, cfg)?;
    let mut values = Vec::with_capacity(ds.n());
    for j in 0..2 {
        let other = 1 - j;
        let (of, pf) = (&fits.outcome[other], &fits.propensity[other]);
        for &i in plan.half(j) {
            let obs = ds.get(i);
            let d = if of.contrast(&obs.x) > 0.0 { 1.0 } else { 0.0 };
            values.push(psi(obs, d, pf, of));
        }
    }
    Ok(Estimate::from_psi_mean(&values, Method::PlugIn))
}

/// Every working model the smoothing estimators need for one fold plan.
///
/// * `halves`: contrast and propensity trained on each `I_j` (the decision);
/// * `quarter_nuisance[j][k]`: `π̂, μ̂` trained on `I_{j,k}^c` (the score);
/// * `quarter_contrast[j][k]`: `τ̂` trained on `I_{j,k}` (bandwidth tuning),
///   `None` when some quarter cannot support a fit.
#[derive(Debug, Clone)]
pub struct CrossFits<'a> {
    ds: &'a Dataset,
    plan: &'a FoldPlan,
    pub(crate) halves: HalfFits,
    pub(crate) quarter_nuisance: [[(PropensityFit, OutcomeFit); 2]; 2],
    pub(crate) quarter_contrast: Option<[[OutcomeFit; 2]; 2]>,
}

impl<'a> CrossFits<'a> {
    pub fn fit(ds: &'a Dataset, plan: &'a FoldPlan, cfg: &NuisanceConfig) -> Result<Self> {
        let halves = HalfFits::fit(ds, plan, cfg)?;
        let nuisance = |j: usize, k: usize| -> Result<(PropensityFit, OutcomeFit)> {
            let idx = plan.quarter_complement(j, k);
            Ok((fit_propensity(ds, &idx, cfg)?, fit_outcome(ds, &idx, cfg)?))
        };
        let quarter_nuisance = [[nuisance(0, 0)?, nuisance(0, 1)?], [nuisance(1, 0)?, nuisance(1, 1)?]];
        let contrast = |j: usize, k: usize| fit_outcome(ds, plan.quarter(j, k), cfg).ok();
        let quarter_contrast = (|| Some([[contrast(0, 0)?, contrast(0, 1)?], [contrast(1, 0)?, contrast(1, 1)?]]))();
        Ok(Self { ds, plan, halves, quarter_nuisance, quarter_contrast })
    }

    #[cfg(test)]
    pub(crate) fn from_parts(
        ds: &'a Dataset,
        plan: &'a FoldPlan,
        halves: HalfFits,
        quarter_nuisance: [[(PropensityFit, OutcomeFit); 2]; 2],
        quarter_contrast: Option<[[OutcomeFit; 2]; 2]>,
    ) -> Self {
        Self { ds, plan, halves, quarter_nuisance, quarter_contrast }
    }

    pub fn plan(&self) -> &FoldPlan {
        self.plan
    }

    /// Estimated approximation error of the contrast trained on half `j`;
    /// `None` when the quarter fits it needs are unavailable.
    pub fn approx_error(&self, j: usize) -> Option<f64> {
        let q = self.quarter_contrast.as_ref()?;
        let other = 1 - j;
        Some(approx_error_with(
            self.ds,
            self.plan,
            j,
            |x| self.halves.outcome[j].contrast(x),
            [&|x: &[f64]| q[other][0].contrast(x), &|x: &[f64]| q[other][1].contrast(x)],
        ))
    }

    /// Bandwidths `[h_{n,I_1}, h_{n,I_2}]`, falling back to the floor branch
    /// when the approximation error is unavailable.
    pub fn bandwidths(&self, tc: &TuningConfig) -> [f64; 2] {
        let n = self.ds.n();
        [0, 1].map(|j| select_bandwidth(self.approx_error(j).unwrap_or(0.0), n, tc))
    }

    pub fn estimate(&self, params: &SmoothingParams) -> Result<Estimate> {
        params.validate()?;
        let method = match params.t0 {
            T0Mode::Fixed(_) => Method::Smoothing,
            T0Mode::Adaptive => Method::AdaptiveSmoothing,
        };
        let mut values = Vec::with_capacity(self.ds.n());
        let mut value = 0.0;
        for j in 0..2 {
            let other = 1 - j;
            let tau = &self.halves.outcome[other];
            let h = params.h[other];
            for k in 0..2 {
                let (pf, of) = &self.quarter_nuisance[j][k];
                let quarter = self.plan.quarter(j, k);
                let mut sum = 0.0;
                for &i in quarter {
                    let obs = self.ds.get(i);
                    let t0 = match params.t0 {
                        T0Mode::Fixed(t0) => t0,
                        T0Mode::Adaptive => self.halves.propensity[other]
                            .predict(&obs.x)
                            .clamp(params.clamp, 1.0 - params.clamp),
                    };
                    let d = smooth_decision_unchecked(tau.contrast(&obs.x), h, t0);
                    let p = psi(obs, d, pf, of);
                    sum += p;
                    values.push(p);
                }
                value += 0.25 * sum / quarter.len() as f64;
            }
        }
        Ok(Estimate::from_psi(&values, value, method))
    }
}

type Predictor<'a> = dyn Fn(&[f64]) -> f64 + 'a;

/// EAE from arbitrary contrast predictors: `half` trained on `I_j`,
/// `quarters[k]` trained on `I_{3−j,k}`.
pub(crate) fn approx_error_with(
    ds: &Dataset,
    plan: &FoldPlan,
    j: usize,
    half: impl Fn(&[f64]) -> f64,
    quarters: [&Predictor; 2],
) -> f64 {
    let other = 1 - j;
    let mut total = 0.0;
    for k in 0..2 {
        for &i in plan.quarter(other, k) {
            let x = &ds.get(i).x;
            total += (quarters[1 - k](x) - half(x)).powi(2);
        }
    }
    total / plan.half(other).len() as f64
}

/// Estimated approximation error of `τ̂_{I_j}`, `j ∈ {0, 1}`.
pub fn estimate_approx_error(ds: &Dataset, plan: &FoldPlan, j: usize, cfg: &NuisanceConfig) -> Result<f64> {
    if j > 1 {
        return Err(Error::Domain(format!("half index {j} must be 0 or 1")));
    }
    check_plan(ds, plan)?;
    let other = 1 - j;
    let half = fit_outcome(ds, plan.half(j), cfg)?;
    let q0 = fit_outcome(ds, plan.quarter(other, 0), cfg)?;
    let q1 = fit_outcome(ds, plan.quarter(other, 1), cfg)?;
    Ok(approx_error_with(
        ds,
        plan,
        j,
        |x| half.contrast(x),
        [&|x: &[f64]| q0.contrast(x), &|x: &[f64]| q1.contrast(x)],
    ))
}

/// Smoothing estimator with a fixed `t₀`.
pub fn smoothing_value(ds: &Dataset, plan: &FoldPlan, params: &SmoothingParams, cfg: &NuisanceConfig) -> Result<Estimate> {
    if !matches!(params.t0, T0Mode::Fixed(_)) {
        return Err(Error::Config("smoothing_value requires a fixed t0".into()));
    }
    CrossFits::fit(ds, plan, cfg)?.estimate(params)
}

/// Adaptive smoothing estimator with bandwidths chosen from the data.
pub fn adaptive_smoothing_value(
    ds: &Dataset,
    plan: &FoldPlan,
    tc: &TuningConfig,
    cfg: &NuisanceConfig,
    clamp: f64,
) -> Result<Estimate> {
    let fits = CrossFits::fit(ds, plan, cfg)?;
    let h = fits.bandwidths(tc);
    fits.estimate(&SmoothingParams::adaptive(h, clamp))
}

/// Adaptive smoothing estimator with caller-supplied bandwidths.
pub fn adaptive_smoothing_value_with_bandwidths(
    ds: &Dataset,
    plan: &FoldPlan,
    h: [f64; 2],
    cfg: &NuisanceConfig,
    clamp: f64,
) -> Result<Estimate> {
    CrossFits::fit(ds, plan, cfg)?.estimate(&SmoothingParams::adaptive(h, clamp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Observation;
    use crate::folds::make_fold_plan;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Scenario-A-like draw: x1 ~ Bern(0.4), x2 ~ Bern(0.5), π = 0.7 + 0.1 x1.
    fn sample(n: usize, seed: u64, pi: &dyn Fn(f64) -> f64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let obs = (0..n)
            .map(|_| {
                let x1 = f64::from(u8::from(rng.random::<f64>() < 0.4));
                let x2 = f64::from(u8::from(rng.random::<f64>() < 0.5));
                let a = u8::from(rng.random::<f64>() < pi(x1));
                let e: f64 = rng.random::<f64>() - 0.5;
                Observation::new(vec![x1, x2], a, 0.3 + f64::from(a) * 0.4 * x1 + e)
            })
            .collect();
        Dataset::new(obs).unwrap()
    }

    #[test]
    fn identical_predictors_give_zero_error() {
        let ds = sample(40, 1, &|_| 0.5);
        let plan = make_fold_plan(40, 2).unwrap();
        let f = |x: &[f64]| x[0] * 0.3 - x[1];
        assert_eq!(approx_error_with(&ds, &plan, 0, f, [&f, &f]), 0.0);
    }

    #[test]
    fn constant_offset_gives_squared_offset() {
        let ds = sample(41, 1, &|_| 0.5);
        let plan = make_fold_plan(41, 3).unwrap();
        let f = |x: &[f64]| x[0] + 2.0 * x[1];
        let g = |x: &[f64]| x[0] + 2.0 * x[1] + 0.3;
        for j in 0..2 {
            assert_abs_diff_eq!(approx_error_with(&ds, &plan, j, f, [&g, &g]), 0.09, epsilon = 1e-12);
        }
    }

    #[test]
    fn small_bandwidth_matches_plug_in() {
        let ds = sample(400, 4, &|x1| 0.7 + 0.1 * x1);
        let plan = make_fold_plan(400, 5).unwrap();
        let cfg = NuisanceConfig::frequency();
        let fits = CrossFits::fit(&ds, &plan, &cfg).unwrap();
        // min |τ̂| over the observed cells
        let min_tau = (0..ds.n())
            .flat_map(|i| fits.halves.outcome.iter().map(move |o| (i, o)))
            .map(|(i, o)| o.contrast(&ds.get(i).x).abs())
            .fold(f64::INFINITY, f64::min);
        assert!(min_tau > 0.0);
        let h = 0.5 * min_tau;
        let s = fits.estimate(&SmoothingParams::fixed([h, h], 0.5)).unwrap();

        // Hard-decision reference on the same fits and quarters.
        let mut reference = 0.0;
        for j in 0..2 {
            for k in 0..2 {
                let (pf, of) = &fits.quarter_nuisance[j][k];
                let q = plan.quarter(j, k);
                let m: f64 = q
                    .iter()
                    .map(|&i| {
                        let o = ds.get(i);
                        let d = f64::from(u8::from(fits.halves.outcome[1 - j].contrast(&o.x) > 0.0));
                        psi(o, d, pf, of)
                    })
                    .sum::<f64>()
                    / q.len() as f64;
                reference += 0.25 * m;
            }
        }
        assert_abs_diff_eq!(s.value, reference, epsilon = 1e-12);
    }

    #[test]
    fn adaptive_reduces_to_fixed_with_known_half_propensity() {
        let ds = sample(300, 6, &|_| 0.5);
        let plan = make_fold_plan(300, 7).unwrap();
        let cfg = NuisanceConfig::frequency();
        let fitted = CrossFits::fit(&ds, &plan, &cfg).unwrap();
        let known = || PropensityFit::known(|_| 0.5, (0.05, 0.95));
        let halves = HalfFits { outcome: fitted.halves.outcome.clone(), propensity: [known(), known()] };
        let fits = CrossFits::from_parts(&ds, &plan, halves, fitted.quarter_nuisance.clone(), None);
        let h = [0.2, 0.3];
        let a = fits.estimate(&SmoothingParams::adaptive(h, 0.05)).unwrap();
        let f = fits.estimate(&SmoothingParams::fixed(h, 0.5)).unwrap();
        assert_eq!(a.value, f.value);
        assert_eq!(a.sigma, f.sigma);
        // missing quarter fits → floor branch
        assert_eq!(fits.bandwidths(&TuningConfig::default()), [select_bandwidth(0.0, 300, &TuningConfig::default()); 2]);
    }

    #[test]
    fn equal_quarters_give_grand_mean() {
        let ds = sample(400, 8, &|x1| 0.7 + 0.1 * x1);
        let plan = make_fold_plan(400, 9).unwrap();
        let fits = CrossFits::fit(&ds, &plan, &NuisanceConfig::frequency()).unwrap();
        let params = SmoothingParams::adaptive(fits.bandwidths(&TuningConfig::default()), 0.05);
        let est = fits.estimate(&params).unwrap();
        // Recompute the grand mean of per-observation scores independently.
        let mut all = Vec::new();
        for j in 0..2 {
            for k in 0..2 {
                let (pf, of) = &fits.quarter_nuisance[j][k];
                for &i in plan.quarter(j, k) {
                    let o = ds.get(i);
                    let t0 = fits.halves.propensity[1 - j].predict(&o.x).clamp(0.05, 0.95);
                    let d = smooth_decision_unchecked(fits.halves.outcome[1 - j].contrast(&o.x), params.h[1 - j], t0);
                    all.push(psi(o, d, pf, of));
                }
            }
        }
        let mean = all.iter().sum::<f64>() / all.len() as f64;
        assert_abs_diff_eq!(est.value, mean, epsilon = 1e-12);
        let var = all.iter().map(|p| (p - mean).powi(2)).sum::<f64>() / (all.len() - 1) as f64;
        assert_abs_diff_eq!(est.sigma, var.sqrt(), epsilon = 1e-12);
        assert_eq!(est.n, 400);
    }

    #[test]
    fn unequal_quarters_use_quarter_weights() {
        let ds = sample(403, 10, &|x1| 0.7 + 0.1 * x1);
        let plan = make_fold_plan(403, 11).unwrap();
        let fits = CrossFits::fit(&ds, &plan, &NuisanceConfig::frequency()).unwrap();
        let params = SmoothingParams::fixed([0.4, 0.4], 0.5);
        let est = fits.estimate(&params).unwrap();
        let mut weighted = 0.0;
        for j in 0..2 {
            for k in 0..2 {
                let (pf, of) = &fits.quarter_nuisance[j][k];
                let q = plan.quarter(j, k);
                let s: f64 = q
                    .iter()
                    .map(|&i| {
                        let o = ds.get(i);
                        psi(o, smooth_decision_unchecked(fits.halves.outcome[1 - j].contrast(&o.x), 0.4, 0.5), pf, of)
                    })
                    .sum();
                weighted += s / q.len() as f64 / 4.0;
            }
        }
        assert_abs_diff_eq!(est.value, weighted, epsilon = 1e-12);
    }

    #[test]
    fn standalone_eae_matches_crossfits() {
        let ds = sample(500, 12, &|x1| 0.7 + 0.1 * x1);
        let plan = make_fold_plan(500, 13).unwrap();
        let cfg = NuisanceConfig::frequency();
        let fits = CrossFits::fit(&ds, &plan, &cfg).unwrap();
        for j in 0..2 {
            assert_abs_diff_eq!(
                estimate_approx_error(&ds, &plan, j, &cfg).unwrap(),
                fits.approx_error(j).unwrap(),
                epsilon = 1e-14
            );
        }
        assert!(estimate_approx_error(&ds, &plan, 2, &cfg).is_err());
    }

    #[test]
    fn smoothing_value_rejects_adaptive() {
        let ds = sample(100, 14, &|_| 0.5);
        let plan = make_fold_plan(100, 15).unwrap();
        let params = SmoothingParams::adaptive([0.1, 0.1], 0.05);
        assert!(smoothing_value(&ds, &plan, &params, &NuisanceConfig::frequency()).is_err());
    }

    #[test]
    fn plan_size_mismatch() {
        let ds = sample(100, 14, &|_| 0.5);
        let plan = make_fold_plan(99, 15).unwrap();
        assert!(plug_in_value(&ds, &plan, &NuisanceConfig::frequency()).is_err());
    }
}

//! Comparison estimators: sample splitting, subbagging, in-sample plug-in
//! and the oracle that knows the true working models.

use std::collections::HashMap;

use rand::seq::index::sample;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimator::{psi, Estimate, HalfFits, Method};
use crate::folds::make_fold_plan;
use crate::nuisance::cells::CellKey;
use crate::nuisance::{fit_outcome, fit_propensity, NuisanceConfig, OutcomeFit, PropensityFit};
use crate::rng;
use crate::sim::ScenarioSpec;

/// Single sample split: models and decision from `I₁`, evaluation on `I₂`.
/// The interval uses `n = |I₂|`.
pub fn sss_value(ds: &Dataset, seed: u64, cfg: &NuisanceConfig) -> Result<Estimate> {
    let plan = make_fold_plan(ds.n(), seed)?;
    let (train, eval) = (plan.half(0), plan.half(1));
    let of = fit_outcome(ds, train, cfg)?;
    let pf = fit_propensity(ds, train, cfg)?;
    let values: Vec<f64> = eval
        .iter()
        .map(|&i| {
            let obs = ds.get(i);
            psi(obs, hard(of.contrast(&obs.x)), &pf, &of)
        })
        .collect();
    Ok(Estimate::from_psi_mean(&values, Method::Sss))
}

fn hard(tau: f64) -> f64 {
    if tau > 0.0 {
        1.0
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubbaggingConfig {
    /// Subsample size `s = ⌈n^exponent⌉`.
    pub subsample_exponent: f64,
    /// Number of subsamples.
    pub b: usize,
}

impl Default for SubbaggingConfig {
    fn default() -> Self {
        Self { subsample_exponent: 0.8, b: 200 }
    }
}

impl SubbaggingConfig {
    /// Subsample size `n^{1 − 1/k₀}` for margin exponent `k₀ > 1`.
    pub fn from_k0(k0: f64, b: usize) -> Result<Self> {
        if k0 <= 1.0 || !k0.is_finite() {
            return Err(Error::Config(format!("k0 {k0} must exceed 1")));
        }
        Ok(Self { subsample_exponent: 1.0 - 1.0 / k0, b })
    }

    pub fn subsample_size(&self, n: usize) -> Result<usize> {
        if !(self.subsample_exponent > 0.0 && self.subsample_exponent < 1.0) {
            return Err(Error::Config(format!("subsample exponent {} outside (0, 1)", self.subsample_exponent)));
        }
        if self.b == 0 {
            return Err(Error::Config("subbagging needs at least one subsample".into()));
        }
        let s = (n as f64).powf(self.subsample_exponent).ceil() as usize;
        if s >= n {
            return Err(Error::Config(format!("subsample size {s} must be smaller than n = {n}")));
        }
        Ok(s)
    }
}

/// `d̃(x)`: share of subsample contrasts that are positive at `x`.
#[derive(Debug, Clone)]
pub struct AggregatedDecision {
    fits: Vec<OutcomeFit>,
}

impl AggregatedDecision {
    pub fn new(fits: Vec<OutcomeFit>) -> Result<Self> {
        if fits.is_empty() {
            return Err(Error::Config("aggregated decision needs at least one fit".into()));
        }
        Ok(Self { fits })
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        let positive = self.fits.iter().filter(|f| f.contrast(x) > 0.0).count();
        positive as f64 / self.fits.len() as f64
    }

    pub fn len(&self) -> usize {
        self.fits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fits.is_empty()
    }
}

/// Two-fold cross-fitted estimator whose decision is the subbagged average
/// of hard rules. Subsamples that cannot support a fit are redrawn up to a
/// fixed budget.
pub fn subbagging_value(ds: &Dataset, sc: &SubbaggingConfig, seed: u64, cfg: &NuisanceConfig) -> Result<Estimate> {
    let plan = make_fold_plan(ds.n(), seed)?;
    let fits = HalfFits::fit(ds, &plan, cfg)?;
    let mut values = Vec::with_capacity(ds.n());
    for j in 0..2 {
        let other = 1 - j;
        let train = plan.half(other);
        let s = sc.subsample_size(ds.n())?.min(train.len() - 1);
        let mut rng = rng::stream(seed, "subbagging", j as u64);
        let mut subfits = Vec::with_capacity(sc.b);
        let mut attempts = 0;
        while subfits.len() < sc.b {
            attempts += 1;
            if attempts > 10 * sc.b {
                return Err(Error::OutcomeFit("too many degenerate subsamples".into()));
            }
            let idx: Vec<usize> = sample(&mut rng, train.len(), s).into_iter().map(|k| train[k]).collect();
            if let Ok(f) = fit_outcome(ds, &idx, cfg) {
                subfits.push(f);
            }
        }
        let decision = AggregatedDecision::new(subfits)?;
        let (of, pf) = (&fits.outcome[other], &fits.propensity[other]);
        for &i in plan.half(j) {
            let obs = ds.get(i);
            values.push(psi(obs, decision.value(&obs.x), pf, of));
        }
    }
    Ok(Estimate::from_psi_mean(&values, Method::Subbagging))
}

/// Plug-in value with cell frequencies estimated on the full sample and
/// evaluated on the same sample; biased upward under a null contrast.
pub fn insample_plugin_value(ds: &Dataset) -> Result<Estimate> {
    let mut arms: HashMap<CellKey, [usize; 2]> = HashMap::new();
    for o in ds.iter() {
        arms.entry(CellKey::of(&o.x)).or_default()[usize::from(o.a)] += 1;
    }
    if arms.values().any(|c| c[0] == 0 || c[1] == 0) {
        return Err(Error::PropensityDegenerate("a covariate cell has a single treatment arm".into()));
    }
    let all: Vec<usize> = (0..ds.n()).collect();
    let cfg = NuisanceConfig::frequency();
    let of = fit_outcome(ds, &all, &cfg)?;
    let pf = fit_propensity(ds, &all, &cfg)?;
    let values: Vec<f64> = ds.iter().map(|o| psi(o, hard(of.contrast(&o.x)), &pf, &of)).collect();
    Ok(Estimate::from_psi_mean(&values, Method::InsamplePlugin))
}

/// Score evaluated with the true propensity, outcome model and decision.
pub fn oracle_value(ds: &Dataset, truth: &ScenarioSpec) -> Result<Estimate> {
    let (t1, t2) = (truth.clone(), truth.clone());
    let pf = PropensityFit::known(move |x| t1.pi1_at(x), (f64::MIN_POSITIVE, 1.0 - f64::EPSILON));
    let of = OutcomeFit::known(move |a, x| t2.mu_at(a, x));
    let values: Vec<f64> = ds.iter().map(|o| psi(o, hard(truth.tau_at(&o.x)), &pf, &of)).collect();
    Ok(Estimate::from_psi_mean(&values, Method::Oracle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{generate_scenario, ScenarioId};
    use approx::assert_abs_diff_eq;

    fn data(id: ScenarioId, n: usize, seed: u64) -> Dataset {
        generate_scenario(&ScenarioSpec::get(id), n, seed).unwrap().into_dataset()
    }

    #[test]
    fn sss_uses_half_the_sample() {
        let ds = data(ScenarioId::A, 201, 1);
        let est = sss_value(&ds, 3, &NuisanceConfig::frequency()).unwrap();
        assert_eq!(est.n, 101);
        assert_eq!(est.method, Method::Sss);
    }

    #[test]
    fn subsample_sizes() {
        let sc = SubbaggingConfig::default();
        assert_eq!(sc.subsample_size(1000).unwrap(), 252); // 1000^0.8 = 251.19
        let k = SubbaggingConfig::from_k0(5.0, 10).unwrap();
        assert_abs_diff_eq!(k.subsample_exponent, 0.8, epsilon = 1e-15);
        assert!(SubbaggingConfig::from_k0(1.0, 10).is_err());
        assert!(SubbaggingConfig { subsample_exponent: 1.0, b: 5 }.subsample_size(100).is_err());
        assert!(SubbaggingConfig { subsample_exponent: 0.5, b: 0 }.subsample_size(100).is_err());
    }

    #[test]
    fn aggregated_decision_is_permutation_invariant() {
        let fits: Vec<OutcomeFit> =
            (0..7).map(|k| OutcomeFit::known(move |a, x| f64::from(a) * (x[0] - k as f64 * 0.1))).collect();
        let forward = AggregatedDecision::new(fits.clone()).unwrap();
        let mut rev = fits;
        rev.reverse();
        let backward = AggregatedDecision::new(rev).unwrap();
        for x in [-1.0, 0.05, 0.25, 0.45, 2.0] {
            assert_eq!(forward.value(&[x]), backward.value(&[x]));
        }
        assert_eq!(forward.value(&[0.25]), 3.0 / 7.0);
        assert!(AggregatedDecision::new(vec![]).is_err());
    }

    #[test]
    fn subbagging_is_deterministic() {
        let ds = data(ScenarioId::A, 300, 2);
        let sc = SubbaggingConfig { b: 20, ..Default::default() };
        let a = subbagging_value(&ds, &sc, 9, &NuisanceConfig::frequency()).unwrap();
        let b = subbagging_value(&ds, &sc, 9, &NuisanceConfig::frequency()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.n, 300);
    }

    #[test]
    fn insample_plugin_rejects_single_arm_cells() {
        use crate::data::Observation;
        let obs = (0..10).map(|i| Observation::new(vec![f64::from(i % 2)], u8::from(i < 9), 0.0)).collect();
        let ds = Dataset::new(obs).unwrap();
        assert!(insample_plugin_value(&ds).is_err());
    }

    #[test]
    fn insample_plugin_on_toy() {
        let ds = data(ScenarioId::Toy, 400, 5);
        let est = insample_plugin_value(&ds).unwrap();
        assert!(est.value.is_finite());
        assert_eq!(est.n, 400);
    }

    #[test]
    fn oracle_is_unbiased_in_large_samples() {
        let spec = ScenarioSpec::get(ScenarioId::D);
        let ds = generate_scenario(&spec, 100_000, 4).unwrap().into_dataset();
        let est = oracle_value(&ds, &spec).unwrap();
        assert!((est.value - spec.v0).abs() < 4.0 * est.sigma / (ds.n() as f64).sqrt());
    }
}

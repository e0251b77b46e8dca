//! Monte Carlo harness: coverage and length of the intervals of several
//! estimators over independent replications.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::scenario::{generate_scenario, ScenarioId, ScenarioSpec};
use crate::baselines::{insample_plugin_value, oracle_value, sss_value, subbagging_value, SubbaggingConfig};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::estimator::{
    plug_in_value, repeat_plan_seed, repeated_cross_fit, CrossFits, Estimate, SmoothingParams, TuningConfig,
    DEFAULT_CLAMP,
};
use crate::folds::make_fold_plan;
use crate::nuisance::NuisanceConfig;
use crate::rng::derive_seed;

/// Version of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Estimator selectable in a Monte Carlo run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum MethodSpec {
    Adaptive,
    /// Smoothing with a fixed `t₀`.
    Smoothing(f64),
    Sss,
    Subbagging,
    Oracle,
    /// Cross-fitted plug-in with the hard decision.
    PlugIn,
    InsamplePlugin,
}

impl MethodSpec {
    /// Parses a comma-separated list such as `adaptive,smoothing(0.3),sss`.
    pub fn parse_list(s: &str) -> Result<Vec<Self>> {
        let methods = s.split(',').map(str::trim).filter(|m| !m.is_empty()).map(str::parse).collect::<Result<Vec<_>>>()?;
        if methods.is_empty() {
            return Err(Error::Config("no methods given".into()));
        }
        Ok(methods)
    }
}

impl fmt::Display for MethodSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MethodSpec::Adaptive => f.write_str("adaptive"),
            MethodSpec::Smoothing(t0) => write!(f, "smoothing({t0})"),
            MethodSpec::Sss => f.write_str("sss"),
            MethodSpec::Subbagging => f.write_str("subbagging"),
            MethodSpec::Oracle => f.write_str("oracle"),
            MethodSpec::PlugIn => f.write_str("plugin"),
            MethodSpec::InsamplePlugin => f.write_str("insample_plugin"),
        }
    }
}

impl FromStr for MethodSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        let m = match t.as_str() {
            "adaptive" | "adaptive_smoothing" => MethodSpec::Adaptive,
            "smoothing" => MethodSpec::Smoothing(0.5),
            "sss" => MethodSpec::Sss,
            "subbagging" => MethodSpec::Subbagging,
            "oracle" => MethodSpec::Oracle,
            "plugin" | "plug_in" => MethodSpec::PlugIn,
            "insample_plugin" | "insample" => MethodSpec::InsamplePlugin,
            _ => {
                let t0 = t
                    .strip_prefix("smoothing(")
                    .and_then(|r| r.strip_suffix(')'))
                    .and_then(|v| v.trim().parse::<f64>().ok())
                    .ok_or_else(|| Error::UnknownMethod(s.to_string()))?;
                if !(0.0..=1.0).contains(&t0) {
                    return Err(Error::Config(format!("t0 {t0} outside [0, 1]")));
                }
                MethodSpec::Smoothing(t0)
            }
        };
        Ok(m)
    }
}

impl From<MethodSpec> for String {
    fn from(m: MethodSpec) -> Self {
        m.to_string()
    }
}

impl TryFrom<String> for MethodSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

#[derive(Debug, Clone)]
pub struct McConfig {
    pub n: usize,
    pub reps: usize,
    pub methods: Vec<MethodSpec>,
    pub master_seed: u64,
    pub alpha: f64,
    pub tuning: TuningConfig,
    /// Working models; `None` uses the scenario's default family.
    pub nuisance: Option<NuisanceConfig>,
    pub clamp: f64,
    /// Fold plans averaged by the adaptive estimator.
    pub repeats: usize,
    pub subbagging: SubbaggingConfig,
    /// Worker threads; `None` uses the global pool.
    pub jobs: Option<usize>,
}

impl McConfig {
    pub fn new(n: usize, reps: usize, methods: Vec<MethodSpec>, master_seed: u64) -> Self {
        Self {
            n,
            reps,
            methods,
            master_seed,
            alpha: 0.05,
            tuning: TuningConfig::default(),
            nuisance: None,
            clamp: DEFAULT_CLAMP,
            repeats: 1,
            subbagging: SubbaggingConfig::default(),
            jobs: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods given".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Domain(format!("alpha {} outside (0, 1)", self.alpha)));
        }
        if self.repeats == 0 {
            return Err(Error::Config("repeats must be at least 1".into()));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        if let Some(c) = &self.nuisance {
            c.validate()?;
        }
        Ok(())
    }
}

/// Raw per-replication estimates, `outcomes[rep][method]`.
#[derive(Debug, Clone)]
pub struct Replications {
    pub scenario: String,
    pub v0: f64,
    pub methods: Vec<MethodSpec>,
    pub outcomes: Vec<Vec<std::result::Result<Estimate, String>>>,
}

impl Replications {
    /// Successful estimates of method `m`, in replication order.
    pub fn estimates(&self, m: usize) -> Vec<&Estimate> {
        self.outcomes.iter().filter_map(|row| row[m].as_ref().ok()).collect()
    }

    pub fn failures(&self, m: usize) -> usize {
        self.outcomes.iter().filter(|row| row[m].is_err()).count()
    }
}

fn run_one(spec: &ScenarioSpec, cfg: &McConfig, nuisance: &NuisanceConfig, rep: usize) -> Vec<std::result::Result<Estimate, String>> {
    let data_seed = derive_seed(cfg.master_seed, "data", rep as u64);
    let plan_seed = derive_seed(cfg.master_seed, "plan", rep as u64);
    match generate_scenario(spec, cfg.n, data_seed) {
        Ok(sim) => estimate_all(sim.dataset(), spec, cfg, nuisance, plan_seed),
        Err(e) => vec![Err(e.to_string()); cfg.methods.len()],
    }
}

fn estimate_all(
    ds: &Dataset,
    spec: &ScenarioSpec,
    cfg: &McConfig,
    nuisance: &NuisanceConfig,
    plan_seed: u64,
) -> Vec<std::result::Result<Estimate, String>> {
    // first plan of the repeated scheme, shared by every split-based method
    let seed0 = repeat_plan_seed(plan_seed, 0);
    let plan = match make_fold_plan(ds.n(), seed0) {
        Ok(p) => p,
        Err(e) => return vec![Err(e.to_string()); cfg.methods.len()],
    };
    let needs_cross = cfg
        .methods
        .iter()
        .any(|m| matches!(m, MethodSpec::Smoothing(_)) || (*m == MethodSpec::Adaptive && cfg.repeats == 1));
    let cross = needs_cross.then(|| {
        CrossFits::fit(ds, &plan, nuisance).map(|f| {
            let h = f.bandwidths(&cfg.tuning);
            (f, h)
        })
    });
    let with_cross = |params: &dyn Fn([f64; 2]) -> SmoothingParams| -> Result<Estimate> {
        match cross.as_ref().expect("cross fits requested") {
            Ok((f, h)) => f.estimate(&params(*h)),
            Err(e) => Err(Error::Config(e.to_string())),
        }
    };
    cfg.methods
        .iter()
        .map(|m| {
            let r = match *m {
                MethodSpec::Adaptive if cfg.repeats > 1 => {
                    repeated_cross_fit(ds, cfg.repeats, plan_seed, &cfg.tuning, nuisance, cfg.clamp)
                }
                MethodSpec::Adaptive => with_cross(&|h| SmoothingParams::adaptive(h, cfg.clamp)),
                MethodSpec::Smoothing(t0) => with_cross(&|h| SmoothingParams::fixed(h, t0)),
                MethodSpec::Sss => sss_value(ds, seed0, nuisance),
                MethodSpec::Subbagging => subbagging_value(ds, &cfg.subbagging, seed0, nuisance),
                MethodSpec::Oracle => oracle_value(ds, spec),
                MethodSpec::PlugIn => plug_in_value(ds, &plan, nuisance),
                MethodSpec::InsamplePlugin => insample_plugin_value(ds),
            };
            r.map_err(|e| e.to_string())
        })
        .collect()
}

/// Runs every replication; the result does not depend on the worker count.
pub fn run_replications(spec: &ScenarioSpec, cfg: &McConfig) -> Result<Replications> {
    cfg.validate()?;
    let nuisance = cfg.nuisance.clone().unwrap_or_else(|| spec.nuisance_config());
    let work = || -> Vec<_> { (0..cfg.reps).into_par_iter().map(|r| run_one(spec, cfg, &nuisance, r)).collect() };
    let outcomes = match cfg.jobs {
        Some(j) => rayon::ThreadPoolBuilder::new()
            .num_threads(j)
            .build()
            .map_err(|e| Error::Config(e.to_string()))?
            .install(work),
        None => work(),
    };
    Ok(Replications { scenario: spec.label(), v0: spec.v0, methods: cfg.methods.clone(), outcomes })
}

/// Five-number summary (linear interpolation between order statistics).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quantiles {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
}

impl Quantiles {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let q = |p: f64| {
            let pos = p * (v.len() - 1) as f64;
            let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
            v[lo] + (pos - lo as f64) * (v[hi] - v[lo])
        };
        Some(Self { min: v[0], q25: q(0.25), median: q(0.5), q75: q(0.75), max: v[v.len() - 1] })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: MethodSpec,
    pub successes: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
    /// Fraction of intervals containing `V₀`.
    pub ecp: Option<f64>,
    /// Mean interval length.
    pub al: Option<f64>,
    pub mean_estimate: Option<f64>,
    pub bias: Option<f64>,
    pub empirical_sd: Option<f64>,
    pub mean_sigma: Option<f64>,
    pub mean_sigma_sq: Option<f64>,
    pub quantiles: Option<Quantiles>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub schema_version: u32,
    pub scenario: String,
    pub n: usize,
    pub reps: usize,
    pub master_seed: u64,
    pub alpha: f64,
    pub v0: f64,
    pub methods: Vec<MethodSummary>,
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

impl Replications {
    pub fn summarize(&self, n: usize, master_seed: u64, alpha: f64) -> Result<McReport> {
        let mut methods = Vec::with_capacity(self.methods.len());
        for (m, &method) in self.methods.iter().enumerate() {
            let est = self.estimates(m);
            let values: Vec<f64> = est.iter().map(|e| e.value).collect();
            let mut covered = Vec::with_capacity(est.len());
            let mut lengths = Vec::with_capacity(est.len());
            for e in &est {
                let (lo, hi) = e.ci(alpha)?;
                covered.push(f64::from(u8::from(lo <= self.v0 && self.v0 <= hi)));
                lengths.push(hi - lo);
            }
            let mean_estimate = mean(&values);
            let empirical_sd = mean_estimate.filter(|_| values.len() > 1).map(|mu| {
                (values.iter().map(|v| (v - mu).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
            });
            let sigmas: Vec<f64> = est.iter().map(|e| e.sigma).collect();
            let sigma_sq: Vec<f64> = sigmas.iter().map(|s| s * s).collect();
            methods.push(MethodSummary {
                method,
                successes: est.len(),
                failures: self.failures(m),
                first_failure: self.outcomes.iter().find_map(|row| row[m].as_ref().err().cloned()),
                ecp: mean(&covered),
                al: mean(&lengths),
                mean_estimate,
                bias: mean_estimate.map(|v| v - self.v0),
                empirical_sd,
                mean_sigma: mean(&sigmas),
                mean_sigma_sq: mean(&sigma_sq),
                quantiles: Quantiles::of(&values),
            });
        }
        Ok(McReport {
            schema_version: REPORT_SCHEMA_VERSION,
            scenario: self.scenario.clone(),
            n,
            reps: self.outcomes.len(),
            master_seed,
            alpha,
            v0: self.v0,
            methods,
        })
    }
}

/// Runs the replications and summarises them.
pub fn run_monte_carlo(spec: &ScenarioSpec, cfg: &McConfig) -> Result<McReport> {
    run_replications(spec, cfg)?.summarize(cfg.n, cfg.master_seed, cfg.alpha)
}

/// In-sample plug-in against the adaptive estimator on the two-group toy design.
pub fn toy_example_report(n: usize, reps: usize, seed: u64) -> Result<McReport> {
    let cfg = McConfig::new(n, reps, vec![MethodSpec::InsamplePlugin, MethodSpec::Adaptive], seed);
    run_monte_carlo(&ScenarioSpec::get(ScenarioId::Toy), &cfg)
}

#[derive(Serialize)]
struct CsvRow<'a> {
    scenario: &'a str,
    n: usize,
    reps: usize,
    master_seed: u64,
    alpha: f64,
    v0: f64,
    method: String,
    successes: usize,
    failures: usize,
    ecp: Option<f64>,
    al: Option<f64>,
    mean_estimate: Option<f64>,
    bias: Option<f64>,
    empirical_sd: Option<f64>,
    mean_sigma: Option<f64>,
    q_min: Option<f64>,
    q25: Option<f64>,
    median: Option<f64>,
    q75: Option<f64>,
    q_max: Option<f64>,
}

impl McReport {
    pub fn method(&self, m: MethodSpec) -> Option<&MethodSummary> {
        self.methods.iter().find(|s| s.method == m)
    }

    /// One row per method.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for s in &self.methods {
            let q = s.quantiles;
            w.serialize(CsvRow {
                scenario: &self.scenario,
                n: self.n,
                reps: self.reps,
                master_seed: self.master_seed,
                alpha: self.alpha,
                v0: self.v0,
                method: s.method.to_string(),
                successes: s.successes,
                failures: s.failures,
                ecp: s.ecp,
                al: s.al,
                mean_estimate: s.mean_estimate,
                bias: s.bias,
                empirical_sd: s.empirical_sd,
                mean_sigma: s.mean_sigma,
                q_min: q.map(|q| q.min),
                q25: q.map(|q| q.q25),
                median: q.map(|q| q.median),
                q75: q.map(|q| q.q75),
                q_max: q.map(|q| q.max),
            })
            .map_err(|e| Error::Csv(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Csv(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::Csv(e.to_string()))
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Config(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn method_parsing() {
        let m = MethodSpec::parse_list("adaptive, smoothing(0.3),sss,subbagging,oracle,plugin").unwrap();
        assert_eq!(m.len(), 6);
        assert_eq!(m[1], MethodSpec::Smoothing(0.3));
        assert_eq!("smoothing".parse::<MethodSpec>().unwrap(), MethodSpec::Smoothing(0.5));
        assert!(matches!("bootstrap".parse::<MethodSpec>(), Err(Error::UnknownMethod(_))));
        assert!("smoothing(1.5)".parse::<MethodSpec>().is_err());
        for x in m {
            assert_eq!(x.to_string().parse::<MethodSpec>().unwrap(), x);
        }
    }

    #[test]
    fn quantiles_interpolate() {
        let q = Quantiles::of(&[4.0, 1.0, 3.0, 2.0, 5.0]).unwrap();
        assert_eq!((q.min, q.q25, q.median, q.q75, q.max), (1.0, 2.0, 3.0, 4.0, 5.0));
        let q = Quantiles::of(&[0.0, 1.0]).unwrap();
        assert_eq!(q.median, 0.5);
        assert!(Quantiles::of(&[]).is_none());
    }

    #[test]
    fn single_replication_coverage_is_binary() {
        let cfg = McConfig::new(200, 1, vec![MethodSpec::Adaptive, MethodSpec::Oracle], 3);
        let r = run_monte_carlo(&ScenarioSpec::get(ScenarioId::A), &cfg).unwrap();
        for s in &r.methods {
            let ecp = s.ecp.unwrap();
            assert!(ecp == 0.0 || ecp == 1.0);
            assert!(s.empirical_sd.is_none());
        }
    }

    #[test]
    fn worker_count_does_not_change_report() {
        let mut cfg = McConfig::new(120, 6, MethodSpec::parse_list("adaptive,sss,plugin").unwrap(), 11);
        cfg.jobs = Some(1);
        let a = run_monte_carlo(&ScenarioSpec::get(ScenarioId::B), &cfg).unwrap();
        cfg.jobs = Some(4);
        let b = run_monte_carlo(&ScenarioSpec::get(ScenarioId::B), &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
    }

    #[test]
    fn repeats_one_matches_single_plan() {
        let spec = ScenarioSpec::get(ScenarioId::A);
        let cfg = McConfig::new(150, 2, vec![MethodSpec::Adaptive], 5);
        let mut rep = cfg.clone();
        rep.repeats = 2;
        let a = run_replications(&spec, &cfg).unwrap();
        assert_eq!(a.failures(0), 0);
        let b = run_replications(&spec, &rep).unwrap();
        assert_ne!(a.estimates(0)[0], b.estimates(0)[0]);
    }

    #[test]
    fn report_round_trips_through_json() {
        let cfg = McConfig::new(100, 3, MethodSpec::parse_list("adaptive,oracle").unwrap(), 2);
        let r = run_monte_carlo(&ScenarioSpec::get(ScenarioId::C), &cfg).unwrap();
        let back: McReport = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(back, r);
        assert_eq!(r.to_csv().unwrap().lines().count(), 3);
    }

    #[test]
    fn rejects_bad_config() {
        let spec = ScenarioSpec::get(ScenarioId::A);
        assert!(run_monte_carlo(&spec, &McConfig::new(100, 0, vec![MethodSpec::Adaptive], 1)).is_err());
        assert!(run_monte_carlo(&spec, &McConfig::new(100, 1, vec![], 1)).is_err());
    }
}

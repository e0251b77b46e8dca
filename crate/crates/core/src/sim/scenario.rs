//! Data-generating processes and their analytic ground truth.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::quadrature::integrate;
use crate::data::{Dataset, Observation};
use crate::error::{Error, Result};
use crate::nuisance::NuisanceConfig;
use crate::rng;

const QUAD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ScenarioId {
    A,
    B,
    C,
    D,
    E,
    /// Two-group randomized example with a null effect among males.
    Toy,
}

impl ScenarioId {
    pub const TABLE: [ScenarioId; 5] = [ScenarioId::A, ScenarioId::B, ScenarioId::C, ScenarioId::D, ScenarioId::E];
}

impl fmt::Display for ScenarioId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ScenarioId::A => "A",
            ScenarioId::B => "B",
            ScenarioId::C => "C",
            ScenarioId::D => "D",
            ScenarioId::E => "E",
            ScenarioId::Toy => "toy",
        };
        f.write_str(s)
    }
}

impl FromStr for ScenarioId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(ScenarioId::A),
            "B" => Ok(ScenarioId::B),
            "C" => Ok(ScenarioId::C),
            "D" => Ok(ScenarioId::D),
            "E" => Ok(ScenarioId::E),
            "TOY" => Ok(ScenarioId::Toy),
            _ => Err(Error::UnknownScenario(s.to_string())),
        }
    }
}

/// Marginal law of one covariate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Law {
    Bernoulli(f64),
    Uniform(f64, f64),
    /// Deterministic: the first half of the sample is 0, the rest 1.
    HalfSplit,
}

type Surface = fn(f64, f64) -> f64;

/// One data-generating process `Y = Φ(x) + A τ(x) + e`, `A ~ Bernoulli(π(1, x))`.
#[derive(Debug, Clone)]
pub struct ScenarioSpec {
    pub id: ScenarioId,
    pub x1: Law,
    pub x2: Option<Law>,
    pub phi: Surface,
    pub tau: Surface,
    pub pi1: Surface,
    pub noise_sd: f64,
    pub v0: f64,
    pub regular: bool,
    /// Propensity replaced by the constant 0.5.
    pub balanced: bool,
}

impl ScenarioSpec {
    pub fn get(id: ScenarioId) -> Self {
        let base = |x1, x2, phi: Surface, tau: Surface, pi1: Surface, v0, regular| ScenarioSpec {
            id,
            x1,
            x2: Some(x2),
            phi,
            tau,
            pi1,
            noise_sd: 0.5,
            v0,
            regular,
            balanced: false,
        };
        use Law::*;
        match id {
            ScenarioId::A => base(Bernoulli(0.4), Bernoulli(0.5), |_, _| 0.3, |x1, _| 0.4 * x1, |x1, _| 0.7 + 0.1 * x1, 0.46, false),
            ScenarioId::B => base(Bernoulli(0.5), Bernoulli(0.5), |_, _| 0.3, |_, _| 0.4, |x1, _| 0.5 + 0.3 * x1, 0.7, true),
            ScenarioId::C => base(
                Bernoulli(0.3),
                Uniform(-2.0, 2.0),
                |_, x2| (x2 / 4.0).powi(2),
                |x1, x2| x1 * (x2 / 4.0).powi(2),
                |_, _| 0.8,
                13.0 / 120.0,
                false,
            ),
            ScenarioId::D => base(
                Bernoulli(0.5),
                Uniform(-2.0, 2.0),
                |_, x2| x2 * x2,
                |_, x2| x2 * x2 - 4.0 / 3.0,
                |x1, _| 0.5 + 0.3 * x1,
                4.0 / 3.0 + 8.0 / (9.0 * 3f64.sqrt()),
                true,
            ),
            ScenarioId::E => base(
                Bernoulli(0.1),
                Uniform(-2.0, 2.0),
                |_, x2| (x2 / 4.0).powi(2),
                |x1, x2| x1 * (PI * x2 / 4.0).cos() / 8.0,
                |_, _| 0.8,
                1.0 / (40.0 * PI) + 1.0 / 12.0,
                false,
            ),
            ScenarioId::Toy => ScenarioSpec {
                id,
                x1: HalfSplit,
                x2: None,
                phi: |_, _| 0.0,
                tau: |x1, _| x1,
                pi1: |_, _| 0.5,
                noise_sd: 1.0,
                v0: 0.5,
                regular: false,
                balanced: false,
            },
        }
    }

    /// The same scenario with `π(1, x) ≡ 0.5`; `V₀` is unchanged.
    pub fn balanced(mut self) -> Self {
        self.pi1 = |_, _| 0.5;
        self.balanced = true;
        self
    }

    pub fn label(&self) -> String {
        if self.balanced {
            format!("{}-balanced", self.id)
        } else {
            self.id.to_string()
        }
    }

    /// Working-model family used for this scenario in the simulation study.
    ///
    /// Continuous designs use splines with the outcome interacted with the
    /// first covariate; the propensity carries only a main effect for it,
    /// which nests every propensity in the table.
    pub fn nuisance_config(&self) -> NuisanceConfig {
        match self.x2 {
            Some(Law::Uniform(..)) => NuisanceConfig { propensity_interaction: false, ..NuisanceConfig::spline(true) },
            _ => NuisanceConfig::frequency(),
        }
    }

    fn split(x: &[f64]) -> (f64, f64) {
        (x[0], x.get(1).copied().unwrap_or(0.0))
    }

    pub fn tau_at(&self, x: &[f64]) -> f64 {
        let (a, b) = Self::split(x);
        (self.tau)(a, b)
    }

    pub fn pi1_at(&self, x: &[f64]) -> f64 {
        let (a, b) = Self::split(x);
        (self.pi1)(a, b)
    }

    /// `μ(a, x) = Φ(x) + a τ(x)`.
    pub fn mu_at(&self, a: u8, x: &[f64]) -> f64 {
        let (x1, x2) = Self::split(x);
        (self.phi)(x1, x2) + f64::from(a) * (self.tau)(x1, x2)
    }

    /// `E f(X₁, X₂)` under the covariate laws.
    pub fn expect(&self, f: impl Fn(f64, f64) -> f64) -> f64 {
        let p1 = match self.x1 {
            Law::Bernoulli(p) => p,
            Law::HalfSplit => 0.5,
            Law::Uniform(..) => unreachable!("first covariate is always binary"),
        };
        let inner = |x1: f64| match self.x2 {
            None => f(x1, 0.0),
            Some(Law::Bernoulli(q)) => (1.0 - q) * f(x1, 0.0) + q * f(x1, 1.0),
            Some(Law::HalfSplit) => 0.5 * (f(x1, 0.0) + f(x1, 1.0)),
            Some(Law::Uniform(lo, hi)) => integrate(|x2| f(x1, x2), lo, hi, QUAD_TOL) / (hi - lo),
        };
        (1.0 - p1) * inner(0.0) + p1 * inner(1.0)
    }

    /// Probability of a tie between arms, `P(τ(X) = 0)`.
    pub fn prob_tie(&self) -> f64 {
        self.expect(|a, b| f64::from(u8::from((self.tau)(a, b) == 0.0)))
    }
}

/// `V₀` in closed form.
pub fn true_value(spec: &ScenarioSpec) -> f64 {
    spec.v0
}

/// The three pieces of the asymptotic variance of the smoothing estimators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarianceTerms {
    /// `Var{h(d₀, X)}` with `h(d, X) = d μ(1, X) + (1 − d) μ(0, X)`.
    pub decision: f64,
    /// IPW term over `{τ ≠ 0}`.
    pub regular: f64,
    /// IPW term over `{τ = 0}`.
    pub nonregular: f64,
}

impl VarianceTerms {
    pub fn total(&self) -> f64 {
        self.decision + self.regular + self.nonregular
    }
}

/// Variance terms for fixed `t₀` (`Some`) or the adaptive choice `t₀ = π(1, x)` (`None`).
pub fn analytic_variance_terms(spec: &ScenarioSpec, t0: Option<f64>) -> VarianceTerms {
    let s2 = spec.noise_sd * spec.noise_sd;
    let h = |a: f64, b: f64| (spec.phi)(a, b) + (spec.tau)(a, b).max(0.0);
    let mean_h = spec.expect(h);
    let decision = spec.expect(|a, b| h(a, b).powi(2)) - mean_h * mean_h;
    let regular = spec.expect(|a, b| {
        let tau = (spec.tau)(a, b);
        let p = (spec.pi1)(a, b);
        if tau > 0.0 {
            s2 / p
        } else if tau < 0.0 {
            s2 / (1.0 - p)
        } else {
            0.0
        }
    });
    let nonregular = spec.expect(|a, b| {
        if (spec.tau)(a, b) != 0.0 {
            return 0.0;
        }
        match t0 {
            None => s2,
            Some(t) => {
                let p = (spec.pi1)(a, b);
                s2 * (t * t / p + (1.0 - t).powi(2) / (1.0 - p))
            }
        }
    });
    VarianceTerms { decision, regular, nonregular }
}

/// Asymptotic variance of `√n (V̂_as − V₀)`.
pub fn analytic_asymptotic_variance(spec: &ScenarioSpec) -> f64 {
    analytic_variance_terms(spec, None).total()
}

/// Simulated data together with the potential outcomes, which are kept out
/// of the estimation API.
#[derive(Debug, Clone)]
pub struct SimDataset {
    data: Dataset,
    potential: Vec<[f64; 2]>,
}

impl SimDataset {
    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn into_dataset(self) -> Dataset {
        self.data
    }

    /// `[Y(0), Y(1)]` per observation.
    pub fn potential_outcomes(&self) -> &[[f64; 2]] {
        &self.potential
    }
}

fn draw(law: Law, i: usize, n: usize, rng: &mut impl Rng) -> f64 {
    match law {
        Law::Bernoulli(p) => f64::from(u8::from(rng.random::<f64>() < p)),
        Law::Uniform(lo, hi) => rng.random_range(lo..hi),
        Law::HalfSplit => f64::from(u8::from(i >= n / 2)),
    }
}

/// Draws `n` observations; deterministic given `seed`.
pub fn generate_scenario(spec: &ScenarioSpec, n: usize, seed: u64) -> Result<SimDataset> {
    if n < crate::folds::MIN_SAMPLE {
        return Err(Error::InsufficientSample(n));
    }
    if spec.x1 == Law::HalfSplit && !n.is_multiple_of(2) {
        return Err(Error::Config(format!("scenario {} needs an even sample size", spec.id)));
    }
    let mut rng = rng::stream(seed, "scenario", n as u64);
    let noise = Normal::new(0.0, spec.noise_sd).map_err(|e| Error::Config(e.to_string()))?;
    let mut obs = Vec::with_capacity(n);
    let mut potential = Vec::with_capacity(n);
    for i in 0..n {
        let x1 = draw(spec.x1, i, n, &mut rng);
        let x = match spec.x2 {
            Some(law) => vec![x1, draw(law, i, n, &mut rng)],
            None => vec![x1],
        };
        let a = u8::from(rng.random::<f64>() < spec.pi1_at(&x));
        let e = noise.sample(&mut rng);
        let y0 = spec.mu_at(0, &x) + e;
        let y1 = spec.mu_at(1, &x) + e;
        potential.push([y0, y1]);
        obs.push(Observation::new(x, a, if a == 1 { y1 } else { y0 }));
    }
    Ok(SimDataset { data: Dataset::new(obs)?, potential })
}

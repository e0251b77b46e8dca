//! Value estimators for the optimal treatment regime.
//!
//! The central object is the influence function `ψ` (augmented inverse
//! probability weighting) evaluated with a soft decision `d ∈ [0, 1]`. The
//! estimators differ in how that decision is built and on which index sets
//! the working models are trained.

mod crossfit;
mod repeated;
mod tuning;

use serde::{Deserialize, Serialize};

use crate::data::Observation;
use crate::error::{Error, Result};
use crate::normal::standard_normal_quantile;
use crate::nuisance::{OutcomeFit, PropensityFit};

pub use crossfit::{
    adaptive_smoothing_value, adaptive_smoothing_value_with_bandwidths, estimate_approx_error, plug_in_value,
    smoothing_value, CrossFits, HalfFits,
};
pub use repeated::{repeat_plan_seed, repeated_cross_fit, CROSS_FIT_LABEL};
pub use tuning::{select_bandwidth, TuningConfig, REAL_DATA_C, SIMULATION_C};

/// Default clamp on the adaptive `t₀`: `[c, 1 − c]` with `c = 0.05`.
pub const DEFAULT_CLAMP: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    AdaptiveSmoothing,
    Smoothing,
    PlugIn,
    Sss,
    Subbagging,
    Oracle,
    InsamplePlugin,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::AdaptiveSmoothing => "adaptive_smoothing",
            Method::Smoothing => "smoothing",
            Method::PlugIn => "plug_in",
            Method::Sss => "sss",
            Method::Subbagging => "subbagging",
            Method::Oracle => "oracle",
            Method::InsamplePlugin => "insample_plugin",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Point estimate `V̂` with its standard-deviation estimate `σ̂`.
///
/// The confidence interval is `V̂ ± z_{α/2} σ̂ / √n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub sigma: f64,
    pub n: usize,
    pub method: Method,
}

impl Estimate {
    /// Mean of `psi` and its sample standard deviation around `value`
    /// (denominator `len − 1`).
    pub(crate) fn from_psi(psi: &[f64], value: f64, method: Method) -> Self {
        let n = psi.len();
        let ss: f64 = psi.iter().map(|p| (p - value).powi(2)).sum();
        let sigma = if n > 1 { (ss / (n - 1) as f64).sqrt() } else { 0.0 };
        Self { value, sigma, n, method }
    }

    pub(crate) fn from_psi_mean(psi: &[f64], method: Method) -> Self {
        let value = psi.iter().sum::<f64>() / psi.len() as f64;
        Self::from_psi(psi, value, method)
    }

    pub fn ci(&self, alpha: f64) -> Result<(f64, f64)> {
        confidence_interval(self, alpha)
    }

    pub fn ci_length(&self, alpha: f64) -> Result<f64> {
        let (lo, hi) = self.ci(alpha)?;
        Ok(hi - lo)
    }
}

/// Two-sided level-`alpha` normal interval.
pub fn confidence_interval(est: &Estimate, alpha: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha {alpha} outside (0, 1)")));
    }
    let half = standard_normal_quantile(alpha / 2.0)? * est.sigma / (est.n as f64).sqrt();
    Ok((est.value - half, est.value + half))
}

/// Augmented IPW score of one observation for the soft decision `d`.
pub fn psi(obs: &Observation, d: f64, pf: &PropensityFit, of: &OutcomeFit) -> f64 {
    debug_assert!((0.0..=1.0).contains(&d), "decision value {d} outside [0, 1]");
    let mu1 = of.predict(1, &obs.x);
    let mu0 = of.predict(0, &obs.x);
    let weight = if obs.treated() { d } else { 1.0 - d };
    let (mu_a, pi_a) = if obs.treated() { (mu1, pf.prob(1, &obs.x)) } else { (mu0, pf.prob(0, &obs.x)) };
    weight / pi_a * (obs.y - mu_a) + d * mu1 + (1.0 - d) * mu0
}

/// Piecewise-linear relaxation of `𝟙{τ̂ > 0}` with bandwidth `h` and centre value `t0`.
pub fn smooth_decision(tau_hat: f64, h: f64, t0: f64) -> Result<f64> {
    if h <= 0.0 || !h.is_finite() {
        return Err(Error::Domain(format!("bandwidth {h} must be positive")));
    }
    if !(t0 > 0.0 && t0 < 1.0) {
        return Err(Error::Domain(format!("t0 {t0} outside (0, 1)")));
    }
    Ok(smooth_decision_unchecked(tau_hat, h, t0))
}

#[inline]
pub(crate) fn smooth_decision_unchecked(tau_hat: f64, h: f64, t0: f64) -> f64 {
    if tau_hat <= -t0 * h {
        0.0
    } else if tau_hat >= (1.0 - t0) * h {
        1.0
    } else {
        (tau_hat / h + t0).clamp(0.0, 1.0)
    }
}

/// How the centre value of the smoothing decision is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum T0Mode {
    Fixed(f64),
    /// `t₀(x) = π̂(1, x)` from the half that trained the contrast, clamped.
    Adaptive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingParams {
    /// Bandwidth per half: `h[j]` accompanies the contrast trained on half `j`.
    pub h: [f64; 2],
    pub t0: T0Mode,
    /// Adaptive `t₀` is clamped to `[clamp, 1 − clamp]`.
    pub clamp: f64,
}

impl SmoothingParams {
    pub fn fixed(h: [f64; 2], t0: f64) -> Self {
        Self { h, t0: T0Mode::Fixed(t0), clamp: DEFAULT_CLAMP }
    }

    pub fn adaptive(h: [f64; 2], clamp: f64) -> Self {
        Self { h, t0: T0Mode::Adaptive, clamp }
    }

    pub fn validate(&self) -> Result<()> {
        if self.h.iter().any(|h| *h <= 0.0 || !h.is_finite()) {
            return Err(Error::Domain(format!("bandwidths {:?} must be positive", self.h)));
        }
        if let T0Mode::Fixed(t0) = self.t0 {
            if !(t0 > 0.0 && t0 < 1.0) {
                return Err(Error::Domain(format!("t0 {t0} outside (0, 1)")));
            }
        }
        if !(self.clamp > 0.0 && self.clamp < 0.5) {
            return Err(Error::Domain(format!("clamp {} outside (0, 0.5)", self.clamp)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn psi_examples() {
        let pf = PropensityFit::known(|_| 0.5, (0.05, 0.95));
        let of = OutcomeFit::known(|_, _| 0.0);
        let obs = Observation::new(vec![0.0], 1, 2.0);
        assert_abs_diff_eq!(psi(&obs, 1.0, &pf, &of), 4.0);

        let pf = PropensityFit::known(|_| 0.8, (0.05, 0.95));
        let of = OutcomeFit::known(|a, _| if a == 1 { 3.0 } else { 1.0 });
        let obs = Observation::new(vec![0.0], 0, 1.0);
        assert_abs_diff_eq!(psi(&obs, 0.5, &pf, &of), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn decision_examples() {
        assert_eq!(smooth_decision(0.0, 0.7, 0.3).unwrap(), 0.3);
        assert_eq!(smooth_decision(0.7 * 2.0, 2.0, 0.3).unwrap(), 1.0);
        assert_eq!(smooth_decision(-0.3 * 2.0, 2.0, 0.3).unwrap(), 0.0);
        assert_abs_diff_eq!(smooth_decision(0.5, 2.0, 0.5).unwrap(), 0.75);
        assert!(smooth_decision(1.0, 0.0, 0.5).is_err());
        assert!(smooth_decision(1.0, -1.0, 0.5).is_err());
    }

    #[test]
    fn ci_examples() {
        let est = Estimate { value: 1.0, sigma: 0.0, n: 10, method: Method::Oracle };
        assert_eq!(est.ci(0.05).unwrap(), (1.0, 1.0));

        // analytic σ for scenario A: sqrt(0.3134)
        let est = Estimate { value: 0.46, sigma: 0.5598, n: 1000, method: Method::AdaptiveSmoothing };
        assert_abs_diff_eq!(est.ci_length(0.05).unwrap(), 0.069393, epsilon = 1e-5);

        let est = Estimate { value: 398.8, sigma: 90.0, n: 1046, method: Method::AdaptiveSmoothing };
        let z = standard_normal_quantile(0.025).unwrap();
        assert_abs_diff_eq!(est.ci_length(0.05).unwrap(), 2.0 * z * 90.0 / 1046f64.sqrt(), epsilon = 1e-12);
        assert!(est.ci_length(0.10).unwrap() < est.ci_length(0.05).unwrap());
        assert!(est.ci(0.0).is_err());
        assert!(est.ci(1.0).is_err());
    }

    proptest! {
        #[test]
        fn decision_shape(tau in -5.0f64..5.0, dt in 0.0f64..1.0, h in 1e-3f64..4.0, t0 in 0.01f64..0.99) {
            let d = smooth_decision(tau, h, t0).unwrap();
            prop_assert!((0.0..=1.0).contains(&d));
            prop_assert!(smooth_decision(tau + dt, h, t0).unwrap() >= d);
            prop_assert!((smooth_decision(0.0, h, t0).unwrap() - t0).abs() < 1e-15);
            // Lipschitz with constant 1/h, hence continuous
            let eps = 1e-9;
            prop_assert!((smooth_decision(tau + eps, h, t0).unwrap() - d).abs() <= eps / h + 1e-12);
        }
    }
}

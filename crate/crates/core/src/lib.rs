//! Adaptive smoothing confidence intervals for the value of an optimal
//! treatment regime.
//!
//! The estimator relaxes the hard regime `𝟙{τ̂(x) > 0}` into a piecewise
//! linear decision whose centre is the estimated propensity, evaluates an
//! augmented IPW score with cross-fitted working models, and chooses the
//! bandwidth from an estimate of the contrast's approximation error. The
//! resulting Wald interval is valid whether or not the treatments tie on a
//! subgroup of positive probability.
//!
//! ```no_run
//! use adaptive_otr::{estimator, folds, nuisance, sim};
//!
//! let spec = sim::ScenarioSpec::get(sim::ScenarioId::A);
//! let data = sim::generate_scenario(&spec, 1000, 7).unwrap().into_dataset();
//! let plan = folds::make_fold_plan(data.n(), 1).unwrap();
//! let est = estimator::adaptive_smoothing_value(
//!     &data,
//!     &plan,
//!     &estimator::TuningConfig::default(),
//!     &nuisance::NuisanceConfig::frequency(),
//!     estimator::DEFAULT_CLAMP,
//! )
//! .unwrap();
//! let (lo, hi) = est.ci(0.05).unwrap();
//! println!("{:.3} [{lo:.3}, {hi:.3}]", est.value);
//! ```

pub mod baselines;
pub mod cli;
pub mod data;
pub mod error;
pub mod estimator;
pub mod folds;
pub mod normal;
pub mod nuisance;
pub mod rng;
pub mod sim;

pub use data::{Dataset, Observation};
pub use error::{Error, Result};
pub use estimator::{Estimate, Method};
pub use folds::{make_fold_plan, FoldPlan};

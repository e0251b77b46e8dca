//! Simulation designs, analytic ground truth and the Monte Carlo harness.

mod montecarlo;
mod quadrature;
mod scenario;

pub use montecarlo::{
    run_monte_carlo, run_replications, toy_example_report, McConfig, McReport, MethodSpec, MethodSummary, Quantiles,
    Replications, REPORT_SCHEMA_VERSION,
};
pub use quadrature::integrate;
pub use scenario::{
    analytic_asymptotic_variance, analytic_variance_terms, generate_scenario, true_value, Law, ScenarioId,
    ScenarioSpec, SimDataset, VarianceTerms,
};

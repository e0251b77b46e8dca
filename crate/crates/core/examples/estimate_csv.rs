//! End-to-end analysis of a CSV file: load, validate, estimate with
//! repeated cross-fitting, and compare against the baselines.
//!
//! ```text
//! cargo run --release --example estimate_csv [path.csv]
//! ```
//! Without a path, a scenario-C sample is written to a temporary file first.

use adaptive_otr::baselines::{sss_value, subbagging_value, SubbaggingConfig};
use adaptive_otr::cli::{load_dataset, write_dataset, CsvSchema};
use adaptive_otr::data::validate_dataset;
use adaptive_otr::estimator::{repeat_plan_seed, repeated_cross_fit, Estimate, TuningConfig, DEFAULT_CLAMP, REAL_DATA_C};
use adaptive_otr::nuisance::NuisanceConfig;
use adaptive_otr::sim::{generate_scenario, ScenarioId, ScenarioSpec};

fn row(e: &Estimate) {
    let (lo, hi) = e.ci(0.05).unwrap();
    println!("{:<20} {:>9.4} [{:>8.4}, {:>8.4}] {:>8.4}", e.method.label(), e.value, lo, hi, hi - lo);
}

fn main() -> adaptive_otr::Result<()> {
    let schema = CsvSchema::new(vec!["group".into(), "age".into()], "treated", "outcome");
    let path = match std::env::args().nth(1) {
        Some(p) => p.into(),
        None => {
            let sim = generate_scenario(&ScenarioSpec::get(ScenarioId::C), 1000, 11)?;
            let path = std::env::temp_dir().join("adaptive_otr_example.csv");
            write_dataset(std::fs::File::create(&path)?, sim.dataset(), &schema)?;
            path
        }
    };

    let ds = load_dataset(&path, &schema)?;
    let report = validate_dataset(&ds);
    if !report.is_clean() {
        eprintln!("{report}");
        std::process::exit(1);
    }
    println!("{} rows from {}", ds.n(), path.display());

    let cfg = NuisanceConfig { propensity_interaction: false, ..NuisanceConfig::spline(true) };
    let tc = TuningConfig::new(REAL_DATA_C)?;
    let seed = 5;

    println!("{:<20} {:>9} {:>20} {:>8}", "method", "estimate", "95% CI", "length");
    row(&repeated_cross_fit(&ds, 10, seed, &tc, &cfg, DEFAULT_CLAMP)?);
    let plan_seed = repeat_plan_seed(seed, 0);
    row(&subbagging_value(&ds, &SubbaggingConfig::from_k0(4.0, 200)?, plan_seed, &cfg)?);
    row(&sss_value(&ds, plan_seed, &cfg)?);
    Ok(())
}

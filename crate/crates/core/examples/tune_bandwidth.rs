//! Bandwidth selection from the estimated approximation error, for both
//! tuning constants and a range of sample sizes.

use adaptive_otr::estimator::{select_bandwidth, CrossFits, TuningConfig, REAL_DATA_C, SIMULATION_C};
use adaptive_otr::folds::make_fold_plan;
use adaptive_otr::sim::{generate_scenario, ScenarioId, ScenarioSpec};

fn main() -> adaptive_otr::Result<()> {
    println!("{:>3} {:>6} {:>9} {:>9} {:>9} {:>9}", "", "n", "eae_1", "eae_2", "h(C=.01)", "h(C=.05)");
    for id in [ScenarioId::A, ScenarioId::D] {
        let spec = ScenarioSpec::get(id);
        for n in [250, 1000, 4000] {
            let ds = generate_scenario(&spec, n, 1)?.into_dataset();
            let plan = make_fold_plan(n, 2)?;
            let fits = CrossFits::fit(&ds, &plan, &spec.nuisance_config())?;
            let eae = [fits.approx_error(0), fits.approx_error(1)];
            let h = |c| select_bandwidth(eae[0].unwrap_or(0.0), n, &TuningConfig::new(c).unwrap());
            let show = |e: Option<f64>| e.map_or("-".into(), |v| format!("{v:.5}"));
            println!(
                "{:>3} {n:>6} {:>9} {:>9} {:>9.4} {:>9.4}",
                id.to_string(),
                show(eae[0]),
                show(eae[1]),
                h(REAL_DATA_C),
                h(SIMULATION_C)
            );
        }
    }
    Ok(())
}

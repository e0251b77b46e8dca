//! The estimator by hand: a nested fold plan, cross-fitted working models,
//! bandwidths, and the smoothing decision with fixed and adaptive centres.

use adaptive_otr::estimator::{plug_in_value, smooth_decision, CrossFits, SmoothingParams, TuningConfig, DEFAULT_CLAMP};
use adaptive_otr::folds::make_fold_plan;
use adaptive_otr::sim::{generate_scenario, ScenarioId, ScenarioSpec};

fn main() -> adaptive_otr::Result<()> {
    let spec = ScenarioSpec::get(ScenarioId::A);
    let ds = generate_scenario(&spec, 1000, 21)?.into_dataset();
    let plan = make_fold_plan(ds.n(), 22)?;
    println!("halves {} / {}, quarters {:?}", plan.half(0).len(), plan.half(1).len(),
        [0, 1].map(|j| [plan.quarter(j, 0).len(), plan.quarter(j, 1).len()]));

    let cfg = spec.nuisance_config();
    let fits = CrossFits::fit(&ds, &plan, &cfg)?;
    let h = fits.bandwidths(&TuningConfig::default());
    println!("EAE {:?}, h {:.4?}", [fits.approx_error(0), fits.approx_error(1)], h);
    for tau in [-0.2, -0.05, 0.0, 0.05, 0.2] {
        println!("  d(tau = {tau:+.2}) = {:.3}", smooth_decision(tau, h[0], 0.7)?);
    }

    for (label, est) in [
        ("plug-in", plug_in_value(&ds, &plan, &cfg)?),
        ("smoothing t0=0.5", fits.estimate(&SmoothingParams::fixed(h, 0.5))?),
        ("adaptive", fits.estimate(&SmoothingParams::adaptive(h, DEFAULT_CLAMP))?),
    ] {
        let (lo, hi) = est.ci(0.05)?;
        println!("{label:<18} {:.4} [{lo:.4}, {hi:.4}]", est.value);
    }
    println!("true value {}", spec.v0);
    Ok(())
}

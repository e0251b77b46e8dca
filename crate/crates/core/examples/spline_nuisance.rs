//! Spline working models on a continuous covariate: fitted contrast against
//! the truth, and the truncated logistic propensity.

use adaptive_otr::nuisance::{fit_outcome, fit_propensity, spline_basis};
use adaptive_otr::sim::{generate_scenario, ScenarioId, ScenarioSpec};

fn main() -> adaptive_otr::Result<()> {
    let b = spline_basis(0.25, &[-1.0, 0.0, 1.0])?;
    println!("basis at 0.25: {b:.4?} (sum {:.3})", b.iter().sum::<f64>());

    let spec = ScenarioSpec::get(ScenarioId::D);
    let ds = generate_scenario(&spec, 2000, 8)?.into_dataset();
    let all: Vec<usize> = (0..ds.n()).collect();
    let cfg = spec.nuisance_config();
    let of = fit_outcome(&ds, &all, &cfg)?;
    let pf = fit_propensity(&ds, &all, &cfg)?;
    println!("propensity model: {}", pf.kind());
    println!("{:>6} {:>8} {:>8} {:>8}", "x2", "tau", "tau_hat", "pi_hat");
    for k in 0..=8 {
        let x = [1.0, -2.0 + 0.5 * k as f64];
        println!("{:>6.2} {:>8.3} {:>8.3} {:>8.3}", x[1], spec.tau_at(&x), of.contrast(&x), pf.predict(&x));
    }
    let mse = ds.iter().map(|o| (of.contrast(&o.x) - spec.tau_at(&o.x)).powi(2)).sum::<f64>() / ds.n() as f64;
    println!("in-sample MSE of tau_hat: {mse:.4}");
    Ok(())
}

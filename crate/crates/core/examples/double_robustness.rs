//! The augmented score identifies the value of a regime when either the
//! propensity or the outcome model is right.

use adaptive_otr::estimator::psi;
use adaptive_otr::nuisance::{OutcomeFit, PropensityFit};
use adaptive_otr::sim::{generate_scenario, ScenarioId, ScenarioSpec};

fn main() -> adaptive_otr::Result<()> {
    let spec = ScenarioSpec::get(ScenarioId::D);
    let ds = generate_scenario(&spec, 200_000, 4)?.into_dataset();
    let open = (1e-9, 1.0 - 1e-9);
    let (s1, s2) = (spec.clone(), spec.clone());
    let pi = PropensityFit::known(move |x| s1.pi1_at(x), open);
    let mu = OutcomeFit::known(move |a, x| s2.mu_at(a, x));
    let bad_pi = PropensityFit::known(|_| 0.3, open);
    let bad_mu = OutcomeFit::known(|_, _| 0.0);

    // treat everyone: the target is E[μ(1, X)] = 4/3
    println!("target {:.4}", 4.0 / 3.0);
    for (label, pf, of) in [
        ("both right", &pi, &mu),
        ("wrong propensity", &bad_pi, &mu),
        ("wrong outcome", &pi, &bad_mu),
        ("both wrong", &bad_pi, &bad_mu),
    ] {
        let mean = ds.iter().map(|o| psi(o, 1.0, pf, of)).sum::<f64>() / ds.n() as f64;
        println!("{label:<18} {mean:.4}");
    }
    Ok(())
}

//! The adaptive centre `t₀ = π(1, x)` minimises the nonregular variance
//! term. Compares the analytic variance for fixed `t₀` against the adaptive
//! choice, then checks it by simulation.

use adaptive_otr::sim::{
    analytic_variance_terms, run_monte_carlo, McConfig, MethodSpec, ScenarioId, ScenarioSpec,
};

fn main() -> adaptive_otr::Result<()> {
    let spec = ScenarioSpec::get(ScenarioId::E);
    let adaptive = analytic_variance_terms(&spec, None);
    println!("scenario E, P(tie) = {:.2}", spec.prob_tie());
    println!("{:>8} {:>10} {:>10}", "t0", "nonreg", "total");
    for t0 in [0.2, 0.5, 0.8] {
        let t = analytic_variance_terms(&spec, Some(t0));
        println!("{t0:>8} {:>10.5} {:>10.5}", t.nonregular, t.total());
    }
    println!("{:>8} {:>10.5} {:>10.5}", "adaptive", adaptive.nonregular, adaptive.total());

    let methods = vec![MethodSpec::Smoothing(0.5), MethodSpec::Adaptive];
    for spec in [spec.clone(), spec.balanced()] {
        let r = run_monte_carlo(&spec, &McConfig::new(1000, 200, methods.clone(), 9))?;
        let sd = |i: usize| r.methods[i].empirical_sd.unwrap();
        println!("{:<12} empirical variance ratio {:.3}", spec.label(), (sd(0) / sd(1)).powi(2));
    }
    Ok(())
}

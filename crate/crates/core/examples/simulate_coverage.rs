//! Coverage and length of the intervals over the five simulation designs.
//!
//! ```text
//! cargo run --release --example simulate_coverage [reps] [n]
//! ```

use adaptive_otr::sim::{run_monte_carlo, McConfig, MethodSpec, ScenarioId, ScenarioSpec};

fn main() -> adaptive_otr::Result<()> {
    let mut args = std::env::args().skip(1);
    let reps: usize = args.next().map_or(100, |s| s.parse().expect("reps"));
    let n: usize = args.next().map_or(1000, |s| s.parse().expect("n"));
    let methods = vec![MethodSpec::Adaptive, MethodSpec::Subbagging, MethodSpec::Sss];

    println!("n = {n}, {reps} replications; ECP(%) / AL*100");
    println!("{:<10} {:>16} {:>16} {:>16}", "scenario", "adaptive", "subbagging", "sss");
    for id in ScenarioId::TABLE {
        let spec = ScenarioSpec::get(id);
        let report = run_monte_carlo(&spec, &McConfig::new(n, reps, methods.clone(), 1))?;
        let cells: Vec<String> = report
            .methods
            .iter()
            .map(|m| match (m.ecp, m.al) {
                (Some(e), Some(a)) => format!("{:5.1} / {:5.2}", 100.0 * e, 100.0 * a),
                _ => "n/a".to_string(),
            })
            .collect();
        let kind = if spec.regular { "" } else { "*" };
        println!("{:<10} {:>16} {:>16} {:>16}", format!("{id}{kind}"), cells[0], cells[1], cells[2]);
    }
    println!("* nonregular");
    Ok(())
}

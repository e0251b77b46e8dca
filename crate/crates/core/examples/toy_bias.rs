//! Winner's curse on the two-group example: evaluating the estimated regime
//! on the data that chose it is biased upward when one group has no effect.
//! Prints boxplot quantiles as CSV, ready for plotting.
//!
//! ```text
//! cargo run --release --example toy_bias [reps]
//! ```

use adaptive_otr::sim::toy_example_report;

fn main() -> adaptive_otr::Result<()> {
    let reps = std::env::args().nth(1).map_or(2000, |s| s.parse().expect("reps"));
    let report = toy_example_report(400, reps, 3)?;
    for m in &report.methods {
        eprintln!("{:<16} bias {:+.4}", m.method.to_string(), m.bias.unwrap_or(f64::NAN));
    }
    print!("{}", report.to_csv()?);
    Ok(())
}

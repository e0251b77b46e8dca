//! Data-driven bandwidth selection.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tuning constant used in simulation studies.
pub const SIMULATION_C: f64 = 0.05;
/// Tuning constant used for real-data runs.
pub const REAL_DATA_C: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TuningConfig {
    pub c: f64,
}

impl Default for TuningConfig {
    fn default() -> Self {
        Self { c: SIMULATION_C }
    }
}

impl TuningConfig {
    pub fn new(c: f64) -> Result<Self> {
        if c <= 0.0 || !c.is_finite() {
            return Err(Error::Config(format!("tuning constant C = {c} must be positive")));
        }
        Ok(Self { c })
    }

    /// Anti-undersmoothing floor on the approximation error, `log(n) / (C n)`.
    pub fn floor(&self, n: usize) -> f64 {
        let n = n as f64;
        n.ln() / (self.c * n)
    }
}

/// `h = C · log n · n^{1/4} · max(log n / (C n), eae)^{3/4}`.
pub fn select_bandwidth(eae: f64, n: usize, tc: &TuningConfig) -> f64 {
    let nf = n as f64;
    let err = tc.floor(n).max(eae);
    tc.c * nf.ln() * nf.powf(0.25) * err.powf(0.75)
}

//! Observational data: covariates, binary treatment and a real outcome.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One record `(x, a, y)`.
///
/// The treatment is stored as a raw byte so that malformed input can be
/// represented and reported by [`validate_dataset`] instead of being rejected
/// at construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub x: Vec<f64>,
    pub a: u8,
    pub y: f64,
}

impl Observation {
    pub fn new(x: Vec<f64>, a: u8, y: f64) -> Self {
        Self { x, a, y }
    }

    #[inline]
    pub fn treated(&self) -> bool {
        self.a == 1
    }
}

/// Immutable table of observations sharing one covariate dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    observations: Vec<Observation>,
    dim: usize,
}

impl Dataset {
    /// Builds a dataset; only structural consistency is enforced here.
    pub fn new(observations: Vec<Observation>) -> Result<Self> {
        let Some(first) = observations.first() else {
            return Err(Error::InvalidData("empty dataset".into()));
        };
        let dim = first.x.len();
        if dim == 0 {
            return Err(Error::InvalidData("covariate dimension must be at least 1".into()));
        }
        if let Some((row, obs)) = observations.iter().enumerate().find(|(_, o)| o.x.len() != dim) {
            return Err(Error::InvalidData(format!(
                "observation {row} has {} covariates, expected {dim}",
                obs.x.len()
            )));
        }
        Ok(Self { observations, dim })
    }

    /// Builds a dataset and fails if [`validate_dataset`] reports anything.
    pub fn validated(observations: Vec<Observation>) -> Result<Self> {
        let ds = Self::new(observations)?;
        let report = validate_dataset(&ds);
        if report.is_clean() {
            Ok(ds)
        } else {
            Err(Error::InvalidData(report.to_string()))
        }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.observations.len()
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize) -> &Observation {
        &self.observations[i]
    }

    pub fn observations(&self) -> &[Observation] {
        &self.observations
    }

    pub fn iter(&self) -> impl Iterator<Item = &Observation> {
        self.observations.iter()
    }

    /// Number of treated observations among `idx`.
    pub fn treated_count(&self, idx: &[usize]) -> usize {
        idx.iter().filter(|&&i| self.observations[i].treated()).count()
    }
}

/// A single problem found by [`validate_dataset`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Issue {
    NonBinaryTreatment { row: usize, value: u8 },
    NonFiniteCovariate { row: usize, column: usize },
    NonFiniteOutcome { row: usize },
    SingleTreatmentArm { arm: u8 },
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Issue::NonBinaryTreatment { row, value } => {
                write!(f, "non-binary treatment {value} at row {row}")
            }
            Issue::NonFiniteCovariate { row, column } => {
                write!(f, "non-finite covariate {column} at row {row}")
            }
            Issue::NonFiniteOutcome { row } => write!(f, "non-finite outcome at row {row}"),
            Issue::SingleTreatmentArm { arm } => {
                write!(f, "single treatment arm: every observation has a = {arm}")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn is_clean(&self) -> bool {
        self.issues.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, issue) in self.issues.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{issue}")?;
        }
        Ok(())
    }
}

/// Lists every violation of the data contract; never fails.
pub fn validate_dataset(ds: &Dataset) -> ValidationReport {
    let mut issues = Vec::new();
    let (mut treated, mut control) = (0usize, 0usize);
    for (row, obs) in ds.iter().enumerate() {
        match obs.a {
            0 => control += 1,
            1 => treated += 1,
            value => issues.push(Issue::NonBinaryTreatment { row, value }),
        }
        for (column, v) in obs.x.iter().enumerate() {
            if !v.is_finite() {
                issues.push(Issue::NonFiniteCovariate { row, column });
            }
        }
        if !obs.y.is_finite() {
            issues.push(Issue::NonFiniteOutcome { row });
        }
    }
    if treated == 0 && control > 0 {
        issues.push(Issue::SingleTreatmentArm { arm: 0 });
    } else if control == 0 && treated > 0 {
        issues.push(Issue::SingleTreatmentArm { arm: 1 });
    }
    ValidationReport { issues }
}

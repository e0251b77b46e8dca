//! CSV ingestion.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use csv::{ReaderBuilder, StringRecord};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Observation};
use crate::error::{Error, Result};

/// Column layout of an input file. Without a header, column names are
/// zero-based positions (`"0"`, `"1"`, ...).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub x_columns: Vec<String>,
    pub a_column: String,
    pub y_column: String,
    pub delimiter: u8,
    pub header: bool,
    /// `(control, treated)` labels accepted in addition to `0`/`1`.
    pub treatment_labels: Option<(String, String)>,
}

impl CsvSchema {
    pub fn new(x_columns: Vec<String>, a_column: impl Into<String>, y_column: impl Into<String>) -> Self {
        Self {
            x_columns,
            a_column: a_column.into(),
            y_column: y_column.into(),
            delimiter: b',',
            header: true,
            treatment_labels: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.x_columns.is_empty() {
            return Err(Error::Config("at least one covariate column is required".into()));
        }
        let mut names: Vec<&str> = self.x_columns.iter().map(String::as_str).collect();
        names.push(&self.a_column);
        names.push(&self.y_column);
        let mut sorted = names.clone();
        sorted.sort_unstable();
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Config(format!("column `{}` is used more than once", w[0])));
        }
        if let Some((c, t)) = &self.treatment_labels {
            if c == t {
                return Err(Error::Config("treatment labels must differ".into()));
            }
        }
        Ok(())
    }

    fn treatment(&self, raw: &str) -> Option<u8> {
        let raw = raw.trim();
        if let Some((c, t)) = &self.treatment_labels {
            if raw == c {
                return Some(0);
            }
            if raw == t {
                return Some(1);
            }
        }
        match raw.parse::<f64>() {
            Ok(0.0) => Some(0),
            Ok(1.0) => Some(1),
            _ => None,
        }
    }
}

pub fn load_dataset(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Csv(format!("cannot open {}: {e}", path.display())))?;
    read_dataset(file, schema)
}

/// Parses a dataset from any reader; rows are numbered from 1 after the header.
pub fn read_dataset(reader: impl Read, schema: &CsvSchema) -> Result<Dataset> {
    schema.validate()?;
    let mut rdr = ReaderBuilder::new().delimiter(schema.delimiter).has_headers(schema.header).from_reader(reader);
    let first_line = if schema.header { 2 } else { 1 };
    let header = if schema.header {
        Some(rdr.headers().map_err(|e| Error::Csv(format!("line 1: {e}")))?.clone())
    } else {
        None
    };
    let locate = |name: &str, width: usize| -> Result<usize> {
        match &header {
            Some(h) => h
                .iter()
                .position(|c| c.trim() == name)
                .ok_or_else(|| Error::Csv(format!("line 1: missing column `{name}`"))),
            None => name
                .parse::<usize>()
                .ok()
                .filter(|&i| i < width)
                .ok_or_else(|| Error::Csv(format!("line 1: column `{name}` is not a position below {width}"))),
        }
    };

    let mut columns: Option<(Vec<usize>, usize, usize)> = None;
    let mut observations = Vec::new();
    let mut record = StringRecord::new();
    let mut row = 0usize;
    loop {
        let more = rdr.read_record(&mut record).map_err(|e| {
            let line = e.position().map_or(first_line + row, |p| p.line() as usize);
            Error::Csv(format!("row {} (line {line}): {e}", row + 1))
        })?;
        if !more {
            break;
        }
        row += 1;
        let line = record.position().map_or(first_line + row - 1, |p| p.line() as usize);
        let at = |msg: String| Error::Csv(format!("row {row} (line {line}): {msg}"));
        if columns.is_none() {
            let width = header.as_ref().map_or(record.len(), StringRecord::len);
            let xs = schema.x_columns.iter().map(|c| locate(c, width)).collect::<Result<Vec<_>>>()?;
            columns = Some((xs, locate(&schema.a_column, width)?, locate(&schema.y_column, width)?));
        }
        let (xs, ac, yc) = columns.as_ref().expect("columns resolved");
        let field = |i: usize, name: &str| record.get(i).ok_or_else(|| at(format!("missing value for `{name}`")));
        let number = |i: usize, name: &str| -> Result<f64> {
            let raw = field(i, name)?;
            let v: f64 = raw.trim().parse().map_err(|_| at(format!("column `{name}`: cannot parse `{raw}` as a number")))?;
            if !v.is_finite() {
                return Err(at(format!("column `{name}`: non-finite value `{raw}`")));
            }
            Ok(v)
        };
        let x = xs.iter().zip(&schema.x_columns).map(|(&i, name)| number(i, name)).collect::<Result<Vec<_>>>()?;
        let raw_a = field(*ac, &schema.a_column)?;
        let a = schema
            .treatment(raw_a)
            .ok_or_else(|| at(format!("column `{}`: treatment value `{raw_a}` is not binary", schema.a_column)))?;
        let y = number(*yc, &schema.y_column)?;
        observations.push(Observation::new(x, a, y));
    }
    if observations.is_empty() {
        return Err(Error::Csv("empty dataset: no data rows".into()));
    }
    Dataset::new(observations)
}

/// Writes `ds` with the schema's column names (header always written).
/// Values use the shortest representation that parses back exactly.
pub fn write_dataset(writer: impl Write, ds: &Dataset, schema: &CsvSchema) -> Result<()> {
    schema.validate()?;
    if schema.x_columns.len() != ds.dim() {
        return Err(Error::Config(format!(
            "schema names {} covariates but the dataset has {}",
            schema.x_columns.len(),
            ds.dim()
        )));
    }
    let csv_err = |e: csv::Error| Error::Csv(e.to_string());
    let mut w = csv::WriterBuilder::new().delimiter(schema.delimiter).from_writer(writer);
    let mut header = schema.x_columns.clone();
    header.push(schema.a_column.clone());
    header.push(schema.y_column.clone());
    w.write_record(&header).map_err(csv_err)?;
    for o in ds.iter() {
        let mut row: Vec<String> = o.x.iter().map(f64::to_string).collect();
        row.push(o.a.to_string());
        row.push(o.y.to_string());
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

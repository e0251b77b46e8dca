//! Regression design built on a cubic spline of one continuous covariate.

use nalgebra::{DMatrix, DVector};

use super::basis::{augmented_knots, basis_dimension, eval_into};
use super::NuisanceConfig;
use crate::data::Dataset;
use crate::error::{Error, Result};

/// Boundary knots sit at these empirical quantiles of the spline covariate.
const BOUNDARY_QUANTILES: (f64, f64) = (0.01, 0.99);

#[derive(Debug, Clone)]
pub(crate) struct SplineDesign {
    covariate: usize,
    knots: Vec<f64>,
    breakpoints: Vec<f64>,
    interaction: bool,
    linear: Vec<usize>,
}

/// Boundary knots for the spline covariate over `idx`.
pub(crate) fn boundary_knots(ds: &Dataset, idx: &[usize], covariate: usize) -> Result<(f64, f64)> {
    let mut v: Vec<f64> = idx.iter().map(|&i| ds.get(i).x[covariate]).collect();
    v.sort_by(f64::total_cmp);
    let (mut lo, mut hi) = (quantile_sorted(&v, BOUNDARY_QUANTILES.0), quantile_sorted(&v, BOUNDARY_QUANTILES.1));
    if hi <= lo {
        lo = v[0];
        hi = v[v.len() - 1];
    }
    if hi <= lo {
        return Err(Error::OutcomeFit(format!("spline covariate {covariate} is constant on the training set")));
    }
    Ok((lo, hi))
}

fn quantile_sorted(v: &[f64], q: f64) -> f64 {
    let pos = q * (v.len() - 1) as f64;
    let i = pos.floor() as usize;
    let frac = pos - i as f64;
    if i + 1 < v.len() {
        v[i] + frac * (v[i + 1] - v[i])
    } else {
        v[i]
    }
}

impl SplineDesign {
    pub(crate) fn new(dim: usize, cfg: &NuisanceConfig, (lo, hi): (f64, f64), df: usize) -> Result<Self> {
        let covariate = cfg.spline_covariate_index(dim);
        let interaction = cfg.interaction_with_first_covariate && dim > 1 && covariate != 0;
        let linear = (0..dim).filter(|&c| c != covariate && !(interaction && c == 0)).collect();
        let segments = df.checked_sub(3).filter(|&s| s >= 1).ok_or_else(|| {
            Error::Config(format!("spline_df must be at least 4, got {df}"))
        })?;
        let breakpoints: Vec<f64> = (0..=segments)
            .map(|i| lo + (hi - lo) * i as f64 / segments as f64)
            .collect();
        let knots = augmented_knots(&breakpoints)?;
        Ok(Self { covariate, knots, breakpoints, interaction, linear })
    }

    pub(crate) fn basis_len(&self) -> usize {
        basis_dimension(self.breakpoints.len())
    }

    pub(crate) fn columns(&self) -> usize {
        self.basis_len() * (1 + usize::from(self.interaction)) + self.linear.len()
    }

    /// Column count this design would have with `df` basis functions.
    pub(crate) fn columns_for(dim: usize, cfg: &NuisanceConfig, df: usize) -> usize {
        let covariate = cfg.spline_covariate_index(dim);
        let interaction = cfg.interaction_with_first_covariate && dim > 1 && covariate != 0;
        let linear = (0..dim).filter(|&c| c != covariate && !(interaction && c == 0)).count();
        df * (1 + usize::from(interaction)) + linear
    }

    pub(crate) fn fill_row(&self, x: &[f64], row: &mut [f64]) {
        let nb = self.basis_len();
        eval_into(x[self.covariate], &self.knots, &mut row[..nb]);
        let mut next = nb;
        if self.interaction {
            let z = x[0];
            for c in 0..nb {
                row[nb + c] = z * row[c];
            }
            next += nb;
        }
        for (off, &c) in self.linear.iter().enumerate() {
            row[next + off] = x[c];
        }
    }

    pub(crate) fn matrix(&self, ds: &Dataset, idx: &[usize]) -> DMatrix<f64> {
        let p = self.columns();
        let mut data = vec![0.0; p];
        let mut m = DMatrix::zeros(idx.len(), p);
        for (r, &i) in idx.iter().enumerate() {
            self.fill_row(&ds.get(i).x, &mut data);
            for (c, v) in data.iter().enumerate() {
                m[(r, c)] = *v;
            }
        }
        m
    }

    pub(crate) fn linear_predictor(&self, x: &[f64], beta: &DVector<f64>) -> f64 {
        let mut row = vec![0.0; self.columns()];
        self.fill_row(x, &mut row);
        row.iter().zip(beta.iter()).map(|(a, b)| a * b).sum()
    }
}

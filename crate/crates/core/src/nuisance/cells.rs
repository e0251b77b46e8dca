//! Exact-match covariate cells for the nonparametric (frequency) family.

use std::collections::HashMap;

/// Bit pattern of the covariate vector; `-0.0` is folded onto `0.0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub(crate) struct CellKey(Vec<u64>);

impl CellKey {
    pub(crate) fn of(x: &[f64]) -> Self {
        CellKey(x.iter().map(|v| if *v == 0.0 { 0u64 } else { v.to_bits() }).collect())
    }
}

/// Per-cell running sums.
#[derive(Debug, Clone, Default)]
pub(crate) struct CellStats {
    cells: HashMap<CellKey, (f64, usize)>,
    total: (f64, usize),
}

impl CellStats {
    pub(crate) fn add(&mut self, x: &[f64], value: f64) {
        let e = self.cells.entry(CellKey::of(x)).or_insert((0.0, 0));
        e.0 += value;
        e.1 += 1;
        self.total.0 += value;
        self.total.1 += 1;
    }

    pub(crate) fn grand_mean(&self) -> f64 {
        self.total.0 / self.total.1 as f64
    }

    /// Cell mean, or the grand mean when the cell is empty.
    pub(crate) fn mean(&self, x: &[f64]) -> f64 {
        match self.cells.get(&CellKey::of(x)) {
            Some(&(s, c)) => s / c as f64,
            None => self.grand_mean(),
        }
    }
}

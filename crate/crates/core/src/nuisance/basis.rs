//! Cubic B-spline basis via the Cox–de Boor recursion.

use crate::error::{Error, Result};

const DEGREE: usize = 3;

/// Augmented knot vector: each boundary breakpoint repeated `DEGREE + 1` times.
pub(crate) fn augmented_knots(breakpoints: &[f64]) -> Result<Vec<f64>> {
    if breakpoints.iter().any(|b| !b.is_finite()) || breakpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Spline("knots must be finite and strictly increasing".into()));
    }
    let total = breakpoints.len() + 2 * DEGREE;
    if total < 2 * (DEGREE + 1) {
        return Err(Error::Spline(format!(
            "fewer than 8 knots (got {total} including boundary repetition)"
        )));
    }
    let first = breakpoints[0];
    let last = breakpoints[breakpoints.len() - 1];
    let mut knots = Vec::with_capacity(total);
    knots.extend(std::iter::repeat_n(first, DEGREE));
    knots.extend_from_slice(breakpoints);
    knots.extend(std::iter::repeat_n(last, DEGREE));
    Ok(knots)
}

/// Number of cubic basis functions for `breakpoints` (boundary + interior).
pub fn basis_dimension(breakpoints: usize) -> usize {
    breakpoints + DEGREE - 1
}

/// Cubic B-spline basis values at `u` for the given breakpoints.
///
/// `breakpoints` holds the two boundary knots and any interior knots, strictly
/// increasing. The boundary knots are repeated internally, so the returned
/// vector has `breakpoints.len() + 2` entries and sums to one. `u` outside the
/// span is clamped to the nearest edge.
pub fn spline_basis(u: f64, breakpoints: &[f64]) -> Result<Vec<f64>> {
    let knots = augmented_knots(breakpoints)?;
    let mut out = vec![0.0; knots.len() - DEGREE - 1];
    eval_into(u, &knots, &mut out);
    Ok(out)
}

/// Evaluates into `out` (length `knots.len() - 4`) for a prevalidated knot vector.
pub(crate) fn eval_into(u: f64, knots: &[f64], out: &mut [f64]) {
    let nb = knots.len() - DEGREE - 1;
    debug_assert_eq!(out.len(), nb);
    let lo = knots[DEGREE];
    let hi = knots[nb];
    let u = if u.is_nan() { lo } else { u.clamp(lo, hi) };

    // span s with knots[s] <= u < knots[s+1]; the right edge belongs to the last span
    let span = if u >= hi {
        nb - 1
    } else {
        let mut s = DEGREE;
        while s + 1 < nb && knots[s + 1] <= u {
            s += 1;
        }
        s
    };

    // Local Cox–de Boor: only basis functions span-3..=span are nonzero.
    let mut local = [0.0f64; DEGREE + 1];
    local[0] = 1.0;
    let mut left = [0.0f64; DEGREE + 1];
    let mut right = [0.0f64; DEGREE + 1];
    for d in 1..=DEGREE {
        left[d] = u - knots[span + 1 - d];
        right[d] = knots[span + d] - u;
        let mut saved = 0.0;
        for r in 0..d {
            let denom = right[r + 1] + left[d - r];
            let temp = if denom == 0.0 { 0.0 } else { local[r] / denom };
            local[r] = saved + right[r + 1] * temp;
            saved = left[d - r] * temp;
        }
        local[d] = saved;
    }
    out.iter_mut().for_each(|v| *v = 0.0);
    for (r, v) in local.iter().enumerate() {
        out[span - DEGREE + r] = *v;
    }
}

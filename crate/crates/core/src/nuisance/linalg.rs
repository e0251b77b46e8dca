use nalgebra::{DMatrix, DVector};

const RELATIVE_RANK_TOL: f64 = 1e-10;

/// Ridge penalty on every coefficient. It is negligible for well-supported
/// columns and keeps coefficients of nearly empty basis functions (e.g. an
/// interaction with a rare level) bounded: amplification ≤ 1 / (2√λ).
pub(crate) const RIDGE: f64 = 1e-2;

/// Penalized least-squares solution of `x β ≈ y` (optionally weighted),
/// minimising `‖W^{1/2}(y − xβ)‖² + λ‖β‖²`.
///
/// Solved by SVD of the augmented system; singular values below
/// `1e-10 · σ_max` are treated as zero.
pub(crate) fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>, weights: Option<&DVector<f64>>) -> Option<DVector<f64>> {
    let (n, p) = x.shape();
    let mut xa = DMatrix::zeros(n + p, p);
    let mut ya = DVector::zeros(n + p);
    for r in 0..n {
        let s = weights.map_or(1.0, |w| w[r].sqrt());
        for c in 0..p {
            xa[(r, c)] = s * x[(r, c)];
        }
        ya[r] = s * y[r];
    }
    let root = RIDGE.sqrt();
    for c in 0..p {
        xa[(n + c, c)] = root;
    }
    let svd = xa.svd(true, true);
    let smax = svd.singular_values.max();
    if !smax.is_finite() || smax == 0.0 {
        return None;
    }
    let beta = svd.solve(&ya, smax * RELATIVE_RANK_TOL).ok()?;
    beta.iter().all(|b| b.is_finite()).then_some(beta)
}

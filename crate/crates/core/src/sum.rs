//! Pairwise (cascade) summation and the rounding bounds that go with it.

const BLOCK: usize = 8;

/// Unit roundoff of IEEE binary64.
pub const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

/// Sums `xs` by recursive halving with small sequential leaf blocks.
///
/// The order of operations depends only on `xs.len()`, so results are
/// reproducible bit for bit.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= BLOCK {
        return xs.iter().fold(0.0, |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Pairwise sum of `f(x)` over `xs`, buffering the mapped terms.
pub fn pairwise_sum_map<T>(xs: &[T], f: impl Fn(&T) -> f64) -> f64 {
    let terms: Vec<f64> = xs.iter().map(f).collect();
    pairwise_sum(&terms)
}

/// Higham's `γ_k = k·u / (1 − k·u)`.
pub fn gamma(k: usize) -> f64 {
    let ku = k as f64 * UNIT_ROUNDOFF;
    ku / (1.0 - ku)
}

/// Bound on the rounding error of [`pairwise_sum`] over `len` terms, relative
/// to the sum of the absolute values of the terms.
pub fn pairwise_error_factor(len: usize) -> f64 {
    let depth = (usize::BITS - len.max(1).leading_zeros()) as usize;
    gamma(depth + BLOCK)
}

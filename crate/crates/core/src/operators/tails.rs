//! Certified bounds for lattice tails `Σ_{|j|_∞ ≥ N} |j|^{−n−ε}` and the
//! enclosures built from them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::lattice::{reduce, CertifiedValue, GridFunction, LatticePoint};
use crate::sum::{pairwise_error_factor, pairwise_sum, UNIT_ROUNDOFF};

/// `(n, ε, N)` for the tail `Σ_{|j|_∞ ≥ N} |j|^{−n−ε}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailBoundParams {
    pub n: usize,
    pub eps: f64,
    pub cutoff: u64,
}

impl TailBoundParams {
    pub fn new(n: usize, eps: f64, cutoff: u64) -> Result<Self> {
        if n == 0 {
            return Err(domain("dimension must be at least 1"));
        }
        if !(eps > 0.0 && eps.is_finite()) {
            return Err(domain(format!("ε = {eps} must be positive; no tail certificate exists")));
        }
        if cutoff == 0 {
            return Err(domain("tail cutoff N must be at least 1"));
        }
        Ok(TailBoundParams { n, eps, cutoff })
    }
}

/// `2^n n^{n+ε} (2 + 2^{ε/n} n/ε)^n N^{−ε}`.
pub fn lemma_bound(params: &TailBoundParams) -> f64 {
    let n = params.n as f64;
    let e = params.eps;
    2f64.powf(n) * n.powf(n + e) * (2.0 + 2f64.powf(e / n) * n / e).powf(n) * (params.cutoff as f64).powf(-e)
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Shell-counting bound: the shell `|j|_∞ = k` has `(2k+1)^n − (2k−1)^n`
/// points, each with `|j| ≥ k`. The resulting `f(k)` is a positive
/// combination of decreasing powers, so `Σ_{k≥N} f(k) ≤ f(N) + ∫_N^∞ f`.
pub fn shell_bound(params: &TailBoundParams) -> f64 {
    let n = params.n;
    let e = params.eps;
    let big_n = params.cutoff as f64;
    let mut first = 0.0;
    let mut integral = 0.0;
    for m in (0..n).filter(|m| (n - m) % 2 == 1) {
        let coef = 2.0 * binomial(n, m) * 2f64.powi(m as i32);
        let expo = m as f64 - n as f64 - e;
        first += coef * big_n.powf(expo);
        integral += coef * big_n.powf(expo + 1.0) / (-(expo + 1.0));
    }
    (first + integral) * (1.0 + 16.0 * UNIT_ROUNDOFF)
}

/// Exact `Σ_{lo ≤ |j|_∞ < hi} |j|^{−n−ε}` by orthant enumeration, with a
/// rigorous bound on its rounding error.
pub fn partial_power_sum(n: usize, eps: f64, lo: u64, hi: u64) -> CertifiedValue {
    if hi <= lo {
        return CertifiedValue::exact(0.0);
    }
    let expo = -(n as f64 + eps) / 2.0;
    let hi_i = hi as i64;
    let lo_i = lo as i64;
    // One partial sum per value of the first coordinate.
    let rows: Vec<(f64, usize)> = (0..hi_i)
        .into_par_iter()
        .map(|first| {
            let mut terms = Vec::new();
            let mut rest = vec![0i64; n - 1];
            loop {
                let max = rest.iter().copied().chain(std::iter::once(first)).max().unwrap_or(0);
                if max >= lo_i {
                    let r2: i64 = first * first + rest.iter().map(|c| c * c).sum::<i64>();
                    let nonzero = (first != 0) as i32 + rest.iter().filter(|c| **c != 0).count() as i32;
                    terms.push(2f64.powi(nonzero) * (r2 as f64).powf(expo));
                }
                // Odometer over [0, hi)^{n−1}.
                let mut k = 0;
                while k < rest.len() {
                    rest[k] += 1;
                    if rest[k] < hi_i {
                        break;
                    }
                    rest[k] = 0;
                    k += 1;
                }
                if k == rest.len() {
                    break;
                }
            }
            (pairwise_sum(&terms), terms.len())
        })
        .collect();
    let sums: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let count: usize = rows.iter().map(|r| r.1).sum();
    let total = pairwise_sum(&sums);
    let slack = (pairwise_error_factor(count) + 4.0 * UNIT_ROUNDOFF) * total;
    CertifiedValue::new(total, slack)
}

/// Default enumeration depth beyond the cutoff for the sharp bound.
pub fn default_refine(n: usize) -> u64 {
    match n {
        1 => 1 << 14,
        2 => 256,
        3 => 32,
        _ => 6,
    }
}

/// Partial sum over `N ≤ |j|_∞ < N'` plus the shell bound from `N'`.
pub fn sharp_bound(params: &TailBoundParams, refine_to: u64) -> f64 {
    let refine_to = refine_to.max(params.cutoff);
    let part = partial_power_sum(params.n, params.eps, params.cutoff, refine_to);
    let rest = shell_bound(&TailBoundParams {
        cutoff: refine_to,
        ..*params
    });
    part.hi() + rest
}

/// Rigorous upper bound for `Σ_{|j|_∞ ≥ N} |j|^{−n−ε}`: the smaller of the
/// closed-form lemma bound and the sharp shell bound.
pub fn tail_upper_bound(params: &TailBoundParams) -> f64 {
    let refine = params.cutoff + default_refine(params.n);
    lemma_bound(params).min(sharp_bound(params, refine))
}

/// Enclosure of the full series `Σ_{|j|_∞ ≥ N} |j|^{−n−ε}`: exact partial sum
/// up to `|j|_∞ < refine_to` plus the shell bound for the rest.
pub fn certified_series(params: &TailBoundParams, refine_to: u64) -> CertifiedValue {
    let refine_to = refine_to.max(params.cutoff);
    let part = partial_power_sum(params.n, params.eps, params.cutoff, refine_to);
    let rest = shell_bound(&TailBoundParams {
        cutoff: refine_to,
        ..*params
    });
    // The omitted terms are positive: the enclosure is [part, part + rest],
    // recentred so that it stays symmetric.
    let lo = part.lo();
    let hi = part.hi() + rest;
    CertifiedValue::new((lo + hi) / 2.0, (hi - lo) / 2.0)
}

/// `|f(j)| ≤ constant · |j − c|^{−n−ε}` wherever `|j − c|_∞` exceeds the
/// cube inscribed in the evaluation window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domination {
    pub constant: f64,
    pub eps: f64,
}

/// Enclosure of `Σ_{j ∈ Z^n} f(j)` from the values of `f` on a window and a
/// domination hypothesis outside it.
///
/// With `R` the radius of the largest cube around `center` inside the
/// window, every omitted point has `|j − c|_∞ ≥ R + 1`, so the tail is at
/// most `constant · tail_upper_bound(n, ε, R + 1)`. Summation rounding is
/// added to the bound.
pub fn certified_sum(values: &GridFunction, center: &LatticePoint, dom: Domination) -> Result<CertifiedValue> {
    if !(dom.eps > 0.0) {
        return Err(domain(format!("domination exponent ε = {} admits no tail certificate", dom.eps)));
    }
    if !(dom.constant >= 0.0 && dom.constant.is_finite()) {
        return Err(domain(format!("domination constant {} must be finite and ≥ 0", dom.constant)));
    }
    let radius = values
        .window()
        .inscribed_radius(center.coords())
        .ok_or_else(|| Error::Window("center lies outside the evaluation window".into()))?;
    let windowed = reduce(values.values(), |v| v);
    let abs = reduce(values.values(), f64::abs);
    let rounding = pairwise_error_factor(values.values().len()) * abs;
    let tail = if dom.constant == 0.0 {
        0.0
    } else {
        dom.constant * tail_upper_bound(&TailBoundParams::new(values.dim(), dom.eps, radius + 1)?)
    };
    Ok(CertifiedValue::new(windowed, tail + rounding))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Window;
    use std::f64::consts::PI;

    #[test]
    fn lemma_bound_arithmetic() {
        let b = lemma_bound(&TailBoundParams::new(1, 1.0, 1).unwrap());
        assert!((b - 8.0).abs() < 1e-12);
        let b = lemma_bound(&TailBoundParams::new(2, 2.0, 2).unwrap());
        assert!((b - 256.0).abs() < 1e-10);
        // N^{−ε}: doubling N halves the bound at ε = 1.
        for n in 1..=3 {
            let a = lemma_bound(&TailBoundParams::new(n, 1.0, 3).unwrap());
            let b = lemma_bound(&TailBoundParams::new(n, 1.0, 6).unwrap());
            assert!((a / b - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn one_dimensional_series_is_two_zeta_two() {
        let p = TailBoundParams::new(1, 1.0, 1).unwrap();
        let enc = certified_series(&p, 1_000_000);
        assert!(enc.contains(PI * PI / 3.0), "{enc:?}");
        assert!(enc.width() < 1e-5);
        assert!(enc.hi() <= lemma_bound(&p));
        assert!(tail_upper_bound(&p) >= PI * PI / 3.0);
    }

    #[test]
    fn shell_bound_dominates_enumeration() {
        for n in 1..=3 {
            for eps in [0.5, 1.0, 3.0] {
                let p = TailBoundParams::new(n, eps, 3).unwrap();
                let s = shell_bound(&p);
                let part = partial_power_sum(n, eps, 3, 40);
                assert!(part.hi() <= s, "n={n} eps={eps}");
            }
        }
    }

    #[test]
    fn partial_sum_matches_naive() {
        let n = 2;
        let eps = 0.75;
        let mut naive = 0.0;
        for a in -9i64..=9 {
            for b in -9i64..=9 {
                let m = a.abs().max(b.abs());
                if (2..10).contains(&m) {
                    naive += ((a * a + b * b) as f64).powf(-(2.0 + eps) / 2.0);
                }
            }
        }
        let part = partial_power_sum(n, eps, 2, 10);
        assert!((part.windowed - naive).abs() < 1e-13 * naive);
    }

    #[test]
    fn wider_windows_never_loosen_the_bound() {
        for n in 1..=3 {
            let mut prev = f64::INFINITY;
            for cutoff in [1, 2, 4, 8, 16] {
                let b = tail_upper_bound(&TailBoundParams::new(n, 1.5, cutoff).unwrap());
                assert!(b <= prev);
                prev = b;
            }
        }
    }

    #[test]
    fn rejects_nonpositive_eps() {
        assert!(TailBoundParams::new(2, 0.0, 1).is_err());
        let g = GridFunction::zeros(Window::centered(&LatticePoint::origin(1), 2));
        let dom = Domination { constant: 1.0, eps: -0.5 };
        assert!(certified_sum(&g, &LatticePoint::origin(1), dom).is_err());
    }

    #[test]
    fn certified_sum_of_power_function_contains_truth() {
        // f(j) = |j|^{-3} in n = 1 over the window |j| ≤ 20, j ≠ 0.
        let w = Window::centered(&LatticePoint::origin(1), 20);
        let g = GridFunction::from_fn(w, |j| if j[0] == 0 { 0.0 } else { (j[0].abs() as f64).powi(-3) }).unwrap();
        let dom = Domination { constant: 1.0, eps: 2.0 };
        let enc = certified_sum(&g, &LatticePoint::origin(1), dom).unwrap();
        let zeta3 = 1.202_056_903_159_594_3;
        assert!(enc.contains(2.0 * zeta3));

        let z = GridFunction::zeros(Window::centered(&LatticePoint::origin(1), 20));
        let enc = certified_sum(&z, &LatticePoint::origin(1), dom).unwrap();
        assert_eq!(enc.windowed, 0.0);
        assert!(enc.tail_hi > 0.0);
        let wide = GridFunction::zeros(Window::centered(&LatticePoint::origin(1), 40));
        let enc2 = certified_sum(&wide, &LatticePoint::origin(1), dom).unwrap();
        assert!(enc2.tail_hi <= enc.tail_hi);
    }
}

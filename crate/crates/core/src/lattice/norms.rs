use rayon::prelude::*;

use super::grid::GridFunction;
use super::point::LatticePoint;
use crate::error::{domain, Error, Result};
use crate::sum::pairwise_sum;

const PAR_THRESHOLD: usize = 1 << 15;
const CHUNK: usize = 1 << 12;

fn check_exponent(p: f64) -> Result<()> {
    if p.is_nan() || p <= 0.0 {
        return Err(domain(format!("exponent p = {p} must lie in (0, ∞]")));
    }
    Ok(())
}

/// Deterministic pairwise sum of `f(v)` over a value slice. Large inputs are
/// split into fixed chunks so the parallel result matches the serial one.
pub(crate) fn reduce(values: &[f64], f: impl Fn(f64) -> f64 + Sync) -> f64 {
    if values.len() < PAR_THRESHOLD {
        let terms: Vec<f64> = values.iter().map(|v| f(*v)).collect();
        return pairwise_sum(&terms);
    }
    let partials: Vec<f64> = values
        .par_chunks(CHUNK)
        .map(|c| {
            let terms: Vec<f64> = c.iter().map(|v| f(*v)).collect();
            pairwise_sum(&terms)
        })
        .collect();
    pairwise_sum(&partials)
}

/// `Σ |v|^p` for finite `p`, `max |v|` for `p = ∞`.
pub fn lp_power_sum(values: &[f64], p: f64) -> Result<f64> {
    check_exponent(p)?;
    if p.is_infinite() {
        return Ok(values.iter().fold(0.0, |m, v| m.max(v.abs())));
    }
    Ok(if p == 1.0 {
        reduce(values, f64::abs)
    } else if p == 2.0 {
        reduce(values, |v| v * v)
    } else {
        reduce(values, |v| v.abs().powf(p))
    })
}

/// Turns a `p`-power sum back into a norm; identity for `p = ∞`.
pub fn root(power_sum: f64, p: f64) -> f64 {
    if p.is_infinite() || p == 1.0 {
        power_sum
    } else if p == 2.0 {
        power_sum.sqrt()
    } else {
        power_sum.powf(1.0 / p)
    }
}

/// The `ℓ^p` quasi-norm of raw values.
pub fn lp_norm_values(values: &[f64], p: f64) -> Result<f64> {
    Ok(root(lp_power_sum(values, p)?, p))
}

/// `‖b‖_{ℓ^p}` for `0 < p ≤ ∞`.
pub fn lp_norm(b: &GridFunction, p: f64) -> Result<f64> {
    lp_norm_values(b.values(), p)
}

/// Values of `|j − m₀|^s · b(j)` over the window of `b`, with the center
/// convention `0^s = 0` for `s > 0` and `0^0 = 1`.
pub fn weighted_values(b: &GridFunction, center: &LatticePoint, s: f64) -> Result<Vec<f64>> {
    if center.dim() != b.dim() {
        return Err(Error::Window("center dimension differs from grid".into()));
    }
    if s.is_nan() {
        return Err(domain("weight power is NaN"));
    }
    let win = b.window();
    let m0 = center.coords();
    let mut buf = vec![0; b.dim()];
    let mut out = Vec::with_capacity(b.values().len());
    for (i, v) in b.values().iter().enumerate() {
        win.point_into(i, &mut buf);
        let d2: i64 = buf.iter().zip(m0).map(|(a, c)| (a - c) * (a - c)).sum();
        let w = if d2 == 0 {
            if s > 0.0 {
                0.0
            } else if s == 0.0 {
                1.0
            } else if *v != 0.0 {
                return Err(Error::SingularWeight { power: s });
            } else {
                0.0
            }
        } else {
            (d2 as f64).powf(s / 2.0)
        };
        out.push(w * v);
    }
    Ok(out)
}

/// `‖ |· − m₀|^s b ‖_{ℓ^{p₀}}`.
pub fn weighted_lp_norm(b: &GridFunction, p0: f64, center: &LatticePoint, s: f64) -> Result<f64> {
    lp_norm_values(&weighted_values(b, center, s)?, p0)
}

//! Pointwise kernels on `Z^n`: discrete Poisson, discrete Riesz, the
//! fractional kernel of the Riesz potential, and the dilated profile `Φ_t^d`.
//!
//! Every kernel vanishes at the origin.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::lattice::norm_sq;

/// `Γ(k/2)` for a positive integer `k`, by the half-integer recursion.
pub fn gamma_half(k: u32) -> f64 {
    assert!(k > 0);
    let (mut g, mut x) = if k % 2 == 0 { (1.0, 1.0) } else { (PI.sqrt(), 0.5) };
    let target = k as f64 / 2.0;
    while x < target {
        g *= x;
        x += 1.0;
    }
    g
}

/// `Γ((n+1)/2) / π^{(n+1)/2}`, the normalization of the continuous Poisson
/// kernel on `R^n`.
pub fn poisson_constant(n: usize) -> f64 {
    let k = n as u32 + 1;
    gamma_half(k) / PI.powf(k as f64 / 2.0)
}

/// Profile `Φ` used by [`phi_dilated`]; each has `∫Φ = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhiProfile {
    /// `Φ(x) = e^{−π|x|²}`.
    #[default]
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub n: usize,
    pub c_n: f64,
    pub phi: PhiProfile,
}

impl KernelConfig {
    pub fn new(n: usize) -> Self {
        KernelConfig {
            n,
            c_n: poisson_constant(n),
            phi: PhiProfile::Gaussian,
        }
    }

    pub fn with_constant(n: usize, c_n: f64) -> Result<Self> {
        if !(c_n > 0.0 && c_n.is_finite()) {
            return Err(domain(format!("Poisson constant C_n = {c_n} must be positive")));
        }
        Ok(KernelConfig {
            n,
            c_n,
            phi: PhiProfile::Gaussian,
        })
    }

    /// `t/(t² + ρ²)^{(n+1)/2}`-style evaluation from `ρ² = |j|²`, without the
    /// `C_n` factor and without the origin convention.
    #[inline]
    pub fn poisson_profile(&self, t: f64, rho_sq: f64) -> f64 {
        let x = t * t + rho_sq;
        // (n+1)/2 is an integer for odd n and a half-integer for even n.
        let m = self.n + 1;
        let denom = if m % 2 == 0 {
            x.powi((m / 2) as i32)
        } else {
            x.powi((m / 2) as i32) * x.sqrt()
        };
        t / denom
    }
}

/// `P_t^d(j) = C_n t / (t² + |j|²)^{(n+1)/2}`, `P_t^d(0) = 0`.
pub fn poisson_kernel(t: f64, j: &[i64], cfg: &KernelConfig) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(domain(format!("dilation t = {t} must be positive")));
    }
    let r2 = norm_sq(j);
    if r2 == 0 {
        return Ok(0.0);
    }
    Ok(cfg.c_n * cfg.poisson_profile(t, r2 as f64))
}

/// Closed-form `sup_t P_t^d(j) = C_n n^{−1/2} (1 + 1/n)^{−(n+1)/2} |j|^{−n}`,
/// attained at `t = |j|/√n`.
pub fn poisson_sup_closed_form(j: &[i64], cfg: &KernelConfig) -> f64 {
    let r2 = norm_sq(j);
    if r2 == 0 {
        return 0.0;
    }
    let n = cfg.n as f64;
    cfg.c_n * n.powf(-0.5) * (1.0 + 1.0 / n).powf(-(n + 1.0) / 2.0) * (r2 as f64).powf(-n / 2.0)
}

#[inline]
pub(crate) fn riesz_kernel_unchecked(s: usize, j: &[i64]) -> f64 {
    let r2 = norm_sq(j);
    if r2 == 0 {
        return 0.0;
    }
    let n = j.len();
    let r2f = r2 as f64;
    // |j|^{n+1}
    let denom = if (n + 1) % 2 == 0 {
        r2f.powi(((n + 1) / 2) as i32)
    } else {
        r2f.powi((n / 2) as i32) * r2f.sqrt()
    };
    j[s - 1] as f64 / denom
}

/// `K_s^d(j) = j_s / |j|^{n+1}`, `K_s^d(0) = 0`, for axis `1 ≤ s ≤ n`.
pub fn riesz_kernel(s: usize, j: &[i64]) -> Result<f64> {
    if s == 0 || s > j.len() {
        return Err(domain(format!("Riesz axis s = {s} must lie in 1..={}", j.len())));
    }
    Ok(riesz_kernel_unchecked(s, j))
}

pub(crate) fn check_alpha(alpha: f64, n: usize) -> Result<()> {
    if !(alpha > 0.0 && alpha < n as f64) {
        return Err(domain(format!("α = {alpha} must lie in (0, {n})")));
    }
    Ok(())
}

#[inline]
pub(crate) fn fractional_kernel_unchecked(alpha: f64, j: &[i64]) -> f64 {
    let r2 = norm_sq(j);
    if r2 == 0 {
        return 0.0;
    }
    (r2 as f64).powf((alpha - j.len() as f64) / 2.0)
}

/// `|j|^{α−n}` off the origin, 0 at the origin.
pub fn fractional_kernel(alpha: f64, j: &[i64]) -> Result<f64> {
    check_alpha(alpha, j.len())?;
    Ok(fractional_kernel_unchecked(alpha, j))
}

/// `Φ_t^d(j) = t^{−n} Φ(j/t)` off the origin, 0 at the origin.
pub fn phi_dilated(t: f64, j: &[i64], cfg: &KernelConfig) -> Result<f64> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(domain(format!("dilation t = {t} must be positive")));
    }
    let r2 = norm_sq(j);
    if r2 == 0 {
        return Ok(0.0);
    }
    let x2 = r2 as f64 / (t * t);
    let phi = match cfg.phi {
        PhiProfile::Gaussian => (-PI * x2).exp(),
    };
    Ok(t.powi(-(cfg.n as i32)) * phi)
}

/// Radial frequency cutoff equal to 1 on `|ξ| ≤ 1`, 0 for `|ξ| > 2`, with a
/// cubic smoothstep between.
pub fn smoothstep_cutoff(xi_norm: f64) -> f64 {
    if xi_norm <= 1.0 {
        1.0
    } else if xi_norm >= 2.0 {
        0.0
    } else {
        let s = xi_norm - 1.0;
        1.0 - s * s * (3.0 - 2.0 * s)
    }
}

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde_json::json;

use super::config::{FourierConfig, Tolerances};
use super::report::{CheckRecord, Relation, VerificationReport};
use super::stream_seed;
use crate::atoms::{generate_atom, validate_atom, Atom, AtomParams};
use crate::error::Result;
use crate::lattice::{norm, DiscreteCube, GridFunction, LatticePoint};

/// `e^{iθ} − Σ_{k ≤ L} (iθ)^k/k!`, by its power series for small `|θ|`.
pub fn taylor_remainder(theta: f64, order: u32) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    if theta.abs() <= 2.0 {
        let mut term = Complex64::new(1.0, 0.0);
        for k in 1..=order + 1 {
            term *= i * theta / k as f64;
        }
        let mut sum = Complex64::new(0.0, 0.0);
        let mut k = order + 1;
        loop {
            sum += term;
            k += 1;
            term *= i * theta / k as f64;
            if term.norm() <= 1e-18 * sum.norm() || k > order + 80 {
                return sum;
            }
        }
    }
    let mut poly = Complex64::new(0.0, 0.0);
    let mut term = Complex64::new(1.0, 0.0);
    for k in 0..=order {
        poly += term;
        term *= i * theta / (k + 1) as f64;
    }
    Complex64::from_polar(1.0, theta) - poly
}

/// `â(x) = Σ a(j) e^{2πi j·x}` written as `Σ a(j)(e^{2πi j·x} − Taylor_L)`,
/// which equals `â(x)` exactly when the moments up to `L` vanish and avoids
/// cancellation near `x = 0`.
pub fn fourier_remainder_form(a: &GridFunction, order: u32, x: &[f64]) -> Complex64 {
    a.support()
        .iter()
        .map(|(j, v)| {
            let phase: f64 = j.iter().zip(x).map(|(a, b)| *a as f64 * b).sum();
            *v * taylor_remainder(2.0 * PI * phase, order)
        })
        .sum()
}

/// Plain `Σ a(j) e^{2πi j·x}`.
pub fn fourier_direct(a: &GridFunction, x: &[f64]) -> Complex64 {
    a.support()
        .iter()
        .map(|(j, v)| {
            let phase: f64 = j.iter().zip(x).map(|(a, b)| *a as f64 * b).sum();
            *v * Complex64::from_polar(1.0, 2.0 * PI * phase)
        })
        .sum()
}

/// `(2π)^{L+1}|x|^{L+1} Σ |a(j)| |j|^{L+1} e^{2π√n|j|}`.
pub fn fourier_bound(a: &GridFunction, order: u32, x: &[f64]) -> f64 {
    let n = a.dim() as f64;
    let xn = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    let weight: f64 = a
        .support()
        .iter()
        .map(|(j, v)| {
            let r = norm(j);
            v.abs() * r.powi(order as i32 + 1) * (2.0 * PI * n.sqrt() * r).exp()
        })
        .sum();
    (2.0 * PI * xn).powi(order as i32 + 1) * weight
}

fn sample_points(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let rootn = (n as f64).sqrt();
    let mut pts = vec![vec![0.0; n]];
    let diag: Vec<f64> = vec![1.0 / rootn; n];
    let mut axis = vec![0.0; n];
    axis[0] = 1.0;
    for t in [1e-4, 1e-2, 0.1, 0.5, 1.0, rootn] {
        pts.push(axis.iter().map(|u| u * t).collect());
        pts.push(diag.iter().map(|u| u * t).collect());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let target = count.max(pts.len() + 1);
    while pts.len() < target {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-rootn..rootn)).collect();
        if x.iter().map(|v| v * v).sum::<f64>() <= n as f64 {
            pts.push(x);
        }
    }
    pts
}

fn check_one(label: &str, atom: &Atom, pts: &[Vec<f64>], tol: &Tolerances) -> Vec<CheckRecord> {
    let a = atom.centered_at_origin();
    let order = a.params.moment_order;
    let mut worst: f64 = 0.0;
    let mut direct_gap: f64 = 0.0;
    let mut at_zero = f64::NAN;
    for x in pts {
        let rem = fourier_remainder_form(&a.data, order, x);
        let rhs = fourier_bound(&a.data, order, x);
        if x.iter().all(|v| *v == 0.0) {
            at_zero = rem.norm();
            continue;
        }
        worst = worst.max(rem.norm() / rhs);
        direct_gap = direct_gap.max((fourier_direct(&a.data, x) - rem).norm());
    }
    let base = |name: &str| {
        CheckRecord::new(name)
            .param("atom", label)
            .param("L", order)
            .param("side", a.cube.side())
            .param("seed", a.seed)
    };
    vec![
        base("fourier-bound")
            .value("direct_vs_remainder", direct_gap)
            .compare(worst, Relation::LessEq, 1.0 + tol.oracle),
        base("fourier-at-zero").compare(at_zero, Relation::LessEq, 0.0),
        base("fourier-atom-valid").compare(
            validate_atom(atom).violations.len() as f64,
            Relation::LessEq,
            0.0,
        ),
    ]
}

/// `|â(x)| ≤ (2π)^{L+1}|x|^{L+1}Σ|a(j)||j|^{L+1}e^{2π√n|j|}` on a sample of
/// `|x| ≤ √n`, for generated atoms moved to the origin and the two-point atom.
pub fn check_atom_fourier(cfg: &FourierConfig, tol: &Tolerances, seed: u64) -> Result<VerificationReport> {
    let pts = sample_points(cfg.n, cfg.samples, stream_seed(seed, 4));
    let mut jobs: Vec<(String, Atom)> = Vec::new();
    let mut k = 0u64;
    for &order in &cfg.orders {
        let params = AtomParams::new(cfg.p, cfg.p0, order)?;
        for &hw in &cfg.cube_sizes {
            let cube = DiscreteCube::centered(LatticePoint::origin(cfg.n), hw);
            for _ in 0..cfg.atoms_per_size {
                k += 1;
                jobs.push(("generated".into(), generate_atom(&cube, params, stream_seed(seed, 400 + k))?));
            }
        }
    }
    if cfg.n == 2 {
        let cube = DiscreteCube::from_corner(LatticePoint::origin(2), 2)?;
        let data = GridFunction::from_points(&[
            (LatticePoint::new(vec![0, 0]), 0.25),
            (LatticePoint::new(vec![1, 1]), -0.25),
        ])?;
        jobs.push(("two-point".into(), Atom::new(data, cube, AtomParams::new(1.0, 2.0, 0)?)));
    }
    let checks: Vec<CheckRecord> = jobs
        .par_iter()
        .flat_map_iter(|(label, atom)| check_one(label, atom, &pts, tol))
        .collect();
    Ok(VerificationReport::new(
        "fourier",
        seed,
        json!({"fourier": cfg, "tolerances": tol, "sample": pts}),
        checks,
    ))
}

#![allow(dead_code)]

use hplattice::atoms::{generate_atom, AtomParams};
use hplattice::hardy::{hardy_norm_maximal, hardy_norm_riesz, MaximalGrid};
use hplattice::kernels::fractional_kernel;
use hplattice::operators::{convolve_direct, convolve_fast, riesz_potential, riesz_transform, LatticeOperator};
use hplattice::{Backend, DiscreteCube, GridFunction, LatticePoint, Window};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `max |x − y| / max |y|`, the relative max-norm error of `x` against `y`.
pub fn rel_max_err(x: &GridFunction, y: &GridFunction) -> f64 {
    assert_eq!(x.window(), y.window());
    let scale = y.max_abs();
    let diff = x.values().iter().zip(y.values()).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    if scale == 0.0 {
        diff
    } else {
        diff / scale
    }
}

/// Random input, operator and output window for backend comparisons.
pub struct BackendCase {
    pub b: GridFunction,
    pub op: LatticeOperator,
    pub out: Window,
}

pub fn backend_case(seed: u64) -> BackendCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=3usize);
    let side_max = [12, 6, 3][n - 1];
    let offset: Vec<i64> = (0..n).map(|_| rng.random_range(-5..=5)).collect();
    let extent: Vec<usize> = (0..n).map(|_| rng.random_range(1..=side_max)).collect();
    let window = Window::new(LatticePoint::new(offset), extent).unwrap();
    let values = (0..window.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let b = GridFunction::from_values(window, values).unwrap();
    let op = if rng.random_bool(0.5) {
        LatticeOperator::Riesz {
            axis: rng.random_range(1..=n),
        }
    } else {
        LatticeOperator::Potential {
            alpha: rng.random_range(0.05..n as f64 - 0.05),
        }
    };
    let radius = [40u64, 14, 6][n - 1];
    let center = LatticePoint::new((0..n).map(|_| rng.random_range(-4..=4)).collect());
    BackendCase {
        b,
        op,
        out: Window::centered(&center, rng.random_range(1..=radius)),
    }
}

/// Relative max-norm gap between the FFT and direct backends on one case.
pub fn backend_gap(case: &BackendCase) -> f64 {
    let kernel = case.op.kernel();
    let direct = convolve_direct(&case.b, |j: &[i64]| kernel(j), &case.out).unwrap();
    let table = GridFunction::from_fn(Window::difference(&case.out, case.b.window()), |j| kernel(j)).unwrap();
    let fast = convolve_fast(&case.b, &table, &case.out).unwrap();
    rel_max_err(&fast, &direct)
}

/// Worst relative gap between `I_α δ`, `R_s δ` and their kernels on the
/// `129^n` window, over both backends.
pub fn delta_exactness(n: usize) -> f64 {
    let out = Window::centered(&LatticePoint::origin(n), 64);
    let delta = GridFunction::delta(&LatticePoint::origin(n));
    let mut worst: f64 = 0.0;
    for backend in [Backend::Direct, Backend::Fast] {
        for alpha in [0.25, 0.5, n as f64 / 2.0] {
            let got = riesz_potential(&delta, alpha, &out, backend).unwrap();
            let want = GridFunction::from_fn(out.clone(), |j| fractional_kernel(alpha, j).unwrap()).unwrap();
            worst = worst.max(rel_max_err(&got, &want));
        }
        for s in 1..=n {
            let got = riesz_transform(&delta, s, &out, backend).unwrap();
            let want = GridFunction::from_fn(out.clone(), |j| hplattice::kernels::riesz_kernel(s, j).unwrap()).unwrap();
            worst = worst.max(rel_max_err(&got, &want));
        }
    }
    worst
}

/// A `(1, ∞, 0)`-atom on the origin-centered cube of half-width `hw`.
pub fn h1_atom(n: usize, hw: u64, seed: u64) -> GridFunction {
    let cube = DiscreteCube::centered(LatticePoint::origin(n), hw);
    generate_atom(&cube, AtomParams::new(1.0, f64::INFINITY, 0).unwrap(), seed).unwrap().data
}

/// Riesz over maximal windowed `H^1` totals for 20 seeded atoms in 2D.
pub fn riesz_maximal_ratios() -> Vec<f64> {
    (0..20u64)
        .map(|k| {
            let hw = 1 + k % 3;
            let b = h1_atom(2, hw, 1000 + k);
            let out = Window::centered(&LatticePoint::origin(2), 16 * hw);
            let grid = MaximalGrid::for_window(&out);
            let m = hardy_norm_maximal(&b, 1.0, &grid, &out).unwrap().total.windowed;
            let r = hardy_norm_riesz(&b, 1.0, &out, Backend::Fast).unwrap().total.windowed;
            r / m
        })
        .collect()
}

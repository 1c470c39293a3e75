//! `I_α` maps atoms to molecules: molecule norms of `I_α a` with certified
//! windows, and enclosures of `Σ_j (I_α a)(j)`.

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{AtomToMoleculeConfig, Tolerances};
use super::report::{CheckRecord, Relation, VerificationReport};
use super::{spread, stream_seed};
use crate::atoms::{generate_atom, moment_sum_exact, multi_indices, Atom, AtomParams};
use crate::error::{domain, Error, Result};
use crate::kernels::fractional_kernel;
use crate::lattice::{lp_norm, norm, norm_inf, CertifiedValue, DiscreteCube, ExponentConfig, GridFunction, LatticePoint, Window};
use crate::operators::{convolve_direct_with_bound, tail_upper_bound, TailBoundParams};
use crate::sum::{pairwise_error_factor, pairwise_sum, UNIT_ROUNDOFF};

/// Upper bound on `Σ_{m > L} (λ)_m/m! ρ^m` for `0 ≤ ρ < 1`, the tail of the
/// binomial series of `(1 − ρ)^{−λ}`.
pub fn binomial_series_tail(lambda: f64, order: u32, rho: f64) -> f64 {
    assert!((0.0..1.0).contains(&rho), "ρ = {rho} outside [0, 1)");
    if rho == 0.0 {
        return 0.0;
    }
    // c_m = (λ)_m / m!, built incrementally.
    let mut c = 1.0;
    for m in 0..=order {
        c *= (lambda + m as f64) / (m + 1) as f64;
    }
    let mut m = order + 1;
    let mut term = c * rho.powi(m as i32);
    let mut sum = 0.0;
    let last = order + 200;
    while m < last {
        sum += term;
        term *= (lambda + m as f64) / (m + 1) as f64 * rho;
        m += 1;
        if term < 1e-20 * sum {
            break;
        }
    }
    // Remaining terms shrink at least geometrically from here on.
    let ratio = rho * ((lambda + m as f64) / (m + 1) as f64).max(1.0);
    let rest = if ratio < 1.0 { term / (1.0 - ratio) } else { f64::INFINITY };
    (sum + rest) * (1.0 + 1e-12)
}

/// Pointwise domination `|(I_α a)(x)| ≤ constant · |x − c|^{−decay}` for
/// `|x − c| ≥ from_radius`, valid when `a` has vanishing moments of order
/// `≤ L` and support within distance `R_a < from_radius` of `c`.
///
/// Expanding `|x − k|^{−λ}`, `λ = n − α`, in Gegenbauer polynomials of `k`
/// around `c`, the terms of degree `≤ L` are polynomials in `k` and are
/// annihilated by the moments. Since `|C_m^{λ/2}| ≤ (λ)_m/m!` on `[−1, 1]`,
/// the rest is at most `‖a‖₁ |x|^{−λ} Σ_{m>L} (λ)_m/m! (R_a/|x|)^m`, and that
/// series over `ρ^{L+1}` increases with `ρ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FarField {
    pub constant: f64,
    pub decay: f64,
    pub from_radius: f64,
}

pub fn potential_far_field(
    a: &GridFunction,
    center: &LatticePoint,
    alpha: f64,
    order: u32,
    from_radius: f64,
    l1_norm: f64,
) -> Result<FarField> {
    let n = a.dim();
    let lambda = n as f64 - alpha;
    let decay = lambda + order as f64 + 1.0;
    let reach = a
        .support()
        .iter()
        .map(|(j, _)| {
            let d: Vec<i64> = j.iter().zip(center.coords()).map(|(x, c)| x - c).collect();
            norm(&d)
        })
        .fold(0.0, f64::max);
    if l1_norm == 0.0 {
        return Ok(FarField {
            constant: 0.0,
            decay,
            from_radius,
        });
    }
    if reach == 0.0 {
        return Err(domain("a single point mass has no vanishing moments"));
    }
    if !(reach < from_radius) {
        return Err(domain(format!(
            "far-field bound needs the support radius {reach} below {from_radius}"
        )));
    }
    let rho = reach / from_radius;
    let tail = binomial_series_tail(lambda, order, rho);
    let constant = l1_norm * tail * reach.powi(order as i32 + 1) / rho.powi(order as i32 + 1);
    Ok(FarField {
        constant: constant * (1.0 + 1e-12),
        decay,
        from_radius,
    })
}

/// Certified pieces of `N(I_α a)` for one atom.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialMolecule {
    pub center: LatticePoint,
    pub half_width: u64,
    /// `|j − m₀|_∞ ≤ 4⌊√n⌋N`.
    pub q_star_radius: u64,
    pub window_radius: u64,
    pub far_field: FarField,
    /// `‖I_α a‖_{ℓ^{q₀}}`.
    pub size: CertifiedValue,
    /// `(Σ_{Q*} |I_α a · |· − m₀|^{nr}|^{q₀})^{1/q₀}`.
    pub u1: CertifiedValue,
    /// The same over the complement of `Q*`.
    pub u2: CertifiedValue,
    /// `‖|· − m₀|^{nr} I_α a‖_{ℓ^{q₀}}`.
    pub decay: CertifiedValue,
    pub molecule_norm: CertifiedValue,
    pub theta: f64,
    /// `Σ_j (I_α a)(j)`.
    pub moment: CertifiedValue,
}

/// `ℓ^1` distance between the float data and the exact atom they stand for.
fn representation_error(atom: &Atom) -> Result<f64> {
    let l1 = lp_norm(&atom.data, 1.0)?;
    if atom.exact.is_some() {
        // data = fl(scale · fl(shape/max)): two roundings per entry.
        return Ok(3.0 * UNIT_ROUNDOFF * l1);
    }
    let ok = multi_indices(atom.data.dim(), atom.params.moment_order)
        .iter()
        .all(|beta| num_traits::Zero::is_zero(&moment_sum_exact(&atom.data, beta)));
    if ok {
        Ok(0.0)
    } else {
        Err(Error::Infeasible(
            "certified potential moments need an atom whose moments vanish exactly".into(),
        ))
    }
}

/// Evaluates `I_α a` by direct summation on a window twice the size of `Q*`
/// and encloses `‖I_α a‖_{q₀}`, `U₁`, `U₂`, `N(I_α a)` and `Σ (I_α a)(j)`,
/// using the far-field bound outside the window.
pub fn potential_molecule(atom: &Atom, exps: &ExponentConfig) -> Result<PotentialMolecule> {
    let n = atom.data.dim();
    let alpha = exps.alpha;
    let q0 = exps.q0;
    let order = atom.params.moment_order;
    let center = atom.cube.center();
    let half_width = (atom.cube.side() / 2).max(1);
    let q_star_radius = 4 * ((n as f64).sqrt().floor() as u64) * half_width;
    let window_radius = 2 * q_star_radius;
    let window = Window::centered(&center, window_radius);

    let e_l1 = representation_error(atom)?;
    let l1 = lp_norm(&atom.data, 1.0)? + e_l1;
    let far = potential_far_field(&atom.data, &center, alpha, order, (window_radius + 1) as f64, l1)?;

    fractional_kernel(alpha, &vec![1; n])?;
    let (values, abs) = convolve_direct_with_bound(
        &atom.data,
        |j: &[i64]| crate::kernels::fractional_kernel_unchecked(alpha, j),
        &window,
    )?;
    let terms = atom.data.support().len();
    let gamma = pairwise_error_factor(terms);
    let delta: Vec<f64> = abs.values().iter().map(|s| gamma * s + e_l1).collect();

    // Σ_j (I_α a)(j).
    let windowed = pairwise_sum(values.values());
    let abs_total: f64 = values.values().iter().map(|v| v.abs()).sum();
    let delta_total: f64 = delta.iter().sum();
    let moment_eps = order as f64 + 1.0 - alpha;
    let moment_tail = if far.constant == 0.0 {
        0.0
    } else {
        far.constant * tail_upper_bound(&TailBoundParams::new(n, moment_eps, window_radius + 1)?)
    };
    let moment = CertifiedValue::new(
        windowed,
        moment_tail + delta_total * (1.0 + 1e-12) + pairwise_error_factor(values.values().len()) * abs_total,
    );

    let s = n as f64 * exps.r;
    let mut size_lo = Vec::new();
    let mut size_hi = Vec::new();
    let mut u1 = (Vec::new(), Vec::new());
    let mut u2 = (Vec::new(), Vec::new());
    let mut buf = vec![0i64; n];
    for (idx, (v, d)) in values.values().iter().zip(&delta).enumerate() {
        window.point_into(idx, &mut buf);
        let x: Vec<i64> = buf.iter().zip(center.coords()).map(|(a, c)| a - c).collect();
        let lo = (v.abs() - d).max(0.0).powf(q0);
        let hi = (v.abs() + d).powf(q0);
        size_lo.push(lo);
        size_hi.push(hi);
        let w = norm(&x).powf(s * q0);
        let target = if norm_inf(&x) as u64 <= q_star_radius { &mut u1 } else { &mut u2 };
        target.0.push(lo * w);
        target.1.push(hi * w);
    }
    let down = 1.0 - 1e-12;
    let up = 1.0 + 1e-12;
    let kq = far.constant.powf(q0);
    let tail = |eps: f64| -> Result<f64> {
        if kq == 0.0 {
            return Ok(0.0);
        }
        if !(eps > 0.0) {
            return Err(domain(format!("{eps} ≤ 0: the far field is not q₀-summable")));
        }
        Ok(kq * tail_upper_bound(&TailBoundParams::new(n, eps, window_radius + 1)?))
    };
    let eps_size = far.decay * q0 - n as f64;
    let eps_decay = (far.decay - s) * q0 - n as f64;
    let size_tail = tail(eps_size)?;
    let decay_tail = tail(eps_decay)?;
    let root = |x: f64| x.powf(1.0 / q0);

    let size_lo_sum = pairwise_sum(&size_lo) * down;
    let size_hi_sum = pairwise_sum(&size_hi) * up + size_tail;
    let u1_lo = pairwise_sum(&u1.0) * down;
    let u1_hi = pairwise_sum(&u1.1) * up;
    let u2_lo = pairwise_sum(&u2.0) * down;
    let u2_hi = pairwise_sum(&u2.1) * up + decay_tail;

    let size = CertifiedValue::from_interval(root(size_lo_sum) * down, root(size_hi_sum) * up);
    let decay = CertifiedValue::from_interval(root(u1_lo + u2_lo) * down, root(u1_hi + u2_hi) * up);
    let theta = (1.0 / exps.q - 1.0 / q0) / exps.r;
    let mol = |a: f64, b: f64| {
        if a == 0.0 || b == 0.0 {
            0.0
        } else {
            a.powf(1.0 - theta) * b.powf(theta)
        }
    };
    let molecule_norm =
        CertifiedValue::from_interval(mol(size.lo(), decay.lo()) * down, mol(size.hi(), decay.hi()) * up);

    Ok(PotentialMolecule {
        center,
        half_width,
        q_star_radius,
        window_radius,
        far_field: far,
        size,
        u1: CertifiedValue::from_interval(root(u1_lo) * down, root(u1_hi) * up),
        u2: CertifiedValue::from_interval(root(u2_lo) * down, root(u2_hi) * up),
        decay,
        molecule_norm,
        theta,
        moment,
    })
}

fn record(label: &str, atom: &Atom, pm: &PotentialMolecule, exps: &ExponentConfig) -> Vec<CheckRecord> {
    let n = atom.data.dim() as f64;
    let p0_norm = lp_norm(&atom.data, exps.p0).unwrap_or(f64::NAN);
    let scale = p0_norm * (pm.half_width as f64).powf(n * (1.0 / exps.p - 1.0 / exps.p0));
    let base = |name: &str| {
        CheckRecord::new(name)
            .param("atom", label)
            .param("N", pm.half_width)
            .param("seed", atom.seed)
            .param("window_radius", pm.window_radius)
    };
    vec![
        base("potential-moment-contains-zero")
            .enclosure("moment", pm.moment)
            .value("far_field_constant", pm.far_field.constant)
            .compare(pm.moment.windowed.abs(), Relation::LessEq, pm.moment.tail_hi),
        base("potential-molecule-norm")
            .enclosure("molecule_norm", pm.molecule_norm)
            .enclosure("size", pm.size)
            .enclosure("decay", pm.decay)
            .enclosure("u1", pm.u1)
            .enclosure("u2", pm.u2)
            .value("theta", pm.theta)
            .value("atom_scale", scale)
            .compare(pm.molecule_norm.hi(), Relation::Less, f64::MAX),
    ]
}

/// The dipole `a(0,0) = 1/4, a(1,1) = −1/4`, an atom with moments of order 0.
pub fn dipole_atom(p: f64) -> Result<Atom> {
    let data = GridFunction::from_points(&[
        (LatticePoint::new(vec![0, 0]), 0.25),
        (LatticePoint::new(vec![1, 1]), -0.25),
    ])?;
    Ok(Atom::new(
        data,
        DiscreteCube::from_corner(LatticePoint::origin(2), 2)?,
        AtomParams::new(p, f64::INFINITY, 0)?,
    ))
}

/// For atoms on cubes of each configured half-width: every moment enclosure
/// of `I_α a` contains 0, and the per-size sup of `N(I_α a)` spreads by less
/// than the tolerance.
pub fn check_atom_to_molecule(cfg: &AtomToMoleculeConfig, tol: &Tolerances, seed: u64) -> Result<VerificationReport> {
    let exps = cfg.exponents.resolve()?;
    let params = AtomParams::new(exps.p, f64::INFINITY, exps.moment_order)?;
    let mut checks = Vec::new();
    let mut per_size = Vec::new();
    let mut k = 0u64;
    for &hw in &cfg.cube_sizes {
        let cube = DiscreteCube::centered(LatticePoint::origin(exps.n), hw);
        let mut sup: f64 = 0.0;
        for _ in 0..cfg.atoms_per_size {
            k += 1;
            let atom = generate_atom(&cube, params, stream_seed(seed, 500 + k))?;
            let pm = potential_molecule(&atom, &exps)?;
            sup = sup.max(pm.molecule_norm.windowed);
            checks.extend(record("generated", &atom, &pm, &exps));
        }
        per_size.push((hw, sup));
        checks.push(
            CheckRecord::new("potential-molecule-norm-size-sup")
                .param("N", hw)
                .compare(sup, Relation::Less, f64::MAX),
        );
    }
    if exps.n == 2 {
        let dipole = dipole_atom(exps.p)?;
        let pm = potential_molecule(&dipole, &exps)?;
        checks.push(record("dipole", &dipole, &pm, &exps).remove(0));
    }
    let sups: Vec<f64> = per_size.iter().map(|s| s.1).collect();
    let sp = spread(&sups);
    checks.push(
        CheckRecord::new("potential-molecule-norm-spread")
            .param("sizes", &cfg.cube_sizes)
            .compare(sp, Relation::Less, tol.spread),
    );
    let c0 = sups.iter().copied().fold(0.0, f64::max);
    Ok(VerificationReport::new(
        "atom-to-molecule",
        seed,
        json!({"atom_to_molecule": cfg, "resolved": exps, "tolerances": tol}),
        checks,
    )
    .with_summary("empirical_C0", c0)
    .with_summary("spread", sp))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{riesz_potential, Backend};

    #[test]
    fn binomial_tail_matches_closed_form() {
        for (lambda, order, rho) in [(1.5, 3, 0.2), (0.5, 0, 0.5), (2.0, 1, 0.05)] {
            let full = (1.0f64 - rho).powf(-lambda);
            let mut head = 0.0;
            let mut c = 1.0;
            for m in 0..=order {
                head += c * rho.powi(m as i32);
                c *= (lambda + m as f64) / (m + 1) as f64;
            }
            let tail = binomial_series_tail(lambda, order, rho);
            assert!(tail >= full - head);
            assert!((tail - (full - head)).abs() < 1e-9 * tail, "{tail} vs {}", full - head);
        }
    }

    #[test]
    fn far_field_bound_holds_pointwise() {
        let cube = DiscreteCube::centered(LatticePoint::origin(2), 2);
        let atom = generate_atom(&cube, AtomParams::new(0.8, f64::INFINITY, 3).unwrap(), 4).unwrap();
        let out = Window::centered(&LatticePoint::origin(2), 40);
        let v = riesz_potential(&atom.data, 0.5, &out, Backend::Direct).unwrap();
        let l1 = lp_norm(&atom.data, 1.0).unwrap();
        let far = potential_far_field(&atom.data, &LatticePoint::origin(2), 0.5, 3, 10.0, l1).unwrap();
        let mut checked = 0;
        for (i, j) in out.points().enumerate() {
            let r = j.norm();
            if r >= 10.0 {
                // Float moments are not exactly zero; allow the rounding floor.
                let floor = 1e-15 * l1;
                assert!(v.values()[i].abs() <= far.constant * r.powf(-far.decay) + floor);
                checked += 1;
            }
        }
        assert!(checked > 1000);
    }

    #[test]
    fn dipole_moment_enclosure_contains_zero() {
        let exps = ExponentConfig::for_potential(2, 0.8, 4.0, 0.875, 0.5).unwrap();
        let pm = potential_molecule(&dipole_atom(0.8).unwrap(), &exps).unwrap();
        assert!(pm.moment.contains(0.0), "{:?}", pm.moment);
        assert!(pm.molecule_norm.hi().is_finite());
    }

    #[test]
    fn generated_moment_enclosure_contains_zero_and_shrinks() {
        let exps = ExponentConfig::for_potential(2, 0.8, 4.0, 0.875, 0.5).unwrap();
        let cube = DiscreteCube::centered(LatticePoint::origin(2), 2);
        let atom = generate_atom(&cube, AtomParams::new(0.8, f64::INFINITY, 3).unwrap(), 8).unwrap();
        let pm = potential_molecule(&atom, &exps).unwrap();
        assert!(pm.moment.contains(0.0));
        assert!(pm.molecule_norm.width() < 0.05 * pm.molecule_norm.windowed);
        assert!(pm.u1.windowed > 0.0 && pm.u2.windowed > 0.0);
    }

    #[test]
    fn zero_atom_has_zero_norm() {
        let exps = ExponentConfig::for_potential(2, 0.8, 4.0, 0.875, 0.5).unwrap();
        let cube = DiscreteCube::centered(LatticePoint::origin(2), 1);
        let atom = Atom::new(
            GridFunction::zeros(cube.window()),
            cube,
            AtomParams::new(0.8, f64::INFINITY, 3).unwrap(),
        );
        let pm = potential_molecule(&atom, &exps).unwrap();
        assert_eq!(pm.molecule_norm.windowed, 0.0);
        assert!(pm.moment.contains(0.0));
    }
}

use serde_json::json;

use super::config::{PartialSumsConfig, Tolerances};
use super::molecule_lp::random_molecule;
use super::report::{CheckRecord, Relation, VerificationReport};
use super::stream_seed;
use crate::atoms::{Molecule, MoleculeParams};
use crate::error::Result;
use crate::hardy::RieszNormEngine;
use crate::lattice::{GridFunction, LatticePoint, Window};
use crate::operators::Backend;

/// Partial sums `S_L = Σ_{k≤L} M_k` of molecules with `N(M_k) = ratio^k`.
///
/// With the windowed Riesz norm `h = ‖·‖_p + Σ_s ‖R_s ·‖_p` and `p ≤ 1`,
/// `h(Σ M_k)^p ≤ (n+1)^{1−p} Σ_k h(M_k)^p`, so both
/// `h(S_L)^p ≤ K Σ_{k≤L} N(M_k)^p` and `h(S_{L'} − S_L)^p ≤ K Σ_{L<k≤L'} N(M_k)^p`
/// with `K = (n+1)^{1−p} max_k h(M_k)^p / N(M_k)^p`.
pub fn check_partial_sum_convergence(
    cfg: &PartialSumsConfig,
    backend: Backend,
    tol: &Tolerances,
    seed: u64,
) -> Result<VerificationReport> {
    let params = MoleculeParams::new(cfg.p, cfg.p0, cfg.r)?;
    let n = cfg.n;
    let p = cfg.p;
    let mut molecules: Vec<Molecule> = Vec::with_capacity(cfg.terms);
    for k in 1..=cfg.terms {
        let m = random_molecule(n, cfg.cube_halfwidth, params, stream_seed(seed, 700 + k as u64))?;
        let target = cfg.ratio.powi(k as i32);
        molecules.push(Molecule::new(m.data.scale(target / m.norm), m.center, params)?);
    }
    let input = Window::centered(&LatticePoint::origin(n), 4 * cfg.cube_halfwidth + 2);
    let window = Window::centered(&LatticePoint::origin(n), cfg.window_radius);
    let engine = RieszNormEngine::new(&input, &window, backend)?;
    let h = |b: &GridFunction| -> Result<f64> { Ok(engine.norm(b, p)?.total.windowed) };

    let budgets: Vec<f64> = molecules.iter().map(|m| m.norm.powf(p)).collect();
    let mut single = Vec::with_capacity(molecules.len());
    for m in &molecules {
        single.push(h(&m.data)?.powf(p) / m.norm.powf(p));
    }
    let k_const = (n as f64 + 1.0).powf(1.0 - p) * single.iter().copied().fold(0.0, f64::max);
    let slack = 1.0 + tol.oracle;

    let mut checks = Vec::new();
    let mut partial = Vec::with_capacity(molecules.len());
    let mut acc = GridFunction::zeros(input.clone());
    for m in &molecules {
        acc = acc.add(&m.data);
        partial.push(acc.restrict_to(&input));
    }
    let mut constants = Vec::new();
    for (l, s) in partial.iter().enumerate() {
        let budget: f64 = budgets[..=l].iter().sum();
        let c = h(s)?.powf(p) / budget;
        constants.push(c);
        checks.push(
            CheckRecord::new("partial-sum-bound")
                .param("L", l + 1)
                .value("budget", budget)
                .compare(c, Relation::LessEq, k_const * slack),
        );
    }
    let last = partial.last().expect("at least two terms");
    let mut cauchy = Vec::new();
    for (l, s) in partial.iter().enumerate().take(partial.len() - 1) {
        let rest: f64 = budgets[l + 1..].iter().sum();
        let diff = h(&last.sub(s).restrict_to(&input))?.powf(p);
        cauchy.push(diff);
        checks.push(
            CheckRecord::new("partial-sum-cauchy")
                .param("L", l + 1)
                .param("L_prime", partial.len())
                .value("remaining_budget", rest)
                .compare(diff, Relation::LessEq, k_const * rest * slack),
        );
    }
    let rate = cauchy
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max);
    Ok(VerificationReport::new(
        "partial-sums",
        seed,
        json!({"partial_sums": cfg, "backend": backend, "tolerances": tol}),
        checks,
    )
    .with_summary("empirical_C", constants.iter().copied().fold(0.0, f64::max))
    .with_summary("bound_constant", k_const)
    .with_summary("single_molecule_ratio", single[0].powf(1.0 / p))
    .with_summary("cauchy_decay_rate", rate))
}

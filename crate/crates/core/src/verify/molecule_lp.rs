use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::config::{MoleculeLpConfig, Tolerances};
use super::report::{CheckRecord, Relation, VerificationReport};
use super::{drift, stream_seed};
use crate::atoms::{generate_atom, moment_sum, multi_indices, AtomParams, Molecule, MoleculeParams};
use crate::error::Result;
use crate::lattice::{lp_norm, moment_degree, DiscreteCube, LatticePoint, Window};
use crate::operators::convolve_direct;

/// A random molecule: a generated atom blurred by a small positive kernel,
/// scaled and shifted. Convolution with a finitely supported kernel keeps
/// every vanishing moment of the atom.
pub fn random_molecule(n: usize, half_width: u64, params: MoleculeParams, seed: u64) -> Result<Molecule> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = moment_degree(n, params.p);
    let cube = DiscreteCube::centered(LatticePoint::origin(n), half_width);
    let atom = generate_atom(&cube, AtomParams::new(params.p, f64::INFINITY, order)?, rng.random())?;
    let blur: u64 = rng.random_range(0..=2);
    let width = 0.5 + blur as f64;
    let data = if blur == 0 {
        atom.data
    } else {
        let out = Window::centered(&LatticePoint::origin(n), half_width + blur);
        let b = blur as i64;
        convolve_direct(
            &atom.data,
            |j: &[i64]| {
                if j.iter().all(|c| c.abs() <= b) {
                    let r2: i64 = j.iter().map(|c| c * c).sum();
                    (-(r2 as f64) / (2.0 * width * width)).exp()
                } else {
                    0.0
                }
            },
            &out,
        )?
    };
    let reach = 3 * half_width as i64;
    let shift = LatticePoint::new((0..n).map(|_| rng.random_range(-reach..=reach)).collect());
    let lambda = 10f64.powf(rng.random_range(-1.0..1.0));
    Molecule::new(data.translate(&shift).scale(lambda), shift, params)
}

/// `‖M‖_{ℓ^p} / N(M)` over seeded molecules; the sup must be finite and
/// agree between the two halves of the sample.
pub fn check_molecule_lp(cfg: &MoleculeLpConfig, tol: &Tolerances, seed: u64) -> Result<VerificationReport> {
    let params = MoleculeParams::new(cfg.p, cfg.p0, cfg.r)?;
    let molecules: Vec<(u64, Molecule)> = (0..cfg.count)
        .into_par_iter()
        .map(|i| {
            let hw = cfg.cube_sizes[i % cfg.cube_sizes.len()];
            let s = stream_seed(seed, 100_000 + i as u64);
            random_molecule(cfg.n, hw, params, s).map(|m| (hw, m))
        })
        .collect::<Result<_>>()?;
    let d_p = moment_degree(cfg.n, cfg.p);
    let mut ratios = Vec::with_capacity(molecules.len());
    let mut checks = Vec::new();
    for (i, (hw, m)) in molecules.iter().enumerate() {
        let lp = lp_norm(&m.data, cfg.p)?;
        let ratio = lp / m.norm;
        ratios.push(ratio);
        let l1 = lp_norm(&m.data, 1.0)?;
        let reach = (m.data.window().extent().iter().max().copied().unwrap_or(1) as f64
            + m.center.norm_inf().unsigned_abs() as f64)
            .max(1.0);
        let worst_moment = multi_indices(cfg.n, d_p)
            .iter()
            .map(|beta| moment_sum(&m.data, beta).abs() / reach.powi(beta.iter().sum::<u32>() as i32))
            .fold(0.0, f64::max);
        checks.push(
            CheckRecord::new("molecule-moments")
                .param("index", i)
                .param("half_width", hw)
                .compare(worst_moment, Relation::LessEq, tol.oracle * l1),
        );
        checks.push(
            CheckRecord::new("molecule-ratio")
                .param("index", i)
                .param("half_width", hw)
                .value("lp_norm", lp)
                .value("molecule_norm", m.norm)
                .compare(ratio, Relation::Less, f64::MAX),
        );
    }
    let half = ratios.len() / 2;
    let sup = |xs: &[f64]| xs.iter().copied().fold(0.0, f64::max);
    let (first, second) = (sup(&ratios[..half]), sup(&ratios[half..]));
    let d = drift(first, second);
    checks.push(
        CheckRecord::new("molecule-ratio-halves")
            .value("sup_first_half", first)
            .value("sup_second_half", second)
            .compare(d, Relation::Less, tol.drift),
    );
    Ok(VerificationReport::new(
        "molecule-lp",
        seed,
        json!({"molecule_lp": cfg, "tolerances": tol}),
        checks,
    )
    .with_summary("empirical_sup", first.max(second))
    .with_summary("half_drift", d))
}

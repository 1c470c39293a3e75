use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::config::{BoundednessConfig, BoundednessRegime, ExperimentConfig, Tolerances};
use super::report::{CheckRecord, Relation, VerificationReport};
use super::{drift, spread, stream_seed};
use crate::atoms::{generate_atom, AtomParams};
use crate::error::Result;
use crate::hardy::{hardy_norm_maximal, Characterization, MaximalGrid, RieszNormEngine};
use crate::lattice::{lp_norm, DiscreteCube, GridFunction, LatticePoint, Window};
use crate::operators::{Backend, ConvolutionPlan, LatticeOperator};

/// A test input for the boundedness ratio.
#[derive(Debug, Clone)]
pub struct RatioInput {
    pub kind: &'static str,
    pub index: usize,
    pub half_width: u64,
    pub data: GridFunction,
}

fn share(total: usize, parts: usize, i: usize) -> usize {
    total / parts + usize::from(i < total % parts)
}

/// Single atoms centered at the origin and finite atomic sums with atoms
/// inside `[−2N, 2N]^n` and coefficients in `[−1, 1]`.
pub fn ratio_inputs(
    regime: &BoundednessRegime,
    cfg: &BoundednessConfig,
    size_index: usize,
    seed: u64,
) -> Result<Vec<RatioInput>> {
    let hw = cfg.cube_sizes[size_index];
    let n = regime.n;
    let params = AtomParams::new(regime.p, f64::INFINITY, regime.moment_order)?;
    let sizes = cfg.cube_sizes.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let cube = DiscreteCube::centered(LatticePoint::origin(n), hw);
    for index in 0..share(cfg.atoms, sizes, size_index) {
        let atom = generate_atom(&cube, params, rng.random())?;
        out.push(RatioInput {
            kind: "atom",
            index,
            half_width: hw,
            data: atom.data,
        });
    }
    let reach = 2 * hw as i64;
    for index in 0..share(cfg.sums, sizes, size_index) {
        let mut sum = GridFunction::zeros(Window::centered(&LatticePoint::origin(n), 3 * hw));
        for _ in 0..cfg.terms_per_sum.max(1) {
            let c = LatticePoint::new((0..n).map(|_| rng.random_range(-reach..=reach)).collect());
            let atom = generate_atom(&DiscreteCube::centered(c, hw), params, rng.random())?;
            sum = sum.axpy(rng.random_range(-1.0..=1.0), &atom.data);
        }
        out.push(RatioInput {
            kind: "atomic-sum",
            index,
            half_width: hw,
            data: sum.restrict_to(&Window::centered(&LatticePoint::origin(n), 3 * hw)),
        });
    }
    Ok(out)
}

/// Windowed `H^p` norms with one characterization and reusable plans.
enum NormEngine {
    Riesz(RieszNormEngine),
    Maximal { grid: MaximalGrid, window: Window },
}

impl NormEngine {
    fn new(
        characterization: Characterization,
        input: &Window,
        window: &Window,
        backend: Backend,
        grid: Option<MaximalGrid>,
    ) -> Result<Self> {
        Ok(match characterization {
            Characterization::Riesz => NormEngine::Riesz(RieszNormEngine::new(input, window, backend)?),
            Characterization::Maximal => NormEngine::Maximal {
                grid: grid.unwrap_or_else(|| MaximalGrid::for_window(window)),
                window: window.clone(),
            },
        })
    }

    fn norm(&self, b: &GridFunction, p: f64) -> Result<f64> {
        if p > 1.0 {
            return lp_norm(b, p);
        }
        Ok(match self {
            NormEngine::Riesz(e) => e.norm(b, p)?.total.windowed,
            NormEngine::Maximal { grid, window } => hardy_norm_maximal(b, p, grid, window)?.total.windowed,
        })
    }
}

/// Evaluator of `‖I_α b‖_{H^q(W)} / ‖b‖_{H^p(W)}` for inputs inside a fixed
/// window.
pub struct RatioEvaluator {
    p: f64,
    q: f64,
    potential: ConvolutionPlan,
    input_norm: NormEngine,
    output_norm: Option<NormEngine>,
}

impl RatioEvaluator {
    pub fn new(regime: &BoundednessRegime, input: &Window, window: &Window, exp: &ExperimentConfig) -> Result<Self> {
        let q = regime.q();
        let potential = LatticeOperator::Potential { alpha: regime.alpha }.plan(input.clone(), window.clone(), exp.backend)?;
        let input_norm = NormEngine::new(exp.characterization, input, window, exp.backend, exp.t_grid)?;
        let output_norm = if q <= 1.0 {
            Some(NormEngine::new(exp.characterization, window, window, exp.backend, exp.t_grid)?)
        } else {
            None
        };
        Ok(RatioEvaluator {
            p: regime.p,
            q,
            potential,
            input_norm,
            output_norm,
        })
    }

    /// `(output norm, input norm)`. For `q > 1` the output norm is `ℓ^q`.
    pub fn norms(&self, b: &GridFunction) -> Result<(f64, f64)> {
        let image = self.potential.apply(b)?;
        let out = match &self.output_norm {
            Some(e) => e.norm(&image, self.q)?,
            None => lp_norm(&image, self.q)?,
        };
        Ok((out, self.input_norm.norm(b, self.p)?))
    }

    pub fn ratio(&self, b: &GridFunction) -> Result<f64> {
        let (o, i) = self.norms(b)?;
        Ok(o / i)
    }
}

fn regime_checks(
    regime: &BoundednessRegime,
    cfg: &ExperimentConfig,
    tol: &Tolerances,
    seed: u64,
) -> Result<(Vec<CheckRecord>, f64, f64, f64)> {
    let b = &cfg.boundedness;
    let mut checks = Vec::new();
    let mut size_sups = Vec::new();
    let mut worst_drift: f64 = 0.0;
    for (si, &hw) in b.cube_sizes.iter().enumerate() {
        let inputs = ratio_inputs(regime, b, si, stream_seed(seed, 600 + si as u64))?;
        let input_window = Window::centered(&LatticePoint::origin(regime.n), 3 * hw);
        // ratios[w][i]
        let mut ratios: Vec<Vec<f64>> = Vec::new();
        for &mult in &b.window_multipliers {
            let window = Window::centered(&LatticePoint::origin(regime.n), mult * hw);
            let eval = RatioEvaluator::new(regime, &input_window, &window, cfg)?;
            let mut row = Vec::with_capacity(inputs.len());
            for input in &inputs {
                let (o, i) = eval.norms(&input.data)?;
                let r = o / i;
                row.push(r);
                checks.push(
                    CheckRecord::new("ratio-finite")
                        .param("regime", &regime.name)
                        .param("N", hw)
                        .param("kind", input.kind)
                        .param("index", input.index)
                        .param("window_multiplier", mult)
                        .value("output_norm", o)
                        .value("input_norm", i)
                        .compare(r, Relation::Less, f64::MAX),
                );
            }
            if si == 0 && mult == b.window_multipliers[0] {
                if let Some(first) = inputs.first() {
                    let lambda = -2.75;
                    let scaled = eval.ratio(&first.data.scale(lambda))?;
                    checks.push(
                        CheckRecord::new("ratio-homogeneity")
                            .param("regime", &regime.name)
                            .param("lambda", lambda)
                            .value("ratio", row[0])
                            .value("scaled_ratio", scaled)
                            .compare((scaled - row[0]).abs(), Relation::LessEq, 1e-12 * row[0]),
                    );
                }
            }
            ratios.push(row);
        }
        for w in 1..ratios.len() {
            let d = ratios[w - 1]
                .iter()
                .zip(&ratios[w])
                .map(|(a, c)| drift(*a, *c))
                .fold(0.0, f64::max);
            worst_drift = worst_drift.max(d);
            checks.push(
                CheckRecord::new("ratio-window-drift")
                    .param("regime", &regime.name)
                    .param("N", hw)
                    .param("window_multipliers", [b.window_multipliers[w - 1], b.window_multipliers[w]])
                    .compare(d, Relation::Less, tol.drift),
            );
        }
        let last = ratios.last().map(|r| r.iter().copied().fold(0.0, f64::max)).unwrap_or(f64::NAN);
        size_sups.push(last);
        checks.push(
            CheckRecord::new("ratio-size-sup")
                .param("regime", &regime.name)
                .param("N", hw)
                .compare(last, Relation::Less, f64::MAX),
        );
    }
    let sp = spread(&size_sups);
    checks.push(
        CheckRecord::new("ratio-size-spread")
            .param("regime", &regime.name)
            .param("sizes", &b.cube_sizes)
            .compare(sp, Relation::Less, tol.spread),
    );
    let sup = size_sups.iter().copied().fold(0.0, f64::max);
    Ok((checks, sup, sp, worst_drift))
}

/// Windowed `‖I_α b‖_{H^q} / ‖b‖_{H^p}` over atoms and atomic sums: finite,
/// stable under window doubling, and of bounded spread across cube sizes.
pub fn check_boundedness(cfg: &ExperimentConfig, seed: u64) -> Result<VerificationReport> {
    let tol = cfg.tolerances;
    let mut checks = Vec::new();
    let mut summary = Vec::new();
    for (ri, regime) in cfg.boundedness.regimes.iter().enumerate() {
        let (c, sup, sp, d) = regime_checks(regime, cfg, &tol, stream_seed(seed, 60 + ri as u64))?;
        checks.extend(c);
        summary.push((format!("empirical_C_{}", regime.name), sup));
        summary.push((format!("spread_{}", regime.name), sp));
        summary.push((format!("window_drift_{}", regime.name), d));
        summary.push((format!("q_{}", regime.name), regime.q()));
    }
    let mut report = VerificationReport::new(
        "boundedness",
        seed,
        json!({
            "boundedness": cfg.boundedness,
            "characterization": cfg.characterization,
            "backend": cfg.backend,
            "t_grid": cfg.t_grid,
            "tolerances": tol,
        }),
        checks,
    );
    for (k, v) in summary {
        report = report.with_summary(&k, v);
    }
    Ok(report)
}

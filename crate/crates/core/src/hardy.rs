//! The Poisson maximal function `sup_{t>0} |(P_t^d ∗ b)|` and the two `H^p`
//! quasi-norms (maximal and Riesz characterizations).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::kernels::KernelConfig;
use crate::lattice::{lp_norm, lp_power_sum, norm_inf, root, CertifiedValue, GridFunction, LatticePoint, Window};
use crate::operators::{tail_upper_bound, Backend, ConvolutionPlan, LatticeOperator, TailBoundParams};
use crate::sum::pairwise_sum;

const GOLDEN: f64 = 0.618_033_988_749_894_9;
const GOLDEN_STEPS: usize = 24;

/// Log-uniform sampling of the dilation parameter `t`, optionally refined by
/// golden-section searches around the best sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaximalGrid {
    pub t_min: f64,
    pub t_max: f64,
    pub points_per_octave: u32,
    /// Each round is one golden-section search (24 steps) on `log t`
    /// around the current maximizer.
    pub refinement_rounds: u32,
}

impl MaximalGrid {
    pub fn new(t_min: f64, t_max: f64, points_per_octave: u32, refinement_rounds: u32) -> Result<Self> {
        let g = MaximalGrid {
            t_min,
            t_max,
            points_per_octave,
            refinement_rounds,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.t_min > 0.0 && self.t_min < self.t_max && self.t_max.is_finite()) {
            return Err(domain(format!(
                "t-grid needs 0 < t_min < t_max < ∞, got [{}, {}]",
                self.t_min, self.t_max
            )));
        }
        if self.points_per_octave == 0 {
            return Err(domain("t-grid needs at least one point per octave"));
        }
        Ok(())
    }

    /// `t_min = 1/64`, `t_max = 64·radius`, 8 points per octave, 3 rounds.
    pub fn for_window(window: &Window) -> Self {
        let radius = window.extent().iter().max().copied().unwrap_or(1).max(2) as f64 / 2.0;
        MaximalGrid {
            t_min: 1.0 / 64.0,
            t_max: 64.0 * radius,
            points_per_octave: 8,
            refinement_rounds: 3,
        }
    }

    /// The sampled `t` values, `t_min · 2^{k/ppo}` up to the first one ≥ t_max.
    pub fn samples(&self) -> Vec<f64> {
        let octaves = (self.t_max / self.t_min).log2();
        let k_max = (octaves * self.points_per_octave as f64).ceil() as u32;
        (0..=k_max)
            .map(|k| self.t_min * 2f64.powf(k as f64 / self.points_per_octave as f64))
            .collect()
    }
}

/// `|(P_t^d ∗ b)(j)|` for one output point, from `(|j − i|², b(i))` pairs.
struct PointProblem<'a> {
    cfg: &'a KernelConfig,
    pairs: Vec<(f64, f64)>,
    terms: Vec<f64>,
}

impl PointProblem<'_> {
    fn eval(&mut self, t: f64) -> f64 {
        self.terms.clear();
        for (r2, v) in &self.pairs {
            self.terms.push(v * self.cfg.poisson_profile(t, *r2));
        }
        (self.cfg.c_n * pairwise_sum(&self.terms)).abs()
    }

    /// Golden-section maximization of `|g(e^u)|` on `[a, b]`.
    fn golden(&mut self, mut a: f64, mut b: f64) -> (f64, f64) {
        let mut x1 = b - GOLDEN * (b - a);
        let mut x2 = a + GOLDEN * (b - a);
        let mut f1 = self.eval(x1.exp());
        let mut f2 = self.eval(x2.exp());
        for _ in 0..GOLDEN_STEPS {
            if f1 >= f2 {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - GOLDEN * (b - a);
                f1 = self.eval(x1.exp());
            } else {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + GOLDEN * (b - a);
                f2 = self.eval(x2.exp());
            }
        }
        if f1 >= f2 {
            (x1, f1)
        } else {
            (x2, f2)
        }
    }
}

/// Maximum over the sampled and refined `t` of `|(P_t^d ∗ b)(j)|`, per
/// output point. This is a lower bound on the true supremum that can only
/// grow as the grid is refined.
pub fn poisson_maximal_with(
    b: &GridFunction,
    grid: &MaximalGrid,
    out: &Window,
    cfg: &KernelConfig,
) -> Result<GridFunction> {
    grid.validate()?;
    if b.dim() != out.dim() || cfg.n != b.dim() {
        return Err(crate::Error::Window("dimension mismatch between input, window and kernel".into()));
    }
    let support = b.support();
    let samples = grid.samples();
    let log_step = std::f64::consts::LN_2 / grid.points_per_octave as f64;
    let n = out.dim();
    let values: Vec<f64> = (0..out.len())
        .into_par_iter()
        .map_init(
            || vec![0i64; n],
            |m, idx| {
                out.point_into(idx, m);
                let pairs: Vec<(f64, f64)> = support
                    .iter()
                    .filter_map(|(i, v)| {
                        let r2: i64 = i.iter().zip(m.iter()).map(|(a, c)| (a - c) * (a - c)).sum();
                        (r2 != 0).then_some((r2 as f64, *v))
                    })
                    .collect();
                if pairs.is_empty() {
                    return 0.0;
                }
                let mut prob = PointProblem {
                    cfg,
                    terms: Vec::with_capacity(pairs.len()),
                    pairs,
                };
                let mut best_u = samples[0].ln();
                let mut best = 0.0;
                for t in &samples {
                    let v = prob.eval(*t);
                    if v > best {
                        best = v;
                        best_u = t.ln();
                    }
                }
                let mut half = log_step;
                for _ in 0..grid.refinement_rounds {
                    let (u, v) = prob.golden(best_u - half, best_u + half);
                    if v > best {
                        best = v;
                        best_u = u;
                    }
                    half *= GOLDEN.powi(GOLDEN_STEPS as i32 - 2);
                }
                best
            },
        )
        .collect();
    GridFunction::from_values(out.clone(), values)
}

/// [`poisson_maximal_with`] using the default Poisson normalization.
pub fn poisson_maximal(b: &GridFunction, grid: &MaximalGrid, out: &Window) -> Result<GridFunction> {
    poisson_maximal_with(b, grid, out, &KernelConfig::new(b.dim()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Characterization {
    Maximal,
    #[default]
    Riesz,
}

impl std::str::FromStr for Characterization {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "maximal" => Ok(Characterization::Maximal),
            "riesz" => Ok(Characterization::Riesz),
            other => Err(format!("unknown characterization {other:?} (expected maximal or riesz)")),
        }
    }
}

/// How the omitted part of an operator norm was handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailStatus {
    /// Heuristic estimate from the decay of a mean-zero input's image. Not
    /// a certificate.
    Estimated,
    /// No estimate (nonzero mean, or decay too slow for `ℓ^p`); the tail
    /// bound is reported as 0.
    Unavailable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardyNormReport {
    pub characterization: Characterization,
    pub p: f64,
    pub window: Window,
    pub lp_part: f64,
    /// One entry for the maximal characterization, one per axis for Riesz.
    pub operator_parts: Vec<CertifiedValue>,
    pub total: CertifiedValue,
    pub tail: TailStatus,
}

impl HardyNormReport {
    fn assemble(
        characterization: Characterization,
        p: f64,
        window: Window,
        lp_part: f64,
        operator_parts: Vec<CertifiedValue>,
        tail: TailStatus,
    ) -> Self {
        let windowed = lp_part + operator_parts.iter().map(|c| c.windowed).sum::<f64>();
        let tail_hi = operator_parts.iter().map(|c| c.tail_hi).sum::<f64>();
        HardyNormReport {
            characterization,
            p,
            window,
            lp_part,
            operator_parts,
            total: CertifiedValue::new(windowed, tail_hi),
            tail,
        }
    }
}

fn is_mean_zero(b: &GridFunction) -> bool {
    let sum = pairwise_sum(b.values());
    let abs: f64 = b.values().iter().map(|v| v.abs()).sum();
    sum.abs() <= 1e-12 * abs
}

/// Integer midpoint of a window.
fn window_center(w: &Window) -> LatticePoint {
    LatticePoint::new(
        w.offset()
            .coords()
            .iter()
            .zip(w.extent())
            .map(|(o, e)| o + (*e as i64 - 1) / 2)
            .collect(),
    )
}

/// Heuristic bound on `Σ_{outside} |v|^p` assuming `|v(j)| ≤ C |j − c|^{−decay}`
/// with `C` fitted on the boundary shell of the window.
fn decay_tail_power(values: &GridFunction, center: &LatticePoint, decay: f64, p: f64) -> Option<f64> {
    let radius = values.window().inscribed_radius(center.coords())?;
    if radius == 0 {
        return None;
    }
    let eps = decay * p - values.dim() as f64;
    if eps <= 0.0 {
        return None;
    }
    let mut c: f64 = 0.0;
    let mut buf = vec![0i64; values.dim()];
    for (i, v) in values.values().iter().enumerate() {
        values.window().point_into(i, &mut buf);
        let x: Vec<i64> = buf.iter().zip(center.coords()).map(|(a, b)| a - b).collect();
        if norm_inf(&x) as u64 == radius {
            c = c.max(v.abs() * crate::lattice::norm(&x).powf(decay));
        }
    }
    let params = TailBoundParams::new(values.dim(), eps, radius + 1).ok()?;
    Some(c.powf(p) * tail_upper_bound(&params))
}

fn windowed_part(values: &GridFunction, p: f64, tail_power: Option<f64>) -> Result<CertifiedValue> {
    let s = lp_power_sum(values.values(), p)?;
    Ok(match tail_power {
        Some(t) => CertifiedValue::from_power_sum(s, t, p),
        None => CertifiedValue::exact(root(s, p)),
    })
}

fn check_hardy_p(p: f64) -> Result<()> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(domain(format!(
            "the maximal H^p norm is defined for 0 < p ≤ 1 (got p = {p}); for p > 1, H^p = ℓ^p"
        )));
    }
    Ok(())
}

/// `‖b‖_{ℓ^p} + ‖sup_t |P_t^d ∗ b|‖_{ℓ^p(window)}`.
pub fn hardy_norm_maximal(b: &GridFunction, p: f64, grid: &MaximalGrid, out: &Window) -> Result<HardyNormReport> {
    check_hardy_p(p)?;
    let lp_part = lp_norm(b, p)?;
    let maximal = poisson_maximal(b, grid, out)?;
    let (tail, tail_power) = if is_mean_zero(b) {
        match decay_tail_power(&maximal, &window_center(b.window()), (b.dim() + 1) as f64, p) {
            Some(t) => (TailStatus::Estimated, Some(t)),
            None => (TailStatus::Unavailable, None),
        }
    } else {
        (TailStatus::Unavailable, None)
    };
    let part = windowed_part(&maximal, p, tail_power)?;
    Ok(HardyNormReport::assemble(
        Characterization::Maximal,
        p,
        out.clone(),
        lp_part,
        vec![part],
        tail,
    ))
}

/// Precomputed Riesz-transform plans for `H^p_Riesz` norms of inputs living
/// inside one input window, evaluated on one output window.
#[derive(Debug)]
pub struct RieszNormEngine {
    plans: Vec<ConvolutionPlan>,
    output: Window,
}

impl RieszNormEngine {
    pub fn new(input: &Window, output: &Window, backend: Backend) -> Result<Self> {
        let plans = (1..=input.dim())
            .map(|s| LatticeOperator::Riesz { axis: s }.plan(input.clone(), output.clone(), backend))
            .collect::<Result<Vec<_>>>()?;
        Ok(RieszNormEngine {
            plans,
            output: output.clone(),
        })
    }

    /// The transforms `R_s^d b`, `s = 1..n`, on the output window.
    pub fn transforms(&self, b: &GridFunction) -> Result<Vec<GridFunction>> {
        self.plans.iter().map(|plan| plan.apply(b)).collect()
    }

    /// `‖b‖_{ℓ^p} + Σ_s ‖R_s^d b‖_{ℓ^p(window)}`.
    pub fn norm(&self, b: &GridFunction, p: f64) -> Result<HardyNormReport> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(domain(format!("H^p_Riesz needs 0 < p < ∞, got {p}")));
        }
        let lp_part = lp_norm(b, p)?;
        let mean_zero = is_mean_zero(b);
        let center = window_center(b.window());
        let mut tail = if mean_zero { TailStatus::Estimated } else { TailStatus::Unavailable };
        let mut parts = Vec::with_capacity(self.plans.len());
        for r in self.transforms(b)? {
            let tail_power = if mean_zero {
                decay_tail_power(&r, &center, (b.dim() + 1) as f64, p)
            } else {
                None
            };
            if tail_power.is_none() {
                tail = TailStatus::Unavailable;
            }
            parts.push(windowed_part(&r, p, tail_power)?);
        }
        Ok(HardyNormReport::assemble(
            Characterization::Riesz,
            p,
            self.output.clone(),
            lp_part,
            parts,
            tail,
        ))
    }
}

/// `‖b‖_{ℓ^p} + Σ_{s=1}^n ‖R_s^d b‖_{ℓ^p(window)}`.
pub fn hardy_norm_riesz(b: &GridFunction, p: f64, out: &Window, backend: Backend) -> Result<HardyNormReport> {
    RieszNormEngine::new(b.window(), out, backend)?.norm(b, p)
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use super::config::{MuConfig, Tolerances};
use super::report::{CheckRecord, Relation, VerificationReport};
use super::{drift, stream_seed};
use crate::error::{domain, Result};
use crate::kernels::smoothstep_cutoff;
use crate::sum::pairwise_sum;

/// `μ_{α,R}(x) = Σ_{j ≠ 0} |j|^{α−n} Φ̂(j/R) e^{2πi j·x}` with the smoothstep
/// cutoff. The summand is even in `j`, so the sum is real.
pub fn mu_alpha_r(alpha: f64, radius: f64, x: &[f64]) -> Result<f64> {
    let n = x.len();
    if n == 0 || !(alpha > 0.0 && alpha < n as f64) {
        return Err(domain(format!("μ needs 0 < α < n, got α = {alpha}, n = {n}")));
    }
    if !(radius > 0.0) {
        return Err(domain("μ needs R > 0"));
    }
    let reach = (2.0 * radius).floor() as i64;
    let side = (2 * reach + 1) as usize;
    let rows: Vec<f64> = (0..side)
        .into_par_iter()
        .map(|first| {
            let mut j = vec![-reach; n];
            j[0] = first as i64 - reach;
            let mut terms = Vec::new();
            loop {
                let r2: i64 = j.iter().map(|c| c * c).sum();
                if r2 != 0 {
                    let norm = (r2 as f64).sqrt();
                    let cut = smoothstep_cutoff(norm / radius);
                    if cut != 0.0 {
                        let phase: f64 = j.iter().zip(x).map(|(a, b)| *a as f64 * b).sum();
                        terms.push(norm.powf(alpha - n as f64) * cut * (2.0 * std::f64::consts::PI * phase).cos());
                    }
                }
                let mut k = 1;
                while k < n {
                    j[k] += 1;
                    if j[k] <= reach {
                        break;
                    }
                    j[k] = -reach;
                    k += 1;
                }
                if k >= n {
                    break;
                }
            }
            pairwise_sum(&terms)
        })
        .collect();
    Ok(pairwise_sum(&rows))
}

fn sample_points(cfg: &MuConfig, seed: u64) -> Vec<Vec<f64>> {
    let n = cfg.n;
    // Fixed points on the boundary of the fundamental cell and on the
    // smallest admissible shell, then random ones.
    let mut pts = vec![];
    let mut edge = vec![0.0; n];
    edge[0] = -0.5;
    pts.push(edge);
    let mut near = vec![0.0; n];
    near[0] = cfg.min_norm;
    pts.push(near);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while pts.len() < cfg.samples.max(2) {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-0.5..0.5)).collect();
        let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm >= cfg.min_norm {
            pts.push(x);
        }
    }
    pts
}

/// `sup_x |μ_{α,R}(x)|·|x|^α` per `R`; passes per `α` when the sup is finite
/// and the last two radii agree within the drift tolerance.
pub fn check_mu_decay(cfg: &MuConfig, tol: &Tolerances, seed: u64) -> Result<VerificationReport> {
    let pts = sample_points(cfg, stream_seed(seed, 3));
    let mut checks = Vec::new();
    let mut report_summary = Vec::new();
    for &alpha in &cfg.alphas {
        let mut sups = Vec::with_capacity(cfg.radii.len());
        for &radius in &cfg.radii {
            let scaled = pts
                .iter()
                .map(|x| {
                    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
                    Ok(mu_alpha_r(alpha, radius, x)?.abs() * norm.powf(alpha))
                })
                .collect::<Result<Vec<f64>>>()?;
            let sup = scaled.iter().copied().fold(0.0, f64::max);
            sups.push(sup);
            checks.push(
                CheckRecord::new("mu-bounded")
                    .param("alpha", alpha)
                    .param("R", radius)
                    .value("sup_scaled", sup)
                    .compare(sup, Relation::Less, f64::MAX),
            );
        }
        if sups.len() >= 2 {
            let d = drift(sups[sups.len() - 2], sups[sups.len() - 1]);
            checks.push(
                CheckRecord::new("mu-stable")
                    .param("alpha", alpha)
                    .param("radii", &cfg.radii[cfg.radii.len() - 2..])
                    .value("sup_previous", sups[sups.len() - 2])
                    .value("sup_last", sups[sups.len() - 1])
                    .compare(d, Relation::Less, tol.drift),
            );
        }
        let c = sups.iter().copied().fold(0.0, f64::max);
        report_summary.push((format!("empirical_C_alpha_{alpha}"), c));
    }
    let mut report = VerificationReport::new(
        "mu",
        seed,
        json!({"mu": cfg, "tolerances": tol, "sample": pts}),
        checks,
    );
    for (k, v) in report_summary {
        report = report.with_summary(&k, v);
    }
    Ok(report)
}

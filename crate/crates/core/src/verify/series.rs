use serde_json::json;

use super::config::SeriesConfig;
use super::report::{CheckRecord, Relation, VerificationReport};
use crate::error::Result;
use crate::operators::{certified_series, default_refine, lemma_bound, TailBoundParams};

/// Certified enclosure of `Σ_{|j|_∞ ≥ N} |j|^{−n−ε}` against the closed-form
/// bound `2^n n^{n+ε}(2 + 2^{ε/n} n/ε)^n N^{−ε}` for every grid triple.
pub fn check_series_lemma(cfg: &SeriesConfig, seed: u64) -> Result<VerificationReport> {
    let mut checks = Vec::new();
    for &n in &cfg.dims {
        for &eps in &cfg.eps {
            for &cutoff in &cfg.cutoffs {
                let params = TailBoundParams::new(n, eps, cutoff)?;
                let refine = cfg.refine_to.unwrap_or(cutoff + default_refine(n));
                let enc = certified_series(&params, refine);
                let rhs = lemma_bound(&params);
                checks.push(
                    CheckRecord::new("series-tail")
                        .param("n", n)
                        .param("eps", eps)
                        .param("N", cutoff)
                        .param("refine_to", refine)
                        .enclosure("tail_sum", enc)
                        .compare(enc.hi(), Relation::LessEq, rhs),
                );
            }
        }
    }
    Ok(VerificationReport::new("series", seed, json!(cfg), checks))
}

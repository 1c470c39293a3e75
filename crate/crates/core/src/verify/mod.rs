//! Verification suites: each turns one quantitative statement of the theory
//! into recorded inequalities with both sides kept as evidence.

mod boundedness;
pub mod config;
mod fourier;
mod molecule_lp;
mod mu;
mod partial_sums;
mod potential;
pub mod report;
mod series;

use std::collections::BTreeMap;
use std::time::Instant;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use boundedness::{check_boundedness, ratio_inputs, RatioEvaluator, RatioInput};
pub use config::{load_config, ExperimentConfig, Tolerances};
pub use fourier::{check_atom_fourier, fourier_bound, fourier_direct, fourier_remainder_form, taylor_remainder};
pub use molecule_lp::{check_molecule_lp, random_molecule};
pub use mu::{check_mu_decay, mu_alpha_r};
pub use partial_sums::check_partial_sum_convergence;
pub use potential::{
    binomial_series_tail, check_atom_to_molecule, dipole_atom, potential_far_field, potential_molecule, FarField,
    PotentialMolecule,
};
pub use report::{emit_report, render_csv, render_json, write_timings, CheckRecord, Relation, VerificationReport};
pub use series::check_series_lemma;

use crate::error::Result;

/// A seed for an independent substream of the master seed.
pub(crate) fn stream_seed(master: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng.next_u64()
}

/// `|a − b| / max(|a|, |b|)`, 0 when both vanish.
pub(crate) fn drift(a: f64, b: f64) -> f64 {
    let m = a.abs().max(b.abs());
    if m == 0.0 {
        0.0
    } else {
        (a - b).abs() / m
    }
}

/// `max / min` of positive values.
pub(crate) fn spread(values: &[f64]) -> f64 {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if values.is_empty() || !(min > 0.0) {
        f64::NAN
    } else {
        max / min
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Suite {
    Series,
    MoleculeLp,
    Mu,
    Fourier,
    AtomToMolecule,
    Boundedness,
    PartialSums,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::Series,
        Suite::MoleculeLp,
        Suite::Mu,
        Suite::Fourier,
        Suite::AtomToMolecule,
        Suite::Boundedness,
        Suite::PartialSums,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Series => "series",
            Suite::MoleculeLp => "molecule-lp",
            Suite::Mu => "mu",
            Suite::Fourier => "fourier",
            Suite::AtomToMolecule => "atom-to-molecule",
            Suite::Boundedness => "boundedness",
            Suite::PartialSums => "partial-sums",
        }
    }

    /// Parses a suite name; `all` expands to every suite.
    pub fn parse_selection(s: &str) -> Result<Vec<Suite>, String> {
        if s == "all" {
            return Ok(Suite::ALL.to_vec());
        }
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .map(|x| vec![x])
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
                format!("unknown suite {s:?} (expected one of {}, all)", names.join(", "))
            })
    }

    pub fn run(self, cfg: &ExperimentConfig, seed: u64) -> Result<VerificationReport> {
        let tol = &cfg.tolerances;
        match self {
            Suite::Series => check_series_lemma(&cfg.series, seed),
            Suite::MoleculeLp => check_molecule_lp(&cfg.molecule_lp, tol, seed),
            Suite::Mu => check_mu_decay(&cfg.mu, tol, seed),
            Suite::Fourier => check_atom_fourier(&cfg.fourier, tol, seed),
            Suite::AtomToMolecule => check_atom_to_molecule(&cfg.atom_to_molecule, tol, seed),
            Suite::Boundedness => check_boundedness(cfg, seed),
            Suite::PartialSums => check_partial_sum_convergence(&cfg.partial_sums, cfg.backend, tol, seed),
        }
    }
}

/// Runs the suites in order and returns their reports with wall-clock
/// seconds per suite.
pub fn run_suites(
    suites: &[Suite],
    cfg: &ExperimentConfig,
    seed: u64,
) -> Result<(Vec<VerificationReport>, BTreeMap<String, f64>)> {
    let mut reports = Vec::with_capacity(suites.len());
    let mut timings = BTreeMap::new();
    for s in suites {
        let start = Instant::now();
        reports.push(s.run(cfg, seed)?);
        timings.insert(s.name().to_string(), start.elapsed().as_secs_f64());
    }
    Ok((reports, timings))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_parse() {
        assert_eq!(Suite::parse_selection("all").unwrap().len(), 7);
        assert_eq!(Suite::parse_selection("mu").unwrap(), vec![Suite::Mu]);
        assert!(Suite::parse_selection("nope").is_err());
    }

    #[test]
    fn helpers() {
        assert_eq!(drift(0.0, 0.0), 0.0);
        assert!((drift(1.0, 1.1) - 0.1 / 1.1).abs() < 1e-15);
        assert_eq!(spread(&[1.0, 2.0, 4.0]), 4.0);
        assert!(spread(&[0.0, 1.0]).is_nan());
        assert_ne!(stream_seed(1, 2), stream_seed(1, 3));
        assert_eq!(stream_seed(1, 2), stream_seed(1, 2));
    }
}

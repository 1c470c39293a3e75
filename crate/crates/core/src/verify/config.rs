//! Experiment configuration: parameters of every suite, with validation of
//! the exponent relations before anything is computed.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hardy::{Characterization, MaximalGrid};
use crate::lattice::{exponent_serde, moment_degree, potential_moment_order, ExponentConfig};
use crate::operators::Backend;

/// Relative slack when checking that a derived exponent matches its formula.
const RELATION_SLACK: f64 = 1e-12;

fn violation(relation: impl Into<String>) -> Error {
    Error::Config {
        relation: relation.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Agreement between two computations of the same quantity.
    pub oracle: f64,
    /// Agreement with closed-form expressions.
    pub analytic: f64,
    /// Largest relative change allowed by stability checks.
    pub drift: f64,
    /// Largest max/min ratio allowed across cube sizes.
    pub spread: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            oracle: 1e-10,
            analytic: 1e-6,
            drift: 0.05,
            spread: 2.0,
        }
    }
}

/// Exponents of the atom-to-molecule experiment. `q`, `p0` and `L` are
/// derived; when present in the input they must agree with the derivation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialExponents {
    pub n: usize,
    pub p: f64,
    #[serde(with = "exponent_serde")]
    pub q0: f64,
    pub r: f64,
    pub alpha: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p0: Option<f64>,
    #[serde(default, rename = "L", skip_serializing_if = "Option::is_none")]
    pub moment_order: Option<u32>,
}

impl Default for PotentialExponents {
    fn default() -> Self {
        // r = 7/8 gives L = 3, the largest moment order for which a cube of
        // half-width 1 still carries a nonzero atom in two dimensions.
        PotentialExponents {
            n: 2,
            p: 0.8,
            q0: 4.0,
            r: 0.875,
            alpha: 0.5,
            q: None,
            p0: None,
            moment_order: None,
        }
    }
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= RELATION_SLACK * a.abs().max(b.abs()).max(1.0)
}

impl PotentialExponents {
    /// Checks every relation the atom-to-molecule statement needs and
    /// returns the completed exponent set.
    pub fn resolve(&self) -> Result<ExponentConfig> {
        let n = self.n;
        let nf = n as f64;
        if n < 2 {
            return Err(violation(format!("n ≥ 2 (got n = {n})")));
        }
        if !(self.alpha > 0.0 && self.alpha < nf / (nf - 1.0)) {
            return Err(violation(format!(
                "0 < α < n/(n−1) = {} (got α = {})",
                nf / (nf - 1.0),
                self.alpha
            )));
        }
        check_p_lower(n, self.p)?;
        let upper = nf / (nf + self.alpha);
        if self.p > upper * (1.0 + RELATION_SLACK) {
            return Err(violation(format!("p ≤ n/(n+α) = {upper} (got p = {})", self.p)));
        }
        let q0_min = nf / (nf - self.alpha);
        if !(self.q0 > q0_min && self.q0.is_finite()) {
            return Err(violation(format!(
                "n/(n−α) < q₀ < ∞ with n/(n−α) = {q0_min} (got q₀ = {})",
                self.q0
            )));
        }
        let exps = ExponentConfig::for_potential(n, self.p, self.q0, self.r, self.alpha)
            .map_err(|e| violation(e.to_string()))?;
        let gap = 1.0 / exps.q - 1.0 / self.q0;
        if !(self.r - gap > RELATION_SLACK * gap.abs().max(1.0)) {
            return Err(violation(format!(
                "r > 1/q − 1/q₀ = {gap} (strict; got r = {})",
                self.r
            )));
        }
        if let Some(q) = self.q {
            if !close(q, exps.q) {
                return Err(violation(format!("1/q = 1/p − α/n gives q = {}, config has q = {q}", exps.q)));
            }
        }
        if let Some(p0) = self.p0 {
            if !close(p0, exps.p0) {
                return Err(violation(format!(
                    "1/p₀ = 1/q₀ + α/n gives p₀ = {}, config has p₀ = {p0}",
                    exps.p0
                )));
            }
        }
        let l = potential_moment_order(n, self.r, self.q0, self.alpha);
        if let Some(given) = self.moment_order {
            if given != l {
                return Err(violation(format!("L = ⌊n(r + 1/q₀) + α⌋ + 1 = {l}, config has L = {given}")));
            }
        }
        Ok(exps)
    }

    /// The same exponents with the derived fields filled in.
    pub fn normalized(&self) -> Result<Self> {
        let e = self.resolve()?;
        Ok(PotentialExponents {
            q: Some(e.q),
            p0: Some(e.p0),
            moment_order: Some(e.moment_order),
            ..*self
        })
    }
}

fn check_p_lower(n: usize, p: f64) -> Result<()> {
    let lower = (n as f64 - 1.0) / n as f64;
    if !(p > lower) {
        return Err(violation(format!(
            "p > (n−1)/n is required; p ≤ (n−1)/n = {lower} (got p = {p})"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesConfig {
    pub dims: Vec<usize>,
    pub eps: Vec<f64>,
    pub cutoffs: Vec<u64>,
    /// Shell radius up to which the partial sum is enumerated; per-dimension
    /// default when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub refine_to: Option<u64>,
}

impl Default for SeriesConfig {
    fn default() -> Self {
        SeriesConfig {
            dims: vec![1, 2, 3],
            eps: vec![0.5, 1.0, 2.0, 4.0],
            cutoffs: vec![1, 2, 4],
            refine_to: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MoleculeLpConfig {
    pub n: usize,
    pub p: f64,
    #[serde(with = "exponent_serde")]
    pub p0: f64,
    pub r: f64,
    pub count: usize,
    /// Half-widths of the cubes carrying the underlying atoms.
    pub cube_sizes: Vec<u64>,
}

impl Default for MoleculeLpConfig {
    fn default() -> Self {
        MoleculeLpConfig {
            n: 2,
            p: 0.8,
            p0: 2.0,
            r: 0.875,
            count: 200,
            cube_sizes: vec![1, 2, 4, 8],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MuConfig {
    pub n: usize,
    pub alphas: Vec<f64>,
    pub radii: Vec<f64>,
    pub samples: usize,
    /// Sample points satisfy `|x| ≥ min_norm`.
    pub min_norm: f64,
}

impl Default for MuConfig {
    fn default() -> Self {
        MuConfig {
            n: 2,
            alphas: vec![0.5, 1.0, 1.5],
            radii: vec![16.0, 32.0, 64.0, 128.0, 256.0],
            samples: 48,
            min_norm: 1.0 / 32.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FourierConfig {
    pub n: usize,
    pub p: f64,
    #[serde(with = "exponent_serde")]
    pub p0: f64,
    pub orders: Vec<u32>,
    pub cube_sizes: Vec<u64>,
    pub atoms_per_size: usize,
    pub samples: usize,
}

impl Default for FourierConfig {
    fn default() -> Self {
        FourierConfig {
            n: 2,
            p: 0.8,
            p0: 2.0,
            orders: vec![0, 1, 2, 3],
            cube_sizes: vec![1, 2, 4],
            atoms_per_size: 2,
            samples: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AtomToMoleculeConfig {
    pub exponents: PotentialExponents,
    pub cube_sizes: Vec<u64>,
    pub atoms_per_size: usize,
}

impl Default for AtomToMoleculeConfig {
    fn default() -> Self {
        AtomToMoleculeConfig {
            exponents: PotentialExponents::default(),
            cube_sizes: vec![1, 2, 4, 8, 16],
            atoms_per_size: 3,
        }
    }
}

/// One `(n, p, α)` setting of the boundedness experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundednessRegime {
    pub name: String,
    pub n: usize,
    pub p: f64,
    pub alpha: f64,
    /// Moment order of the input atoms.
    #[serde(rename = "L")]
    pub moment_order: u32,
}

impl BoundednessRegime {
    /// `1/q = 1/p − α/n`.
    pub fn q(&self) -> f64 {
        1.0 / (1.0 / self.p - self.alpha / self.n as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let nf = self.n as f64;
        if self.n == 0 {
            return Err(violation("n ≥ 1"));
        }
        if !(self.alpha > 0.0 && self.alpha < nf) {
            return Err(violation(format!("0 < α < n (got α = {}, n = {})", self.alpha, self.n)));
        }
        check_p_lower(self.n, self.p)?;
        if !(self.p < nf / self.alpha) {
            return Err(violation(format!("p < n/α = {} (got p = {})", nf / self.alpha, self.p)));
        }
        if self.p > 1.0 {
            return Err(violation(format!(
                "atomic inputs need p ≤ 1 (got p = {}); for p > 1 the input space is ℓ^p",
                self.p
            )));
        }
        let d_p = moment_degree(self.n, self.p);
        if self.moment_order < d_p {
            return Err(violation(format!(
                "L ≥ d_p = ⌊n(1/p − 1)⌋ = {d_p} (got L = {})",
                self.moment_order
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundednessConfig {
    pub regimes: Vec<BoundednessRegime>,
    pub cube_sizes: Vec<u64>,
    /// Evaluation window radii, as multiples of the cube half-width.
    pub window_multipliers: Vec<u64>,
    pub atoms: usize,
    pub sums: usize,
    pub terms_per_sum: usize,
}

impl Default for BoundednessConfig {
    fn default() -> Self {
        BoundednessConfig {
            regimes: vec![
                BoundednessRegime {
                    name: "hardy-to-hardy".into(),
                    n: 2,
                    p: 0.8,
                    alpha: 0.25,
                    moment_order: 3,
                },
                BoundednessRegime {
                    name: "hardy-to-lq".into(),
                    n: 2,
                    p: 1.0,
                    alpha: 0.5,
                    moment_order: 3,
                },
            ],
            cube_sizes: vec![1, 2, 4],
            window_multipliers: vec![64, 128],
            atoms: 50,
            sums: 20,
            terms_per_sum: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartialSumsConfig {
    pub n: usize,
    pub p: f64,
    #[serde(with = "exponent_serde")]
    pub p0: f64,
    pub r: f64,
    pub terms: usize,
    /// Molecule norms decay like `ratio^k`.
    pub ratio: f64,
    pub cube_halfwidth: u64,
    pub window_radius: u64,
}

impl Default for PartialSumsConfig {
    fn default() -> Self {
        PartialSumsConfig {
            n: 2,
            p: 0.8,
            p0: 2.0,
            r: 0.875,
            terms: 10,
            ratio: 0.5,
            cube_halfwidth: 2,
            window_radius: 96,
        }
    }
}

/// Everything a verification run depends on besides the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Grid for maximal-function evaluations; sized from the window when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t_grid: Option<MaximalGrid>,
    pub characterization: Characterization,
    pub backend: Backend,
    pub tolerances: Tolerances,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub series: SeriesConfig,
    pub molecule_lp: MoleculeLpConfig,
    pub mu: MuConfig,
    pub fourier: FourierConfig,
    pub atom_to_molecule: AtomToMoleculeConfig,
    pub boundedness: BoundednessConfig,
    pub partial_sums: PartialSumsConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            t_grid: None,
            characterization: Characterization::Riesz,
            backend: Backend::Fast,
            tolerances: Tolerances::default(),
            output: None,
            series: SeriesConfig::default(),
            molecule_lp: MoleculeLpConfig::default(),
            mu: MuConfig::default(),
            fourier: FourierConfig::default(),
            atom_to_molecule: AtomToMoleculeConfig::default(),
            boundedness: BoundednessConfig::default(),
            partial_sums: PartialSumsConfig::default(),
        }
    }
}

fn nonempty<T>(v: &[T], what: &str) -> Result<()> {
    if v.is_empty() {
        return Err(violation(format!("{what} must be nonempty")));
    }
    Ok(())
}

fn check_molecule(n: usize, p: f64, p0: f64, r: f64, what: &str) -> Result<()> {
    if n == 0 {
        return Err(violation(format!("{what}: n ≥ 1")));
    }
    if !(p > 0.0 && p <= 1.0 && p0 > 1.0) {
        return Err(violation(format!("{what}: 0 < p ≤ 1 < p₀ (got p = {p}, p₀ = {p0})")));
    }
    let gap = 1.0 / p - 1.0 / p0;
    if !(r - gap > RELATION_SLACK * gap.max(1.0)) {
        return Err(violation(format!("{what}: r > 1/p − 1/p₀ = {gap} (strict; got r = {r})")));
    }
    Ok(())
}

impl ExperimentConfig {
    /// Checks every parameter relation; the error names the violated one.
    pub fn validate(&self) -> Result<()> {
        if let Some(g) = &self.t_grid {
            g.validate().map_err(|e| violation(format!("t-grid: {e}")))?;
        }
        let t = &self.tolerances;
        if !(t.oracle > 0.0 && t.analytic > 0.0 && t.drift > 0.0 && t.spread > 1.0) {
            return Err(violation("tolerances must be positive, with spread > 1"));
        }

        let s = &self.series;
        nonempty(&s.dims, "series.dims")?;
        nonempty(&s.eps, "series.eps")?;
        nonempty(&s.cutoffs, "series.cutoffs")?;
        if s.dims.contains(&0) {
            return Err(violation("series: n ≥ 1"));
        }
        if s.eps.iter().any(|e| !(*e > 0.0)) {
            return Err(violation("series: ε > 0"));
        }
        if s.cutoffs.contains(&0) {
            return Err(violation("series: N ≥ 1"));
        }

        let m = &self.molecule_lp;
        check_molecule(m.n, m.p, m.p0, m.r, "molecule-lp")?;
        nonempty(&m.cube_sizes, "molecule-lp.cube_sizes")?;
        if m.count < 2 {
            return Err(violation("molecule-lp: at least two molecules are needed to compare sample halves"));
        }

        let mu = &self.mu;
        nonempty(&mu.alphas, "mu.alphas")?;
        nonempty(&mu.radii, "mu.radii")?;
        if mu.n == 0 {
            return Err(violation("mu: n ≥ 1"));
        }
        if let Some(a) = mu.alphas.iter().find(|a| !(**a > 0.0 && **a < mu.n as f64)) {
            return Err(violation(format!("mu: 0 < α < n (got α = {a})")));
        }
        if mu.radii.iter().any(|r| !(*r > 0.0 && r.is_finite())) {
            return Err(violation("mu: radii must be positive"));
        }
        if !(mu.min_norm > 0.0 && mu.min_norm < 0.5) {
            return Err(violation("mu: 0 < min_norm < 1/2"));
        }

        let f = &self.fourier;
        if f.n == 0 {
            return Err(violation("fourier: n ≥ 1"));
        }
        if !(f.p > 0.0 && f.p <= 1.0 && f.p0 > 1.0 && f.p0.is_finite()) {
            return Err(violation(format!(
                "fourier: 0 < p ≤ 1 < p₀ < ∞ (got p = {}, p₀ = {})",
                f.p, f.p0
            )));
        }
        let d_p = moment_degree(f.n, f.p);
        if let Some(l) = f.orders.iter().find(|l| **l < d_p) {
            return Err(violation(format!("fourier: L ≥ d_p = {d_p} (got L = {l})")));
        }
        nonempty(&f.orders, "fourier.orders")?;
        nonempty(&f.cube_sizes, "fourier.cube_sizes")?;

        let a = &self.atom_to_molecule;
        a.exponents.resolve()?;
        nonempty(&a.cube_sizes, "atom_to_molecule.cube_sizes")?;
        if a.cube_sizes.contains(&0) {
            return Err(violation("atom_to_molecule: cube half-widths N ≥ 1"));
        }

        let b = &self.boundedness;
        nonempty(&b.regimes, "boundedness.regimes")?;
        for r in &b.regimes {
            r.validate()
                .map_err(|e| violation(format!("boundedness regime {:?}: {e}", r.name)))?;
        }
        nonempty(&b.cube_sizes, "boundedness.cube_sizes")?;
        if b.window_multipliers.len() < 2 {
            return Err(violation("boundedness: at least two window multipliers are needed for the doubling test"));
        }
        if b.window_multipliers.iter().any(|m| *m < 4) {
            return Err(violation("boundedness: window multipliers must be ≥ 4"));
        }

        let ps = &self.partial_sums;
        check_molecule(ps.n, ps.p, ps.p0, ps.r, "partial-sums")?;
        if !(ps.ratio > 0.0 && ps.ratio < 1.0) {
            return Err(violation("partial-sums: 0 < ratio < 1"));
        }
        if ps.terms < 2 {
            return Err(violation("partial-sums: at least two terms"));
        }
        if ps.window_radius < 4 * ps.cube_halfwidth + 4 {
            return Err(violation("partial-sums: window radius must exceed the molecule spread"));
        }
        Ok(())
    }

    /// Validated copy with derived exponents filled in.
    pub fn normalized(&self) -> Result<Self> {
        self.validate()?;
        let mut out = self.clone();
        out.atom_to_molecule.exponents = self.atom_to_molecule.exponents.normalized()?;
        Ok(out)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(s)?;
        cfg.normalized()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Reads and validates a configuration file. Parse failures and relation
/// violations are reported as distinct errors.
pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)?;
    let cfg: ExperimentConfig = serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })?;
    cfg.normalized()
}

//! Atoms (cube-supported, normalized, with vanishing moments) and molecules
//! (finite molecule norm, vanishing moments up to `d_p`).
//!
//! Generated atoms carry an exact integer shape alongside their float data so
//! their moments can be certified to vanish in rational arithmetic.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::lattice::exponent_serde;
use crate::lattice::{
    lp_norm, lp_norm_values, molecule_theta, moment_degree, weighted_lp_norm, DiscreteCube, GridFunction,
    LatticePoint,
};
use crate::sum::pairwise_sum;

/// Magnitude of the integer samples drawn before projection.
const DRAW_RANGE: i64 = 1 << 20;
const SIZE_SLACK: f64 = 1e-12;
const MOMENT_SLACK: f64 = 1e-12;

/// Exponents `(p, p₀, L)` of an atom.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AtomParams {
    pub p: f64,
    #[serde(with = "exponent_serde")]
    pub p0: f64,
    #[serde(rename = "L")]
    pub moment_order: u32,
}

impl AtomParams {
    pub fn new(p: f64, p0: f64, moment_order: u32) -> Result<Self> {
        let params = AtomParams { p, p0, moment_order };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(domain(format!("atoms need 0 < p ≤ 1, got p = {}", self.p)));
        }
        if !(self.p0 > self.p && self.p0 >= 1.0) {
            return Err(domain(format!(
                "atoms need p₀ ≥ 1 and p₀ > p, got p = {}, p₀ = {}",
                self.p, self.p0
            )));
        }
        Ok(())
    }

    /// `(#Q)^{1/p₀ − 1/p}`, the size bound of clause (a2).
    pub fn size_bound(&self, cardinality: u64) -> f64 {
        (cardinality as f64).powf(1.0 / self.p0 - 1.0 / self.p)
    }
}

/// Exact integer profile of an atom: `data(j) = fl(scale · fl(shape(j) / max|shape|))`
/// over the cube window in row-major order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExactShape {
    #[serde(with = "bigint_strings")]
    pub shape: Vec<BigInt>,
    pub scale: f64,
}

impl ExactShape {
    /// The float values this shape rounds to.
    pub fn to_floats(&self) -> Vec<f64> {
        let max = self.shape.iter().map(|v| v.abs()).max().unwrap_or_else(BigInt::zero);
        if max.is_zero() {
            return vec![0.0; self.shape.len()];
        }
        self.shape
            .iter()
            .map(|v| self.scale * BigRational::new(v.clone(), max.clone()).to_f64().unwrap_or(0.0))
            .collect()
    }
}

mod bigint_strings {
    use num_bigint::BigInt;
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(v.iter().map(|x| x.to_string()))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        Vec::<String>::deserialize(d)?
            .iter()
            .map(|s| s.parse().map_err(de::Error::custom))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub data: GridFunction,
    pub cube: DiscreteCube,
    pub params: AtomParams,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactShape>,
}

impl Atom {
    /// An atom from raw data, without an exact shape. Does not validate.
    pub fn new(data: GridFunction, cube: DiscreteCube, params: AtomParams) -> Self {
        Atom {
            data,
            cube,
            params,
            seed: None,
            exact: None,
        }
    }

    /// Same atom with data and cube moved so the cube center sits at the origin.
    pub fn centered_at_origin(&self) -> Atom {
        let shift = -&self.cube.center();
        Atom {
            data: self.data.translate(&shift),
            cube: DiscreteCube::from_corner(&self.cube.lower().clone() + &shift, self.cube.side())
                .expect("side is positive"),
            params: self.params,
            seed: self.seed,
            exact: self.exact.clone(),
        }
    }

    /// Atom coefficients as exact rationals: the shape when present, else the
    /// float data read exactly. Row-major over the cube window.
    fn exact_values(&self) -> Option<Vec<BigRational>> {
        let shape = self.exact.as_ref()?;
        (shape.shape.len() == self.cube.window().len())
            .then(|| shape.shape.iter().map(|v| BigRational::from_integer(v.clone())).collect())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

/// Clauses of the atom definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Clause {
    /// Support inside the cube.
    A1,
    /// Size normalization.
    A2,
    /// Vanishing moments.
    A3,
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Clause::A1 => "a1",
            Clause::A2 => "a2",
            Clause::A3 => "a3",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub clause: Clause,
    pub detail: String,
}

/// How (a3) was decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MomentCheck {
    /// Exact arithmetic on the stored integer shape.
    ExactShape,
    /// Exact arithmetic on the float values read as dyadic rationals.
    ExactData,
    /// Float moments compared against `1e−12·‖a‖₁·N^{|β|}`.
    Slack,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomValidation {
    pub violations: Vec<Violation>,
    pub moment_check: MomentCheck,
    pub size: f64,
    pub size_bound: f64,
}

impl AtomValidation {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn violated(&self, clause: Clause) -> bool {
        self.violations.iter().any(|v| v.clause == clause)
    }
}

/// Multi-indices `β ∈ N^n` with `|β| ≤ degree`, graded then lexicographic.
pub fn multi_indices(n: usize, degree: u32) -> Vec<Vec<u32>> {
    fn rec(n: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == n - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            rec(n, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if n == 0 {
        return vec![vec![]];
    }
    for d in 0..=degree {
        rec(n, d, &mut Vec::with_capacity(n), &mut out);
    }
    out
}

fn monomial_int(j: &[i64], beta: &[u32]) -> BigInt {
    j.iter()
        .zip(beta)
        .fold(BigInt::one(), |acc, (x, e)| acc * BigInt::from(*x).pow(*e))
}

fn monomial_f64(j: &[i64], beta: &[u32]) -> f64 {
    j.iter().zip(beta).map(|(x, e)| (*x as f64).powi(*e as i32)).product()
}

/// `Σ_j j^β b(j)` in floating point.
pub fn moment_sum(b: &GridFunction, beta: &[u32]) -> f64 {
    let terms: Vec<f64> = b
        .support()
        .iter()
        .map(|(j, v)| monomial_f64(j, beta) * v)
        .collect();
    pairwise_sum(&terms)
}

/// `Σ_j j^β b(j)` exactly, reading each float as the rational it represents.
pub fn moment_sum_exact(b: &GridFunction, beta: &[u32]) -> BigRational {
    b.support()
        .iter()
        .map(|(j, v)| {
            BigRational::from_float(*v).expect("grid values are finite") * BigRational::from_integer(monomial_int(j, beta))
        })
        .fold(BigRational::zero(), |a, x| a + x)
}

fn moment_sum_rational(points: &[LatticePoint], values: &[BigRational], beta: &[u32]) -> BigRational {
    points
        .iter()
        .zip(values)
        .filter(|(_, v)| !v.is_zero())
        .map(|(j, v)| v * BigRational::from_integer(monomial_int(j.coords(), beta)))
        .fold(BigRational::zero(), |a, x| a + x)
}

/// Checks clauses (a1)–(a3). Violations are reported, never raised.
pub fn validate_atom(a: &Atom) -> AtomValidation {
    let mut violations = Vec::new();
    let cube = &a.cube;
    let params = &a.params;
    if let Err(e) = params.validate() {
        violations.push(Violation {
            clause: Clause::A2,
            detail: e.to_string(),
        });
    }

    if a.data.dim() != cube.dim() {
        violations.push(Violation {
            clause: Clause::A1,
            detail: format!("data has dimension {}, cube has {}", a.data.dim(), cube.dim()),
        });
        return AtomValidation {
            violations,
            moment_check: MomentCheck::Slack,
            size: f64::NAN,
            size_bound: f64::NAN,
        };
    }
    let outside = a.data.support().into_iter().filter(|(j, _)| !cube.contains(j)).count();
    if outside > 0 {
        violations.push(Violation {
            clause: Clause::A1,
            detail: format!("{outside} nonzero values lie outside the cube"),
        });
    }

    let size = lp_norm(&a.data, params.p0).unwrap_or(f64::NAN);
    let size_bound = params.size_bound(cube.cardinality());
    if !(size <= size_bound * (1.0 + SIZE_SLACK)) {
        violations.push(Violation {
            clause: Clause::A2,
            detail: format!("‖a‖_{{p₀}} = {size} exceeds (#Q)^(1/p₀ − 1/p) = {size_bound}"),
        });
    }

    let betas = multi_indices(cube.dim(), params.moment_order);
    let moment_check = match a.exact_values() {
        Some(exact) if exact_shape_matches(a) => {
            let points: Vec<LatticePoint> = cube.window().points().collect();
            for beta in &betas {
                let m = moment_sum_rational(&points, &exact, beta);
                if !m.is_zero() {
                    violations.push(Violation {
                        clause: Clause::A3,
                        detail: format!("exact moment β = {beta:?} of the shape is {m}"),
                    });
                }
            }
            MomentCheck::ExactShape
        }
        _ => {
            let exact_zero = betas.iter().all(|beta| moment_sum_exact(&a.data, beta).is_zero());
            if exact_zero {
                MomentCheck::ExactData
            } else {
                let l1 = lp_norm(&a.data, 1.0).unwrap_or(f64::NAN);
                let reach = a
                    .data
                    .support()
                    .iter()
                    .flat_map(|(j, _)| j.iter().map(|x| x.unsigned_abs()).collect::<Vec<_>>())
                    .max()
                    .unwrap_or(0)
                    .max(1) as f64;
                for beta in &betas {
                    let m = moment_sum(&a.data, beta);
                    let order: u32 = beta.iter().sum();
                    let slack = MOMENT_SLACK * l1 * reach.powi(order as i32);
                    if !(m.abs() <= slack) {
                        violations.push(Violation {
                            clause: Clause::A3,
                            detail: format!("moment β = {beta:?} is {m:e}, beyond slack {slack:e}"),
                        });
                    }
                }
                MomentCheck::Slack
            }
        }
    };

    AtomValidation {
        violations,
        moment_check,
        size,
        size_bound,
    }
}

/// The float data must be exactly what the stored shape rounds to, on the cube.
fn exact_shape_matches(a: &Atom) -> bool {
    let Some(shape) = &a.exact else { return false };
    let win = a.cube.window();
    if shape.shape.len() != win.len() {
        return false;
    }
    let floats = shape.to_floats();
    let on_cube = win
        .points()
        .zip(&floats)
        .all(|(j, v)| a.data.get(j.coords()) == *v);
    let off_cube = a.data.support().iter().all(|(j, _)| a.cube.contains(j));
    on_cube && off_cube
}

/// Indices of a maximal linearly independent set of monomials on the points,
/// with the inverse-free data needed to project: returns the selected
/// multi-indices.
fn independent_monomials(mono: &[Vec<BigInt>], k: usize) -> Vec<usize> {
    // Incremental row echelon form of the monomial columns, one column at a time.
    let mut basis: Vec<(usize, Vec<BigRational>)> = Vec::new();
    let mut chosen = Vec::new();
    for col in 0..k {
        let mut v: Vec<BigRational> = mono.iter().map(|row| BigRational::from_integer(row[col].clone())).collect();
        for (pivot, b) in &basis {
            if !v[*pivot].is_zero() {
                let f = v[*pivot].clone() / b[*pivot].clone();
                for (x, y) in v.iter_mut().zip(b) {
                    if !y.is_zero() {
                        *x -= &f * y;
                    }
                }
            }
        }
        if let Some(pivot) = v.iter().position(|x| !x.is_zero()) {
            basis.push((pivot, v));
            chosen.push(col);
        }
    }
    chosen
}

/// Solves `G x = rhs` for nonsingular `G` by Gauss–Jordan elimination.
fn solve_rational(mut g: Vec<Vec<BigRational>>, mut rhs: Vec<BigRational>) -> Vec<BigRational> {
    let k = rhs.len();
    for c in 0..k {
        let p = (c..k).find(|&r| !g[r][c].is_zero()).expect("Gram matrix is nonsingular");
        g.swap(c, p);
        rhs.swap(c, p);
        let inv = g[c][c].recip();
        for x in g[c].iter_mut() {
            *x *= &inv;
        }
        rhs[c] *= &inv;
        for r in 0..k {
            if r != c && !g[r][c].is_zero() {
                let f = g[r][c].clone();
                let row_c = g[c].clone();
                for (x, y) in g[r].iter_mut().zip(&row_c) {
                    *x -= &f * y;
                }
                let t = &f * &rhs[c];
                rhs[r] -= t;
            }
        }
    }
    rhs
}

/// Exact projector onto the functions on a point set that are orthogonal to
/// every polynomial of degree ≤ L.
struct MomentProjector {
    mono: Vec<Vec<BigInt>>,
    gram: Vec<Vec<BigRational>>,
    free_dim: usize,
}

impl MomentProjector {
    fn new(cube: &DiscreteCube, order: u32) -> Self {
        let center = cube.center();
        let betas = multi_indices(cube.dim(), order);
        let all: Vec<Vec<BigInt>> = cube
            .window()
            .points()
            .map(|j| {
                let x: Vec<i64> = j.coords().iter().zip(center.coords()).map(|(a, c)| a - c).collect();
                betas.iter().map(|b| monomial_int(&x, b)).collect()
            })
            .collect();
        let keep = independent_monomials(&all, betas.len());
        let mono: Vec<Vec<BigInt>> = all
            .into_iter()
            .map(|row| keep.iter().map(|&c| row[c].clone()).collect())
            .collect();
        let k = keep.len();
        let mut gram = vec![vec![BigRational::zero(); k]; k];
        for row in &mono {
            for a in 0..k {
                for b in a..k {
                    gram[a][b] += BigRational::from_integer(&row[a] * &row[b]);
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                gram[a][b] = gram[b][a].clone();
            }
        }
        MomentProjector {
            free_dim: mono.len() - k,
            mono,
            gram,
        }
    }

    /// `v − Π v` scaled to coprime integers.
    fn project(&self, v: &[i64]) -> Vec<BigInt> {
        let k = self.gram.len();
        let mut rhs = vec![BigRational::zero(); k];
        for (row, x) in self.mono.iter().zip(v) {
            if *x != 0 {
                for (r, m) in rhs.iter_mut().zip(row) {
                    *r += BigRational::from_integer(m * x);
                }
            }
        }
        let coeffs = solve_rational(self.gram.clone(), rhs);
        let denom = coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let scaled: Vec<BigInt> = coeffs.iter().map(|c| c.numer() * (&denom / c.denom())).collect();
        let mut out: Vec<BigInt> = self
            .mono
            .iter()
            .zip(v)
            .map(|(row, x)| {
                let fit: BigInt = row.iter().zip(&scaled).map(|(m, c)| m * c).sum();
                &denom * x - fit
            })
            .collect();
        let g = out.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
        if !g.is_zero() && !g.is_one() {
            for x in out.iter_mut() {
                *x /= &g;
            }
        }
        out
    }
}

/// Draws a random atom on the cube: integer samples, exact projection onto
/// the moment-free subspace, then scaling so (a2) holds with equality.
pub fn generate_atom(cube: &DiscreteCube, params: AtomParams, seed: u64) -> Result<Atom> {
    params.validate()?;
    let projector = MomentProjector::new(cube, params.moment_order);
    if projector.free_dim == 0 {
        return Err(Error::Infeasible(format!(
            "a cube of side {} in dimension {} carries no nonzero function with vanishing moments of order ≤ {}",
            cube.side(),
            cube.dim(),
            params.moment_order
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let len = cube.window().len();
    let shape = loop {
        let draw: Vec<i64> = (0..len).map(|_| rng.random_range(-DRAW_RANGE..=DRAW_RANGE)).collect();
        let s = projector.project(&draw);
        if s.iter().any(|x| !x.is_zero()) {
            break s;
        }
    };
    let mut exact = ExactShape { shape, scale: 1.0 };
    let unit = exact.to_floats();
    let target = params.size_bound(cube.cardinality());
    exact.scale = target / lp_norm_values(&unit, params.p0)?;
    // Rounding may leave the norm a hair above the bound; pull it back.
    for _ in 0..4 {
        let norm = lp_norm_values(&exact.to_floats(), params.p0)?;
        if norm <= target {
            break;
        }
        exact.scale *= 1.0 - f64::EPSILON;
    }
    let data = GridFunction::from_values(cube.window(), exact.to_floats())?;
    Ok(Atom {
        data,
        cube: cube.clone(),
        params,
        seed: Some(seed),
        exact: Some(exact),
    })
}

/// [`generate_atom`] for many seeds in parallel, in seed order.
pub fn generate_atoms(cube: &DiscreteCube, params: AtomParams, seeds: &[u64]) -> Result<Vec<Atom>> {
    seeds.par_iter().map(|s| generate_atom(cube, params, *s)).collect()
}

/// Exponents `(p, p₀, r)` of a molecule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoleculeParams {
    pub p: f64,
    #[serde(with = "exponent_serde")]
    pub p0: f64,
    pub r: f64,
}

impl MoleculeParams {
    pub fn new(p: f64, p0: f64, r: f64) -> Result<Self> {
        let params = MoleculeParams { p, p0, r };
        params.theta()?;
        Ok(params)
    }

    pub fn theta(&self) -> Result<f64> {
        if !(self.p > 0.0 && self.p0 > self.p) {
            return Err(domain(format!(
                "molecules need 0 < p < p₀, got p = {}, p₀ = {}",
                self.p, self.p0
            )));
        }
        molecule_theta(self.p, self.p0, self.r)
    }
}

/// `N(M) = ‖M‖_{p₀}^{1−θ} · ‖|· − m₀|^{nr} M‖_{p₀}^θ` and `θ`.
pub fn molecule_norm(m: &GridFunction, center: &LatticePoint, params: MoleculeParams) -> Result<(f64, f64)> {
    let theta = params.theta()?;
    let size = lp_norm(m, params.p0)?;
    let decay = weighted_lp_norm(m, params.p0, center, m.dim() as f64 * params.r)?;
    let norm = if size == 0.0 || decay == 0.0 {
        0.0
    } else {
        size.powf(1.0 - theta) * decay.powf(theta)
    };
    Ok((norm, theta))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Molecule {
    pub data: GridFunction,
    pub center: LatticePoint,
    pub params: MoleculeParams,
    pub norm: f64,
    pub theta: f64,
}

impl Molecule {
    pub fn new(data: GridFunction, center: LatticePoint, params: MoleculeParams) -> Result<Self> {
        let (norm, theta) = molecule_norm(&data, &center, params)?;
        Ok(Molecule {
            data,
            center,
            params,
            norm,
            theta,
        })
    }

    /// `d_p` for this molecule's `p`.
    pub fn moment_degree(&self) -> u32 {
        moment_degree(self.data.dim(), self.params.p)
    }

    /// Exact check of (m2) on the stored (finitely supported) data.
    pub fn moments_vanish(&self) -> bool {
        multi_indices(self.data.dim(), self.moment_degree())
            .iter()
            .all(|beta| moment_sum_exact(&self.data, beta).is_zero())
    }
}

/// Views an atom as a molecule centered at its cube center, with molecule
/// exponents `(p, p₀, r)`.
pub fn atom_as_molecule(a: &Atom, p: f64, p0: f64, r: f64) -> Result<Molecule> {
    Molecule::new(a.data.clone(), a.cube.center(), MoleculeParams::new(p, p0, r)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Window;

    fn corner_cube() -> DiscreteCube {
        DiscreteCube::from_corner(LatticePoint::origin(2), 2).unwrap()
    }

    fn dipole() -> GridFunction {
        GridFunction::from_points(&[
            (LatticePoint::new(vec![0, 0]), 0.25),
            (LatticePoint::new(vec![1, 1]), -0.25),
        ])
        .unwrap()
    }

    fn dipole_atom() -> Atom {
        Atom::new(dipole(), corner_cube(), AtomParams::new(1.0, f64::INFINITY, 0).unwrap())
    }

    #[test]
    fn multi_index_counts() {
        assert_eq!(multi_indices(2, 1), vec![vec![0, 0], vec![1, 0], vec![0, 1]]);
        assert_eq!(multi_indices(3, 2).len(), 10);
        assert_eq!(multi_indices(1, 4).len(), 5);
    }

    #[test]
    fn two_point_atom_passes() {
        let v = validate_atom(&dipole_atom());
        assert!(v.passed(), "{:?}", v.violations);
        assert_eq!(v.moment_check, MomentCheck::ExactData);
        assert_eq!(v.size, 0.25);
        assert_eq!(v.size_bound, 0.25);
    }

    #[test]
    fn doubled_atom_fails_size_only() {
        let mut a = dipole_atom();
        a.data = a.data.scale(2.0);
        let v = validate_atom(&a);
        assert!(v.violated(Clause::A2));
        assert!(!v.violated(Clause::A1));
        assert!(!v.violated(Clause::A3));
    }

    #[test]
    fn single_mass_fails_moments() {
        let mut a = dipole_atom();
        a.data = GridFunction::delta(&LatticePoint::origin(2)).scale(0.25);
        let v = validate_atom(&a);
        assert!(v.violated(Clause::A3));
        assert!(!v.violated(Clause::A2));
    }

    #[test]
    fn support_outside_cube_fails() {
        let mut a = dipole_atom();
        a.data = a.data.translate(&LatticePoint::new(vec![1, 0]));
        assert!(validate_atom(&a).violated(Clause::A1));
    }

    #[test]
    fn generated_constant_moment_atom() {
        let cube = DiscreteCube::centered(LatticePoint::origin(2), 2);
        let params = AtomParams::new(0.9, f64::INFINITY, 0).unwrap();
        for seed in 0..5 {
            let a = generate_atom(&cube, params, seed).unwrap();
            let v = validate_atom(&a);
            assert!(v.passed(), "{:?}", v.violations);
            assert_eq!(v.moment_check, MomentCheck::ExactShape);
            let target = 25f64.powf(-1.0 / 0.9);
            assert!((a.data.max_abs() - target).abs() <= 1e-12 * target);
        }
    }

    #[test]
    fn first_order_moments_vanish_exactly() {
        let cube = DiscreteCube::centered(LatticePoint::new(vec![3, -1]), 1);
        let params = AtomParams::new(0.6, 2.0, 1).unwrap();
        let a = generate_atom(&cube, params, 11).unwrap();
        let shape = a.exact_values().unwrap();
        let pts: Vec<LatticePoint> = cube.window().points().collect();
        for beta in multi_indices(2, 1) {
            assert!(moment_sum_rational(&pts, &shape, &beta).is_zero());
        }
        assert!(validate_atom(&a).passed());
    }

    #[test]
    fn distinct_seeds_give_distinct_atoms() {
        let cube = DiscreteCube::centered(LatticePoint::origin(1), 3);
        let params = AtomParams::new(1.0, f64::INFINITY, 1).unwrap();
        let a = generate_atom(&cube, params, 1).unwrap();
        let b = generate_atom(&cube, params, 2).unwrap();
        assert!(a.data.sub(&b.data).max_abs() > 0.0);
        assert_eq!(a, generate_atom(&cube, params, 1).unwrap());
    }

    #[test]
    fn infeasible_cube_is_reported() {
        let cube = DiscreteCube::from_corner(LatticePoint::origin(1), 2).unwrap();
        let params = AtomParams::new(1.0, f64::INFINITY, 1).unwrap();
        assert!(matches!(generate_atom(&cube, params, 0), Err(Error::Infeasible(_))));
    }

    #[test]
    fn degenerate_monomials_on_small_cube() {
        // On {−1,0,1}² the cubic monomials collapse; one free direction remains.
        let cube = DiscreteCube::centered(LatticePoint::origin(2), 1);
        let proj = MomentProjector::new(&cube, 3);
        assert_eq!(proj.free_dim, 1);
        let a = generate_atom(&cube, AtomParams::new(0.8, f64::INFINITY, 3).unwrap(), 5).unwrap();
        assert!(validate_atom(&a).passed());
        let proj = MomentProjector::new(&cube, 4);
        assert_eq!(proj.free_dim, 0);
    }

    #[test]
    fn moment_sum_examples() {
        let b = GridFunction::delta(&LatticePoint::new(vec![2, 3]));
        assert_eq!(moment_sum(&b, &[1, 1]), 6.0);
        assert_eq!(moment_sum_exact(&b, &[1, 1]), BigRational::from_integer(6.into()));
        let c = dipole().axpy(1.0, &GridFunction::delta(&LatticePoint::new(vec![0, 1])));
        assert_eq!(moment_sum(&c, &[0, 0]), 1.0);
    }

    #[test]
    fn dipole_molecule_norm() {
        let params = MoleculeParams::new(1.0, 2.0, 1.0).unwrap();
        let (norm, theta) = molecule_norm(&dipole(), &LatticePoint::origin(2), params).unwrap();
        assert_eq!(theta, 0.5);
        let want = (1.0 / (2.0 * 2f64.sqrt())).sqrt() * 0.5f64.sqrt();
        assert!((norm - want).abs() < 1e-15);
        assert!((norm - 0.4204).abs() < 1e-4);
        let m = atom_as_molecule(&dipole_atom(), 1.0, 2.0, 1.0).unwrap();
        assert!((m.norm - want).abs() < 1e-15);
        assert!(m.moments_vanish());
    }

    #[test]
    fn molecule_exponent_errors() {
        assert!(MoleculeParams::new(1.0, 2.0, 0.5).is_err());
        assert!(MoleculeParams::new(1.0, 2.0, 0.0).is_err());
        assert!(MoleculeParams::new(1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn molecule_norm_homogeneous_and_translation_invariant() {
        let cube = DiscreteCube::centered(LatticePoint::origin(2), 3);
        let a = generate_atom(&cube, AtomParams::new(0.8, 2.0, 0).unwrap(), 3).unwrap();
        let params = MoleculeParams::new(0.8, 2.0, 0.9).unwrap();
        let c = LatticePoint::new(vec![1, 0]);
        let (n0, _) = molecule_norm(&a.data, &c, params).unwrap();
        let (n1, _) = molecule_norm(&a.data.scale(-2.5), &c, params).unwrap();
        assert!((n1 - 2.5 * n0).abs() < 1e-12 * n0);
        let s = LatticePoint::new(vec![-40, 17]);
        let (n2, _) = molecule_norm(&a.data.translate(&s), &(&c + &s), params).unwrap();
        assert_eq!(n0, n2);
    }

    #[test]
    fn atom_json_round_trip() {
        let cube = DiscreteCube::centered(LatticePoint::origin(2), 2);
        let a = generate_atom(&cube, AtomParams::new(1.0, f64::INFINITY, 1).unwrap(), 9).unwrap();
        let back = Atom::from_json(&a.to_json().unwrap()).unwrap();
        assert_eq!(a, back);
        assert_eq!(validate_atom(&back).moment_check, MomentCheck::ExactShape);
    }

    #[test]
    fn zero_atom_is_valid_with_zero_norm() {
        let cube = DiscreteCube::centered(LatticePoint::origin(2), 1);
        let a = Atom::new(
            GridFunction::zeros(Window::centered(&LatticePoint::origin(2), 1)),
            cube,
            AtomParams::new(1.0, 2.0, 0).unwrap(),
        );
        assert!(validate_atom(&a).passed());
        assert_eq!(atom_as_molecule(&a, 1.0, 2.0, 1.0).unwrap().norm, 0.0);
    }
}

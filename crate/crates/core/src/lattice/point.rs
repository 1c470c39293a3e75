use std::fmt;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point of `Z^n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LatticePoint(Vec<i64>);

impl LatticePoint {
    pub fn new(coords: Vec<i64>) -> Self {
        assert!(!coords.is_empty(), "lattice dimension must be at least 1");
        LatticePoint(coords)
    }

    pub fn origin(n: usize) -> Self {
        LatticePoint::new(vec![0; n])
    }

    /// The `s`-th unit vector, `s` counted from 1.
    pub fn unit(n: usize, s: usize) -> Self {
        let mut c = vec![0; n];
        c[s - 1] = 1;
        LatticePoint::new(c)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn norm_inf(&self) -> i64 {
        norm_inf(&self.0)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.0)
    }

    pub fn norm_sq(&self) -> i64 {
        norm_sq(&self.0)
    }
}

impl From<Vec<i64>> for LatticePoint {
    fn from(v: Vec<i64>) -> Self {
        LatticePoint::new(v)
    }
}

impl fmt::Display for LatticePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Add for &LatticePoint {
    type Output = LatticePoint;
    fn add(self, rhs: &LatticePoint) -> LatticePoint {
        debug_assert_eq!(self.dim(), rhs.dim());
        LatticePoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &LatticePoint {
    type Output = LatticePoint;
    fn sub(self, rhs: &LatticePoint) -> LatticePoint {
        debug_assert_eq!(self.dim(), rhs.dim());
        LatticePoint(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &LatticePoint {
    type Output = LatticePoint;
    fn neg(self) -> LatticePoint {
        LatticePoint(self.0.iter().map(|a| -a).collect())
    }
}

/// `|j|_∞`.
pub fn norm_inf(j: &[i64]) -> i64 {
    j.iter().map(|c| c.abs()).max().unwrap_or(0)
}

/// `|j|²`, exact in integers.
pub fn norm_sq(j: &[i64]) -> i64 {
    j.iter().map(|c| c * c).sum()
}

/// Euclidean length `|j|`.
pub fn norm(j: &[i64]) -> f64 {
    (norm_sq(j) as f64).sqrt()
}

/// An axis-aligned box `offset + [0, extent_1) × … × [0, extent_n)`.
///
/// Points are enumerated in row-major order: the last coordinate varies
/// fastest.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Window {
    offset: LatticePoint,
    extent: Vec<usize>,
}

impl Window {
    pub fn new(offset: LatticePoint, extent: Vec<usize>) -> Result<Self> {
        if offset.dim() != extent.len() {
            return Err(Error::Window(format!(
                "offset has dimension {} but extent has {}",
                offset.dim(),
                extent.len()
            )));
        }
        if extent.contains(&0) {
            return Err(Error::Window("empty window (zero extent)".into()));
        }
        Ok(Window { offset, extent })
    }

    /// The cube `{ j : |j − center|_∞ ≤ radius }`.
    pub fn centered(center: &LatticePoint, radius: u64) -> Self {
        let r = radius as i64;
        Window {
            offset: LatticePoint(center.coords().iter().map(|c| c - r).collect()),
            extent: vec![2 * radius as usize + 1; center.dim()],
        }
    }

    pub fn dim(&self) -> usize {
        self.extent.len()
    }

    pub fn offset(&self) -> &LatticePoint {
        &self.offset
    }

    pub fn extent(&self) -> &[usize] {
        &self.extent
    }

    pub fn len(&self) -> usize {
        self.extent.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Inclusive upper corner.
    pub fn upper(&self) -> LatticePoint {
        LatticePoint(
            self.offset
                .coords()
                .iter()
                .zip(&self.extent)
                .map(|(o, e)| o + *e as i64 - 1)
                .collect(),
        )
    }

    pub fn contains(&self, j: &[i64]) -> bool {
        j.iter()
            .zip(self.offset.coords())
            .zip(&self.extent)
            .all(|((c, o), e)| *c >= *o && *c < *o + *e as i64)
    }

    pub fn contains_window(&self, other: &Window) -> bool {
        self.contains(other.offset.coords()) && self.contains(other.upper().coords())
    }

    /// Row-major linear index of `j`, if inside.
    pub fn index_of(&self, j: &[i64]) -> Option<usize> {
        let mut idx = 0usize;
        for ((c, o), e) in j.iter().zip(self.offset.coords()).zip(&self.extent) {
            let d = c - o;
            if d < 0 || d >= *e as i64 {
                return None;
            }
            idx = idx * e + d as usize;
        }
        Some(idx)
    }

    /// Writes the coordinates of the point with linear index `idx` to `out`.
    pub fn point_into(&self, mut idx: usize, out: &mut [i64]) {
        for k in (0..self.dim()).rev() {
            let e = self.extent[k];
            out[k] = self.offset.coords()[k] + (idx % e) as i64;
            idx /= e;
        }
    }

    pub fn point_at(&self, idx: usize) -> LatticePoint {
        let mut c = vec![0; self.dim()];
        self.point_into(idx, &mut c);
        LatticePoint(c)
    }

    pub fn points(&self) -> impl Iterator<Item = LatticePoint> + '_ {
        (0..self.len()).map(move |i| self.point_at(i))
    }

    pub fn translate(&self, shift: &LatticePoint) -> Window {
        Window {
            offset: &self.offset + shift,
            extent: self.extent.clone(),
        }
    }

    /// Smallest window containing both.
    pub fn hull(&self, other: &Window) -> Window {
        let lo: Vec<i64> = self
            .offset
            .coords()
            .iter()
            .zip(other.offset.coords())
            .map(|(a, b)| *a.min(b))
            .collect();
        let hi: Vec<i64> = self
            .upper()
            .coords()
            .iter()
            .zip(other.upper().coords())
            .map(|(a, b)| *a.max(b))
            .collect();
        let extent = lo.iter().zip(&hi).map(|(l, h)| (h - l + 1) as usize).collect();
        Window {
            offset: LatticePoint(lo),
            extent,
        }
    }

    /// The difference set `out − input = { m − i }`, i.e. every kernel offset
    /// touched when convolving data on `input` into `out`.
    pub fn difference(out: &Window, input: &Window) -> Window {
        let offset = out
            .offset
            .coords()
            .iter()
            .zip(input.upper().coords())
            .map(|(o, u)| o - u)
            .collect();
        let extent = out
            .extent
            .iter()
            .zip(&input.extent)
            .map(|(a, b)| a + b - 1)
            .collect();
        Window {
            offset: LatticePoint(offset),
            extent,
        }
    }

    /// Largest `r` with the cube of radius `r` around `center` inside `self`,
    /// or `None` when `center` is outside.
    pub fn inscribed_radius(&self, center: &[i64]) -> Option<u64> {
        if !self.contains(center) {
            return None;
        }
        let up = self.upper();
        center
            .iter()
            .zip(self.offset.coords())
            .zip(up.coords())
            .map(|((c, lo), hi)| (c - lo).min(hi - c) as u64)
            .min()
    }
}

/// Axis-aligned discrete cube given by its lower corner and side length.
///
/// Odd sides correspond to the centered cubes `|j − m₀|_∞ ≤ N` with side
/// `2N + 1`; even sides give the `{0,1}^n`-style cubes used for even
/// cardinalities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DiscreteCube {
    lower: LatticePoint,
    side: u64,
}

impl DiscreteCube {
    /// `{ j : |j − center|_∞ ≤ half_width }`.
    pub fn centered(center: LatticePoint, half_width: u64) -> Self {
        let hw = half_width as i64;
        DiscreteCube {
            lower: LatticePoint(center.coords().iter().map(|c| c - hw).collect()),
            side: 2 * half_width + 1,
        }
    }

    pub fn from_corner(lower: LatticePoint, side: u64) -> Result<Self> {
        if side == 0 {
            return Err(crate::error::domain("cube side must be positive"));
        }
        Ok(DiscreteCube { lower, side })
    }

    pub fn dim(&self) -> usize {
        self.lower.dim()
    }

    pub fn lower(&self) -> &LatticePoint {
        &self.lower
    }

    pub fn side(&self) -> u64 {
        self.side
    }

    /// `N` for odd sides, `None` for even ones.
    pub fn half_width(&self) -> Option<u64> {
        (self.side % 2 == 1).then_some(self.side / 2)
    }

    /// Integer center; for even sides the point `lower + side/2`.
    pub fn center(&self) -> LatticePoint {
        let h = (self.side / 2) as i64;
        LatticePoint(self.lower.coords().iter().map(|c| c + h).collect())
    }

    /// `#Q = side^n`.
    pub fn cardinality(&self) -> u64 {
        self.side.pow(self.dim() as u32)
    }

    pub fn window(&self) -> Window {
        Window {
            offset: self.lower.clone(),
            extent: vec![self.side as usize; self.dim()],
        }
    }

    pub fn contains(&self, j: &[i64]) -> bool {
        self.window().contains(j)
    }

    /// Largest Euclidean distance from the center to a cube point.
    pub fn radius_from_center(&self) -> f64 {
        let c = self.center();
        let far: Vec<i64> = c
            .coords()
            .iter()
            .zip(self.lower.coords())
            .map(|(c, l)| (c - l).max(l + self.side as i64 - 1 - c))
            .collect();
        norm(&far)
    }
}

/// All points of the cube in lexicographic order.
pub fn cube_points(cube: &DiscreteCube) -> Vec<LatticePoint> {
    cube.window().points().collect()
}

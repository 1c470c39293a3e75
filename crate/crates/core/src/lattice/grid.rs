use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::point::{LatticePoint, Window};
use crate::error::{Error, Result};

/// A finitely supported real sequence on `Z^n`, stored densely on a window.
///
/// Values outside the window are zero. All stored values are finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GridFunctionFile", into = "GridFunctionFile")]
pub struct GridFunction {
    window: Window,
    values: Vec<f64>,
}

/// On-disk layout of a [`GridFunction`].
#[derive(Debug, Clone, Serialize, Deserialize)]
struct GridFunctionFile {
    n: usize,
    offset: Vec<i64>,
    extent: Vec<usize>,
    values: Vec<f64>,
}

impl TryFrom<GridFunctionFile> for GridFunction {
    type Error = Error;

    fn try_from(f: GridFunctionFile) -> Result<Self> {
        if f.offset.len() != f.n {
            return Err(Error::Window(format!(
                "declared n = {} but offset has {} coordinates",
                f.n,
                f.offset.len()
            )));
        }
        let window = Window::new(LatticePoint::new(f.offset), f.extent)?;
        GridFunction::from_values(window, f.values)
    }
}

impl From<GridFunction> for GridFunctionFile {
    fn from(g: GridFunction) -> Self {
        GridFunctionFile {
            n: g.dim(),
            offset: g.window.offset().coords().to_vec(),
            extent: g.window.extent().to_vec(),
            values: g.values,
        }
    }
}

impl GridFunction {
    pub fn zeros(window: Window) -> Self {
        let values = vec![0.0; window.len()];
        GridFunction { window, values }
    }

    pub fn from_values(window: Window, values: Vec<f64>) -> Result<Self> {
        if values.len() != window.len() {
            return Err(Error::Window(format!(
                "window holds {} points but {} values were given",
                window.len(),
                values.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(GridFunction { window, values })
    }

    /// Builds a grid by evaluating `f` at every point of `window`.
    pub fn from_fn(window: Window, mut f: impl FnMut(&[i64]) -> f64) -> Result<Self> {
        let mut buf = vec![0; window.dim()];
        let values = (0..window.len())
            .map(|i| {
                window.point_into(i, &mut buf);
                f(&buf)
            })
            .collect();
        GridFunction::from_values(window, values)
    }

    /// Unit mass at `at`.
    pub fn delta(at: &LatticePoint) -> Self {
        let window = Window::centered(at, 0);
        GridFunction {
            window,
            values: vec![1.0],
        }
    }

    /// Sum of point masses; the window is the bounding box of the points.
    pub fn from_points(masses: &[(LatticePoint, f64)]) -> Result<Self> {
        let first = masses
            .first()
            .ok_or_else(|| Error::Window("no points given".into()))?;
        let mut window = Window::centered(&first.0, 0);
        for (p, _) in masses {
            window = window.hull(&Window::centered(p, 0));
        }
        let mut g = GridFunction::zeros(window);
        for (p, v) in masses {
            if !v.is_finite() {
                return Err(Error::NonFinite { index: 0 });
            }
            let i = g.window.index_of(p.coords()).expect("hull contains point");
            g.values[i] += v;
        }
        Ok(g)
    }

    pub fn dim(&self) -> usize {
        self.window.dim()
    }

    pub fn window(&self) -> &Window {
        &self.window
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Value at `j`, zero outside the window.
    pub fn get(&self, j: &[i64]) -> f64 {
        self.window.index_of(j).map_or(0.0, |i| self.values[i])
    }

    pub fn set(&mut self, j: &[i64], v: f64) -> Result<()> {
        if !v.is_finite() {
            return Err(Error::NonFinite { index: 0 });
        }
        let i = self
            .window
            .index_of(j)
            .ok_or_else(|| Error::Window(format!("point {j:?} outside window")))?;
        self.values[i] = v;
        Ok(())
    }

    /// `(point, value)` pairs for every nonzero entry, in row-major order.
    pub fn support(&self) -> Vec<(Vec<i64>, f64)> {
        let mut buf = vec![0; self.dim()];
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| **v != 0.0)
            .map(|(i, v)| {
                self.window.point_into(i, &mut buf);
                (buf.clone(), *v)
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|v| *v == 0.0)
    }

    pub fn scale(&self, lambda: f64) -> GridFunction {
        GridFunction {
            window: self.window.clone(),
            values: self.values.iter().map(|v| lambda * v).collect(),
        }
    }

    pub fn translate(&self, shift: &LatticePoint) -> GridFunction {
        GridFunction {
            window: self.window.translate(shift),
            values: self.values.clone(),
        }
    }

    /// Copy of `self` on a different window (values outside dropped, new
    /// points zero).
    pub fn restrict_to(&self, window: &Window) -> GridFunction {
        let mut out = GridFunction::zeros(window.clone());
        let mut buf = vec![0; self.dim()];
        for (i, v) in self.values.iter().enumerate() {
            if *v == 0.0 {
                continue;
            }
            self.window.point_into(i, &mut buf);
            if let Some(k) = window.index_of(&buf) {
                out.values[k] = *v;
            }
        }
        out
    }

    /// `λ·self + other` on the hull of both windows.
    pub fn axpy(&self, lambda: f64, other: &GridFunction) -> GridFunction {
        let hull = self.window.hull(&other.window);
        let mut out = other.restrict_to(&hull);
        let mut buf = vec![0; self.dim()];
        for (i, v) in self.values.iter().enumerate() {
            self.window.point_into(i, &mut buf);
            let k = hull.index_of(&buf).expect("hull contains window");
            out.values[k] += lambda * v;
        }
        out
    }

    pub fn add(&self, other: &GridFunction) -> GridFunction {
        self.axpy(1.0, other)
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        other.axpy(-1.0, self)
    }

    pub fn abs(&self) -> GridFunction {
        GridFunction {
            window: self.window.clone(),
            values: self.values.iter().map(|v| v.abs()).collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|source| Error::Parse {
            path: path.to_path_buf(),
            source,
        })
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()? + "\n")?;
        Ok(())
    }

    /// CSV dump with one row per window point: `j1,…,jn,value`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header: Vec<String> = (1..=self.dim()).map(|k| format!("j{k}")).collect();
        header.push("value".into());
        wtr.write_record(&header)?;
        let mut buf = vec![0; self.dim()];
        for (i, v) in self.values.iter().enumerate() {
            self.window.point_into(i, &mut buf);
            let mut rec: Vec<String> = buf.iter().map(|c| c.to_string()).collect();
            rec.push(v.to_string());
            wtr.write_record(&rec)?;
        }
        wtr.flush()?;
        Ok(())
    }
}

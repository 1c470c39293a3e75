use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::fft::{smooth_size, NdFft};
use crate::error::{Error, Result};
use crate::lattice::{GridFunction, Window};
use crate::sum::pairwise_sum;

/// Kernel evaluation callback `j ↦ K(j)`.
pub type KernelFn = Arc<dyn Fn(&[i64]) -> f64 + Send + Sync>;

/// Summation strategy for lattice convolutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Backend {
    /// Exact direct summation over the input support.
    #[default]
    Direct,
    /// Zero-padded cyclic convolution through the FFT.
    Fast,
}

impl std::str::FromStr for Backend {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "direct" => Ok(Backend::Direct),
            "fast" => Ok(Backend::Fast),
            other => Err(format!("unknown backend {other:?} (expected direct or fast)")),
        }
    }
}

fn check_dims(b: &GridFunction, out: &Window) -> Result<()> {
    if b.dim() != out.dim() {
        return Err(Error::Window(format!(
            "input has dimension {} but output window has {}",
            b.dim(),
            out.dim()
        )));
    }
    if out.is_empty() {
        return Err(Error::Window("empty output window".into()));
    }
    Ok(())
}

/// Per-point direct sums. With `bound`, also returns `Σ_i |b(i) K(m − i)|`
/// for each output point.
fn direct_sums<K>(b: &GridFunction, kernel: &K, out: &Window, bound: bool) -> (Vec<f64>, Vec<f64>)
where
    K: Fn(&[i64]) -> f64 + Sync + ?Sized,
{
    let support = b.support();
    let n = out.dim();
    let results: Vec<(f64, f64)> = (0..out.len())
        .into_par_iter()
        .map_init(
            || (vec![0i64; n], vec![0i64; n], Vec::with_capacity(support.len())),
            |(m, diff, terms), idx| {
                out.point_into(idx, m);
                terms.clear();
                for (i, v) in &support {
                    for k in 0..n {
                        diff[k] = m[k] - i[k];
                    }
                    terms.push(v * kernel(diff));
                }
                let s = pairwise_sum(terms);
                let a = if bound {
                    terms.iter_mut().for_each(|t| *t = t.abs());
                    pairwise_sum(terms)
                } else {
                    0.0
                };
                (s, a)
            },
        )
        .collect();
    results.into_iter().unzip()
}

/// `out(m) = Σ_{i ∈ supp b} b(i) K(m − i)` by direct summation.
pub fn convolve_direct<K>(b: &GridFunction, kernel: K, out: &Window) -> Result<GridFunction>
where
    K: Fn(&[i64]) -> f64 + Sync,
{
    check_dims(b, out)?;
    let (values, _) = direct_sums(b, &kernel, out, false);
    GridFunction::from_values(out.clone(), values)
}

/// Direct convolution plus the pointwise absolute sums
/// `Σ_i |b(i) K(m − i)|`, used to bound rounding error.
pub fn convolve_direct_with_bound<K>(
    b: &GridFunction,
    kernel: K,
    out: &Window,
) -> Result<(GridFunction, GridFunction)>
where
    K: Fn(&[i64]) -> f64 + Sync,
{
    check_dims(b, out)?;
    let (values, abs) = direct_sums(b, &kernel, out, true);
    Ok((
        GridFunction::from_values(out.clone(), values)?,
        GridFunction::from_values(out.clone(), abs)?,
    ))
}

/// Precomputed FFT state for one (input window, output window, kernel).
struct FastState {
    fft: NdFft,
    padded: Vec<usize>,
    spectrum: Vec<Complex64>,
}

impl FastState {
    fn new(input: &Window, out: &Window, table: &GridFunction) -> Self {
        let needed = Window::difference(out, input);
        debug_assert!(table.window().contains_window(&needed));
        let padded: Vec<usize> = input
            .extent()
            .iter()
            .zip(out.extent())
            .map(|(eb, eo)| smooth_size(eb + eo))
            .collect();
        for ((p, eb), eo) in padded.iter().zip(input.extent()).zip(out.extent()) {
            // Linear-convolution indices wrap onto [0, eb + ek − 1 − p), which
            // must stay below the first retained index eb − 1.
            assert!(*p >= eb + eo - 1, "FFT padding {p} too small for extents {eb} + {eo}");
        }
        let fft = NdFft::new(&padded);
        let mut spectrum = vec![Complex64::default(); fft.len()];
        scatter(&mut spectrum, &padded, table, &needed);
        fft.forward(&mut spectrum);
        FastState {
            fft,
            padded,
            spectrum,
        }
    }

    fn apply(&self, b: &GridFunction, input: &Window, out: &Window) -> Vec<f64> {
        let mut data = vec![Complex64::default(); self.fft.len()];
        scatter(&mut data, &self.padded, b, input);
        self.fft.forward(&mut data);
        data.par_iter_mut()
            .zip(self.spectrum.par_iter())
            .for_each(|(x, k)| *x *= k);
        self.fft.inverse(&mut data);
        let scale = 1.0 / self.fft.len() as f64;
        let n = out.dim();
        let shift: Vec<usize> = input.extent().iter().map(|e| e - 1).collect();
        let padded = &self.padded;
        (0..out.len())
            .into_par_iter()
            .map_init(
                || vec![0usize; n],
                |local, idx| {
                    let mut rest = idx;
                    for k in (0..n).rev() {
                        let e = out.extent()[k];
                        local[k] = rest % e + shift[k];
                        rest /= e;
                    }
                    let mut lin = 0;
                    for k in 0..n {
                        lin = lin * padded[k] + local[k];
                    }
                    data[lin].re * scale
                },
            )
            .collect()
    }
}

/// Writes `g`, viewed on `frame`, into the zero-padded buffer so that the
/// frame's lower corner lands at index 0.
fn scatter(buf: &mut [Complex64], padded: &[usize], g: &GridFunction, frame: &Window) {
    let n = frame.dim();
    let mut p = vec![0i64; n];
    for (i, v) in g.values().iter().enumerate() {
        if *v == 0.0 {
            continue;
        }
        g.window().point_into(i, &mut p);
        let mut lin = 0usize;
        let mut inside = true;
        for k in 0..n {
            let d = p[k] - frame.offset().coords()[k];
            if d < 0 || d as usize >= frame.extent()[k] {
                inside = false;
                break;
            }
            lin = lin * padded[k] + d as usize;
        }
        if inside {
            buf[lin] = Complex64::new(*v, 0.0);
        }
    }
}

/// `out(m) = Σ_i b(i) T(m − i)` where the kernel is supplied as a table
/// covering the difference window `out − window(b)`.
///
/// Same sums as [`convolve_direct`], evaluated by a fully zero-padded FFT
/// (no wraparound).
pub fn convolve_fast(b: &GridFunction, kernel_table: &GridFunction, out: &Window) -> Result<GridFunction> {
    check_dims(b, out)?;
    let needed = Window::difference(out, b.window());
    if !kernel_table.window().contains_window(&needed) {
        return Err(Error::Window(format!(
            "kernel table on {:?} does not cover the difference window {:?}",
            kernel_table.window(),
            needed
        )));
    }
    let state = FastState::new(b.window(), out, kernel_table);
    GridFunction::from_values(out.clone(), state.apply(b, b.window(), out))
}

/// A reusable convolution: fixed input window, output window, kernel, and
/// backend. Fast plans tabulate and transform the kernel once.
pub struct ConvolutionPlan {
    input: Window,
    output: Window,
    backend: Backend,
    kernel: KernelFn,
    fast: Option<FastState>,
}

impl fmt::Debug for ConvolutionPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ConvolutionPlan")
            .field("input", &self.input)
            .field("output", &self.output)
            .field("backend", &self.backend)
            .finish_non_exhaustive()
    }
}

impl ConvolutionPlan {
    pub fn new(input: Window, output: Window, kernel: KernelFn, backend: Backend) -> Result<Self> {
        if input.dim() != output.dim() {
            return Err(Error::Window("input and output windows differ in dimension".into()));
        }
        let fast = match backend {
            Backend::Direct => None,
            Backend::Fast => {
                let table = GridFunction::from_fn(Window::difference(&output, &input), |j| kernel(j))?;
                Some(FastState::new(&input, &output, &table))
            }
        };
        Ok(ConvolutionPlan {
            input,
            output,
            backend,
            kernel,
            fast,
        })
    }

    pub fn input(&self) -> &Window {
        &self.input
    }

    pub fn output(&self) -> &Window {
        &self.output
    }

    pub fn backend(&self) -> Backend {
        self.backend
    }

    /// Convolves `b`, whose window must lie inside the plan's input window.
    pub fn apply(&self, b: &GridFunction) -> Result<GridFunction> {
        if !self.input.contains_window(b.window()) {
            return Err(Error::Window(format!(
                "input window {:?} not inside plan window {:?}",
                b.window(),
                self.input
            )));
        }
        match &self.fast {
            None => convolve_direct(b, |j: &[i64]| (self.kernel)(j), &self.output),
            Some(state) => {
                GridFunction::from_values(self.output.clone(), state.apply(b, &self.input, &self.output))
            }
        }
    }
}

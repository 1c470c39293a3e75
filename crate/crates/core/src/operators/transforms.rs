use std::sync::Arc;

use super::convolve::{convolve_direct, convolve_fast, Backend, ConvolutionPlan, KernelFn};
use crate::error::{domain, Result};
use crate::kernels::{check_alpha, fractional_kernel_unchecked, riesz_kernel_unchecked};
use crate::lattice::{GridFunction, Window};

/// The two translation-invariant operators of the library.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LatticeOperator {
    /// `R_s^d`, convolution with `j_s/|j|^{n+1}` (axis counted from 1).
    Riesz { axis: usize },
    /// `I_α`, convolution with `|j|^{α−n}`, diagonal excluded.
    Potential { alpha: f64 },
}

impl LatticeOperator {
    pub fn validate(&self, n: usize) -> Result<()> {
        match *self {
            LatticeOperator::Riesz { axis } if axis == 0 || axis > n => {
                Err(domain(format!("Riesz axis s = {axis} must lie in 1..={n}")))
            }
            LatticeOperator::Riesz { .. } => Ok(()),
            LatticeOperator::Potential { alpha } => check_alpha(alpha, n),
        }
    }

    pub fn kernel(&self) -> KernelFn {
        match *self {
            LatticeOperator::Riesz { axis } => Arc::new(move |j| riesz_kernel_unchecked(axis, j)),
            LatticeOperator::Potential { alpha } => Arc::new(move |j| fractional_kernel_unchecked(alpha, j)),
        }
    }

    pub fn plan(&self, input: Window, output: Window, backend: Backend) -> Result<ConvolutionPlan> {
        self.validate(input.dim())?;
        ConvolutionPlan::new(input, output, self.kernel(), backend)
    }

    pub fn apply(&self, b: &GridFunction, out: &Window, backend: Backend) -> Result<GridFunction> {
        self.validate(b.dim())?;
        let kernel = self.kernel();
        match backend {
            Backend::Direct => convolve_direct(b, |j: &[i64]| kernel(j), out),
            Backend::Fast => {
                let table = GridFunction::from_fn(Window::difference(out, b.window()), |j| kernel(j))?;
                convolve_fast(b, &table, out)
            }
        }
    }
}

/// `(R_s^d b)(m) = Σ_{j ≠ m} b(j) (m_s − j_s)/|m − j|^{n+1}` on `out`.
pub fn riesz_transform(b: &GridFunction, s: usize, out: &Window, backend: Backend) -> Result<GridFunction> {
    LatticeOperator::Riesz { axis: s }.apply(b, out, backend)
}

/// `(I_α b)(j) = Σ_{i ≠ j} b(i)/|i − j|^{n−α}` on `out`.
pub fn riesz_potential(b: &GridFunction, alpha: f64, out: &Window, backend: Backend) -> Result<GridFunction> {
    LatticeOperator::Potential { alpha }.apply(b, out, backend)
}

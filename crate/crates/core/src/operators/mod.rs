//! Lattice convolution engines, the discrete Riesz transforms and Riesz
//! potential built on them, and certified tail bounds.

mod convolve;
mod fft;
mod tails;
mod transforms;

pub use convolve::{
    convolve_direct, convolve_direct_with_bound, convolve_fast, Backend, ConvolutionPlan, KernelFn,
};
pub use fft::smooth_size;
pub use tails::{
    certified_series, certified_sum, default_refine, lemma_bound, partial_power_sum, shell_bound, sharp_bound,
    tail_upper_bound, Domination, TailBoundParams,
};
pub use transforms::{riesz_potential, riesz_transform, LatticeOperator};

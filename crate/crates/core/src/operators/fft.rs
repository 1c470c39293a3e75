//! Multi-dimensional FFT over row-major complex buffers, built from
//! `rustfft`'s one-dimensional transforms applied axis by axis.

use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Smallest `m ≥ n` whose only prime factors are 2, 3 and 5.
pub fn smooth_size(n: usize) -> usize {
    let mut m = n.max(1);
    loop {
        let mut k = m;
        for p in [2, 3, 5] {
            while k % p == 0 {
                k /= p;
            }
        }
        if k == 1 {
            return m;
        }
        m += 1;
    }
}

pub(crate) struct NdFft {
    shape: Vec<usize>,
    forward: Vec<Arc<dyn Fft<f64>>>,
    inverse: Vec<Arc<dyn Fft<f64>>>,
}

impl NdFft {
    pub fn new(shape: &[usize]) -> Self {
        let mut planner = FftPlanner::new();
        NdFft {
            shape: shape.to_vec(),
            forward: shape.iter().map(|&l| planner.plan_fft_forward(l)).collect(),
            inverse: shape.iter().map(|&l| planner.plan_fft_inverse(l)).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        for axis in 0..self.shape.len() {
            self.axis_pass(data, axis, &self.forward[axis]);
        }
    }

    /// Unnormalized inverse; divide by [`NdFft::len`] afterwards.
    pub fn inverse(&self, data: &mut [Complex64]) {
        for axis in 0..self.shape.len() {
            self.axis_pass(data, axis, &self.inverse[axis]);
        }
    }

    fn axis_pass(&self, data: &mut [Complex64], axis: usize, fft: &Arc<dyn Fft<f64>>) {
        let len = self.shape[axis];
        if len == 1 {
            return;
        }
        let inner: usize = self.shape[axis + 1..].iter().product();
        let lines = data.len() / len;
        // Lines per parallel task: enough work to amortize scratch setup.
        let per_task = (8192 / len).clamp(1, lines);

        if inner == 1 {
            data.par_chunks_mut(len * per_task).for_each(|chunk| {
                fft.process(chunk);
            });
            return;
        }

        // Gather strided lines into contiguous storage, transform, scatter back.
        let src: &[Complex64] = data;
        let mut lined = vec![Complex64::default(); src.len()];
        lined
            .par_chunks_mut(len * per_task)
            .enumerate()
            .for_each(|(task, chunk)| {
                let first = task * per_task;
                for (k, line) in chunk.chunks_mut(len).enumerate() {
                    let id = first + k;
                    let (o, i) = (id / inner, id % inner);
                    let base = o * len * inner + i;
                    for (l, slot) in line.iter_mut().enumerate() {
                        *slot = src[base + l * inner];
                    }
                }
                fft.process(chunk);
            });
        data.par_chunks_mut(inner).enumerate().for_each(|(row, out)| {
            let (o, l) = (row / len, row % len);
            for (i, slot) in out.iter_mut().enumerate() {
                *slot = lined[(o * inner + i) * len + l];
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_sizes() {
        assert_eq!(smooth_size(1), 1);
        assert_eq!(smooth_size(7), 8);
        assert_eq!(smooth_size(11), 12);
        assert_eq!(smooth_size(2049), 2160);
        assert_eq!(smooth_size(97), 100);
    }

    #[test]
    fn nd_round_trip_and_dft() {
        let shape = [3, 4, 5];
        let total: usize = shape.iter().product();
        let orig: Vec<Complex64> = (0..total)
            .map(|k| Complex64::new((k as f64 * 0.37).sin(), (k as f64 * 1.1).cos()))
            .collect();
        let plan = NdFft::new(&shape);
        let mut data = orig.clone();
        plan.forward(&mut data);

        // Compare one coefficient with the defining triple sum.
        let (f0, f1, f2) = (1usize, 2usize, 3usize);
        let mut expect = Complex64::default();
        for a in 0..3 {
            for b in 0..4 {
                for c in 0..5 {
                    let ph = -2.0
                        * std::f64::consts::PI
                        * ((f0 * a) as f64 / 3.0 + (f1 * b) as f64 / 4.0 + (f2 * c) as f64 / 5.0);
                    expect += orig[(a * 4 + b) * 5 + c] * Complex64::from_polar(1.0, ph);
                }
            }
        }
        assert!((data[(f0 * 4 + f1) * 5 + f2] - expect).norm() < 1e-12);

        plan.inverse(&mut data);
        for (x, y) in data.iter().zip(&orig) {
            assert!((x / total as f64 - y).norm() < 1e-14);
        }
    }
}

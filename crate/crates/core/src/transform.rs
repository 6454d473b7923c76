//! Tensor-product FFT and DST-I on cubic arrays.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};

/// Applies a 1-D in-place transform along every axis of a row-major cube
/// with `n` points per axis. Strided lines are gathered into contiguous rows
/// first; rows are processed in parallel, each worker owning a scratch state
/// built by `init`.
fn along_axes<T, S, I, F>(data: &mut [T], dim: usize, n: usize, init: I, line_op: F)
where
    T: Copy + Send + Sync + Default,
    I: Fn() -> S + Sync + Send,
    F: Fn(&mut S, &mut [T]) + Sync + Send,
{
    debug_assert_eq!(data.len(), n.pow(dim as u32));
    let min_rows = (4096 / n.max(1)).max(1);
    let mut rows = Vec::new();
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        if stride == 1 {
            data.par_chunks_mut(n).with_min_len(min_rows).for_each_init(&init, |s, line| line_op(s, line));
            continue;
        }
        let block = stride * n;
        rows.resize(block, T::default());
        for chunk in data.chunks_mut(block) {
            for (k, row) in chunk.chunks(stride).enumerate() {
                for (o, &v) in row.iter().enumerate() {
                    rows[o * n + k] = v;
                }
            }
            rows.par_chunks_mut(n).with_min_len(min_rows).for_each_init(&init, |s, line| line_op(s, line));
            for (k, row) in chunk.chunks_mut(stride).enumerate() {
                for (o, v) in row.iter_mut().enumerate() {
                    *v = rows[o * n + k];
                }
            }
        }
    }
}

fn scratch_for(fft: &Arc<dyn Fft<f64>>) -> Vec<Complex64> {
    vec![Complex64::default(); fft.get_inplace_scratch_len()]
}

/// Unnormalized N-dimensional complex FFT on an `n^dim` cube.
pub struct FftNd {
    dim: usize,
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftNd {
    pub fn new(dim: usize, n: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftNd {
            dim,
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        let fft = &self.forward;
        along_axes(data, self.dim, self.n, || scratch_for(fft), |s, line| fft.process_with_scratch(line, s));
    }

    /// Inverse transform including the `1/n^dim` normalization.
    pub fn inverse(&self, data: &mut [Complex64]) {
        let fft = &self.inverse;
        along_axes(data, self.dim, self.n, || scratch_for(fft), |s, line| fft.process_with_scratch(line, s));
        let scale = 1.0 / self.len() as f64;
        data.iter_mut().for_each(|v| *v *= scale);
    }

    pub fn forward_real(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward(&mut data);
        data
    }

    pub fn inverse_real(&self, mut data: Vec<Complex64>) -> Vec<f64> {
        self.inverse(&mut data);
        data.into_iter().map(|c| c.re).collect()
    }
}

/// Signed integer frequency of DFT slot `k` for length `n`; the Nyquist slot
/// maps to `+n/2`.
pub fn signed_index(k: usize, n: usize) -> f64 {
    if k <= n / 2 {
        k as f64
    } else {
        k as f64 - n as f64
    }
}

/// `|ξ|` for every slot of an `n^dim` DFT on a torus of side `period`.
pub fn frequency_magnitudes(dim: usize, n: usize, period: f64) -> Vec<f64> {
    let unit = 2.0 * PI / period;
    let total = n.pow(dim as u32);
    (0..total)
        .map(|mut idx| {
            let mut s = 0.0;
            for _ in 0..dim {
                let k = signed_index(idx % n, n) * unit;
                s += k * k;
                idx /= n;
            }
            s.sqrt()
        })
        .collect()
}

/// Type-I discrete sine transform on a `p^dim` cube:
/// `X_k = Σ_j x_j Π sin(π j_i k_i / (p+1))`, indices from 1. Applying it
/// twice multiplies by `((p+1)/2)^dim`.
pub struct DstNd {
    dim: usize,
    p: usize,
    fft: Arc<dyn Fft<f64>>,
}

impl DstNd {
    pub fn new(dim: usize, p: usize) -> Self {
        let mut planner = FftPlanner::new();
        DstNd {
            dim,
            p,
            fft: planner.plan_fft_forward(2 * (p + 1)),
        }
    }

    pub fn points(&self) -> usize {
        self.p
    }

    pub fn len(&self) -> usize {
        self.p.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.p == 0
    }

    pub fn apply(&self, data: &mut [f64]) {
        let p = self.p;
        let fft = &self.fft;
        let n2 = 2 * (p + 1);
        let init = || (vec![Complex64::default(); n2], scratch_for(fft));
        along_axes(data, self.dim, p, init, |(buf, scratch), line| {
            // odd extension of length 2(p+1)
            buf[0] = Complex64::default();
            buf[p + 1] = Complex64::default();
            for (j, &v) in line.iter().enumerate() {
                buf[j + 1] = Complex64::new(v, 0.0);
                buf[n2 - 1 - j] = Complex64::new(-v, 0.0);
            }
            fft.process_with_scratch(buf, scratch);
            for (k, slot) in line.iter_mut().enumerate() {
                *slot = -0.5 * buf[k + 1].im;
            }
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dst_matches_direct_sum() {
        let p = 7;
        let dst = DstNd::new(1, p);
        let x: Vec<f64> = (0..p).map(|j| ((j * j) as f64).sin() + 0.3).collect();
        let mut y = x.clone();
        dst.apply(&mut y);
        for k in 0..p {
            let direct: f64 = (0..p)
                .map(|j| x[j] * (PI * ((j + 1) * (k + 1)) as f64 / (p + 1) as f64).sin())
                .sum();
            assert!((direct - y[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn dst_is_involution_up_to_scale() {
        let p = 5;
        let dst = DstNd::new(2, p);
        let x: Vec<f64> = (0..p * p).map(|j| (j as f64 * 0.37).cos()).collect();
        let mut y = x.clone();
        dst.apply(&mut y);
        dst.apply(&mut y);
        let scale = ((p + 1) as f64 / 2.0).powi(2);
        for (a, b) in x.iter().zip(&y) {
            assert!((a * scale - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fft_roundtrip_3d() {
        let fft = FftNd::new(3, 8);
        let x: Vec<f64> = (0..512).map(|j| (j as f64 * 0.1).sin()).collect();
        let back = fft.inverse_real(fft.forward_real(&x));
        for (a, b) in x.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn frequency_table_symmetry() {
        let n = 8;
        let f = frequency_magnitudes(1, n, 2.0 * PI);
        assert_eq!(f[0], 0.0);
        assert_eq!(f[1], f[7]);
        assert_eq!(f[4], 4.0);
    }
}

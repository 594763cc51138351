//! Multidimensional FFT over flat row-major buffers.
//!
//! All axes share one length. Transforms are unnormalized in both
//! directions; callers apply the scaling they need. The pruned variants skip
//! lines that are known to be zero on input (forward) or not needed on
//! output (inverse), which is what zero-padded convolution needs.

use num_complex::Complex64;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::sync::Arc;

pub struct NdFft {
    len: usize,
    dim: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for NdFft {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NdFft")
            .field("len", &self.len)
            .field("dim", &self.dim)
            .finish()
    }
}

impl NdFft {
    pub fn new(len: usize, dim: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            len,
            dim,
            forward: planner.plan_fft_forward(len),
            inverse: planner.plan_fft_inverse(len),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn total(&self) -> usize {
        self.len.pow(self.dim as u32)
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.transform(data, FftDirection::Forward, None);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.transform(data, FftDirection::Inverse, None);
    }

    /// Forward transform of data that is zero outside `[0, active)^dim`.
    pub fn forward_pruned(&self, data: &mut [Complex64], active: usize) {
        self.transform(data, FftDirection::Forward, Some(active));
    }

    /// Inverse transform whose output is only needed inside `[0, active)^dim`.
    /// Values outside that block are left in an unspecified state.
    pub fn inverse_pruned(&self, data: &mut [Complex64], active: usize) {
        self.transform(data, FftDirection::Inverse, Some(active));
    }

    fn transform(&self, data: &mut [Complex64], dir: FftDirection, active: Option<usize>) {
        assert_eq!(data.len(), self.total(), "buffer does not match FFT shape");
        let fft = match dir {
            FftDirection::Forward => &self.forward,
            FftDirection::Inverse => &self.inverse,
        };
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for axis in 0..self.dim {
            // Forward: axes after `axis` are still untransformed and sparse.
            // Inverse: axes before `axis` are done and only the block is needed.
            let (outer_limit, inner_limit) = match (dir, active) {
                (_, None) => (None, None),
                (FftDirection::Forward, Some(a)) => (None, Some(a)),
                (FftDirection::Inverse, Some(a)) => (Some(a), None),
            };
            self.transform_axis(data, fft.as_ref(), &mut scratch, axis, outer_limit, inner_limit);
        }
    }

    fn transform_axis(
        &self,
        data: &mut [Complex64],
        fft: &dyn Fft<f64>,
        scratch: &mut [Complex64],
        axis: usize,
        outer_limit: Option<usize>,
        inner_limit: Option<usize>,
    ) {
        let len = self.len;
        let stride = len.pow((self.dim - 1 - axis) as u32);
        let outer_count = len.pow(axis as u32);
        let outer = selected_offsets(len, axis, outer_limit);
        let inner = selected_offsets(len, self.dim - 1 - axis, inner_limit);
        debug_assert_eq!(outer.len() <= outer_count, true);

        if stride == 1 {
            if outer_limit.is_none() {
                fft.process_with_scratch(data, scratch);
            } else {
                for &o in &outer {
                    let base = o * len;
                    fft.process_with_scratch(&mut data[base..base + len], scratch);
                }
            }
            return;
        }

        // Lines are gathered in small batches so the transposed buffer stays in cache.
        const BATCH: usize = 16;
        let block = len * stride;
        let mut buf = vec![Complex64::new(0.0, 0.0); BATCH * len];
        for &o in &outer {
            let base = o * block;
            for chunk in inner.chunks(BATCH) {
                let buf = &mut buf[..chunk.len() * len];
                for l in 0..len {
                    let row = base + l * stride;
                    for (q, &r) in chunk.iter().enumerate() {
                        buf[q * len + l] = data[row + r];
                    }
                }
                fft.process_with_scratch(buf, scratch);
                for l in 0..len {
                    let row = base + l * stride;
                    for (q, &r) in chunk.iter().enumerate() {
                        data[row + r] = buf[q * len + l];
                    }
                }
            }
        }
    }
}

/// Flat offsets of a `count`-axis multi-index block, optionally restricted
/// to components below `limit`.
fn selected_offsets(len: usize, count: usize, limit: Option<usize>) -> Vec<usize> {
    let total = len.pow(count as u32);
    match limit {
        None => (0..total).collect(),
        Some(limit) => {
            let mut out = Vec::with_capacity(limit.pow(count as u32));
            let mut idx = vec![0usize; count];
            'outer: loop {
                let mut off = 0;
                for &i in &idx {
                    off = off * len + i;
                }
                out.push(off);
                // odometer over [0, limit)^count
                for pos in (0..count).rev() {
                    idx[pos] += 1;
                    if idx[pos] < limit {
                        continue 'outer;
                    }
                    idx[pos] = 0;
                }
                break;
            }
            out
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft(data: &[Complex64], len: usize, dim: usize) -> Vec<Complex64> {
        let total = data.len();
        let idx = |mut f: usize| {
            let mut v = vec![0usize; dim];
            for d in (0..dim).rev() {
                v[d] = f % len;
                f /= len;
            }
            v
        };
        (0..total)
            .map(|k| {
                let kk = idx(k);
                data.iter().enumerate().fold(Complex64::new(0.0, 0.0), |acc, (j, &x)| {
                    let jj = idx(j);
                    let phase: usize = kk.iter().zip(&jj).map(|(a, b)| a * b).sum();
                    let ang = -2.0 * std::f64::consts::PI * (phase % len) as f64 / len as f64;
                    acc + x * Complex64::from_polar(1.0, ang)
                })
            })
            .collect()
    }

    #[test]
    fn matches_naive_dft_in_three_dimensions() {
        let (len, dim) = (4, 3);
        let data: Vec<Complex64> = (0..64)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let mut fast = data.clone();
        NdFft::new(len, dim).forward(&mut fast);
        let slow = naive_dft(&data, len, dim);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn pruned_transforms_agree_with_full() {
        let (len, dim, active) = (8, 3, 4);
        let fft = NdFft::new(len, dim);
        let mut data = vec![Complex64::new(0.0, 0.0); fft.total()];
        for i in 0..active {
            for j in 0..active {
                for k in 0..active {
                    data[(i * len + j) * len + k] =
                        Complex64::new((i + 2 * j) as f64 - 1.5 * k as f64, (i * j) as f64 * 0.1);
                }
            }
        }
        let mut full = data.clone();
        let mut pruned = data.clone();
        fft.forward(&mut full);
        fft.forward_pruned(&mut pruned, active);
        for (a, b) in full.iter().zip(&pruned) {
            assert!((a - b).norm() < 1e-12);
        }
        fft.inverse(&mut full);
        fft.inverse_pruned(&mut pruned, active);
        for i in 0..active {
            for j in 0..active {
                for k in 0..active {
                    let f = (i * len + j) * len + k;
                    assert!((full[f] - pruned[f]).norm() < 1e-10);
                    assert!((full[f] / fft.total() as f64 - data[f]).norm() < 1e-12);
                }
            }
        }
    }
}

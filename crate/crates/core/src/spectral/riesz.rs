//! Riesz potential `I_alpha * rho` on the grid.
//!
//! Free-space mode zero-pads to `(2n)^N` and convolves with the sampled
//! kernel `A |x|^{alpha - N}`. The singular origin cell gets the lattice-sum
//! weight `-A h^{alpha-N} Z((N-alpha)/2)` plus the next correction, a
//! Laplacian term with weight `-A h^{alpha-N+2} Z((N-alpha)/2 - 1) / (2N)`.
//! Both come from the generalized Euler-Maclaurin expansion of
//! `h^N sum' |hm|^{-gamma} f(hm)` and make the rule high order for smooth
//! densities.
//!
//! Periodic mode uses the multiplier `|k|^{-alpha}` on the box with the
//! zero mode removed. It converges to the free-space answer only up to a
//! box-dependent constant shift.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{fft::NdFft, Grid};
use crate::error::{Error, Result};
use crate::params::riesz_constant;
use crate::special::epstein_zeta;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum RieszMode {
    #[default]
    FreeSpace,
    Periodic,
}

#[derive(Debug)]
pub struct RieszOperator {
    grid: Grid,
    alpha: f64,
    mode: RieszMode,
    /// Real multiplier applied to the unnormalized DFT, inverse scaling folded in.
    symbol: Vec<f64>,
    fft: NdFft,
}

impl RieszOperator {
    pub fn new(grid: Grid, alpha: f64, mode: RieszMode) -> Result<Self> {
        let n_dim = grid.dim as f64;
        if !(alpha > 0.0 && alpha < n_dim) {
            return Err(Error::InvalidParams(format!(
                "alpha must lie in (0, {n_dim}), got {alpha}"
            )));
        }
        match mode {
            RieszMode::FreeSpace => Ok(Self::free_space(grid, alpha)),
            RieszMode::Periodic => Ok(Self::periodic(grid, alpha)),
        }
    }

    fn free_space(grid: Grid, alpha: f64) -> Self {
        let dim = grid.dim;
        let n = grid.n;
        let m = 2 * n;
        let h = grid.spacing();
        let gamma = dim as f64 - alpha;
        let a = riesz_constant(dim, alpha);
        let hn = grid.cell_volume();

        let origin = -a * h.powf(-gamma) * epstein_zeta(dim, gamma / 2.0);
        let lap_weight = -a * h.powf(dim as f64 - gamma + 2.0)
            * epstein_zeta(dim, gamma / 2.0 - 1.0)
            / (2.0 * dim as f64);

        let disp: Vec<f64> = (0..m)
            .map(|j| if j < n { j as f64 } else { j as f64 - m as f64 })
            .collect();
        let total = m.pow(dim as u32);
        let mut kernel = vec![Complex64::new(0.0, 0.0); total];
        let mut idx = vec![0usize; dim];
        for slot in kernel.iter_mut() {
            let q: f64 = idx.iter().map(|&i| disp[i] * disp[i]).sum();
            let val = if q == 0.0 {
                origin
            } else {
                a * (h * h * q).powf(-gamma / 2.0)
            };
            *slot = Complex64::new(val * hn, 0.0);
            for pos in (0..dim).rev() {
                idx[pos] += 1;
                if idx[pos] < m {
                    break;
                }
                idx[pos] = 0;
            }
        }
        let fft = NdFft::new(m, dim);
        fft.forward(&mut kernel);

        // wavenumbers of the doubled box
        let dk = std::f64::consts::PI / (2.0 * grid.half_width);
        let kpad: Vec<f64> = disp.iter().map(|&d| d * dk).collect();
        let inv = 1.0 / total as f64;
        let mut symbol = Vec::with_capacity(total);
        idx.iter_mut().for_each(|i| *i = 0);
        for v in &kernel {
            let k2: f64 = idx.iter().map(|&i| kpad[i] * kpad[i]).sum();
            symbol.push((v.re - lap_weight * k2) * inv);
            for pos in (0..dim).rev() {
                idx[pos] += 1;
                if idx[pos] < m {
                    break;
                }
                idx[pos] = 0;
            }
        }
        Self {
            grid,
            alpha,
            mode: RieszMode::FreeSpace,
            symbol,
            fft,
        }
    }

    fn periodic(grid: Grid, alpha: f64) -> Self {
        let inv = 1.0 / grid.len() as f64;
        let symbol = grid
            .wavenumber_squared()
            .into_iter()
            .map(|k2| if k2 == 0.0 { 0.0 } else { k2.powf(-alpha / 2.0) * inv })
            .collect();
        Self {
            grid,
            alpha,
            mode: RieszMode::Periodic,
            symbol,
            fft: NdFft::new(grid.n, grid.dim),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn mode(&self) -> RieszMode {
        self.mode
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// `I_alpha * rho` for a real density.
    pub fn convolve(&self, rho: &[f64]) -> Vec<f64> {
        self.run(rho, None).0
    }

    /// Two convolutions for the price of one complex transform pair.
    pub fn convolve_pair(&self, rho1: &[f64], rho2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let (a, b) = self.run(rho1, Some(rho2));
        (a, b.expect("second density requested"))
    }

    fn run(&self, re: &[f64], im: Option<&[f64]>) -> (Vec<f64>, Option<Vec<f64>>) {
        assert_eq!(re.len(), self.grid.len());
        let zero = 0.0;
        let pick_im = |i: usize| im.map_or(zero, |v| v[i]);
        match self.mode {
            RieszMode::Periodic => {
                let mut data: Vec<Complex64> = (0..re.len())
                    .map(|i| Complex64::new(re[i], pick_im(i)))
                    .collect();
                self.fft.forward(&mut data);
                for (v, s) in data.iter_mut().zip(&self.symbol) {
                    *v *= s;
                }
                self.fft.inverse(&mut data);
                split(&data, im.is_some())
            }
            RieszMode::FreeSpace => {
                let n = self.grid.n;
                let m = 2 * n;
                let dim = self.grid.dim;
                let mut data = vec![Complex64::new(0.0, 0.0); m.pow(dim as u32)];
                for_each_embedded(n, dim, |small, big| {
                    data[big] = Complex64::new(re[small], pick_im(small));
                });
                self.fft.forward_pruned(&mut data, n);
                for (v, s) in data.iter_mut().zip(&self.symbol) {
                    *v *= s;
                }
                self.fft.inverse_pruned(&mut data, n);
                let mut out = vec![Complex64::new(0.0, 0.0); re.len()];
                for_each_embedded(n, dim, |small, big| out[small] = data[big]);
                split(&out, im.is_some())
            }
        }
    }
}

fn split(data: &[Complex64], both: bool) -> (Vec<f64>, Option<Vec<f64>>) {
    let a = data.iter().map(|v| v.re).collect();
    let b = both.then(|| data.iter().map(|v| v.im).collect());
    (a, b)
}

/// Visits every index of the `n^dim` block together with its position inside
/// the `(2n)^dim` padded array.
fn for_each_embedded(n: usize, dim: usize, mut f: impl FnMut(usize, usize)) {
    let total = n.pow(dim as u32);
    let mut idx = vec![0usize; dim];
    for small in 0..total {
        let big = idx.iter().fold(0, |acc, &i| acc * 2 * n + i);
        f(small, big);
        for pos in (0..dim).rev() {
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
        }
    }
}

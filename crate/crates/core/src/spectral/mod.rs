//! Periodic Cartesian grid, sampled fields and Fourier multipliers.
//!
//! Normalization: the forward transform carries `h^N`, the inverse carries
//! `(2L)^{-N}`, so that `h^N sum |u|^2 = (2L)^{-N} sum |u_hat|^2`. Internally
//! the unnormalized DFT is stored and the scale factors are applied where the
//! sums are taken.

mod fft;
mod io;
mod resample;
mod riesz;

pub use fft::NdFft;
pub use io::{read_field, write_axis_slice_csv, write_field};
pub use resample::{
    change_resolution, dilation_matrix, resample_scaled, resample_scaled_checked, symmetrize_cubic,
};
pub use riesz::{RieszMode, RieszOperator};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Periodic box `[-L, L)^N` with `n` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub dim: usize,
    pub n: usize,
    /// Half-width `L` of the box.
    pub half_width: f64,
    /// Shift nodes by half a cell so that none sits at the origin.
    pub offset: bool,
}

impl Grid {
    pub fn new(dim: usize, n: usize, half_width: f64, offset: bool) -> Result<Self> {
        if dim == 0 || dim > 6 {
            return Err(Error::Grid(format!("unsupported dimension {dim}")));
        }
        if n < 4 || !n.is_power_of_two() {
            return Err(Error::Grid(format!("n must be a power of two >= 4, got {n}")));
        }
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Grid(format!("L must be positive, got {half_width}")));
        }
        Ok(Self {
            dim,
            n,
            half_width,
            offset,
        })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    /// Total number of nodes, `n^N`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Quadrature weight `h^N`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    pub fn coord(&self, j: usize) -> f64 {
        let shift = if self.offset { 0.5 } else { 0.0 };
        -self.half_width + (j as f64 + shift) * self.spacing()
    }

    pub fn coords(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.coord(j)).collect()
    }

    /// Wavenumber of FFT-ordered index `m`.
    pub fn wavenumber(&self, m: usize) -> f64 {
        let signed = if m < self.n / 2 {
            m as i64
        } else {
            m as i64 - self.n as i64
        };
        std::f64::consts::PI * signed as f64 / self.half_width
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n).map(|m| self.wavenumber(m)).collect()
    }

    /// Same box with a different resolution.
    pub fn with_n(&self, n: usize) -> Result<Self> {
        Self::new(self.dim, n, self.half_width, self.offset)
    }

    /// Evaluates `f` at every node, in storage order.
    pub fn map_points<T>(&self, mut f: impl FnMut(&[f64]) -> T) -> Vec<T> {
        let xs = self.coords();
        map_multi(self.n, self.dim, |idx, buf| {
            for (b, &i) in buf.iter_mut().zip(idx) {
                *b = xs[i];
            }
        }, &mut f)
    }

    /// Evaluates `f` at every wavevector, in storage order.
    pub fn map_modes<T>(&self, mut f: impl FnMut(&[f64]) -> T) -> Vec<T> {
        let ks = self.wavenumbers();
        map_multi(self.n, self.dim, |idx, buf| {
            for (b, &i) in buf.iter_mut().zip(idx) {
                *b = ks[i];
            }
        }, &mut f)
    }

    pub fn radius_squared(&self) -> Vec<f64> {
        self.map_points(|x| x.iter().map(|v| v * v).sum())
    }

    pub fn wavenumber_squared(&self) -> Vec<f64> {
        self.map_modes(|k| k.iter().map(|v| v * v).sum())
    }

    /// Storage index of the node nearest the origin along every axis.
    pub fn center_index(&self) -> usize {
        let j = self.n / 2;
        (0..self.dim).fold(0, |acc, _| acc * self.n + j)
    }

    pub(crate) fn check_same(&self, other: &Grid) -> Result<()> {
        if self != other {
            return Err(Error::Grid("fields live on different grids".into()));
        }
        Ok(())
    }
}

fn map_multi<T>(
    n: usize,
    dim: usize,
    fill: impl Fn(&[usize], &mut [f64]),
    f: &mut impl FnMut(&[f64]) -> T,
) -> Vec<T> {
    let total = n.pow(dim as u32);
    let mut out = Vec::with_capacity(total);
    let mut idx = vec![0usize; dim];
    let mut buf = vec![0.0; dim];
    for _ in 0..total {
        fill(&idx, &mut buf);
        out.push(f(&buf));
        for pos in (0..dim).rev() {
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
        }
    }
    out
}

/// Complex samples of a function on a [`Grid`], row-major, last axis fastest.
#[derive(Clone, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    values: Vec<Complex64>,
}

impl std::fmt::Debug for SpectralField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralField")
            .field("grid", &self.grid)
            .field("l2_norm", &self.l2_norm())
            .field("max_abs", &self.max_abs())
            .finish()
    }
}

impl SpectralField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
            grid,
        }
    }

    pub fn from_values(grid: Grid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::Grid(format!(
                "expected {} samples, got {}",
                grid.len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn from_real(grid: Grid, values: &[f64]) -> Result<Self> {
        Self::from_values(grid, values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn from_fn(grid: Grid, f: impl FnMut(&[f64]) -> Complex64) -> Self {
        Self {
            values: grid.map_points(f),
            grid,
        }
    }

    pub fn from_real_fn(grid: Grid, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    /// `amplitude * exp(-|x|^2 / (2 s^2))`.
    pub fn gaussian(grid: Grid, width: f64, amplitude: f64) -> Self {
        Self::from_real_fn(grid, |x| {
            let r2: f64 = x.iter().map(|v| v * v).sum();
            amplitude * (-r2 / (2.0 * width * width)).exp()
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn scale_mut(&mut self, c: f64) {
        self.values.iter_mut().for_each(|v| *v *= c);
    }

    /// `self + c * other`.
    pub fn axpy(&self, c: f64, other: &SpectralField) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b * c)
                .collect(),
        }
    }

    pub fn modulus(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm()).collect()
    }

    pub fn modulus_squared(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_sqr()).collect()
    }

    /// `h^N sum |u|^2`.
    pub fn mass(&self) -> f64 {
        self.grid.cell_volume() * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        self.mass().sqrt()
    }

    /// Real part of `h^N sum conj(u) v`.
    pub fn inner_re(&self, other: &SpectralField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.grid.cell_volume()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a.re * b.re + a.im * b.im)
                .sum::<f64>()
    }

    pub fn l2_distance(&self, other: &SpectralField) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        (self.grid.cell_volume()
            * self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>())
        .sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

/// Fourier-side operations on one grid: transforms, derivatives, the free
/// Schrödinger propagator.
#[derive(Debug)]
pub struct Spectral {
    grid: Grid,
    fft: NdFft,
    k_sq: Vec<f64>,
    k_axis: Vec<f64>,
    x_axis: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: Grid) -> Self {
        Self {
            fft: NdFft::new(grid.n, grid.dim),
            k_sq: grid.wavenumber_squared(),
            k_axis: grid.wavenumbers(),
            x_axis: grid.coords(),
            grid,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn wavenumber_squared(&self) -> &[f64] {
        &self.k_sq
    }

    /// Unnormalized DFT of the samples.
    pub fn forward(&self, u: &SpectralField) -> Vec<Complex64> {
        let mut data = u.values.clone();
        self.fft.forward(&mut data);
        data
    }

    /// Inverse of [`Spectral::forward`].
    pub fn inverse(&self, mut hat: Vec<Complex64>) -> SpectralField {
        self.fft.inverse(&mut hat);
        let inv = 1.0 / self.grid.len() as f64;
        hat.iter_mut().for_each(|v| *v *= inv);
        SpectralField {
            grid: self.grid,
            values: hat,
        }
    }

    pub fn forward_in_place(&self, data: &mut [Complex64]) {
        self.fft.forward(data);
    }

    /// Normalized inverse in place.
    pub fn inverse_in_place(&self, data: &mut [Complex64]) {
        self.fft.inverse(data);
        let inv = 1.0 / self.grid.len() as f64;
        data.iter_mut().for_each(|v| *v *= inv);
    }

    /// Applies a real radial multiplier `m(|k|^2)`.
    pub fn apply_multiplier(&self, u: &SpectralField, m: impl Fn(f64) -> f64) -> SpectralField {
        let mut hat = self.forward(u);
        for (v, &k2) in hat.iter_mut().zip(&self.k_sq) {
            *v *= m(k2);
        }
        self.inverse(hat)
    }

    /// `-Delta u`.
    pub fn neg_laplacian(&self, u: &SpectralField) -> SpectralField {
        self.apply_multiplier(u, |k2| k2)
    }

    /// Multiplies every mode by `exp(-i tau |k|^2)`, i.e. applies `e^{i tau Delta}`.
    pub fn kinetic_multiplier_step(&self, u: &SpectralField, tau: f64) -> SpectralField {
        let mut hat = self.forward(u);
        self.kinetic_phase_in_place(&mut hat, tau);
        self.inverse(hat)
    }

    pub(crate) fn kinetic_phase_in_place(&self, hat: &mut [Complex64], tau: f64) {
        if tau == 0.0 {
            return;
        }
        for (v, &k2) in hat.iter_mut().zip(&self.k_sq) {
            *v *= Complex64::from_polar(1.0, -tau * k2);
        }
    }

    /// `sum |k|^2 |u_hat|^2` weighted so that it equals `int |grad u|^2`.
    pub fn gradient_squared(&self, u: &SpectralField) -> f64 {
        let hat = self.forward(u);
        self.gradient_squared_from_hat(&hat)
    }

    pub fn gradient_squared_from_hat(&self, hat: &[Complex64]) -> f64 {
        let scale = self.grid.cell_volume() / self.grid.len() as f64;
        scale
            * hat
                .iter()
                .zip(&self.k_sq)
                .map(|(v, &k2)| k2 * v.norm_sqr())
                .sum::<f64>()
    }

    /// Spectral partial derivative along `axis`.
    pub fn partial(&self, u: &SpectralField, axis: usize) -> SpectralField {
        let hat = self.forward(u);
        self.partial_from_hat(&hat, axis)
    }

    pub fn partial_from_hat(&self, hat: &[Complex64], axis: usize) -> SpectralField {
        let n = self.grid.n;
        let stride = n.pow((self.grid.dim - 1 - axis) as u32);
        let mut d: Vec<Complex64> = hat.to_vec();
        for (i, v) in d.iter_mut().enumerate() {
            let m = (i / stride) % n;
            // the Nyquist mode has no odd partner; drop it for first derivatives
            let k = if m == n / 2 { 0.0 } else { self.k_axis[m] };
            *v *= Complex64::new(0.0, k);
        }
        self.inverse(d)
    }

    /// All first partials.
    pub fn gradient(&self, u: &SpectralField) -> Vec<SpectralField> {
        let hat = self.forward(u);
        (0..self.grid.dim).map(|a| self.partial_from_hat(&hat, a)).collect()
    }

    /// Fraction of `sum |u_hat|^2` carried by modes with `max_i |m_i| > n/3`.
    pub fn tail_fraction_from_hat(&self, hat: &[Complex64]) -> f64 {
        let n = self.grid.n;
        let cut = n as f64 / 3.0;
        let mut total = 0.0;
        let mut tail = 0.0;
        for (i, v) in hat.iter().enumerate() {
            let w = v.norm_sqr();
            total += w;
            let mut rest = i;
            let mut high = false;
            for _ in 0..self.grid.dim {
                let m = rest % n;
                rest /= n;
                let signed = if m < n / 2 { m as f64 } else { (n - m) as f64 };
                if signed > cut {
                    high = true;
                    break;
                }
            }
            if high {
                tail += w;
            }
        }
        if total > 0.0 {
            tail / total
        } else {
            0.0
        }
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        self.x_axis[j]
    }

    /// Checks Parseval and the plane-wave derivative sign on this grid.
    pub fn self_test(&self) -> Result<()> {
        let g = self.grid;
        let k0 = g.wavenumber(1);
        let wave = SpectralField::from_fn(g, |x| Complex64::from_polar(1.0, k0 * x[0]));
        let hat = self.forward(&wave);
        let side = (2.0 * g.half_width).powi(g.dim as i32);
        let fourier = hat.iter().map(|v| v.norm_sqr()).sum::<f64>() * g.cell_volume().powi(2)
            / side;
        let physical = wave.mass();
        if (fourier - physical).abs() > 1e-10 * physical {
            return Err(Error::Grid(format!(
                "Parseval self-test failed: {physical} vs {fourier}"
            )));
        }
        let d = self.partial(&wave, 0);
        let expect = wave.values[0] * Complex64::new(0.0, k0);
        if (d.values[0] - expect).norm() > 1e-8 * k0.abs() {
            return Err(Error::Grid("plane-wave derivative sign self-test failed".into()));
        }
        Ok(())
    }
}

/// `b / (|x|^2 + delta)` at every node.
pub fn hardy_weight(grid: &Grid, b: f64, delta: f64) -> Result<Vec<f64>> {
    if delta < 0.0 || !delta.is_finite() {
        return Err(Error::InvalidParams(format!("delta must be >= 0, got {delta}")));
    }
    if b == 0.0 {
        return Ok(vec![0.0; grid.len()]);
    }
    if delta == 0.0 && !grid.offset {
        return Err(Error::Singularity(
            "delta = 0 needs the half-cell offset so that no node sits at x = 0".into(),
        ));
    }
    Ok(grid.map_points(|x| b / (x.iter().map(|v| v * v).sum::<f64>() + delta)))
}

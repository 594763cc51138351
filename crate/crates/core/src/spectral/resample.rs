//! Spectral resampling under dilations `x -> c x`.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::{Grid, NdFft, SpectralField};
use crate::error::{Error, Result};

/// Matrix `T[j][l]` such that `g(x_j) = sum_l T[j][l] f(x_l)` evaluates the
/// trigonometric interpolant of `f` at `factor * x_j`. Rows whose target
/// falls outside the box are zero. The Nyquist mode is split symmetrically,
/// so the matrix is real.
pub fn dilation_matrix(grid: &Grid, factor: f64) -> Vec<f64> {
    let n = grid.n;
    let l = grid.half_width;
    let xs = grid.coords();
    let mut t = vec![0.0; n * n];
    for (j, &xj) in xs.iter().enumerate() {
        let y = factor * xj;
        if y < -l || y > l {
            continue;
        }
        for (k, &xk) in xs.iter().enumerate() {
            t[j * n + k] = dirichlet(n, PI * (y - xk) / l);
        }
    }
    t
}

/// `(1/n) [1 + 2 sum_{m=1}^{n/2-1} cos(m theta) + cos(n theta / 2)]`.
fn dirichlet(n: usize, theta: f64) -> f64 {
    let mut s = 1.0 + (n as f64 / 2.0 * theta).cos();
    for m in 1..n / 2 {
        s += 2.0 * (m as f64 * theta).cos();
    }
    s / n as f64
}

/// `g(x) = f(factor * x)` on the same grid; `f` is taken as zero outside the box.
pub fn resample_scaled(field: &SpectralField, factor: f64) -> SpectralField {
    let grid = *field.grid();
    let n = grid.n;
    let t = dilation_matrix(&grid, factor);
    let mut data = field.values().to_vec();
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    let mut out = vec![Complex64::new(0.0, 0.0); n];
    for axis in 0..grid.dim {
        let stride = n.pow((grid.dim - 1 - axis) as u32);
        let block = n * stride;
        for base in (0..data.len()).step_by(block) {
            for r in 0..stride {
                for (l, v) in line.iter_mut().enumerate() {
                    *v = data[base + l * stride + r];
                }
                for (j, o) in out.iter_mut().enumerate() {
                    let row = &t[j * n..(j + 1) * n];
                    let mut acc = Complex64::new(0.0, 0.0);
                    for (w, v) in row.iter().zip(&line) {
                        acc += v * *w;
                    }
                    *o = acc;
                }
                for (j, o) in out.iter().enumerate() {
                    data[base + j * stride + r] = *o;
                }
            }
        }
    }
    SpectralField::from_values(grid, data).expect("shape preserved")
}

/// Like [`resample_scaled`] but refuses widening dilations (`factor < 1`)
/// that crop away more than `tol` of the mass.
pub fn resample_scaled_checked(
    field: &SpectralField,
    factor: f64,
    tol: f64,
) -> Result<SpectralField> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::Domain(format!("dilation factor must be positive, got {factor}")));
    }
    if factor >= 1.0 {
        return Ok(resample_scaled(field, factor));
    }
    let grid = field.grid();
    // region of f that g samples
    let keep = factor * grid.half_width;
    let total = field.mass();
    let lost: f64 = grid
        .map_points(|x| x.iter().any(|v| v.abs() > keep))
        .iter()
        .zip(field.values())
        .filter(|(outside, _)| **outside)
        .map(|(_, v)| v.norm_sqr())
        .sum::<f64>()
        * grid.cell_volume();
    if total > 0.0 && lost / total > tol {
        return Err(Error::Resolution(format!(
            "dilation by {factor} loses {:.2e} of the mass; enlarge L",
            lost / total
        )));
    }
    Ok(resample_scaled(field, factor))
}

/// Band-limited interpolation onto the same box with `n_new` nodes per axis.
/// Accounts for the half-cell offset, which differs between resolutions.
pub fn change_resolution(field: &SpectralField, n_new: usize) -> Result<SpectralField> {
    let old = *field.grid();
    let new = old.with_n(n_new)?;
    let n = old.n;
    let dim = old.dim;
    let shift = new.coord(0) - old.coord(0);
    // per axis: old FFT index -> [(new FFT index, weight)]
    let mut map: Vec<Vec<(usize, Complex64)>> = Vec::with_capacity(n);
    for m in 0..n {
        let signed = if m < n / 2 { m as i64 } else { m as i64 - n as i64 };
        let mut targets = Vec::new();
        let mut push = |s: i64, w: f64| {
            // both signs of the target Nyquist mode alias onto one index
            if s.unsigned_abs() as usize > n_new / 2 {
                return;
            }
            let k = PI * s as f64 / old.half_width;
            let idx = s.rem_euclid(n_new as i64) as usize;
            targets.push((idx, Complex64::from_polar(w, k * shift)));
        };
        if signed == -(n as i64 / 2) && n_new > n {
            push(signed, 0.5);
            push(-signed, 0.5);
        } else {
            push(signed, 1.0);
        }
        map.push(targets);
    }
    let mut hat = field.values().to_vec();
    NdFft::new(n, dim).forward(&mut hat);
    let scale = (n_new as f64 / n as f64).powi(dim as i32);
    let mut out = vec![Complex64::new(0.0, 0.0); new.len()];
    let mut idx = vec![0usize; dim];
    for v in hat {
        // cartesian product of the per-axis targets
        let mut acc: Vec<(usize, Complex64)> = vec![(0, Complex64::new(scale, 0.0))];
        for &i in &idx {
            let mut next = Vec::with_capacity(acc.len() * 2);
            for &(flat, w) in &acc {
                for &(t, wt) in &map[i] {
                    next.push((flat * n_new + t, w * wt));
                }
            }
            acc = next;
        }
        for (flat, w) in acc {
            out[flat] += v * w;
        }
        for pos in (0..dim).rev() {
            idx[pos] += 1;
            if idx[pos] < n {
                break;
            }
            idx[pos] = 0;
        }
    }
    let fft = NdFft::new(n_new, dim);
    fft.inverse(&mut out);
    let inv = 1.0 / new.len() as f64;
    out.iter_mut().for_each(|v| *v *= inv);
    SpectralField::from_values(new, out)
}

/// Average over the symmetries of the cube (axis reflections and axis
/// permutations). Radial functions are fixed points.
pub fn symmetrize_cubic(field: &SpectralField) -> SpectralField {
    let g = *field.grid();
    let n = g.n;
    let dim = g.dim;
    let reflect = |j: usize| if g.offset { n - 1 - j } else { (n - j) % n };
    let mut data = field.values().to_vec();
    for axis in 0..dim {
        let stride = n.pow((dim - 1 - axis) as u32);
        let src = data.clone();
        for (i, v) in data.iter_mut().enumerate() {
            let j = (i / stride) % n;
            let mirror = i - j * stride + reflect(j) * stride;
            *v = (src[i] + src[mirror]) * 0.5;
        }
    }
    let perms = permutations(dim);
    let src = data.clone();
    let mut idx = vec![0usize; dim];
    for (i, v) in data.iter_mut().enumerate() {
        let mut rest = i;
        for pos in (0..dim).rev() {
            idx[pos] = rest % n;
            rest /= n;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for perm in &perms {
            let flat = perm.iter().fold(0, |a, &p| a * n + idx[p]);
            acc += src[flat];
        }
        *v = acc / perms.len() as f64;
    }
    SpectralField::from_values(g, data).expect("shape preserved")
}

fn permutations(dim: usize) -> Vec<Vec<usize>> {
    if dim == 1 {
        return vec![vec![0]];
    }
    let mut out = Vec::new();
    for p in permutations(dim - 1) {
        for slot in 0..dim {
            let mut q = p.clone();
            q.insert(slot, dim - 1);
            out.push(q);
        }
    }
    out
}

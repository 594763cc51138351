//! Mass, energy, the Hardy form, the nonlocal term and the Weinstein quotient.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::Model;
use crate::spectral::SpectralField;

/// Column order of [`FunctionalReport::csv_row`].
pub const CSV_COLUMNS: [&str; 7] = [
    "t",
    "mass",
    "energy",
    "hb_norm_sq",
    "kinetic",
    "potential_term",
    "nonlocal_term",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FunctionalReport {
    pub mass: f64,
    pub energy: f64,
    pub hb_norm_sq: f64,
    pub kinetic: f64,
    pub potential_term: f64,
    pub nonlocal_term: f64,
    /// `None` when the nonlocal term vanishes.
    pub weinstein: Option<f64>,
}

impl FunctionalReport {
    pub fn csv_header() -> String {
        CSV_COLUMNS.join(",")
    }

    pub fn csv_row(&self, t: f64) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            t,
            self.mass,
            self.energy,
            self.hb_norm_sq,
            self.kinetic,
            self.potential_term,
            self.nonlocal_term
        )
    }
}

/// The four building blocks every functional is assembled from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Parts {
    pub mass: f64,
    pub kinetic: f64,
    pub potential_term: f64,
    pub nonlocal_term: f64,
}

impl Parts {
    pub fn hb_norm_sq(&self) -> f64 {
        self.kinetic + self.potential_term
    }
}

pub fn parts(model: &Model, u: &SpectralField) -> Parts {
    Parts {
        mass: u.mass(),
        kinetic: kinetic(model, u),
        potential_term: potential_term(model, u),
        nonlocal_term: nonlocal_term(model, u),
    }
}

pub fn mass(u: &SpectralField) -> f64 {
    u.mass()
}

/// `int |grad u|^2`.
pub fn kinetic(model: &Model, u: &SpectralField) -> f64 {
    model.spectral().gradient_squared(u)
}

/// `int b |u|^2 / (|x|^2 + delta)`.
pub fn potential_term(model: &Model, u: &SpectralField) -> f64 {
    u.grid().cell_volume()
        * u.values()
            .iter()
            .zip(model.hardy())
            .map(|(v, w)| w * v.norm_sqr())
            .sum::<f64>()
}

pub fn hb_norm_sq(model: &Model, u: &SpectralField) -> f64 {
    kinetic(model, u) + potential_term(model, u)
}

/// `|u|^p` pointwise.
pub fn density(u: &SpectralField, p: f64) -> Vec<f64> {
    u.values().iter().map(|v| v.norm().powf(p)).collect()
}

/// `I_alpha * |u|^p`.
pub fn nonlocal_potential(model: &Model, u: &SpectralField) -> Vec<f64> {
    model.riesz().convolve(&density(u, model.params().p))
}

/// `int (I_alpha * |u|^p) |u|^p`.
pub fn nonlocal_term(model: &Model, u: &SpectralField) -> f64 {
    let rho = density(u, model.params().p);
    let phi = model.riesz().convolve(&rho);
    u.grid().cell_volume() * phi.iter().zip(&rho).map(|(a, b)| a * b).sum::<f64>()
}

/// `E_{b,delta}(u) = hb/2 - a/(2p) P`.
pub fn energy(model: &Model, u: &SpectralField) -> f64 {
    energy_from_parts(model, &parts(model, u))
}

pub fn energy_from_parts(model: &Model, parts: &Parts) -> f64 {
    let prm = model.params();
    0.5 * parts.hb_norm_sq() - prm.coupling() / (2.0 * prm.p) * parts.nonlocal_term
}

/// `J_b(u) = M^{A/2} K^{B/2} / P`.
pub fn weinstein(model: &Model, u: &SpectralField) -> Result<f64> {
    weinstein_from_parts(model, &parts(model, u))
}

pub fn weinstein_from_parts(model: &Model, parts: &Parts) -> Result<f64> {
    let prm = model.params();
    let a = prm.gn_mass_exponent();
    let b = prm.gn_kinetic_exponent();
    let scale = parts.mass.powf(prm.p);
    if !(parts.nonlocal_term > 1e-14 * scale) || !(parts.mass > 0.0) {
        return Err(Error::Degenerate(format!(
            "nonlocal term {:e} is not positive",
            parts.nonlocal_term
        )));
    }
    let hb = parts.hb_norm_sq();
    if !(hb > 0.0) {
        return Err(Error::Degenerate(format!("Hardy form {hb:e} is not positive")));
    }
    Ok(parts.mass.powf(a / 2.0) * hb.powf(b / 2.0) / parts.nonlocal_term)
}

pub fn report(model: &Model, u: &SpectralField) -> FunctionalReport {
    report_from_parts(model, &parts(model, u))
}

pub fn report_from_parts(model: &Model, parts: &Parts) -> FunctionalReport {
    FunctionalReport {
        mass: parts.mass,
        energy: energy_from_parts(model, parts),
        hb_norm_sq: parts.hb_norm_sq(),
        kinetic: parts.kinetic,
        potential_term: parts.potential_term,
        nonlocal_term: parts.nonlocal_term,
        weinstein: weinstein_from_parts(model, parts).ok(),
    }
}

/// `L_b u = -Delta u + b u / (|x|^2 + delta)`.
pub fn apply_hardy_operator(model: &Model, u: &SpectralField) -> SpectralField {
    let mut out = model.spectral().neg_laplacian(u);
    for ((o, v), w) in out.values_mut().iter_mut().zip(u.values()).zip(model.hardy()) {
        *o += v * *w;
    }
    out
}

/// `(I_alpha * |u|^p) |u|^{p-2} u`.
pub fn nonlinearity(model: &Model, u: &SpectralField) -> SpectralField {
    let phi = nonlocal_potential(model, u);
    nonlinearity_with_potential(model, u, &phi)
}

pub fn nonlinearity_with_potential(model: &Model, u: &SpectralField, phi: &[f64]) -> SpectralField {
    let p = model.params().p;
    let values = u
        .values()
        .iter()
        .zip(phi)
        .map(|(v, f)| {
            let r = v.norm();
            if r == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                v * (f * r.powf(p - 2.0))
            }
        })
        .collect();
    SpectralField::from_values(*u.grid(), values).expect("same grid")
}

/// Gradients with respect to the real inner product `Re <u, v>` weighted by `h^N`.
pub mod gradients {
    use super::*;

    /// Gradient of the mass, `2u`.
    pub fn mass(u: &SpectralField) -> SpectralField {
        u.scaled(2.0)
    }

    /// Gradient of the Hardy form, `2 L_b u`.
    pub fn hb_norm_sq(model: &Model, u: &SpectralField) -> SpectralField {
        apply_hardy_operator(model, u).scaled(2.0)
    }

    /// Gradient of the nonlocal term, `2p (I_alpha * |u|^p) |u|^{p-2} u`.
    pub fn nonlocal_term(model: &Model, u: &SpectralField) -> SpectralField {
        nonlinearity(model, u).scaled(2.0 * model.params().p)
    }
}

/// Sharp Hardy-Littlewood-Sobolev constant for the kernel `|x|^{alpha-N}`:
/// `pi^{(N-alpha)/2} Gamma(alpha/2) / Gamma((N+alpha)/2) (Gamma(N/2)/Gamma(N))^{-alpha/N}`.
pub fn hls_sharp_constant(dim: usize, alpha: f64) -> f64 {
    let n = dim as f64;
    PI.powf((n - alpha) / 2.0) * gamma(alpha / 2.0) / gamma((n + alpha) / 2.0)
        * (gamma(n / 2.0) / gamma(n)).powf(-alpha / n)
}

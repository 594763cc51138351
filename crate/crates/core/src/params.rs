//! Problem parameters, critical exponents and regime classification.
//!
//! Everything downstream reads exponents from here: the Gagliardo-Nirenberg
//! exponents, the threshold exponent `sigma` and the Riesz constant all
//! derive from the tuple `(N, alpha, p, b, a, delta)`.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;
use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Relative tolerance used to decide that `p` sits exactly on a critical exponent.
pub const CRITICAL_TOL: f64 = 1e-12;

/// Parameters of the Choquard problem with inverse-square potential.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProblemParams {
    /// Spatial dimension `N`.
    pub dim: usize,
    /// Riesz order.
    pub alpha: f64,
    /// Nonlinearity exponent.
    pub p: f64,
    /// Coupling of the inverse-square potential.
    pub b: f64,
    /// +1 focusing, -1 defocusing.
    pub a: i32,
    /// Regularization of the potential, `b / (|x|^2 + delta)`.
    pub delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalExponents {
    pub p_mass: f64,
    pub p_energy: f64,
    pub gamma: f64,
    /// `None` at the mass-critical exponent, where the defining denominator vanishes.
    pub sigma: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    MassSubcritical,
    MassCritical,
    InterCritical,
    EnergyCritical,
}

impl fmt::Display for Regime {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Regime::MassSubcritical => "mass-subcritical",
            Regime::MassCritical => "mass-critical",
            Regime::InterCritical => "inter-critical",
            Regime::EnergyCritical => "energy-critical",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub constraint: String,
    pub value: f64,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn into_result(self) -> Result<()> {
        if self.passed() {
            Ok(())
        } else {
            let msg = self
                .violations
                .iter()
                .map(|v| v.message.clone())
                .collect::<Vec<_>>()
                .join("; ");
            Err(Error::InvalidParams(msg))
        }
    }
}

impl ProblemParams {
    pub fn new(dim: usize, alpha: f64, p: f64, b: f64, a: i32, delta: f64) -> Self {
        Self {
            dim,
            alpha,
            p,
            b,
            a,
            delta,
        }
    }

    fn n(&self) -> f64 {
        self.dim as f64
    }

    /// Checks every standing assumption and lists all violations.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let mut fail = |constraint: &str, value: f64, message: String| {
            violations.push(Violation {
                constraint: constraint.to_string(),
                value,
                message,
            })
        };
        if self.dim < 3 {
            fail("N >= 3", self.dim as f64, format!("N must be at least 3, got {}", self.dim));
            return ValidationReport { violations };
        }
        let n = self.n();
        let alpha_min = (n - 4.0).max(0.0);
        if !(self.alpha > alpha_min && self.alpha < n) {
            fail(
                "(N-4)_+ < alpha < N",
                self.alpha,
                format!("alpha must lie in ({alpha_min}, {n}), got {}", self.alpha),
            );
        }
        let p_energy = (n + self.alpha) / (n - 2.0);
        if !(self.p >= 2.0) {
            fail("p >= 2", self.p, format!("p must be >= 2, got {}", self.p));
        }
        if !(self.p < p_energy) {
            fail(
                "p < p^b",
                self.p,
                format!("p must be < p^b = {p_energy}, got {}", self.p),
            );
        }
        let b_min = -(n - 2.0).powi(2) / 4.0;
        if !(self.b > b_min) {
            fail(
                "b > -(N-2)^2/4",
                self.b,
                format!("b must exceed -(N-2)^2/4 = {b_min} strictly, got {}", self.b),
            );
        }
        if self.a != 1 && self.a != -1 {
            fail(
                "a in {+1, -1}",
                self.a as f64,
                format!("a must be +1 or -1, got {}", self.a),
            );
        }
        if !(self.delta >= 0.0) || !self.delta.is_finite() {
            fail(
                "delta >= 0",
                self.delta,
                format!("delta must be finite and >= 0, got {}", self.delta),
            );
        }
        ValidationReport { violations }
    }

    pub fn exponents(&self) -> CriticalExponents {
        let n = self.n();
        let p_mass = 1.0 + (2.0 + self.alpha) / n;
        let p_energy = (n + self.alpha) / (n - 2.0);
        let gamma = n / 2.0 - (2.0 + self.alpha) / (2.0 * self.p - 2.0);
        let denom = self.gn_kinetic_exponent() - 2.0;
        let sigma = if denom.abs() <= CRITICAL_TOL * (n + self.alpha) {
            None
        } else {
            Some(self.gn_mass_exponent() / denom)
        };
        CriticalExponents {
            p_mass,
            p_energy,
            gamma,
            sigma,
        }
    }

    pub fn regime(&self) -> Regime {
        let gamma = self.exponents().gamma;
        if gamma.abs() <= CRITICAL_TOL {
            Regime::MassCritical
        } else if (gamma - 1.0).abs() <= CRITICAL_TOL {
            Regime::EnergyCritical
        } else if gamma < 0.0 {
            Regime::MassSubcritical
        } else {
            Regime::InterCritical
        }
    }

    /// Exponent of `||u||_{L^2}` in the Gagliardo-Nirenberg inequality, `N + alpha - N p + 2 p`.
    pub fn gn_mass_exponent(&self) -> f64 {
        self.n() + self.alpha - self.n() * self.p + 2.0 * self.p
    }

    /// Exponent of `||u||_{H_b^1}` in the Gagliardo-Nirenberg inequality, `N p - N - alpha`.
    pub fn gn_kinetic_exponent(&self) -> f64 {
        self.n() * self.p - self.n() - self.alpha
    }

    /// The Riesz constant, so that `I_alpha(x) = A / |x|^(N - alpha)`.
    pub fn riesz_constant(&self) -> f64 {
        riesz_constant(self.dim, self.alpha)
    }

    /// The nonlinear coupling as a float (+1 or -1).
    pub fn coupling(&self) -> f64 {
        self.a as f64
    }

    pub fn with_b(mut self, b: f64) -> Self {
        self.b = b;
        self
    }

    pub fn with_delta(mut self, delta: f64) -> Self {
        self.delta = delta;
        self
    }

    pub fn with_p(mut self, p: f64) -> Self {
        self.p = p;
        self
    }

    pub fn with_a(mut self, a: i32) -> Self {
        self.a = a;
        self
    }

    /// Upper exponent for the radial blowup branch, `(2N + 6) / (N + 1)`.
    pub fn radial_blowup_exponent(&self) -> f64 {
        (2.0 * self.n() + 6.0) / (self.n() + 1.0)
    }
}

/// `Gamma((N - alpha)/2) / (Gamma(alpha/2) pi^(N/2) 2^alpha)`.
pub fn riesz_constant(dim: usize, alpha: f64) -> f64 {
    let n = dim as f64;
    gamma((n - alpha) / 2.0) / (gamma(alpha / 2.0) * PI.powf(n / 2.0) * 2f64.powf(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> ProblemParams {
        ProblemParams::new(3, 2.0, 2.0, -0.1, 1, 0.0)
    }

    #[test]
    fn valid_hartree_case_passes() {
        assert!(base().validate().passed());
    }

    #[test]
    fn hardy_boundary_is_excluded() {
        let report = base().with_b(-0.25).validate();
        assert!(!report.passed());
        assert!(report.violations[0].message.contains("-0.25"));
    }

    #[test]
    fn energy_critical_p_is_rejected() {
        let report = base().with_p(5.0).validate();
        assert_eq!(report.violations.len(), 1);
        assert!(report.violations[0].message.contains("p^b = 5"));
    }

    #[test]
    fn multiple_violations_are_all_listed() {
        let params = ProblemParams::new(3, 3.5, 1.5, -1.0, 0, -1.0);
        assert_eq!(params.validate().violations.len(), 5);
        assert!(!ProblemParams::new(2, 1.0, 2.0, 0.0, 1, 0.0).validate().passed());
    }

    #[test]
    fn exponents_for_three_dimensions() {
        let e = base().exponents();
        assert!((e.p_mass - 7.0 / 3.0).abs() < 1e-15);
        assert_eq!(e.p_energy, 5.0);
        let e3 = base().with_p(3.0).exponents();
        assert!((e3.sigma.unwrap() - 1.0).abs() < 1e-15);
        assert!((e3.gamma - 0.5).abs() < 1e-15);
    }

    #[test]
    fn sigma_undefined_at_mass_critical() {
        let e = base().with_p(7.0 / 3.0).exponents();
        assert!(e.gamma.abs() < 1e-14);
        assert!(e.sigma.is_none());
    }

    #[test]
    fn regimes() {
        assert_eq!(base().regime(), Regime::MassSubcritical);
        assert_eq!(base().with_p(7.0 / 3.0).regime(), Regime::MassCritical);
        assert_eq!(base().with_p(3.0).regime(), Regime::InterCritical);
        assert_eq!(base().with_p(5.0).regime(), Regime::EnergyCritical);
    }

    #[test]
    fn riesz_constant_newtonian() {
        // Gamma(1/2) / (Gamma(1) pi^(3/2) 4) = 1 / (4 pi)
        assert!((riesz_constant(3, 2.0) - 1.0 / (4.0 * PI)).abs() < 1e-15);
    }
}

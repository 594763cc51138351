//! Virial quantities, the dichotomy classifier and virial cross-checks.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::{evolve, EvolveConfig, Outcome, TrajectoryRecord};
use crate::functionals::{self, Parts};
use crate::ground_state::Thresholds;
use crate::model::Model;
use crate::params::Regime;
use crate::special::epstein_zeta;
use crate::spectral::SpectralField;

/// Largest grid on which the pair-sum double integral is evaluated unless forced.
pub const BRUTE_FORCE_MAX_N: usize = 32;

/// `|ratio - 1|` below which the dichotomy is declared undecided.
pub const RATIO_TOL: f64 = 1e-6;

/// Virial weight `w`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum VirialWeight {
    /// `w = |x|^2`.
    Quadratic,
    /// `phi_R(x) = R^2 psi(|x| / R)`.
    Localized { r: f64 },
}

/// Profile `psi` and its first four derivatives.
///
/// `psi'(r) = 2r` on `[0, 1]`, `2r S((r - 1)/9)` on `[1, 10]` with the quintic
/// smoothstep `S(s) = 1 - 10s^3 + 15s^4 - 6s^5`, and `0` beyond.
pub fn psi_profile(r: f64) -> [f64; 5] {
    if r <= 1.0 {
        return [r * r, 2.0 * r, 2.0, 0.0, 0.0];
    }
    let s = ((r - 1.0) / 9.0).min(1.0);
    // primitive of 2t S((t-1)/9) on [1, r], in the variable s
    let prim = s + 4.5 * s.powi(2) - 2.5 * s.powi(4) - 15.0 * s.powi(5) + 21.5 * s.powi(6)
        - 54.0 / 7.0 * s.powi(7);
    let value = 1.0 + 18.0 * prim;
    if r >= 10.0 {
        return [value, 0.0, 0.0, 0.0, 0.0];
    }
    let sm = 1.0 - 10.0 * s.powi(3) + 15.0 * s.powi(4) - 6.0 * s.powi(5);
    let d1 = -30.0 * s * s * (1.0 - s).powi(2);
    let d2 = -60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
    let d3 = -60.0 * (1.0 - 6.0 * s + 6.0 * s * s);
    [
        value,
        2.0 * r * sm,
        2.0 * sm + 2.0 * r * d1 / 9.0,
        4.0 * d1 / 9.0 + 2.0 * r * d2 / 81.0,
        6.0 * d2 / 81.0 + 2.0 * r * d3 / 729.0,
    ]
}

/// Radial derivatives of a weight together with the quantities the virial
/// terms need.
#[derive(Debug, Clone, Copy)]
struct RadialJet {
    /// `f'(r)`
    d1: f64,
    /// `f''(r)`
    d2: f64,
    /// `f'(r) / r`, with its limit at the origin.
    d1_over_r: f64,
    laplacian: f64,
    bilaplacian: f64,
}

impl VirialWeight {
    pub fn localized(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Config(format!("localization radius must be positive, got {r}")));
        }
        Ok(Self::Localized { r })
    }

    /// Radial derivatives `[f, f', f'', f''', f'''']` at `|x| = r`.
    pub fn radial(&self, r: f64) -> [f64; 5] {
        match *self {
            Self::Quadratic => [r * r, 2.0 * r, 2.0, 0.0, 0.0],
            Self::Localized { r: big_r } => {
                let d = psi_profile(r / big_r);
                [
                    big_r * big_r * d[0],
                    big_r * d[1],
                    d[2],
                    d[3] / big_r,
                    d[4] / (big_r * big_r),
                ]
            }
        }
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.radial(x.iter().map(|v| v * v).sum::<f64>().sqrt())[0]
    }

    fn jet(&self, r: f64, dim: usize) -> RadialJet {
        let [_, f1, f2, f3, f4] = self.radial(r);
        let nm1 = dim as f64 - 1.0;
        // f' is odd with f''(0) the slope, so f'/r -> f''(0); both weights are
        // quadratic near the origin and the bi-Laplacian vanishes there.
        if r < 1e-12 {
            return RadialJet {
                d1: 0.0,
                d2: f2,
                d1_over_r: f2,
                laplacian: dim as f64 * f2,
                bilaplacian: 0.0,
            };
        }
        let g1 = f3 + nm1 * (f2 / r - f1 / (r * r));
        let g2 = f4 + nm1 * (f3 / r - 2.0 * f2 / (r * r) + 2.0 * f1 / (r * r * r));
        RadialJet {
            d1: f1,
            d2: f2,
            d1_over_r: f1 / r,
            laplacian: f2 + nm1 * f1 / r,
            bilaplacian: g2 + nm1 * g1 / r,
        }
    }

    fn check_grid(&self, model: &Model) -> Result<()> {
        if let Self::Localized { r } = *self {
            let l = model.grid().half_width;
            if r > l / 4.0 {
                return Err(Error::Config(format!(
                    "localization radius {r} exceeds L/4 = {}",
                    l / 4.0
                )));
            }
        }
        Ok(())
    }
}

/// `(int |x|^2 |u|^2, 4 Im int conj(u) x . grad u)`: the variance and its time
/// derivative along the flow.
pub fn variance_and_momentum(model: &Model, u: &SpectralField) -> (f64, f64) {
    let hat = model.spectral().forward(u);
    (variance(model, u), momentum_from_hat(model, u, &hat))
}

pub fn variance(model: &Model, u: &SpectralField) -> f64 {
    u.grid().cell_volume()
        * u.values()
            .iter()
            .zip(model.radius_squared())
            .map(|(v, r2)| r2 * v.norm_sqr())
            .sum::<f64>()
}

pub(crate) fn momentum_from_hat(model: &Model, u: &SpectralField, hat: &[Complex64]) -> f64 {
    let grid = u.grid();
    let mut acc = 0.0;
    for axis in 0..grid.dim {
        let d = model.spectral().partial_from_hat(hat, axis);
        let coords = grid.map_points(|x| x[axis]);
        acc += u
            .values()
            .iter()
            .zip(d.values())
            .zip(&coords)
            .map(|((v, dv), x)| x * (v.conj() * dv).im)
            .sum::<f64>();
    }
    4.0 * grid.cell_volume() * acc
}

/// `int |x|^2 |u|^2 / (|x|^2 + delta)^2`.
fn hardy_virial_integral(model: &Model, u: &SpectralField) -> f64 {
    let delta = model.params().delta;
    u.grid().cell_volume()
        * u.values()
            .iter()
            .zip(model.radius_squared())
            .map(|(v, &r2)| r2 / (r2 + delta).powi(2) * v.norm_sqr())
            .sum::<f64>()
}

/// `8 ||grad u||^2 + 8b int |x|^2 |u|^2 / (|x|^2 + delta)^2 + a ((4 alpha + 4N - 4Np)/p) P`.
pub fn virial_rhs_standard(model: &Model, u: &SpectralField) -> f64 {
    virial_rhs_from_parts(model, u, &functionals::parts(model, u))
}

pub fn virial_rhs_from_parts(model: &Model, u: &SpectralField, parts: &Parts) -> f64 {
    let prm = model.params();
    let n = prm.dim as f64;
    let hardy = if prm.b == 0.0 { 0.0 } else { hardy_virial_integral(model, u) };
    8.0 * parts.kinetic
        + 8.0 * prm.b * hardy
        + prm.coupling() * (4.0 * prm.alpha + 4.0 * n - 4.0 * n * prm.p) / prm.p
            * parts.nonlocal_term
}

/// How the nonlocal double integral of the virial identity is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DoubleIntegral {
    /// Integrated by parts into `(4/p) int |u|^p grad w . grad(I_alpha * |u|^p)`.
    #[default]
    Reduced,
    /// Direct pair sum with the exact kernel. Refused above
    /// [`BRUTE_FORCE_MAX_N`] nodes per axis unless `force` is set.
    BruteForce { force: bool },
}

/// The five terms of the weighted virial identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirialTerms {
    /// `4 Re int d_i u d_j conj(u) d_ij w`
    pub hessian: f64,
    /// `-int |u|^2 Delta^2 w`
    pub bilaplacian: f64,
    /// `4b int (x . grad w) |u|^2 / (|x|^2 + delta)^2`
    pub hardy: f64,
    /// The double integral term with its prefactor and the sign of `a`.
    pub double_integral: f64,
    /// `a (4/p - 2) int (I_alpha * |u|^p) |u|^p Delta w`
    pub laplacian_nonlocal: f64,
}

impl VirialTerms {
    pub fn total(&self) -> f64 {
        self.hessian + self.bilaplacian + self.hardy + self.double_integral + self.laplacian_nonlocal
    }
}

/// Second time derivative of `int w |u|^2` along the flow.
///
/// For the quadratic weight with the reduced double integral this is
/// [`virial_rhs_standard`].
pub fn virial_rhs_weighted(
    model: &Model,
    u: &SpectralField,
    w: &VirialWeight,
    method: DoubleIntegral,
) -> Result<f64> {
    if *w == VirialWeight::Quadratic && method == DoubleIntegral::Reduced {
        return Ok(virial_rhs_standard(model, u));
    }
    Ok(virial_terms(model, u, w, method)?.total())
}

pub fn virial_terms(
    model: &Model,
    u: &SpectralField,
    w: &VirialWeight,
    method: DoubleIntegral,
) -> Result<VirialTerms> {
    w.check_grid(model)?;
    let prm = model.params();
    let grid = *u.grid();
    let dim = grid.dim;
    let dv = grid.cell_volume();
    let jets: Vec<RadialJet> = model
        .radius_squared()
        .iter()
        .map(|r2| w.jet(r2.sqrt(), dim))
        .collect();
    let points = grid.map_points(|x| x.to_vec());

    let hat = model.spectral().forward(u);
    let grad: Vec<SpectralField> =
        (0..dim).map(|a| model.spectral().partial_from_hat(&hat, a)).collect();

    let mut hessian = 0.0;
    let mut bilaplacian = 0.0;
    let mut hardy = 0.0;
    for (i, (jet, x)) in jets.iter().zip(&points).enumerate() {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        let mut grad_sq = 0.0;
        let mut radial = Complex64::new(0.0, 0.0);
        for (a, g) in grad.iter().enumerate() {
            let d = g.values()[i];
            grad_sq += d.norm_sqr();
            radial += d * x[a];
        }
        // d_ij w = f'' xh_i xh_j + (f'/r)(delta_ij - xh_i xh_j)
        let radial_sq = if r2 > 0.0 { radial.norm_sqr() / r2 } else { 0.0 };
        hessian += jet.d1_over_r * grad_sq + (jet.d2 - jet.d1_over_r) * radial_sq;
        let m = u.values()[i].norm_sqr();
        bilaplacian += jet.bilaplacian * m;
        if prm.b != 0.0 {
            hardy += jet.d1 * r2.sqrt() * m / (r2 + prm.delta).powi(2);
        }
    }

    let rho = functionals::density(u, prm.p);
    let phi = model.riesz().convolve(&rho);
    let laplacian_nonlocal = dv
        * rho
            .iter()
            .zip(&phi)
            .zip(&jets)
            .map(|((r, f), j)| r * f * j.laplacian)
            .sum::<f64>();

    let double_integral = match method {
        DoubleIntegral::Reduced => {
            // grad(I_alpha * rho) = I_alpha * grad(rho)
            let rho_field = SpectralField::from_real(grid, &rho)?;
            let rho_hat = model.spectral().forward(&rho_field);
            let mut acc = 0.0;
            for a in 0..dim {
                let d_rho: Vec<f64> = model
                    .spectral()
                    .partial_from_hat(&rho_hat, a)
                    .values()
                    .iter()
                    .map(|v| v.re)
                    .collect();
                let d_phi = model.riesz().convolve(&d_rho);
                for (i, x) in points.iter().enumerate() {
                    let r = model.radius_squared()[i].sqrt();
                    if r > 0.0 {
                        acc += rho[i] * jets[i].d1 * x[a] / r * d_phi[i];
                    }
                }
            }
            4.0 / prm.p * dv * acc
        }
        DoubleIntegral::BruteForce { force } => {
            if grid.n > BRUTE_FORCE_MAX_N && !force {
                return Err(Error::Config(format!(
                    "pair-sum double integral refused at n = {} (limit {BRUTE_FORCE_MAX_N})",
                    grid.n
                )));
            }
            let pairs = pair_sum(model, &rho, &points, &jets);
            -2.0 * prm.riesz_constant() * (dim as f64 - prm.alpha) / prm.p * pairs
        }
    };

    Ok(VirialTerms {
        hessian: 4.0 * dv * hessian,
        bilaplacian: -dv * bilaplacian,
        hardy: 4.0 * prm.b * dv * hardy,
        double_integral: prm.coupling() * double_integral,
        laplacian_nonlocal: prm.coupling() * (4.0 / prm.p - 2.0) * laplacian_nonlocal,
    })
}

/// `sum_{x != y} (x - y).(grad w(x) - grad w(y)) rho(x) rho(y) / |x - y|^{gamma + 2}`
/// times `h^{2N}`, with the lattice correction of the diagonal.
///
/// Near the diagonal the summand behaves like `rho(x)^2 z.H(x)z |z|^{-gamma-2}`;
/// by cubic symmetry its lattice sum is `tr H / N` times that of `|z|^{-gamma}`,
/// whose zeta-regularized value gives the missing self term.
fn pair_sum(model: &Model, rho: &[f64], points: &[Vec<f64>], jets: &[RadialJet]) -> f64 {
    let prm = model.params();
    let dim = prm.dim;
    let gamma = dim as f64 - prm.alpha;
    let h = model.grid().spacing();
    let dv = model.grid().cell_volume();
    let grads: Vec<Vec<f64>> = points
        .iter()
        .zip(jets)
        .map(|(x, j)| x.iter().map(|v| j.d1_over_r * v).collect())
        .collect();
    let active: Vec<usize> = (0..rho.len()).filter(|&i| rho[i] > 0.0).collect();
    let mut total = 0.0;
    for (ai, &i) in active.iter().enumerate() {
        let mut row = 0.0;
        for &j in &active[ai + 1..] {
            let mut dist2 = 0.0;
            let mut dot = 0.0;
            for a in 0..dim {
                let z = points[i][a] - points[j][a];
                dist2 += z * z;
                dot += z * (grads[i][a] - grads[j][a]);
            }
            row += rho[j] * dot * dist2.powf(-(gamma + 2.0) / 2.0);
        }
        total += 2.0 * rho[i] * row;
    }
    let zeta = epstein_zeta(dim, gamma / 2.0);
    let self_term: f64 = rho
        .iter()
        .zip(jets)
        .map(|(r, j)| r * r * j.laplacian / dim as f64)
        .sum();
    dv * dv * total - dv * h.powf(-gamma) * zeta * dv * self_term
}

/// One interior sample of a virial consistency check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirialSample {
    pub t: f64,
    pub second_difference: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirialConsistency {
    pub samples: Vec<VirialSample>,
    pub max_abs_mismatch: f64,
    /// Largest `|d2 - rhs| / |rhs|` over the samples.
    pub max_rel_mismatch: f64,
    /// Largest `|rhs|`.
    pub rhs_scale: f64,
}

/// Central second differences of the recorded variance against the recorded
/// virial right-hand side, at interior samples.
pub fn virial_consistency_check(traj: &TrajectoryRecord) -> Result<VirialConsistency> {
    let t = &traj.times;
    if t.len() < 5 {
        return Err(Error::Config(format!(
            "virial check needs at least 5 samples, got {}",
            t.len()
        )));
    }
    let step = t[1] - t[0];
    if t.windows(2).any(|w| ((w[1] - w[0]) - step).abs() > 1e-9 * step.abs().max(1e-300)) {
        return Err(Error::Config("virial check needs uniformly spaced samples".into()));
    }
    let v = &traj.variance;
    let mut samples = Vec::with_capacity(t.len() - 2);
    for i in 1..t.len() - 1 {
        samples.push(VirialSample {
            t: t[i],
            second_difference: (v[i + 1] - 2.0 * v[i] + v[i - 1]) / (step * step),
            rhs: traj.virial_rhs[i],
        });
    }
    let mut max_abs: f64 = 0.0;
    let mut max_rel: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for s in &samples {
        let d = (s.second_difference - s.rhs).abs();
        max_abs = max_abs.max(d);
        max_rel = max_rel.max(d / s.rhs.abs());
        scale = scale.max(s.rhs.abs());
    }
    Ok(VirialConsistency {
        samples,
        max_abs_mismatch: max_abs,
        max_rel_mismatch: max_rel,
        rhs_scale: scale,
    })
}

/// Least-squares coefficients `[c0, c1, c2]` of `c0 + c1 t + c2 t^2`.
pub fn fit_quadratic(t: &[f64], y: &[f64]) -> Result<[f64; 3]> {
    if t.len() != y.len() || t.len() < 3 {
        return Err(Error::Config("quadratic fit needs at least 3 matching samples".into()));
    }
    // shift and scale t for conditioning, then map back
    let t0 = t.iter().sum::<f64>() / t.len() as f64;
    let s = t.iter().map(|v| (v - t0).abs()).fold(0.0, f64::max).max(1e-300);
    let mut m = [[0.0; 3]; 3];
    let mut rhs = [0.0; 3];
    for (&ti, &yi) in t.iter().zip(y) {
        let x = (ti - t0) / s;
        let basis = [1.0, x, x * x];
        for r in 0..3 {
            rhs[r] += basis[r] * yi;
            for c in 0..3 {
                m[r][c] += basis[r] * basis[c];
            }
        }
    }
    let q = solve3(m, rhs)?;
    // q0 + q1 (t - t0)/s + q2 (t - t0)^2/s^2
    let (a1, a2) = (q[1] / s, q[2] / (s * s));
    Ok([q[0] - a1 * t0 + a2 * t0 * t0, a1 - 2.0 * a2 * t0, a2])
}

fn solve3(mut m: [[f64; 3]; 3], mut b: [f64; 3]) -> Result<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs()))
            .expect("non-empty");
        if m[piv][col].abs() < 1e-14 {
            return Err(Error::Degenerate("singular normal equations".into()));
        }
        m.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..3 {
            let f = m[r][col] / m[col][col];
            for c in col..3 {
                m[r][c] -= f * m[col][c];
            }
            b[r] -= f * b[col];
        }
    }
    let mut x = [0.0; 3];
    for r in (0..3).rev() {
        let tail: f64 = (r + 1..3).map(|c| m[r][c] * x[c]).sum();
        x[r] = (b[r] - tail) / m[r][r];
    }
    Ok(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Prediction {
    Global,
    Blowup,
    Undecided,
}

impl std::fmt::Display for Prediction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Global => "global",
            Self::Blowup => "blowup",
            Self::Undecided => "undecided",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DichotomyPrediction {
    pub prediction: Prediction,
    /// `||u||_{H_b} ||u||^sigma / K`.
    pub ratio: f64,
    /// `E(u) ||u||^{2 sigma} / H`.
    pub energy_ratio: f64,
    pub warnings: Vec<String>,
}

/// `||u||_{H_b} ||u||^sigma / K`.
pub fn dichotomy_ratio(model: &Model, u: &SpectralField, th: &Thresholds) -> f64 {
    dichotomy_ratio_from_parts(&functionals::parts(model, u), th)
}

pub fn dichotomy_ratio_from_parts(parts: &Parts, th: &Thresholds) -> f64 {
    parts.hb_norm_sq().sqrt() * parts.mass.powf(th.sigma / 2.0) / th.k
}

/// `E(u) ||u||^{2 sigma} / H`.
pub fn energy_ratio(model: &Model, u: &SpectralField, th: &Thresholds) -> f64 {
    let parts = functionals::parts(model, u);
    functionals::energy_from_parts(model, &parts) * parts.mass.powf(th.sigma) / th.h
}

/// Global existence or blowup below the ground-state level, for
/// inter-critical focusing problems.
pub fn classify_dichotomy(
    model: &Model,
    u0: &SpectralField,
    th: &Thresholds,
) -> Result<DichotomyPrediction> {
    let prm = model.params();
    match prm.regime() {
        Regime::InterCritical => {}
        Regime::MassCritical => {
            return Err(Error::Regime(
                "mass-critical: use the mass threshold ||Q_b|| instead of K and H".into(),
            ))
        }
        Regime::MassSubcritical => {
            return Err(Error::Regime(
                "mass-subcritical: every solution is global, there is no dichotomy".into(),
            ))
        }
        other => {
            return Err(Error::Regime(format!("no dichotomy in the {other} regime")));
        }
    }
    if prm.a != 1 {
        return Err(Error::Regime("the dichotomy concerns the focusing case a = 1".into()));
    }
    let parts = functionals::parts(model, u0);
    let ratio = dichotomy_ratio_from_parts(&parts, th);
    let energy_ratio =
        functionals::energy_from_parts(model, &parts) * parts.mass.powf(th.sigma) / th.h;
    let mut warnings = Vec::new();
    let prediction = if !(energy_ratio < 1.0) || (ratio - 1.0).abs() <= RATIO_TOL {
        Prediction::Undecided
    } else if ratio < 1.0 {
        Prediction::Global
    } else {
        warnings.push("blowup branch uses x u0 in L^2, which holds on the bounded grid".into());
        let radial_limit = prm.radial_blowup_exponent();
        if prm.p >= radial_limit {
            warnings.push(format!(
                "p = {} >= (2N + 6)/(N + 1) = {radial_limit}: the radial branch does not apply",
                prm.p
            ));
        }
        Prediction::Blowup
    };
    Ok(DichotomyPrediction {
        prediction,
        ratio,
        energy_ratio,
        warnings,
    })
}

/// One amplitude of a dichotomy scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanRow {
    pub amplitude: f64,
    pub ratio: f64,
    pub energy_ratio: f64,
    pub prediction: Prediction,
    pub outcome: Outcome,
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// `None` when the criteria make no prediction.
    pub agreement: Option<bool>,
}

impl ScanRow {
    pub const CSV_HEADER: &'static str =
        "c,ratio,energy_ratio,prediction,outcome,outcome_time,ratio_min,ratio_max,agreement";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.amplitude,
            self.ratio,
            self.energy_ratio,
            self.prediction,
            self.outcome.label(),
            self.outcome.time().map_or(String::new(), |t| t.to_string()),
            self.ratio_min,
            self.ratio_max,
            self.agreement.map_or(String::new(), |a| a.to_string())
        )
    }
}

/// Compares a prediction with a simulated trajectory.
///
/// Global needs a completed run with the ratio below 1 at every sample,
/// blowup needs a detection with the ratio above 1 at every sample.
pub fn agreement(prediction: Prediction, traj: &TrajectoryRecord) -> Option<bool> {
    let ratios: Vec<f64> = traj.dichotomy_ratio.iter().flatten().copied().collect();
    match prediction {
        Prediction::Undecided => None,
        Prediction::Global => Some(
            traj.outcome == Outcome::Completed
                && !ratios.is_empty()
                && ratios.iter().all(|&r| r < 1.0),
        ),
        Prediction::Blowup => Some(
            traj.outcome.is_blowup() && !ratios.is_empty() && ratios.iter().all(|&r| r > 1.0),
        ),
    }
}

/// Classifies and evolves `c * base` for every `c` in `amplitudes`.
pub fn dichotomy_scan(
    model: &Model,
    base: &SpectralField,
    amplitudes: &[f64],
    th: &Thresholds,
    config: &EvolveConfig,
) -> Result<Vec<ScanRow>> {
    amplitudes
        .iter()
        .map(|&c| {
            let u0 = base.scaled(c);
            let pred = classify_dichotomy(model, &u0, th)?;
            let traj = evolve(model, &u0, config, Some(th))?;
            let ratios: Vec<f64> = traj.dichotomy_ratio.iter().flatten().copied().collect();
            Ok(ScanRow {
                amplitude: c,
                ratio: pred.ratio,
                energy_ratio: pred.energy_ratio,
                prediction: pred.prediction,
                ratio_min: ratios.iter().copied().fold(f64::INFINITY, f64::min),
                ratio_max: ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                agreement: agreement(pred.prediction, &traj),
                outcome: traj.outcome,
            })
        })
        .collect()
}

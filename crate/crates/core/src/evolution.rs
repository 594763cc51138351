//! Strang splitting for the regularized problem, blowup detection, and the
//! exact and constructed reference solutions.
//!
//! Convention: `i u_t - L_b u = -a (I_alpha * |u|^p) |u|^{p-2} u` with the
//! regularized weight `b / (|x|^2 + delta)`. The kinetic flow multiplies each
//! mode by `exp(-i t |k|^2)`; the potential flow multiplies by
//! `exp(-i t (V_delta - a Phi |u|^{p-2}))`, which is exact because it leaves
//! `|u|` unchanged.

use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{self, dichotomy_ratio_from_parts};
use crate::error::{Error, Result};
use crate::functionals::{self, FunctionalReport, Parts};
use crate::ground_state::Thresholds;
use crate::model::Model;
use crate::params::{ProblemParams, Regime};
use crate::spectral::{resample_scaled, resample_scaled_checked, SpectralField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvolveConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Record diagnostics every this many steps.
    pub save_every: usize,
    /// Blowup when `||grad u||` exceeds this multiple of its initial value.
    pub blowup_gradient_factor: f64,
    /// Blowup when the upper-third spectral tail carries more than this
    /// fraction of the mass.
    pub tail_fraction_max: f64,
    /// Halve `dt` when a step's energy jump exceeds 10x the running median.
    pub adaptive: bool,
    /// Floor for adaptive halving; reaching it ends the run as resolution loss.
    pub dt_min: f64,
}

impl Default for EvolveConfig {
    fn default() -> Self {
        Self {
            dt: 1e-3,
            t_max: 1.0,
            save_every: 10,
            blowup_gradient_factor: 50.0,
            tail_fraction_max: 1e-4,
            adaptive: false,
            dt_min: 1e-6,
        }
    }
}

impl EvolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.t_max > 0.0 && self.t_max.is_finite()) {
            return Err(Error::Config(format!("t_max must be positive, got {}", self.t_max)));
        }
        if self.save_every == 0 {
            return Err(Error::Config("save_every must be at least 1".into()));
        }
        if !(self.blowup_gradient_factor > 1.0) {
            return Err(Error::Config("blowup_gradient_factor must exceed 1".into()));
        }
        if !(self.tail_fraction_max > 0.0) {
            return Err(Error::Config("tail_fraction_max must be positive".into()));
        }
        if self.adaptive && !(self.dt_min > 0.0 && self.dt_min < self.dt) {
            return Err(Error::Config("dt_min must lie in (0, dt)".into()));
        }
        Ok(())
    }
}

/// What ended a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Outcome {
    Completed,
    /// `t_est` is the first detection time minus the step.
    BlowupDetected { t_est: f64, trigger: Trigger },
    /// Adaptive stepping hit `dt_min`.
    ResolutionLost { t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Trigger {
    GradientGrowth,
    SpectralTail,
}

impl Outcome {
    pub fn is_blowup(&self) -> bool {
        !matches!(self, Outcome::Completed)
    }

    pub fn time(&self) -> Option<f64> {
        match *self {
            Outcome::Completed => None,
            Outcome::BlowupDetected { t_est, .. } => Some(t_est),
            Outcome::ResolutionLost { t } => Some(t),
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Completed => "completed",
            Outcome::BlowupDetected { .. } => "blowup-detected",
            Outcome::ResolutionLost { .. } => "resolution-lost",
        }
    }
}

/// Column order of [`TrajectoryRecord::write_csv`].
/// Spectral tail allowed in constructed blowup data, well under the
/// evolution's own under-resolution trigger. The smooth bump alone sits
/// near 2e-8 at n = 64.
const CONSTRUCTION_TAIL_MAX: f64 = 1e-6;

pub const TRAJECTORY_COLUMNS: [&str; 12] = [
    "t",
    "mass",
    "energy",
    "hb_norm_sq",
    "kinetic",
    "potential_term",
    "nonlocal_term",
    "variance",
    "momentum_virial",
    "virial_rhs",
    "dichotomy_ratio",
    "tail_fraction",
];

/// Diagnostics sampled along a run. All sequences share one length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub reports: Vec<FunctionalReport>,
    /// `int |x|^2 |u|^2`
    pub variance: Vec<f64>,
    /// `4 Im int conj(u) x . grad u`, the time derivative of the variance.
    pub momentum_virial: Vec<f64>,
    /// Standard virial right-hand side, the second derivative of the variance.
    pub virial_rhs: Vec<f64>,
    /// `||u||_{H_b} ||u||^sigma / K`, when thresholds were given.
    pub dichotomy_ratio: Vec<Option<f64>>,
    pub tail_fraction: Vec<f64>,
    pub outcome: Outcome,
    pub steps: usize,
    /// Step in use when the run ended.
    pub final_dt: f64,
}

impl TrajectoryRecord {
    fn new(dt: f64) -> Self {
        Self {
            times: Vec::new(),
            reports: Vec::new(),
            variance: Vec::new(),
            momentum_virial: Vec::new(),
            virial_rhs: Vec::new(),
            dichotomy_ratio: Vec::new(),
            tail_fraction: Vec::new(),
            outcome: Outcome::Completed,
            steps: 0,
            final_dt: dt,
        }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn csv_header() -> String {
        TRAJECTORY_COLUMNS.join(",")
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", Self::csv_header())?;
        for i in 0..self.len() {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                self.reports[i].csv_row(self.times[i]),
                self.variance[i],
                self.momentum_virial[i],
                self.virial_rhs[i],
                self.dichotomy_ratio[i].map_or(String::new(), |r| r.to_string()),
                self.tail_fraction[i]
            )?;
        }
        Ok(())
    }

    /// Reads the columns written by [`TrajectoryRecord::write_csv`]. The
    /// outcome is not part of the CSV and has to be supplied.
    pub fn read_csv<R: BufRead>(r: R, outcome: Outcome) -> Result<Self> {
        let mut lines = r.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Format("empty trajectory CSV".into()))??;
        if header.trim() != Self::csv_header() {
            return Err(Error::Format(format!("unexpected trajectory header: {header}")));
        }
        let mut rec = Self::new(f64::NAN);
        for (no, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let cells: Vec<&str> = line.split(',').collect();
            if cells.len() != TRAJECTORY_COLUMNS.len() {
                return Err(Error::Format(format!("line {}: expected 12 columns", no + 2)));
            }
            let num = |i: usize| -> Result<f64> {
                cells[i]
                    .trim()
                    .parse()
                    .map_err(|_| Error::Format(format!("line {}: bad number {:?}", no + 2, cells[i])))
            };
            let parts = Parts {
                mass: num(1)?,
                kinetic: num(4)?,
                potential_term: num(5)?,
                nonlocal_term: num(6)?,
            };
            rec.times.push(num(0)?);
            rec.reports.push(FunctionalReport {
                mass: parts.mass,
                energy: num(2)?,
                hb_norm_sq: num(3)?,
                kinetic: parts.kinetic,
                potential_term: parts.potential_term,
                nonlocal_term: parts.nonlocal_term,
                weinstein: None,
            });
            rec.variance.push(num(7)?);
            rec.momentum_virial.push(num(8)?);
            rec.virial_rhs.push(num(9)?);
            rec.dichotomy_ratio
                .push(if cells[10].trim().is_empty() { None } else { Some(num(10)?) });
            rec.tail_fraction.push(num(11)?);
        }
        rec.outcome = outcome;
        Ok(rec)
    }

    /// Largest `|E(t) - E(0)| / |E(0)|`.
    pub fn max_energy_drift(&self) -> f64 {
        max_relative_drift(self.reports.iter().map(|r| r.energy))
    }

    /// Largest `|M(t) - M(0)| / M(0)`.
    pub fn max_mass_drift(&self) -> f64 {
        max_relative_drift(self.reports.iter().map(|r| r.mass))
    }
}

fn max_relative_drift(mut values: impl Iterator<Item = f64>) -> f64 {
    let Some(first) = values.next() else { return 0.0 };
    values.fold(0.0, |m, v| m.max((v - first).abs() / first.abs()))
}

/// Quantities read off the last kinetic half step for free.
#[derive(Debug, Clone, Copy)]
struct StepInfo {
    kinetic: f64,
    tail_fraction: f64,
}

fn check_evolution_params(prm: &ProblemParams) -> Result<()> {
    if prm.b != 0.0 && !(prm.delta > 0.0) {
        return Err(Error::InvalidParams(format!(
            "evolution needs delta > 0 when b != 0, got {}",
            prm.delta
        )));
    }
    Ok(())
}

/// One Strang step: half kinetic, full potential and nonlocal phase, half
/// kinetic. A negative `dt` steps backwards.
pub fn strang_step(model: &Model, u: &SpectralField, dt: f64) -> Result<SpectralField> {
    check_evolution_params(model.params())?;
    let mut v = u.clone();
    step_in_place(model, &mut v, dt)?;
    Ok(v)
}

fn step_in_place(model: &Model, u: &mut SpectralField, dt: f64) -> Result<StepInfo> {
    let spectral = model.spectral();
    let prm = model.params();
    let mut hat = spectral.forward(u);
    spectral.kinetic_phase_in_place(&mut hat, 0.5 * dt);
    spectral.inverse_in_place(&mut hat);

    let coupling = prm.coupling();
    if coupling != 0.0 || prm.b != 0.0 {
        let phi = if coupling != 0.0 {
            let rho: Vec<f64> = hat.iter().map(|v| v.norm().powf(prm.p)).collect();
            model.riesz().convolve(&rho)
        } else {
            vec![0.0; hat.len()]
        };
        for ((v, f), w) in hat.iter_mut().zip(&phi).zip(model.hardy()) {
            let r = v.norm();
            let nl = if r > 0.0 { coupling * f * r.powf(prm.p - 2.0) } else { 0.0 };
            *v *= Complex64::from_polar(1.0, -dt * (w - nl));
        }
    }

    spectral.forward_in_place(&mut hat);
    spectral.kinetic_phase_in_place(&mut hat, 0.5 * dt);
    let info = StepInfo {
        kinetic: spectral.gradient_squared_from_hat(&hat),
        tail_fraction: spectral.tail_fraction_from_hat(&hat),
    };
    spectral.inverse_in_place(&mut hat);
    if hat.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::Instability {
            time: dt,
            reason: "non-finite values after a Strang step".into(),
        });
    }
    u.values_mut().copy_from_slice(&hat);
    Ok(info)
}

/// Evolves `u0` to `t_max` or until blowup is detected.
pub fn evolve(
    model: &Model,
    u0: &SpectralField,
    config: &EvolveConfig,
    thresholds: Option<&Thresholds>,
) -> Result<TrajectoryRecord> {
    Ok(evolve_with(model, u0, config, thresholds, |_, _| Ok(()))?.0)
}

/// [`evolve`] that also hands every recorded state to `on_save` and returns
/// the final state.
pub fn evolve_with(
    model: &Model,
    u0: &SpectralField,
    config: &EvolveConfig,
    thresholds: Option<&Thresholds>,
    mut on_save: impl FnMut(f64, &SpectralField) -> Result<()>,
) -> Result<(TrajectoryRecord, SpectralField)> {
    config.validate()?;
    check_evolution_params(model.params())?;
    model.grid().check_same(u0.grid())?;
    let spectral = model.spectral();

    let hat0 = spectral.forward(u0);
    let tail0 = spectral.tail_fraction_from_hat(&hat0);
    if tail0 > config.tail_fraction_max {
        return Err(Error::Resolution(format!(
            "initial data is under-resolved: spectral tail fraction {tail0:e} exceeds {:e}",
            config.tail_fraction_max
        )));
    }
    let grad0 = spectral.gradient_squared_from_hat(&hat0).sqrt();
    let grad_limit = config.blowup_gradient_factor * grad0;

    let mut rec = TrajectoryRecord::new(config.dt);
    let mut u = u0.clone();
    let mut t = 0.0;
    let mut dt = config.dt;
    record(model, &u, t, tail0, thresholds, &mut rec);
    on_save(t, &u)?;

    let mut energy = functionals::energy(model, &u);
    let mut jumps: Vec<f64> = Vec::new();
    let end = config.t_max * (1.0 - 1e-12);
    let mut step = 0usize;
    while t < end {
        let h = dt.min(config.t_max - t);
        let mut next = u.clone();
        let info = step_in_place(model, &mut next, h).map_err(|e| match e {
            Error::Instability { reason, .. } => Error::Instability { time: t + h, reason },
            other => other,
        })?;

        if config.adaptive {
            let e_next = functionals::energy(model, &next);
            let jump = (e_next - energy).abs();
            let scale = functionals::hb_norm_sq(model, &next).abs().max(energy.abs());
            if jumps.len() >= 5 && jump > 1e-10 * scale && jump > 10.0 * running_median(&jumps) {
                dt *= 0.5;
                if dt < config.dt_min {
                    rec.outcome = Outcome::ResolutionLost { t };
                    break;
                }
                continue;
            }
            jumps.push(jump);
            energy = e_next;
        }

        u = next;
        t += h;
        step += 1;
        rec.steps = step;
        rec.final_dt = dt;

        if info.kinetic.sqrt() > grad_limit {
            rec.outcome = Outcome::BlowupDetected {
                t_est: t - h,
                trigger: Trigger::GradientGrowth,
            };
            break;
        }
        if info.tail_fraction > config.tail_fraction_max {
            rec.outcome = Outcome::BlowupDetected {
                t_est: t - h,
                trigger: Trigger::SpectralTail,
            };
            break;
        }
        if step % config.save_every == 0 || t >= end {
            record(model, &u, t, info.tail_fraction, thresholds, &mut rec);
            on_save(t, &u)?;
        }
    }
    Ok((rec, u))
}

fn running_median(jumps: &[f64]) -> f64 {
    const WINDOW: usize = 101;
    let start = jumps.len().saturating_sub(WINDOW);
    let mut w = jumps[start..].to_vec();
    w.sort_by(f64::total_cmp);
    w[w.len() / 2]
}

fn record(
    model: &Model,
    u: &SpectralField,
    t: f64,
    tail: f64,
    thresholds: Option<&Thresholds>,
    rec: &mut TrajectoryRecord,
) {
    let hat = model.spectral().forward(u);
    let parts = Parts {
        mass: u.mass(),
        kinetic: model.spectral().gradient_squared_from_hat(&hat),
        potential_term: functionals::potential_term(model, u),
        nonlocal_term: functionals::nonlocal_term(model, u),
    };
    rec.times.push(t);
    rec.reports.push(functionals::report_from_parts(model, &parts));
    rec.variance.push(diagnostics::variance(model, u));
    rec.momentum_virial.push(diagnostics::momentum_from_hat(model, u, &hat));
    rec.virial_rhs.push(diagnostics::virial_rhs_from_parts(model, u, &parts));
    rec.dichotomy_ratio
        .push(thresholds.map(|th| dichotomy_ratio_from_parts(&parts, th)));
    rec.tail_fraction.push(tail);
}

/// Cauchy differences between runs at a decreasing sequence of `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSequenceReport {
    pub deltas: Vec<f64>,
    pub outcomes: Vec<Outcome>,
    /// `||u_{delta_j}(T) - u_{delta_{j+1}}(T)|| / ||u0||` at the common final time.
    pub final_differences: Vec<f64>,
    /// Largest relative difference of the recorded variance between consecutive runs.
    pub variance_differences: Vec<f64>,
}

/// Runs `delta` in `{4h^2, 2h^2, h^2}` unless other values are given.
pub fn delta_sequence(
    model: &Model,
    u0: &SpectralField,
    config: &EvolveConfig,
    deltas: Option<&[f64]>,
) -> Result<DeltaSequenceReport> {
    let h = model.grid().spacing();
    let default = [4.0 * h * h, 2.0 * h * h, h * h];
    let deltas = deltas.unwrap_or(&default).to_vec();
    let mut runs = Vec::with_capacity(deltas.len());
    for &d in &deltas {
        let m = model.with_params(model.params().with_delta(d))?;
        runs.push(evolve_with(&m, u0, config, None, |_, _| Ok(()))?);
    }
    let norm = u0.l2_norm();
    let mut final_differences = Vec::new();
    let mut variance_differences = Vec::new();
    for pair in runs.windows(2) {
        let (ra, ua) = &pair[0];
        let (rb, ub) = &pair[1];
        final_differences.push(if ra.outcome == Outcome::Completed && rb.outcome == Outcome::Completed {
            ua.l2_distance(ub) / norm
        } else {
            f64::NAN
        });
        let common = ra.len().min(rb.len());
        variance_differences.push(
            (0..common)
                .map(|i| (ra.variance[i] - rb.variance[i]).abs() / ra.variance[i].abs())
                .fold(0.0, f64::max),
        );
    }
    Ok(DeltaSequenceReport {
        deltas,
        outcomes: runs.iter().map(|r| r.0.outcome).collect(),
        final_differences,
        variance_differences,
    })
}

/// Closed-form free Schrodinger evolution of `exp(-|x|^2 / (2 s^2))` under
/// `i u_t = -Delta u`.
pub fn free_gaussian(grid: crate::spectral::Grid, width: f64, t: f64) -> SpectralField {
    let s2 = width * width;
    let z = Complex64::new(s2, 2.0 * t);
    let pre = (Complex64::new(s2, 0.0) / z).powf(grid.dim as f64 / 2.0);
    SpectralField::from_fn(grid, |x| {
        let r2: f64 = x.iter().map(|v| v * v).sum();
        pre * (-r2 / (2.0 * z)).exp()
    })
}

/// `u_T(t, x) = (T - t)^{-N/2} exp(i/(T - t) - i|x|^2/(4(T - t))) Q(x/(T - t))`,
/// sampled on `q`'s grid.
pub fn exact_pseudoconformal(
    params: &ProblemParams,
    q: &SpectralField,
    t: f64,
    big_t: f64,
) -> Result<SpectralField> {
    if params.regime() != Regime::MassCritical {
        return Err(Error::Regime(format!(
            "the pseudo-conformal solution needs p = p_b, got {}",
            params.p
        )));
    }
    if !(big_t > 0.0) || !(t >= 0.0) || t >= big_t {
        return Err(Error::Domain(format!("need 0 <= t < T, got t = {t}, T = {big_t}")));
    }
    let tau = big_t - t;
    let profile = resample_scaled(q, 1.0 / tau);
    let amp = tau.powf(-(params.dim as f64) / 2.0);
    let r_sq = q.grid().radius_squared();
    let values = profile
        .values()
        .iter()
        .zip(&r_sq)
        .map(|(v, r2)| v * Complex64::from_polar(amp, 1.0 / tau - r2 / (4.0 * tau)))
        .collect();
    SpectralField::from_values(*q.grid(), values)
}

/// Smooth bump `exp(1 - 1/(1 - |x|^2/R^2))` supported in the ball of radius `R`.
pub fn compact_bump(grid: crate::spectral::Grid, radius: f64) -> SpectralField {
    SpectralField::from_real_fn(grid, |x| {
        let s = x.iter().map(|v| v * v).sum::<f64>() / (radius * radius);
        if s < 1.0 {
            (1.0 - 1.0 / (1.0 - s)).exp()
        } else {
            0.0
        }
    })
}

/// Data built from a real bump with positive energy and a negative-valued
/// variance law.
#[derive(Debug, Clone)]
pub struct PositiveEnergyData {
    pub u0: SpectralField,
    pub lambda: f64,
    pub mu: f64,
    pub epsilon: f64,
    /// `||psi||_{H_b}^2 / 2` for `psi = exp(-i|x|^2) theta`.
    pub a: f64,
    /// `P(psi) / (2p)`.
    pub b: f64,
    /// `||x psi||^2`.
    pub c: f64,
    /// `-Im int conj(psi) x . grad psi = 2 int |x|^2 theta^2`.
    pub d: f64,
    /// Energy of `u0` on the grid.
    pub energy: f64,
    pub variance: f64,
    /// `4 Im int conj(u0) x . grad u0`.
    pub momentum: f64,
}

impl PositiveEnergyData {
    /// `V(t) = V0 + V0' t + 8 E t^2`.
    pub fn variance_law(&self, t: f64) -> f64 {
        self.variance + self.momentum * t + 8.0 * self.energy * t * t
    }

    /// First positive root of the variance law.
    pub fn vanishing_time(&self) -> Option<f64> {
        variance_law_root(self.variance, self.momentum, self.energy)
    }

    /// `(V0'/4)^2 - 2 E V0`; positive exactly when the variance law turns negative.
    pub fn blowup_margin(&self) -> f64 {
        (self.momentum / 4.0).powi(2) - 2.0 * self.energy * self.variance
    }
}

/// First positive root of `v0 + v1 t + 8 e t^2`.
pub fn variance_law_root(v0: f64, v1: f64, e: f64) -> Option<f64> {
    let (a, b, c) = (8.0 * e, v1, v0);
    if a.abs() < 1e-300 {
        return (b < 0.0).then(|| -c / b);
    }
    let disc = b * b - 4.0 * a * c;
    if disc < 0.0 {
        return None;
    }
    let sq = disc.sqrt();
    let mut roots = [(-b - sq) / (2.0 * a), (-b + sq) / (2.0 * a)];
    roots.sort_by(f64::total_cmp);
    roots.into_iter().find(|&r| r > 0.0)
}

/// Builds `u0 = lambda psi(mu x)` with `psi = exp(-i|x|^2) theta`, `E(u0) = e_target`
/// and `(Im int conj(u0) x . grad u0)^2 > 2 E(u0) ||x u0||^2`.
///
/// `epsilon` is `eps_fraction * min(A, D^2/(2C))`. The amplitude is finally
/// re-solved on the grid so that the discrete energy hits the target.
pub fn positive_energy_blowup_data(
    model: &Model,
    theta: &SpectralField,
    e_target: f64,
    eps_fraction: f64,
) -> Result<PositiveEnergyData> {
    let prm = *model.params();
    if prm.regime() != Regime::MassCritical {
        return Err(Error::Regime(format!(
            "the construction uses the mass-critical variance law, got p = {}",
            prm.p
        )));
    }
    if prm.a != 1 {
        return Err(Error::Regime("the construction is for the focusing case".into()));
    }
    if !(e_target > 0.0) {
        return Err(Error::Construction(format!("target energy must be positive, got {e_target}")));
    }
    if !(eps_fraction > 0.0 && eps_fraction < 1.0) {
        return Err(Error::Config("eps_fraction must lie in (0, 1)".into()));
    }
    if theta.values().iter().any(|v| v.im != 0.0) {
        return Err(Error::Construction("theta must be real".into()));
    }
    model.grid().check_same(theta.grid())?;

    // |grad psi|^2 = |grad theta|^2 + 4|x|^2 theta^2 for real theta, so nothing
    // below needs the chirp resolved on the grid.
    let c = diagnostics::variance(model, theta);
    let d = 2.0 * c;
    let a = 0.5 * (functionals::hb_norm_sq(model, theta) + 4.0 * c);
    let b = functionals::nonlocal_term(model, theta) / (2.0 * prm.p);
    if !(d > 0.0 && b > 0.0) {
        return Err(Error::Construction(format!("degenerate bump: B = {b:e}, D = {d:e}")));
    }
    let epsilon = eps_fraction * a.min(d * d / (2.0 * c));
    // (2p - 2) ln l - (2 + alpha) ln m = ln((A - eps)/B)
    // 2 ln l + (2 - N) ln m = ln(E/eps)
    let n = prm.dim as f64;
    let (m11, m12, r1) = (2.0 * prm.p - 2.0, -(2.0 + prm.alpha), ((a - epsilon) / b).ln());
    let (m21, m22, r2) = (2.0, 2.0 - n, (e_target / epsilon).ln());
    let det = m11 * m22 - m12 * m21;
    if det.abs() < 1e-12 {
        return Err(Error::Construction("scaling system is singular".into()));
    }
    let ln_l = (r1 * m22 - m12 * r2) / det;
    let ln_m = (m11 * r2 - m21 * r1) / det;
    let (mut lambda, mu) = (ln_l.exp(), ln_m.exp());

    let profile = resample_scaled_checked(theta, mu, 1e-10)?;
    let r_sq = model.radius_squared();
    let shape = SpectralField::from_values(
        *theta.grid(),
        profile
            .values()
            .iter()
            .zip(r_sq)
            .map(|(v, r2)| v * Complex64::from_polar(1.0, -mu * mu * r2))
            .collect(),
    )?;
    let tail = model
        .spectral()
        .tail_fraction_from_hat(&model.spectral().forward(&shape));
    if tail > CONSTRUCTION_TAIL_MAX {
        return Err(Error::Resolution(format!(
            "constructed data is under-resolved (spectral tail {tail:e}); use a finer grid"
        )));
    }

    // E(l shape) = l^2 k - l^{2p} q; Newton from the continuum amplitude
    let k = 0.5 * functionals::hb_norm_sq(model, &shape);
    let q = functionals::nonlocal_term(model, &shape) / (2.0 * prm.p);
    for _ in 0..50 {
        let f = lambda * lambda * k - lambda.powf(2.0 * prm.p) * q - e_target;
        let df = 2.0 * lambda * k - 2.0 * prm.p * lambda.powf(2.0 * prm.p - 1.0) * q;
        let next = lambda - f / df;
        if !(next > 0.0 && next.is_finite()) {
            return Err(Error::Construction("amplitude correction diverged".into()));
        }
        let done = (next - lambda).abs() < 1e-14 * lambda;
        lambda = next;
        if done {
            break;
        }
    }
    let u0 = shape.scaled(lambda);
    let energy = functionals::energy(model, &u0);
    let (variance, momentum) = diagnostics::variance_and_momentum(model, &u0);
    let data = PositiveEnergyData {
        u0,
        lambda,
        mu,
        epsilon,
        a,
        b,
        c,
        d,
        energy,
        variance,
        momentum,
    };
    if !(data.blowup_margin() > 0.0) {
        return Err(Error::Construction(format!(
            "blowup condition fails on the grid (margin {:e})",
            data.blowup_margin()
        )));
    }
    Ok(data)
}

//! Subcommand bodies. Each returns a JSON summary for stdout; files go
//! through [`Run`].

use anyhow::{bail, Context, Result};
use choquard::diagnostics::{self, ScanRow};
use choquard::evolution::{self, TrajectoryRecord};
use choquard::ground_state::{self, GroundStateResult, Thresholds};
use choquard::spectral::{read_field, write_axis_slice_csv, write_field};
use choquard::{Model, ProblemParams, Regime, SpectralField};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use std::fs::File;
use std::io::{BufReader, Write};

use crate::config::{InitialData, RunConfig};
use crate::run::Run;

/// A run that finished but missed its own tolerance.
#[derive(Debug)]
pub struct CheckFailed(pub String);

impl std::fmt::Display for CheckFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "check failed: {}", self.0)
    }
}

impl std::error::Error for CheckFailed {}

/// Parameters failed validation; the report was still written.
#[derive(Debug)]
pub struct InvalidInput(pub String);

impl std::fmt::Display for InvalidInput {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "invalid input: {}", self.0)
    }
}

impl std::error::Error for InvalidInput {}

pub fn model(cfg: &RunConfig) -> Result<Model> {
    let grid = cfg.grid()?;
    let params = cfg.params_on(&grid);
    params.validate().into_result()?;
    Ok(Model::new(params, grid)?)
}

/// Descent on the coarse grid, then refinement by doubling up to `n`.
/// `b` replaces the configured coupling when given.
pub fn ground_state(run: &mut Run, b: Option<f64>) -> Result<(Model, GroundStateResult)> {
    let cfg = run.cfg.clone();
    let fine = cfg.grid()?;
    let mut n = cfg.grid.coarse_n.min(fine.n);
    let mut result: Option<GroundStateResult> = None;
    loop {
        let grid = fine.with_n(n)?;
        let mut params = cfg.params_on(&grid);
        if let Some(b) = b {
            params = params.with_b(b);
        }
        params.validate().into_result()?;
        let m = Model::new(params, grid)?;
        let stage = format!("ground-state-n{n}-b{}", params.b);
        let res = run.time(&stage, |_| match &result {
            None => ground_state::minimize_weinstein(&m, &cfg.ground_state, None),
            Some(c) => ground_state::refine(&m, &cfg.ground_state, c),
        })?;
        if n >= fine.n {
            return Ok((m, res));
        }
        result = Some(res);
        n *= 2;
    }
}

fn write_ground_state(run: &mut Run, model: &Model, gs: &GroundStateResult, stem: &str) -> Result<Value> {
    let delta = model.params().delta;
    write_field(run.create(&format!("{stem}-q"), "chqf")?, &gs.q, delta)?;
    write_axis_slice_csv(run.create(&format!("{stem}-q-axis"), "csv")?, &gs.q, 0)?;
    if let Some(v) = &gs.v {
        write_field(run.create(&format!("{stem}-v"), "chqf")?, v, delta)?;
    }
    let summary = gs.summary(model);
    run.write_json(stem, &summary)?;
    Ok(serde_json::to_value(summary)?)
}

pub fn validate(run: &mut Run) -> Result<Value> {
    let cfg = &run.cfg;
    let grid = cfg.grid();
    let mut problems: Vec<String> = Vec::new();
    let report = match &grid {
        Ok(g) => {
            let params = cfg.params_on(g);
            let report = params.validate();
            problems.extend(report.violations.iter().map(|v| v.message.clone()));
            if report.passed() {
                if let Err(e) = Model::new(params, *g) {
                    problems.push(e.to_string());
                }
            }
            json!({
                "params": params,
                "violations": report.violations,
                "regime": params.regime(),
                "exponents": params.exponents(),
                "gn_mass_exponent": params.gn_mass_exponent(),
                "gn_kinetic_exponent": params.gn_kinetic_exponent(),
                "radial_blowup_exponent": params.radial_blowup_exponent(),
                "grid": { "n": g.n, "half_width": g.half_width, "spacing": g.spacing(), "offset": g.offset },
            })
        }
        Err(e) => {
            problems.push(e.to_string());
            json!({ "grid_error": e.to_string() })
        }
    };
    if let Err(e) = cfg.evolve.validate() {
        problems.push(e.to_string());
    }
    let out = json!({ "passed": problems.is_empty(), "problems": problems, "report": report });
    run.write_json("validate", &out)?;
    if !problems.is_empty() {
        return Err(InvalidInput(problems.join("; ")).into());
    }
    Ok(out)
}

pub fn ground_state_cmd(run: &mut Run) -> Result<Value> {
    let (m, gs) = ground_state(run, None)?;
    let summary = write_ground_state(run, &m, &gs, "ground_state")?;
    Ok(json!({ "ground_state": summary }))
}

fn threshold_record(th: &Thresholds, params: &ProblemParams) -> Value {
    json!({
        "thresholds": th,
        "consistency": {
            "f_at_k_minus_h": th.f(params, th.k) - th.h,
            "f_prime_at_k": th.f_prime(params, th.k),
            "h_minus_coefficient_k2": th.h - th.coefficient * th.k * th.k,
        }
    })
}

pub fn thresholds_cmd(run: &mut Run) -> Result<Value> {
    let base = model(&run.cfg)?;
    let params = *base.params();
    let out = match params.regime() {
        Regime::InterCritical => {
            let (m, gs) = ground_state(run, None)?;
            let th = ground_state::thresholds(gs.c_gn, &params, gs.radial_variant)?;
            let mut out = threshold_record(&th, &params);
            out["ground_state"] = write_ground_state(run, &m, &gs, "ground_state")?;
            if params.b > 0.0 {
                // the b = 0 problem has the non-radial constant
                let (m0, gs0) = ground_state(run, Some(0.0))?;
                let p0 = *m0.params();
                let th0 = ground_state::thresholds(gs0.c_gn, &p0, false)?;
                out["reference_b0"] = threshold_record(&th0, &p0);
                out["reference_b0"]["ground_state"] =
                    write_ground_state(run, &m0, &gs0, "ground_state_b0")?;
            }
            out
        }
        Regime::MassCritical => {
            let (m, gs) = ground_state(run, Some(params.b.min(0.0)))?;
            let mass_threshold = ground_state::mass_critical_threshold(&gs)?;
            json!({
                "regime": params.regime(),
                "mass_threshold": mass_threshold,
                "ground_state": write_ground_state(run, &m, &gs, "ground_state")?,
            })
        }
        other => {
            return Err(choquard::Error::Regime(format!("no thresholds in the {other} regime")).into())
        }
    };
    run.write_json("thresholds", &out)?;
    Ok(out)
}

/// Thresholds when the problem has them, with the ground state they came from.
fn focusing_thresholds(run: &mut Run, m: &Model) -> Result<Option<(Thresholds, GroundStateResult)>> {
    let prm = m.params();
    if prm.regime() != Regime::InterCritical || prm.a != 1 {
        return Ok(None);
    }
    let (_, gs) = ground_state(run, None)?;
    let th = ground_state::thresholds(gs.c_gn, prm, gs.radial_variant)?;
    Ok(Some((th, gs)))
}

fn smooth_random(m: &Model, seed: u64, width: f64, amplitude: f64) -> Result<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let raw = SpectralField::from_fn(*m.grid(), |x| {
        let w = (-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * width * width)).exp();
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)) * w
    });
    // band-limit to the lower third of the resolved wavenumbers
    let k_max = std::f64::consts::PI / m.grid().spacing();
    let smooth = m.spectral().apply_multiplier(&raw, |k2| (-36.0 * k2 / (k_max * k_max)).exp());
    let peak = smooth.max_abs();
    if !(peak > 0.0) {
        bail!(choquard::Error::Degenerate("random field vanished".into()));
    }
    Ok(smooth.scaled(amplitude / peak))
}

/// Builds the configured initial field. Also returns thresholds when the
/// problem has them and extra facts about the data.
fn initial_data(run: &mut Run, m: &Model) -> Result<(SpectralField, Option<Thresholds>, Value)> {
    let grid = *m.grid();
    let init = run.cfg.initial_data.clone();
    let mut info = json!({ "kind": init });
    let mut thresholds = None;
    let u0 = match init {
        InitialData::GroundState { scale } => {
            let q = match focusing_thresholds(run, m)? {
                Some((th, gs)) => {
                    thresholds = Some(th);
                    gs.q
                }
                None => ground_state(run, None)?.1.q,
            };
            q.scaled(scale)
        }
        other => {
            thresholds = focusing_thresholds(run, m)?.map(|(th, _)| th);
            match other {
                InitialData::Gaussian { width, amplitude } => SpectralField::gaussian(grid, width, amplitude),
                InitialData::Bump { radius, amplitude } => {
                    evolution::compact_bump(grid, radius).scaled(amplitude)
                }
                InitialData::Random { width, amplitude } => smooth_random(m, run.cfg.seed, width, amplitude)?,
                InitialData::Field { path } => {
                    let f = File::open(&path).with_context(|| format!("cannot open {}", path.display()))?;
                    let (u, _) = read_field(BufReader::new(f))?;
                    if u.grid() != &grid {
                        bail!(choquard::Error::Grid(format!(
                            "{} lives on a different grid than the configured one",
                            path.display()
                        )));
                    }
                    u
                }
                InitialData::PositiveEnergy {
                    radius,
                    energy,
                    eps_fraction,
                } => {
                    let bump = evolution::compact_bump(grid, radius);
                    let data = evolution::positive_energy_blowup_data(m, &bump, energy, eps_fraction)?;
                    info["positive_energy"] = json!({
                        "lambda": data.lambda,
                        "mu": data.mu,
                        "epsilon": data.epsilon,
                        "energy": data.energy,
                        "variance": data.variance,
                        "momentum": data.momentum,
                        "blowup_margin": data.blowup_margin(),
                        "vanishing_time": data.vanishing_time(),
                    });
                    data.u0
                }
                InitialData::GroundState { .. } => unreachable!(),
            }
        }
    };
    info["report"] = serde_json::to_value(choquard::functionals::report(m, &u0))?;
    if let Some(th) = &thresholds {
        info["dichotomy"] = match diagnostics::classify_dichotomy(m, &u0, th) {
            Ok(p) => serde_json::to_value(p)?,
            Err(e) => json!({ "unavailable": e.to_string() }),
        };
    }
    Ok((u0, thresholds, info))
}

/// Evolves the configured data, writing the trajectory and snapshots.
fn run_evolution(run: &mut Run, m: &Model) -> Result<(TrajectoryRecord, SpectralField, Value)> {
    let (u0, th, info) = initial_data(run, m)?;
    let cfg = run.cfg.evolve;
    let every = run.cfg.snapshot_every;
    let delta = m.params().delta;
    let mut count = 0usize;
    let mut snapshots: Vec<(String, std::path::PathBuf)> = Vec::new();
    let (traj, _) = run.time("evolve", |r| {
        evolution::evolve_with(m, &u0, &cfg, th.as_ref(), |t, u| {
            if every > 0 && count % every == 0 {
                let stem = format!("snapshot-{count:05}");
                let path = r.path(&stem, "chqf");
                write_field(std::io::BufWriter::new(File::create(&path)?), u, delta)?;
                snapshots.push((format!("{t}"), path));
            }
            count += 1;
            Ok(())
        })
    })?;
    for (_, p) in &snapshots {
        run.note_output(p);
    }
    let mut w = run.create("trajectory", "csv")?;
    traj.write_csv(&mut w)?;
    w.flush()?;
    let summary = json!({
        "initial_data": info,
        "outcome": traj.outcome,
        "samples": traj.len(),
        "max_mass_drift": traj.max_mass_drift(),
        "max_energy_drift": traj.max_energy_drift(),
        "snapshots": snapshots.iter().map(|(t, p)| json!({ "t": t, "file": p.file_name().map(|s| s.to_string_lossy().into_owned()) })).collect::<Vec<_>>(),
    });
    Ok((traj, u0, summary))
}

pub fn evolve_cmd(run: &mut Run) -> Result<Value> {
    let m = model(&run.cfg)?;
    let (_, _, summary) = run_evolution(run, &m)?;
    run.write_json("evolve", &summary)?;
    Ok(summary)
}

pub fn virial_check(run: &mut Run) -> Result<Value> {
    let m = model(&run.cfg)?;
    let (traj, u0, mut summary) = run_evolution(run, &m)?;
    let check = diagnostics::virial_consistency_check(&traj)?;
    let mut w = run.create("virial", "csv")?;
    writeln!(w, "t,second_difference,rhs")?;
    for s in &check.samples {
        writeln!(w, "{},{},{}", s.t, s.second_difference, s.rhs)?;
    }
    w.flush()?;
    let scaled = check.max_abs_mismatch / check.rhs_scale.max(f64::MIN_POSITIVE);
    let tol = run.cfg.virial.tolerance;
    summary["virial"] = json!({
        "max_abs_mismatch": check.max_abs_mismatch,
        "max_rel_mismatch": check.max_rel_mismatch,
        "rhs_scale": check.rhs_scale,
        "scaled_mismatch": scaled,
        "tolerance": tol,
        "passed": scaled < tol,
    });
    // the configured weight at t = 0, next to the quadratic reduced value
    let virial = &run.cfg.virial;
    let terms = diagnostics::virial_terms(&m, &u0, &virial.weight, virial.method)?;
    summary["initial_weighted"] = json!({
        "weight": virial.weight,
        "method": virial.method,
        "terms": terms,
        "total": terms.total(),
        "standard_quadratic": diagnostics::virial_rhs_standard(&m, &u0),
    });
    run.write_json("virial", &summary)?;
    if !(scaled < tol) {
        return Err(CheckFailed(format!("virial mismatch {scaled:e} exceeds {tol:e}")).into());
    }
    Ok(summary)
}

pub fn dichotomy_scan(run: &mut Run) -> Result<Value> {
    let m = model(&run.cfg)?;
    let (_, gs) = ground_state(run, None)?;
    let prm = *m.params();
    let th = ground_state::thresholds(gs.c_gn, &prm, gs.radial_variant)?;
    let amps = run.cfg.scan.amplitudes.clone();
    let cfg = run.cfg.evolve;
    let rows: Vec<ScanRow> =
        run.time("scan", |_| diagnostics::dichotomy_scan(&m, &gs.q, &amps, &th, &cfg))?;
    let mut w = run.create("dichotomy", "csv")?;
    writeln!(w, "{}", ScanRow::CSV_HEADER)?;
    for r in &rows {
        writeln!(w, "{}", r.csv_row())?;
    }
    w.flush()?;
    let decided: Vec<bool> = rows.iter().filter_map(|r| r.agreement).collect();
    let out = json!({
        "thresholds": th,
        "rows": rows,
        "decided": decided.len(),
        "agreeing": decided.iter().filter(|&&a| a).count(),
    });
    run.write_json("dichotomy", &out)?;
    Ok(out)
}

pub fn validate_exact(run: &mut Run) -> Result<Value> {
    let m = model(&run.cfg)?;
    let prm = *m.params();
    if prm.regime() != Regime::MassCritical {
        bail!(choquard::Error::Regime(format!(
            "the exact solution needs the mass-critical exponent, got p = {}",
            prm.p
        )));
    }
    // the exact solution is built from the unregularized ground state
    let exact_cfg = run.cfg.exact.clone();
    let saved = run.cfg.params.delta;
    run.cfg.params.delta = Some(0.0);
    let gs = ground_state(run, None);
    run.cfg.params.delta = saved;
    let (m0, gs) = gs?;
    write_ground_state(run, &m0, &gs, "ground_state")?;
    let big_t = exact_cfg.big_t;
    let u0 = evolution::exact_pseudoconformal(&prm, &gs.q, 0.0, big_t)?;
    let mut cfg = run.cfg.evolve;
    cfg.t_max = exact_cfg.t_end;
    let mut errors: Vec<(f64, f64)> = Vec::new();
    let mut failure: Option<choquard::Error> = None;
    let (traj, fin) = run.time("evolve", |_| {
        evolution::evolve_with(&m, &u0, &cfg, None, |t, u| {
            match evolution::exact_pseudoconformal(&prm, &gs.q, t, big_t) {
                Ok(ex) => errors.push((t, u.l2_distance(&ex) / ex.l2_norm())),
                Err(e) => failure = Some(e),
            }
            Ok(())
        })
    })?;
    if let Some(e) = failure {
        return Err(e.into());
    }
    let mut w = run.create("exact", "csv")?;
    writeln!(w, "t,rel_error")?;
    for (t, e) in &errors {
        writeln!(w, "{t},{e}")?;
    }
    w.flush()?;
    let t_end = traj.times.last().copied().unwrap_or(0.0);
    let final_error = errors.last().map_or(f64::NAN, |e| e.1);
    let expected_norm = gs.q.l2_norm();
    let tol = exact_cfg.tolerance;
    let out = json!({
        "outcome": traj.outcome,
        "t_end": t_end,
        "max_rel_error": errors.iter().map(|e| e.1).fold(0.0, f64::max),
        "final_rel_error": final_error,
        "norm_rel_error": (fin.l2_norm() - expected_norm).abs() / expected_norm,
        "tolerance": tol,
        "passed": final_error < tol,
    });
    run.write_json("exact", &out)?;
    if !(final_error < tol) {
        return Err(CheckFailed(format!("final error {final_error:e} exceeds {tol:e}")).into());
    }
    Ok(out)
}

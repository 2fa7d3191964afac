//! Subcommand implementations. Output files are written only after a run
//! has finished without error.

use std::fs;
use std::path::Path;

use bolab_core::diagnostics::{
    conservation_drift, energy_identity_residual, gn_inequality_check, l2_identity_residual,
};
use bolab_core::dynamics::{integrate, Forcing, SimConfig, TimeStep, Trajectory};
use bolab_core::lab::{fit_rate, monotonicity_report, run_sweep, RateFit};
use bolab_core::spectral::{Complex64, SpectralField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::ConfigFile;
use crate::output::{self, num, RunManifest};
use crate::plot;
use crate::CliError;

/// Relative residual bound for the viscous L2 identity.
pub const L2_IDENTITY_TOL: f64 = 1e-5;
/// Relative residual bound for the viscous energy identity.
pub const ENERGY_IDENTITY_TOL: f64 = 1e-4;
/// Relative drift bounds when `epsilon = 0`.
pub const L2_DRIFT_TOL: f64 = 1e-8;
pub const ENERGY_DRIFT_TOL: f64 = 1e-6;
pub const GN_AUDIT_FIELDS: usize = 1000;
/// Largest acceptable sup error of the manufactured solution at the base step.
pub const MMS_TOL: f64 = 1e-8;
/// Below this the dt ladder is dominated by round-off and carries no order.
pub const MMS_ROUNDOFF_FLOOR: f64 = 1e-11;

fn finish(
    dir: &Path,
    command: &str,
    resolved: ConfigFile,
    started: f64,
    files: Vec<(&str, String)>,
) -> Result<(), CliError> {
    let paths = output::write_all(dir, &files)?;
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.to_string(),
        config_hash: output::config_hash(&resolved),
        started_unix: started,
        finished_unix: output::unix_now(),
        outputs: files.iter().map(|(name, _)| name.to_string()).collect(),
        config: resolved,
    };
    output::write_manifest(dir, &manifest)?;
    for p in paths {
        println!("wrote {}", p.display());
    }
    Ok(())
}

pub fn simulate(config: &Path, out: &Path) -> Result<(), CliError> {
    let started = output::unix_now();
    let file = ConfigFile::load(config)?;
    let cfg = file.simulation()?;
    let resolved = file.resolved(false)?;
    let traj = integrate(&cfg)?;
    let last = traj.final_sample();
    println!(
        "t = {}  steps = {}  l2_sq = {:.6e}  energy = {:.6e}",
        last.t,
        traj.diagnostics.len() - 1,
        last.l2_sq,
        last.energy
    );
    finish(
        out,
        "simulate",
        resolved,
        started,
        vec![
            ("diagnostics.csv", output::diagnostics_csv(&traj.diagnostics)),
            ("snapshots.txt", output::snapshots_text(&traj)),
        ],
    )
}

pub fn sweep(config: &Path, out: &Path, workers: usize) -> Result<(), CliError> {
    let started = output::unix_now();
    let file = ConfigFile::load(config)?;
    let cfg = file.sweep(workers)?;
    let resolved = file.resolved(true)?;
    let result = run_sweep(&cfg)?;
    for r in &result.records {
        println!(
            "epsilon = {:.3e}  sup_hhalf_err = {:.4e}  energy_drift = {:.4e}  l2_deficit = {:.4e}",
            r.epsilon, r.sup_hhalf_err, r.energy_drift, r.l2_deficit
        );
        if !r.monotone {
            eprintln!(
                "warning: L2 norm increased by {:.3e} at epsilon = {:e}",
                r.max_uptick, r.epsilon
            );
        }
    }
    let report = |name: &str, fit: &Option<RateFit>| match fit {
        Some(f) => println!("{name} rate = {:.4} (residual {:.3e})", f.slope, f.residual),
        None => eprintln!(
            "warning: {name} rate not fitted: the ladder has {} member(s), at least 3 are needed",
            result.records.len()
        ),
    };
    report("hhalf", &result.hhalf_rate);
    report("energy", &result.energy_rate);
    finish(
        out,
        "sweep",
        resolved,
        started,
        vec![
            ("sweep.csv", output::sweep_csv(&result.records)),
            ("rates.json", output::rates_json(&result.hhalf_rate, &result.energy_rate)),
        ],
    )
}

struct Check {
    name: &'static str,
    value: f64,
    tol: f64,
    what: &'static str,
}

impl Check {
    fn pass(&self) -> bool {
        self.value <= self.tol
    }
}

/// Random fields with random spectral decay on the run's grid.
fn gn_audit(cfg: &SimConfig, seed: u64) -> Result<usize, CliError> {
    let grid = cfg.grid()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let top = (cfg.n_points / 2 - 1) as i64;
    let mut violations = 0;
    for _ in 0..GN_AUDIT_FIELDS {
        let decay: f64 = rng.gen_range(0.0..2.5);
        let modes: Vec<(i64, Complex64)> = (0..=top)
            .map(|j| {
                let scale = (1.0 + j as f64).powf(-decay);
                let re: f64 = rng.gen_range(-1.0..1.0);
                let im: f64 = if j == 0 { 0.0 } else { rng.gen_range(-1.0..1.0) };
                (j, Complex64::new(re, im) * scale)
            })
            .collect();
        let u = SpectralField::from_modes(grid.clone(), &modes)?;
        if !gn_inequality_check(&u)?.holds() {
            violations += 1;
        }
    }
    Ok(violations)
}

fn identity_checks(traj: &Trajectory) -> Result<Vec<Check>, CliError> {
    if traj.config.epsilon > 0.0 {
        Ok(vec![
            Check {
                name: "l2-identity",
                value: l2_identity_residual(traj)?.max_relative(),
                tol: L2_IDENTITY_TOL,
                what: "max relative residual",
            },
            Check {
                name: "energy-identity",
                value: energy_identity_residual(traj)?.max_relative(),
                tol: ENERGY_IDENTITY_TOL,
                what: "max relative residual",
            },
        ])
    } else {
        let drift = conservation_drift(traj);
        Ok(vec![
            Check {
                name: "l2-identity",
                value: drift.l2_relative,
                tol: L2_DRIFT_TOL,
                what: "relative L2 drift",
            },
            Check {
                name: "energy-identity",
                value: drift.energy_relative,
                tol: ENERGY_DRIFT_TOL,
                what: "relative energy drift",
            },
        ])
    }
}

pub fn invariants(config: &Path, seed: u64) -> Result<(), CliError> {
    let file = ConfigFile::load(config)?;
    let cfg = file.simulation()?;
    if cfg.forcing.is_some() {
        return Err(CliError::Config(
            "invalid configuration field `forcing`: the identities hold only for unforced runs".into(),
        ));
    }
    let traj = integrate(&cfg)?;
    let mut checks = identity_checks(&traj)?;
    let mono = monotonicity_report(&traj);
    checks.push(Check {
        name: "monotonicity",
        value: mono.max_uptick,
        tol: mono.threshold,
        what: "max L2 uptick",
    });
    checks.push(Check {
        name: "gn-inequality",
        value: gn_audit(&cfg, seed)? as f64,
        tol: 0.0,
        what: "violations in random audit",
    });

    let mut failed = Vec::new();
    for c in &checks {
        let tag = if c.pass() { "PASS" } else { "FAIL" };
        println!("{tag} {:<16} {} = {:.3e} (limit {:.1e})", c.name, c.what, c.value, c.tol);
        if !c.pass() {
            failed.push(c.name);
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Invariant(format!("failed invariant(s): {}", failed.join(", "))))
    }
}

/// Sup over stored snapshots and grid points of `|u - u_exact|`.
fn mms_error(traj: &Trajectory, forcing: Forcing) -> f64 {
    let x = traj.grid.points();
    traj.times
        .iter()
        .zip(&traj.snapshots)
        .flat_map(|(&t, snap)| {
            x.iter()
                .zip(snap.samples())
                .map(move |(&xm, &u)| (u - forcing.exact(xm, t)).abs())
        })
        .fold(0.0, f64::max)
}

pub fn mms(config: &Path, out: &Path) -> Result<(), CliError> {
    let started = output::unix_now();
    let mut file = ConfigFile::load(config)?;
    if file.forcing.is_none() {
        file.forcing = Some(Forcing::TRAVELING_SINE.to_string());
    }
    let base = file.simulation()?;
    let resolved = file.resolved(false)?;
    let forcing = base.forcing.expect("forcing set above");
    let (_, dt0) = base.resolved_steps();

    let mut rows = Vec::new();
    for level in 0..4 {
        let dt = dt0 / f64::from(1u32 << level);
        let cfg = SimConfig {
            time_step: TimeStep::Fixed(dt),
            snapshot_stride: base.snapshot_stride << level,
            ..base.clone()
        };
        let err = mms_error(&integrate(&cfg)?, forcing);
        println!("dt = {dt:.4e}  sup error = {err:.4e}");
        rows.push((dt, err));
    }

    let mut csv = String::from("dt,sup_err\n");
    for (dt, err) in &rows {
        csv.push_str(&format!("{},{}\n", num(*dt), num(*err)));
    }

    if rows.iter().all(|r| r.1 < MMS_ROUNDOFF_FLOOR) {
        println!(
            "temporal order unresolved: every error is below {MMS_ROUNDOFF_FLOOR:.0e} (round-off)"
        );
    } else {
        match fit_rate(&rows) {
            Ok(fit) => println!("fitted temporal order = {:.3} (residual {:.3e})", fit.slope, fit.residual),
            Err(e) => println!("temporal order not fitted: {e}"),
        }
    }

    finish(out, "mms", resolved, started, vec![("mms.csv", csv)])?;
    let base_err = rows[0].1;
    if base_err > MMS_TOL {
        return Err(CliError::Invariant(format!(
            "failed invariant(s): mms-accuracy (sup error {base_err:.3e} > {MMS_TOL:.0e})"
        )));
    }
    Ok(())
}

pub fn plot(sweep_csv: &Path, out_svg: &Path) -> Result<(), CliError> {
    let text = fs::read_to_string(sweep_csv)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", sweep_csv.display())))?;
    let rows = plot::parse_sweep_csv(&text)
        .map_err(|e| CliError::Config(format!("malformed sweep CSV {}: {e}", sweep_csv.display())))?;
    let (svg, warnings) = plot::render_svg(&rows);
    for w in warnings {
        eprintln!("warning: {w}");
    }
    if let Some(parent) = out_svg.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| CliError::Config(format!("cannot create {}: {e}", parent.display())))?;
    }
    fs::write(out_svg, svg)
        .map_err(|e| CliError::Config(format!("cannot write {}: {e}", out_svg.display())))?;
    println!("wrote {}", out_svg.display());
    Ok(())
}

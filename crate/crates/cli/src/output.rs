//! File formats written by the CLI.
//!
//! All floating-point values are written with 17 significant digits
//! (`{:.16e}`), which round-trips every `f64`.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use bolab_core::diagnostics::DiagnosticsSample;
use bolab_core::dynamics::Trajectory;
use bolab_core::lab::{RateFit, SweepRecord};
use serde::Serialize;
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::ConfigFile;
use crate::CliError;

pub const DIAGNOSTICS_HEADER: &str = "t,l2_sq,hhalf_sq,dhalf_sq,dx_sq,d32_sq,energy,cubic,linf";
pub const SWEEP_HEADER: &str = "epsilon,sup_hhalf_err,sup_l2_err,energy_drift,l2_deficit";
pub const SNAPSHOT_MAGIC: &str = "# bolab snapshots v1";

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn join(values: &[f64]) -> String {
    values.iter().map(|v| num(*v)).collect::<Vec<_>>().join(",")
}

pub fn diagnostics_csv(samples: &[DiagnosticsSample]) -> String {
    let mut out = String::with_capacity(samples.len() * 220);
    out.push_str(DIAGNOSTICS_HEADER);
    out.push('\n');
    for s in samples {
        let row = [
            s.t, s.l2_sq, s.hhalf_sq, s.dhalf_sq, s.dx_sq, s.d32_sq, s.energy, s.cubic, s.linf,
        ];
        out.push_str(&join(&row));
        out.push('\n');
    }
    out
}

pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut out = String::new();
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for r in records {
        let row = [r.epsilon, r.sup_hhalf_err, r.sup_l2_err, r.energy_drift, r.l2_deficit];
        out.push_str(&join(&row));
        out.push('\n');
    }
    out
}

/// Snapshot table: a `#`-prefixed header carrying `n_points`, `length` and the
/// snapshot times, then one CSV row per collocation point with columns
/// `x, u(t_0, x), u(t_1, x), ...`.
pub fn snapshots_text(traj: &Trajectory) -> String {
    let n = traj.grid.n_points();
    let mut out = String::new();
    let _ = writeln!(out, "{SNAPSHOT_MAGIC}");
    let _ = writeln!(out, "# n_points {n}");
    let _ = writeln!(out, "# length {}", num(traj.grid.length()));
    let _ = writeln!(out, "# snapshots {}", traj.times.len());
    let _ = writeln!(out, "# times {}", join(&traj.times));
    let cols: Vec<String> = (0..traj.times.len()).map(|i| format!("u{i}")).collect();
    let _ = writeln!(out, "x,{}", cols.join(","));
    for (m, x) in traj.grid.points().iter().enumerate() {
        out.push_str(&num(*x));
        for snap in &traj.snapshots {
            out.push(',');
            out.push_str(&num(snap.samples()[m]));
        }
        out.push('\n');
    }
    out
}

/// Parsed snapshot file: `columns[i]` holds the samples at `times[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotTable {
    pub n_points: usize,
    pub length: f64,
    pub times: Vec<f64>,
    pub x: Vec<f64>,
    pub columns: Vec<Vec<f64>>,
}

pub fn read_snapshots(text: &str) -> Result<SnapshotTable, String> {
    let mut lines = text.lines();
    if lines.next() != Some(SNAPSHOT_MAGIC) {
        return Err("missing snapshot header".into());
    }
    let mut header = |key: &str| -> Result<String, String> {
        let line = lines.next().ok_or("truncated header")?;
        line.strip_prefix(&format!("# {key} "))
            .map(str::to_string)
            .ok_or_else(|| format!("expected `{key}` header line"))
    };
    let parse_f = |s: &str| s.trim().parse::<f64>().map_err(|e| e.to_string());
    let n_points: usize = header("n_points")?.parse().map_err(|e| format!("{e}"))?;
    let length = parse_f(&header("length")?)?;
    let count: usize = header("snapshots")?.parse().map_err(|e| format!("{e}"))?;
    let times_line = header("times")?;
    let times = if count == 0 {
        Vec::new()
    } else {
        times_line.split(',').map(parse_f).collect::<Result<Vec<_>, _>>()?
    };
    let _ = lines.next().ok_or("missing column header")?;
    let mut x = Vec::with_capacity(n_points);
    let mut columns = vec![Vec::with_capacity(n_points); count];
    for line in lines {
        let vals = line.split(',').map(parse_f).collect::<Result<Vec<_>, _>>()?;
        if vals.len() != count + 1 {
            return Err(format!("row has {} values, expected {}", vals.len(), count + 1));
        }
        x.push(vals[0]);
        for (c, v) in columns.iter_mut().zip(&vals[1..]) {
            c.push(*v);
        }
    }
    if x.len() != n_points || times.len() != count {
        return Err("table shape does not match header".into());
    }
    Ok(SnapshotTable {
        n_points,
        length,
        times,
        x,
        columns,
    })
}

fn fit_json(fit: &Option<RateFit>) -> serde_json::Value {
    match fit {
        Some(f) => json!(f.slope),
        None => serde_json::Value::Null,
    }
}

fn residual_json(fit: &Option<RateFit>) -> serde_json::Value {
    match fit {
        Some(f) => json!(f.residual),
        None => serde_json::Value::Null,
    }
}

pub fn rates_json(hhalf: &Option<RateFit>, energy: &Option<RateFit>) -> String {
    let doc = json!({
        "hhalf_rate": fit_json(hhalf),
        "energy_rate": fit_json(energy),
        "residuals": {
            "hhalf": residual_json(hhalf),
            "energy": residual_json(energy),
        },
        "intercepts": {
            "hhalf": hhalf.map(|f| f.intercept),
            "energy": energy.map(|f| f.intercept),
        },
    });
    serde_json::to_string_pretty(&doc).expect("rates document serializes") + "\n"
}

#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub command: String,
    pub config_hash: String,
    pub started_unix: f64,
    pub finished_unix: f64,
    pub outputs: Vec<String>,
    pub config: ConfigFile,
}

pub fn config_hash(resolved: &ConfigFile) -> String {
    let canonical = serde_json::to_string(resolved).expect("config serializes");
    hex::encode(Sha256::digest(canonical.as_bytes()))
}

pub fn unix_now() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Writes every `(name, contents)` pair under `dir` and returns the paths.
pub fn write_all(dir: &Path, files: &[(&str, String)]) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    files
        .iter()
        .map(|(name, contents)| {
            let path = dir.join(name);
            fs::write(&path, contents)
                .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))?;
            Ok(path)
        })
        .collect()
}

pub fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<PathBuf, CliError> {
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes") + "\n";
    let mut paths = write_all(dir, &[("manifest.json", text)])?;
    Ok(paths.remove(0))
}

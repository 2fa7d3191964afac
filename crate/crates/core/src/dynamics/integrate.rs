use std::sync::Arc;

use super::config::SimConfig;
use super::etdrk4::Etdrk4;
use crate::diagnostics::DiagnosticsSample;
use crate::error::{Error, Result};
use crate::spectral::{Grid, RealField, SpectralField};

/// Stored output of one initial-value solve.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub config: SimConfig,
    pub grid: Arc<Grid>,
    /// Uniform step actually used.
    pub dt: f64,
    /// Snapshot times, starting at 0 and ending at `t_final`.
    pub times: Vec<f64>,
    pub snapshots: Vec<RealField>,
    /// One sample per accepted step, including `t = 0`.
    pub diagnostics: Vec<DiagnosticsSample>,
}

impl Trajectory {
    pub fn final_sample(&self) -> &DiagnosticsSample {
        self.diagnostics.last().expect("trajectory has at least the initial sample")
    }

    pub fn initial_sample(&self) -> &DiagnosticsSample {
        &self.diagnostics[0]
    }

    /// Snapshot closest to `t`, if one lies within half a step of it.
    pub fn snapshot_at(&self, t: f64) -> Option<&RealField> {
        let idx = self
            .times
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1 - t).abs().total_cmp(&(b.1 - t).abs()))?
            .0;
        // slack so that times exactly halfway between two steps still match
        if (self.times[idx] - t).abs() <= 0.5 * self.dt * (1.0 + 1e-9) {
            Some(&self.snapshots[idx])
        } else {
            None
        }
    }
}

/// Solves the initial-value problem described by `cfg`, recording diagnostics
/// every step and snapshots every `snapshot_stride` steps (plus the final state).
pub fn integrate(cfg: &SimConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let (steps, _) = cfg.resolved_steps();
    let stride = cfg.snapshot_stride;
    run(cfg, |step| step % stride == 0 || step == steps)
}

/// Like [`integrate`], but snapshots are taken at the steps nearest to each of
/// `sample_times` instead of on a stride.
pub fn integrate_sampled(cfg: &SimConfig, sample_times: &[f64]) -> Result<Trajectory> {
    cfg.validate()?;
    let (steps, dt) = cfg.resolved_steps();
    let mut wanted = vec![false; steps + 1];
    for &t in sample_times {
        if !(t.is_finite() && t >= -0.5 * dt && t <= cfg.t_final + 0.5 * dt) {
            return Err(Error::arg(
                "sample_times",
                format!("{t} outside [0, {}]", cfg.t_final),
            ));
        }
        let idx = ((t / dt).round().max(0.0) as usize).min(steps);
        wanted[idx] = true;
    }
    run(cfg, |step| wanted[step])
}

fn run(cfg: &SimConfig, take_snapshot: impl Fn(usize) -> bool) -> Result<Trajectory> {
    let grid = cfg.grid()?;
    let (steps, dt) = cfg.resolved_steps();
    let u0 = cfg.initial_condition.to_spectral(&grid)?;
    let mut stepper = Etdrk4::from_config(cfg, dt)?;

    let mut coeffs = u0.coeffs().to_vec();
    let mut times = Vec::new();
    let mut snapshots = Vec::new();
    let mut diagnostics = Vec::with_capacity(steps + 1);

    diagnostics.push(DiagnosticsSample::compute(&u0, 0.0));
    if take_snapshot(0) {
        times.push(0.0);
        snapshots.push(u0.inverse());
    }
    for step in 1..=steps {
        let t_prev = (step - 1) as f64 * dt;
        let t = step as f64 * dt;
        stepper.step(&mut coeffs, t_prev)?;
        let u = SpectralField::from_raw(grid.clone(), coeffs.clone());
        let sample = DiagnosticsSample::compute(&u, t);
        if !sample.is_finite() {
            return Err(Error::BlowUp { last_valid_t: t_prev });
        }
        diagnostics.push(sample);
        if take_snapshot(step) {
            times.push(t);
            snapshots.push(u.inverse());
        }
    }
    Ok(Trajectory {
        config: cfg.clone(),
        grid,
        dt,
        times,
        snapshots,
        diagnostics,
    })
}

//! Inviscid-limit experiments: inviscid reference solves, epsilon sweeps,
//! L^2 monotonicity checks and log-log rate fits.

use rayon::prelude::*;

use crate::diagnostics::{conservation_drift, sobolev_norm_sq, l2_norm_sq, time_integral};
use crate::dynamics::{integrate, integrate_sampled, SimConfig, TimeStep, Trajectory};
use crate::error::{Error, Result};

/// Relative drift of `||u||_{L2}` tolerated in an inviscid reference.
pub const L2_CONSERVATION_TOL: f64 = 1e-8;
/// Relative drift of `E(u)` tolerated in an inviscid reference.
pub const ENERGY_CONSERVATION_TOL: f64 = 1e-6;
/// Largest uptick of `||u||_{L2}`, in units of `||u_0||^2`, for `eps > 0`.
pub const MONOTONE_TOL: f64 = 1e-10;
/// Same, for inviscid runs where only round-off drift is expected.
pub const MONOTONE_TOL_INVISCID: f64 = 1e-8;

pub const DEFAULT_LADDER: [f64; 5] = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
pub const DEFAULT_ERROR_SAMPLES: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReferenceMode {
    /// Inviscid solve with the members' grid and step.
    #[default]
    SameResolution,
    /// Inviscid solve with twice the points and half the step.
    Refined,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    /// Shared parameters; its `epsilon` is ignored.
    pub base: SimConfig,
    /// Strictly decreasing, all positive.
    pub epsilons: Vec<f64>,
    pub reference: ReferenceMode,
    /// Times at which the `C([0,T]; X)` sup norms are sampled.
    pub error_times: Vec<f64>,
    /// Parallel member runs; 0 selects the available parallelism.
    pub workers: usize,
    pub keep_trajectories: bool,
}

impl SweepConfig {
    pub fn new(base: SimConfig) -> Self {
        let error_times = uniform_times(base.t_final, DEFAULT_ERROR_SAMPLES);
        SweepConfig {
            base,
            epsilons: DEFAULT_LADDER.to_vec(),
            reference: ReferenceMode::default(),
            error_times,
            workers: 0,
            keep_trajectories: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let base = SimConfig {
            epsilon: 0.0,
            ..self.base.clone()
        };
        base.validate()?;
        if self.epsilons.is_empty() {
            return Err(Error::config("epsilons", "at least one value required"));
        }
        if self.epsilons.iter().any(|e| !(e.is_finite() && *e > 0.0)) {
            return Err(Error::config("epsilons", "all values must be positive"));
        }
        if self.epsilons.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::config("epsilons", "must be strictly decreasing"));
        }
        if self.error_times.is_empty() {
            return Err(Error::config("error_times", "at least one time required"));
        }
        let t_final = self.base.t_final;
        if self
            .error_times
            .iter()
            .any(|t| !(t.is_finite() && *t >= 0.0 && *t <= t_final * (1.0 + 1e-12)))
        {
            return Err(Error::config("error_times", format!("must lie in [0, {t_final}]")));
        }
        Ok(())
    }

    /// The member configuration for one epsilon, with the shared step pinned.
    pub fn member(&self, epsilon: f64) -> SimConfig {
        let (_, dt) = self.base.resolved_steps();
        SimConfig {
            epsilon,
            time_step: TimeStep::Fixed(dt),
            ..self.base.clone()
        }
    }
}

/// `count` uniformly spaced times covering `[0, t_final]`.
pub fn uniform_times(t_final: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![t_final],
        _ => (0..count)
            .map(|i| t_final * i as f64 / (count - 1) as f64)
            .collect(),
    }
}

/// Per-epsilon row of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRecord {
    pub epsilon: f64,
    /// `sup_t ||u_eps(t) - u(t)||_{H^{1/2}}` over the error times.
    pub sup_hhalf_err: f64,
    pub sup_l2_err: f64,
    /// `max_t |E(u_eps(t)) - E(u_0)|` over every step.
    pub energy_drift: f64,
    /// `||u_0||^2 - ||u_eps(T)||^2`.
    pub l2_deficit: f64,
    /// `2 eps int_0^T ||d_x u_eps||^2 dt` from the recorded diagnostics.
    pub dissipation: f64,
    pub max_uptick: f64,
    pub monotone: bool,
}

/// Least-squares line through `(ln eps, ln value)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    /// Root-mean-square residual in natural-log units.
    pub residual: f64,
}

#[derive(Debug, Clone)]
pub struct SweepResult {
    /// Sorted by decreasing epsilon.
    pub records: Vec<SweepRecord>,
    /// `None` when fewer than three members make a fit meaningless.
    pub hhalf_rate: Option<RateFit>,
    pub energy_rate: Option<RateFit>,
    pub reference: Option<Trajectory>,
    pub trajectories: Option<Vec<Trajectory>>,
}

/// Fits `value ~ exp(intercept) * eps^slope`.
pub fn fit_rate(points: &[(f64, f64)]) -> Result<RateFit> {
    if points.len() < 3 {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: points.len(),
        });
    }
    if let Some(&(epsilon, value)) = points
        .iter()
        .find(|(e, v)| !(*v > 0.0 && v.is_finite() && *e > 0.0))
    {
        return Err(Error::NonPositiveValue { epsilon, value });
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::arg("points", "all epsilon values coincide"));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(RateFit {
        slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonotonicityReport {
    /// Largest step-to-step increase of `||u||_{L2}`.
    pub max_uptick: f64,
    pub threshold: f64,
    pub pass: bool,
}

pub fn monotonicity_report(traj: &Trajectory) -> MonotonicityReport {
    let d = &traj.diagnostics;
    let max_uptick = d
        .windows(2)
        .map(|w| w[1].l2_sq.sqrt() - w[0].l2_sq.sqrt())
        .fold(0.0, f64::max);
    let tol = if traj.config.epsilon > 0.0 {
        MONOTONE_TOL
    } else {
        MONOTONE_TOL_INVISCID
    };
    let threshold = tol * d[0].l2_sq;
    MonotonicityReport {
        max_uptick,
        threshold,
        pass: max_uptick <= threshold,
    }
}

fn check_reference(traj: Trajectory) -> Result<Trajectory> {
    let drift = conservation_drift(&traj);
    if drift.l2_relative > L2_CONSERVATION_TOL {
        return Err(Error::ReferenceRejected(format!(
            "L2 drift {:.3e} exceeds {L2_CONSERVATION_TOL:e}; refine n_points or dt",
            drift.l2_relative
        )));
    }
    if drift.energy_relative > ENERGY_CONSERVATION_TOL {
        return Err(Error::ReferenceRejected(format!(
            "energy drift {:.3e} exceeds {ENERGY_CONSERVATION_TOL:e}; refine n_points or dt",
            drift.energy_relative
        )));
    }
    Ok(traj)
}

fn reference_config(cfg: &SimConfig, mode: ReferenceMode) -> SimConfig {
    let mut r = SimConfig {
        epsilon: 0.0,
        ..cfg.clone()
    };
    if mode == ReferenceMode::Refined {
        let (_, dt) = cfg.resolved_steps();
        r.n_points *= 2;
        r.time_step = TimeStep::Fixed(0.5 * dt);
        r.snapshot_stride *= 2;
    }
    r
}

/// Inviscid solve from the same data, rejected if it fails the conservation
/// tolerances.
pub fn reference_solution(cfg: &SimConfig) -> Result<Trajectory> {
    check_reference(integrate(&reference_config(cfg, ReferenceMode::SameResolution))?)
}

/// Inviscid solve on `2N` points with step `dt/2`.
pub fn refined_reference_solution(cfg: &SimConfig) -> Result<Trajectory> {
    check_reference(integrate(&reference_config(cfg, ReferenceMode::Refined))?)
}

fn member_blow_up(epsilon: f64) -> impl Fn(Error) -> Error {
    move |e| match e {
        Error::BlowUp { last_valid_t } => Error::MemberBlowUp {
            epsilon,
            last_valid_t,
        },
        other => other,
    }
}

/// Sup over `times` of the `H^{1/2}` and `L^2` distances between two trajectories.
pub fn sup_errors(member: &Trajectory, reference: &Trajectory, times: &[f64]) -> Result<(f64, f64)> {
    let mut sup_h = 0.0f64;
    let mut sup_l2 = 0.0f64;
    for &t in times {
        let missing = || Error::arg("error_times", format!("no snapshot at t = {t}"));
        let u = member.snapshot_at(t).ok_or_else(missing)?.forward()?;
        let v = reference
            .snapshot_at(t)
            .ok_or_else(missing)?
            .forward()?
            .resample(u.grid().clone())?;
        let diff = u.axpy(-1.0, &v)?;
        sup_h = sup_h.max(sobolev_norm_sq(&diff, 0.5)?.sqrt());
        sup_l2 = sup_l2.max(l2_norm_sq(&diff).sqrt());
    }
    Ok((sup_h, sup_l2))
}

fn summarize(member: &Trajectory, reference: &Trajectory, times: &[f64]) -> Result<SweepRecord> {
    let eps = member.config.epsilon;
    let (sup_hhalf_err, sup_l2_err) = sup_errors(member, reference, times)?;
    let d = &member.diagnostics;
    let e0 = d[0].energy;
    let energy_drift = d.iter().fold(0.0, |m: f64, s| m.max((s.energy - e0).abs()));
    let ts: Vec<f64> = d.iter().map(|s| s.t).collect();
    let dx: Vec<f64> = d.iter().map(|s| s.dx_sq).collect();
    let dissipation = 2.0 * eps * time_integral(&ts, &dx)?;
    let mono = monotonicity_report(member);
    Ok(SweepRecord {
        epsilon: eps,
        sup_hhalf_err,
        sup_l2_err,
        energy_drift,
        l2_deficit: d[0].l2_sq - member.final_sample().l2_sq,
        dissipation,
        max_uptick: mono.max_uptick,
        monotone: mono.pass,
    })
}

fn fit_or_none(points: Vec<(f64, f64)>) -> Result<Option<RateFit>> {
    match fit_rate(&points) {
        Ok(fit) => Ok(Some(fit)),
        Err(Error::TooFewSamples { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Runs every member of the ladder against a common inviscid reference.
///
/// Members run concurrently on up to `workers` threads; the reduction is in
/// ladder order, so the table is independent of scheduling.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepResult> {
    cfg.validate()?;
    let reference_cfg = reference_config(&cfg.member(0.0), cfg.reference);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| Error::arg("workers", e.to_string()))?;

    let (reference, members) = pool.install(|| {
        rayon::join(
            || integrate_sampled(&reference_cfg, &cfg.error_times).and_then(check_reference),
            || {
                cfg.epsilons
                    .par_iter()
                    .map(|&eps| {
                        integrate_sampled(&cfg.member(eps), &cfg.error_times)
                            .map_err(member_blow_up(eps))
                    })
                    .collect::<Vec<_>>()
            },
        )
    });
    let members = members.into_iter().collect::<Result<Vec<_>>>()?;
    let reference = reference?;

    let records = pool.install(|| {
        members
            .par_iter()
            .map(|m| summarize(m, &reference, &cfg.error_times))
            .collect::<Result<Vec<_>>>()
    })?;

    let hhalf_rate = fit_or_none(records.iter().map(|r| (r.epsilon, r.sup_hhalf_err)).collect())?;
    let energy_rate = fit_or_none(records.iter().map(|r| (r.epsilon, r.energy_drift)).collect())?;
    let keep = cfg.keep_trajectories;
    Ok(SweepResult {
        records,
        hhalf_rate,
        energy_rate,
        reference: keep.then_some(reference),
        trajectories: keep.then_some(members),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn fit_exact_power_laws() {
        let eps = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3];
        let fit = fit_rate(&eps.iter().map(|&e| (e, e)).collect::<Vec<_>>()).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        let fit = fit_rate(&eps.iter().map(|&e| (e, e.cbrt())).collect::<Vec<_>>()).unwrap();
        assert!((fit.slope - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn fit_noisy_square_root() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pts: Vec<(f64, f64)> = (0..10)
            .map(|i| {
                let e = 10f64.powf(-1.0 - 0.25 * i as f64);
                (e, 2.0 * e.sqrt() * (1.0 + 0.01 * rng.gen_range(-1.0..1.0)))
            })
            .collect();
        let fit = fit_rate(&pts).unwrap();
        assert!((0.45..=0.55).contains(&fit.slope), "slope {}", fit.slope);
    }

    #[test]
    fn fit_rejects_bad_input() {
        assert!(matches!(
            fit_rate(&[(1.0, 1.0), (0.1, 0.1)]),
            Err(Error::TooFewSamples { .. })
        ));
        let err = fit_rate(&[(1.0, 1.0), (0.1, 0.0), (0.01, 0.01)]).unwrap_err();
        assert_eq!(err, Error::NonPositiveValue { epsilon: 0.1, value: 0.0 });
    }

    #[test]
    fn sweep_config_validation() {
        let mut cfg = SweepConfig::new(SimConfig::default());
        assert!(cfg.validate().is_ok());
        cfg.epsilons = vec![1e-2, 1e-1];
        assert!(matches!(cfg.validate(), Err(Error::Config { field: "epsilons", .. })));
        cfg.epsilons = vec![1e-2, 0.0];
        assert!(cfg.validate().is_err());
        cfg.epsilons = vec![1e-2];
        cfg.error_times = vec![2.0];
        assert!(matches!(cfg.validate(), Err(Error::Config { field: "error_times", .. })));
    }

    #[test]
    fn uniform_time_grid() {
        let t = uniform_times(1.0, 101);
        assert_eq!(t.len(), 101);
        assert_eq!(t[0], 0.0);
        assert_eq!(t[100], 1.0);
        assert!((t[37] - 0.37).abs() < 1e-15);
    }
}

use std::f64::consts::PI;
use std::sync::Arc;

use bolab_core::diagnostics::{
    cubic_integral, energy_identity_residual, l2_identity_residual,
    seminorm_sq, time_integral, DiagnosticsSample,
};
use bolab_core::dynamics::{
    integrate, Etdrk4, Forcing, InitialCondition, SimConfig, TimeStep, Trajectory,
};
use bolab_core::lab::monotonicity_report;
use bolab_core::spectral::{Complex64, Grid, SpectralField};

fn config(eps: f64, n: usize, t_final: f64, dt: f64, ic: InitialCondition) -> SimConfig {
    SimConfig {
        epsilon: eps,
        n_points: n,
        t_final,
        time_step: TimeStep::Fixed(dt),
        initial_condition: ic,
        snapshot_stride: 10,
        ..SimConfig::default()
    }
}

fn final_field(traj: &Trajectory) -> SpectralField {
    traj.snapshots.last().unwrap().forward().unwrap()
}

/// Steps `stepper` by hand so tests can inject modified dynamics.
fn manual_trajectory(cfg: SimConfig, mut stepper: Etdrk4, u0: SpectralField, steps: usize) -> Trajectory {
    let grid = u0.grid().clone();
    let dt = stepper.dt();
    let mut coeffs = u0.coeffs().to_vec();
    let mut diagnostics = vec![DiagnosticsSample::compute(&u0, 0.0)];
    for s in 0..steps {
        let t = s as f64 * dt;
        stepper.step(&mut coeffs, t).unwrap();
        let u = SpectralField::new(grid.clone(), coeffs.clone()).unwrap();
        diagnostics.push(DiagnosticsSample::compute(&u, t + dt));
    }
    let last = SpectralField::new(grid.clone(), coeffs).unwrap();
    Trajectory {
        config: cfg,
        grid,
        dt,
        times: vec![0.0, steps as f64 * dt],
        snapshots: vec![u0.inverse(), last.inverse()],
        diagnostics,
    }
}

#[test]
fn zero_data_stays_zero() {
    let traj = integrate(&config(0.05, 32, 1.0, 1e-2, InitialCondition::zero())).unwrap();
    for snap in &traj.snapshots {
        assert_eq!(snap.max_abs(), 0.0);
    }
    assert!(traj.diagnostics.iter().all(|s| s.l2_sq == 0.0 && s.energy == 0.0));
}

#[test]
fn time_grid_and_snapshots_well_formed() {
    let traj = integrate(&config(0.01, 64, 0.37, 1e-2, InitialCondition::TwoMode)).unwrap();
    assert_eq!(traj.times[0], 0.0);
    assert!(traj.times.windows(2).all(|w| w[1] > w[0]));
    assert!((traj.times.last().unwrap() - 0.37).abs() <= traj.dt);
    assert_eq!(traj.times.len(), traj.snapshots.len());
    assert!((traj.final_sample().t - 0.37).abs() < 1e-12);
    assert!(traj.diagnostics.iter().all(DiagnosticsSample::is_finite));
}

#[test]
fn inviscid_cosine_conserves_l2() {
    let coarse = integrate(&config(0.0, 256, 1.0, 1e-3, InitialCondition::Cosine)).unwrap();
    let fine = integrate(&config(0.0, 512, 1.0, 5e-4, InitialCondition::Cosine)).unwrap();
    for traj in [&coarse, &fine] {
        let l0 = traj.initial_sample().l2_sq.sqrt();
        let l1 = traj.final_sample().l2_sq.sqrt();
        assert!((l1 - l0).abs() / l0 <= 1e-8, "drift {}", (l1 - l0).abs() / l0);
    }
    // cross-check: the two resolutions agree on the final state
    let a = final_field(&coarse).resample(fine.grid.clone()).unwrap();
    assert!(a.max_diff(&final_field(&fine)).unwrap() < 1e-9);
}

#[test]
fn viscous_cosine_dissipation_budget() {
    let traj = integrate(&config(0.01, 256, 1.0, 1e-3, InitialCondition::Cosine)).unwrap();
    let d = &traj.diagnostics;
    let t: Vec<f64> = d.iter().map(|s| s.t).collect();
    let dx: Vec<f64> = d.iter().map(|s| s.dx_sq).collect();
    let budget = traj.final_sample().l2_sq + 2.0 * 0.01 * time_integral(&t, &dx).unwrap();
    let l0 = d[0].l2_sq;
    assert!((budget - l0).abs() / l0 <= 1e-6, "budget error {}", (budget - l0).abs() / l0);
}

#[test]
fn mean_and_realness_preserved() {
    let ic = InitialCondition::Coefficients(vec![
        (0, Complex64::new(0.3, 0.0)),
        (1, Complex64::new(0.5, 0.2)),
        (3, Complex64::new(-0.1, 0.15)),
    ]);
    for eps in [0.0, 0.05] {
        let traj = integrate(&config(eps, 64, 1.0, 1e-3, ic.clone())).unwrap();
        for snap in &traj.snapshots {
            let u = snap.forward().unwrap();
            assert!((u.mean() - 0.3).abs() < 1e-13, "mean {}", u.mean());
        }
        // the stored field is real by construction; its spectrum must be Hermitian
        let u = final_field(&traj);
        for &j in u.grid().mode_indices() {
            assert!((u.mode(-j) - u.mode(j).conj()).norm() < 1e-13);
        }
    }
}

#[test]
fn viscous_runs_decay_monotonically() {
    for eps in [0.1, 0.01, 0.001] {
        let traj = integrate(&config(eps, 128, 1.0, 1e-3, InitialCondition::TwoMode)).unwrap();
        let report = monotonicity_report(&traj);
        assert!(report.pass, "eps = {eps}: uptick {}", report.max_uptick);
    }
}

#[test]
fn negated_viscosity_is_flagged() {
    let cfg = config(0.01, 64, 0.5, 1e-3, InitialCondition::TwoMode);
    let grid = cfg.grid().unwrap();
    let u0 = cfg.initial_condition.to_spectral(&grid).unwrap();
    let stepper = Etdrk4::new(grid, -0.01, 1e-3, true);
    let traj = manual_trajectory(cfg, stepper, u0, 500);
    assert!(!monotonicity_report(&traj).pass);
}

#[test]
fn inviscid_fourth_order_in_time() {
    let dts = [4e-3, 2e-3, 1e-3];
    let run = |dt: f64| final_field(&integrate(&config(0.0, 64, 1.0, dt, InitialCondition::TwoMode)).unwrap());
    let reference = run(dts[0] / 64.0);
    let errors: Vec<f64> = dts.iter().map(|&dt| run(dt).max_diff(&reference).unwrap()).collect();
    for w in errors.windows(2) {
        let ratio = w[0] / w[1];
        assert!((14.0..=18.0).contains(&ratio), "errors {errors:?}");
    }
}

#[test]
fn manufactured_solution_recovered() {
    for eps in [0.0, 0.1] {
        let cfg = SimConfig {
            forcing: Some(Forcing::TravelingSine),
            initial_condition: Forcing::TravelingSine.initial_condition(),
            ..config(eps, 64, 1.0, 1e-3, InitialCondition::zero())
        };
        let traj = integrate(&cfg).unwrap();
        let x = traj.grid.points();
        for (t, snap) in traj.times.iter().zip(&traj.snapshots) {
            let err = x
                .iter()
                .zip(snap.samples())
                .map(|(&xm, &u)| (u - (xm - t).sin()).abs())
                .fold(0.0, f64::max);
            assert!(err <= 1e-8, "eps = {eps}, t = {t}: {err}");
        }
    }
}

fn single_mode_run(eps: f64, mode: i64, dt: f64, t_final: f64) -> Trajectory {
    let cfg = config(eps, 16, t_final, dt, InitialCondition::zero());
    let grid = Arc::new(Grid::new(16, 2.0 * PI).unwrap());
    let u0 = SpectralField::from_modes(grid.clone(), &[(mode, Complex64::new(0.5, 0.0))]).unwrap();
    let stepper = Etdrk4::new(grid, eps, dt, true).without_nonlinearity();
    let steps = (t_final / dt).round() as usize;
    manual_trajectory(cfg, stepper, u0, steps)
}

#[test]
fn single_mode_l2_identity() {
    // cos(2x) e^{-0.4 t}: ||u||^2 = pi e^{-0.8 t}, ||u_x||^2 = 4 pi e^{-0.8 t}
    let traj = single_mode_run(0.1, 2, 1e-3, 1.0);
    for s in &traj.diagnostics {
        let decay = (-0.8 * s.t).exp();
        assert!((s.l2_sq - PI * decay).abs() < 1e-12);
        assert!((s.dx_sq - 4.0 * PI * decay).abs() < 1e-11);
    }
    // what remains is the truncation error of the difference quotient alone
    let coarse = l2_identity_residual(&traj).unwrap().max_relative();
    let fine = l2_identity_residual(&single_mode_run(0.1, 2, 5e-4, 1.0)).unwrap().max_relative();
    assert!(coarse <= 1e-6, "residual {coarse}");
    assert!((3.5..=4.5).contains(&(coarse / fine)), "{coarse} -> {fine}");
}

#[test]
fn single_mode_energy_identity() {
    // cos x e^{-eps t}: E = (pi/2) e^{-2 eps t}, both cubic terms vanish
    let eps = 0.01;
    let traj = single_mode_run(eps, 1, 1e-3, 1.0);
    for s in &traj.diagnostics {
        assert!((s.energy - 0.5 * PI * (-2.0 * eps * s.t).exp()).abs() < 1e-12);
        assert!(s.cubic.abs() < 1e-13 && s.u2_uxx.abs() < 1e-13);
    }
    let res = energy_identity_residual(&traj).unwrap();
    assert!(res.max_abs() <= 1e-10, "residual {}", res.max_abs());
}

/// The functional with `+ (1/6) int u^3` drifts along the inviscid flow;
/// the one with the minus sign is conserved.
#[test]
fn energy_sign_fixed_by_conservation() {
    let traj = integrate(&config(0.0, 256, 2.0, 1e-3, InitialCondition::TwoMode)).unwrap();
    let plus = |u: &SpectralField| 0.5 * seminorm_sq(u, 0.5).unwrap() + cubic_integral(u) / 6.0;
    let first = traj.snapshots[0].forward().unwrap();
    let last = final_field(&traj);
    let (p0, p1) = (plus(&first), plus(&last));
    assert!((p1 - p0).abs() / p0.abs() > 1e-3, "plus-sign functional drift {}", (p1 - p0).abs());
    let (e0, e1) = (traj.initial_sample().energy, traj.final_sample().energy);
    assert!((e1 - e0).abs() / e0.abs() < 1e-9);
}

#[test]
fn sampled_snapshots_found_at_half_step_times() {
    // with dt = 0.1 the times 0.15 and 0.55 fall exactly between two steps
    let cfg = config(0.01, 32, 1.0, 0.1, InitialCondition::Cosine);
    let times = [0.0, 0.15, 0.55, 1.0];
    let traj = bolab_core::dynamics::integrate_sampled(&cfg, &times).unwrap();
    for t in times {
        assert!(traj.snapshot_at(t).is_some(), "t = {t}");
    }
    assert!(traj.snapshot_at(0.33).is_none());
}

//! Fourth-order exponential time differencing Runge-Kutta (Cox-Matthews form)
//! for `u_t = lambda(k) u + N(u, t)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::config::SimConfig;
use super::mms::Forcing;
use super::{grid_symbol, NonlinearWorkspace};
use crate::error::{Error, Result};
use crate::spectral::{Grid, SpectralField};

/// Number of contour nodes used for the phi-function quadrature.
pub const CONTOUR_POINTS: usize = 32;
/// Contour radius around each `lambda dt`.
pub const CONTOUR_RADIUS: f64 = 1.0;
/// Below this `|lambda dt|` the closed forms lose digits to cancellation and
/// the contour mean is used instead.
pub const CONTOUR_THRESHOLD: f64 = 0.5;

/// Per-mode weights of one ETDRK4 step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtdCoefficients {
    /// `exp(L)`, `L = lambda dt`.
    pub e: Complex64,
    /// `exp(L/2)`.
    pub e_half: Complex64,
    /// `dt (exp(L/2) - 1) / L`.
    pub q: Complex64,
    pub f1: Complex64,
    pub f2: Complex64,
    pub f3: Complex64,
}

impl EtdCoefficients {
    pub fn new(lambda: Complex64, dt: f64) -> Self {
        let l = lambda * dt;
        let (q, f1, f2, f3) = if l.norm() < CONTOUR_THRESHOLD {
            contour_weights(l)
        } else {
            closed_form_weights(l)
        };
        EtdCoefficients {
            e: l.exp(),
            e_half: (l * 0.5).exp(),
            q: q * dt,
            f1: f1 * dt,
            f2: f2 * dt,
            f3: f3 * dt,
        }
    }
}

/// Dimensionless weights `(q, f1, f2, f3)` evaluated directly.
fn closed_form_weights(l: Complex64) -> (Complex64, Complex64, Complex64, Complex64) {
    let el = l.exp();
    let l2 = l * l;
    let l3 = l2 * l;
    let q = ((l * 0.5).exp() - 1.0) / l;
    let f1 = (-4.0 - l + el * (4.0 - 3.0 * l + l2)) / l3;
    let f2 = (2.0 + l + el * (l - 2.0)) / l3;
    let f3 = (-4.0 - 3.0 * l - l2 + el * (4.0 - l)) / l3;
    (q, f1, f2, f3)
}

/// Same weights as the mean of the closed forms over a circle around `l`.
fn contour_weights(l: Complex64) -> (Complex64, Complex64, Complex64, Complex64) {
    let mut acc = (Complex64::default(), Complex64::default(), Complex64::default(), Complex64::default());
    for m in 0..CONTOUR_POINTS {
        // offset by half a node so no sample lands on the real axis
        let theta = 2.0 * PI * (m as f64 + 0.5) / CONTOUR_POINTS as f64;
        let r = l + Complex64::from_polar(CONTOUR_RADIUS, theta);
        let (q, f1, f2, f3) = closed_form_weights(r);
        acc.0 += q;
        acc.1 += f1;
        acc.2 += f2;
        acc.3 += f3;
    }
    let inv = 1.0 / CONTOUR_POINTS as f64;
    (acc.0 * inv, acc.1 * inv, acc.2 * inv, acc.3 * inv)
}

/// ETDRK4 integrator with precomputed per-mode weights and reusable buffers.
///
/// Inputs are trusted: no sign check on `epsilon` happens here, which lets
/// fault-injection harnesses run anti-diffusive configurations.
pub struct Etdrk4 {
    grid: Arc<Grid>,
    dt: f64,
    epsilon: f64,
    dealias: bool,
    nonlinear: bool,
    forcing: Option<Forcing>,
    weights: Vec<EtdCoefficients>,
    ws: NonlinearWorkspace,
    nu: Vec<Complex64>,
    na: Vec<Complex64>,
    nb: Vec<Complex64>,
    nc: Vec<Complex64>,
    a: Vec<Complex64>,
    b: Vec<Complex64>,
    c: Vec<Complex64>,
    force_buf: Vec<Complex64>,
    force_scratch: Vec<Complex64>,
}

impl Etdrk4 {
    pub fn new(grid: Arc<Grid>, epsilon: f64, dt: f64, dealias: bool) -> Self {
        let weights = grid_symbol(&grid, epsilon)
            .into_iter()
            .map(|l| EtdCoefficients::new(l, dt))
            .collect();
        let n = grid.n_points();
        let zeros = || vec![Complex64::default(); n];
        Etdrk4 {
            ws: NonlinearWorkspace::new(&grid),
            force_scratch: vec![Complex64::default(); grid.scratch_len()],
            grid,
            dt,
            epsilon,
            dealias,
            nonlinear: true,
            forcing: None,
            weights,
            nu: zeros(),
            na: zeros(),
            nb: zeros(),
            nc: zeros(),
            a: zeros(),
            b: zeros(),
            c: zeros(),
            force_buf: zeros(),
        }
    }

    pub fn from_config(cfg: &SimConfig, dt: f64) -> Result<Self> {
        let grid = cfg.grid()?;
        Ok(Etdrk4::new(grid, cfg.epsilon, dt, cfg.dealias).with_forcing(cfg.forcing))
    }

    pub fn with_forcing(mut self, forcing: Option<Forcing>) -> Self {
        self.forcing = forcing;
        self
    }

    /// Disables the quadratic term, leaving the linear part and any forcing.
    pub fn without_nonlinearity(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn weights(&self) -> &[EtdCoefficients] {
        &self.weights
    }

    fn rhs(&mut self, which: Stage, t: f64) {
        let (input, out) = match which {
            Stage::U(u) => (u, &mut self.nu),
            Stage::A => (&self.a[..], &mut self.na),
            Stage::B => (&self.b[..], &mut self.nb),
            Stage::C => (&self.c[..], &mut self.nc),
        };
        if self.nonlinear {
            self.ws.eval(&self.grid, input, self.dealias, out);
        } else {
            out.iter_mut().for_each(|v| *v = Complex64::default());
        }
        if let Some(forcing) = self.forcing {
            let h = self.grid.spacing();
            for (m, v) in self.force_buf.iter_mut().enumerate() {
                *v = Complex64::new(forcing.source(m as f64 * h, t, self.epsilon), 0.0);
            }
            self.grid.forward_in_place(&mut self.force_buf, &mut self.force_scratch);
            for (o, f) in out.iter_mut().zip(&self.force_buf) {
                *o += f;
            }
        }
    }

    /// Advances `u` (coefficients in storage order) from `t` to `t + dt`.
    #[allow(clippy::needless_range_loop)]
    pub fn step(&mut self, u: &mut [Complex64], t: f64) -> Result<()> {
        let half = t + 0.5 * self.dt;
        self.rhs(Stage::U(u), t);
        for i in 0..u.len() {
            let w = &self.weights[i];
            self.a[i] = w.e_half * u[i] + w.q * self.nu[i];
        }
        self.rhs(Stage::A, half);
        for i in 0..u.len() {
            let w = &self.weights[i];
            self.b[i] = w.e_half * u[i] + w.q * self.na[i];
        }
        self.rhs(Stage::B, half);
        for i in 0..u.len() {
            let w = &self.weights[i];
            self.c[i] = w.e_half * self.a[i] + w.q * (2.0 * self.nb[i] - self.nu[i]);
        }
        self.rhs(Stage::C, t + self.dt);
        for i in 0..u.len() {
            let w = &self.weights[i];
            u[i] = w.e * u[i]
                + w.f1 * self.nu[i]
                + 2.0 * w.f2 * (self.na[i] + self.nb[i])
                + w.f3 * self.nc[i];
        }
        if u.iter().all(|c| c.re.is_finite() && c.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::BlowUp { last_valid_t: t })
        }
    }
}

enum Stage<'a> {
    U(&'a [Complex64]),
    A,
    B,
    C,
}

/// One ETDRK4 step of size `dt` starting at `t = 0`, using the dynamics and
/// forcing described by `cfg`.
pub fn step_etdrk4(u: &SpectralField, dt: f64, cfg: &SimConfig) -> Result<SpectralField> {
    let mut stepper = Etdrk4::new(u.grid().clone(), cfg.epsilon, dt, cfg.dealias)
        .with_forcing(cfg.forcing);
    let mut coeffs = u.coeffs().to_vec();
    stepper.step(&mut coeffs, 0.0)?;
    Ok(SpectralField::from_raw(u.grid().clone(), coeffs))
}

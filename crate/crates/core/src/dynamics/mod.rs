//! Benjamin-Ono(-Burgers) dynamics on the periodic grid:
//!
//! ```text
//! u_t + H u_xx - eps u_xx = u u_x
//! ```
//!
//! The linear part is diagonal in Fourier space with symbol
//! `lambda(k) = -i k |k| - eps k^2` and is integrated exactly; the quadratic
//! nonlinearity is evaluated pseudo-spectrally.

mod config;
mod etdrk4;
mod integrate;
mod mms;

use std::sync::Arc;

use num_complex::Complex64;

use crate::spectral::{dealias_in_place, Grid, SpectralField};

pub use config::{InitialCondition, SimConfig, TimeStep};
pub use etdrk4::{step_etdrk4, EtdCoefficients, Etdrk4};
pub use integrate::{integrate, integrate_sampled, Trajectory};
pub use mms::{mms_forcing, Forcing};

/// Fourier symbol of the linear operator `-H d_xx + eps d_xx`.
pub fn linear_symbol(k: f64, epsilon: f64) -> Complex64 {
    Complex64::new(-epsilon * k * k, -k * k.abs())
}

/// Symbol used on the grid. The dispersive part is dropped at the Nyquist
/// mode, where `i k |k|` has no real-valued counterpart.
pub(crate) fn grid_symbol(grid: &Grid, epsilon: f64) -> Vec<Complex64> {
    let nyq = grid.nyquist_index();
    grid.wavenumbers()
        .iter()
        .enumerate()
        .map(|(i, &k)| {
            if i == nyq {
                Complex64::new(-epsilon * k * k, 0.0)
            } else {
                linear_symbol(k, epsilon)
            }
        })
        .collect()
}

/// `u u_x`, evaluated as `(1/2) d_x (u^2)` with the square formed on the
/// collocation points.
pub fn nonlinear_term(u: &SpectralField, dealias: bool) -> SpectralField {
    let grid = Arc::clone(u.grid());
    let mut ws = NonlinearWorkspace::new(&grid);
    let mut out = vec![Complex64::default(); grid.n_points()];
    ws.eval(&grid, u.coeffs(), dealias, &mut out);
    SpectralField::from_raw(grid, out)
}

/// Exact solution operator of the linear part over `dt`.
pub fn propagate_linear(u: &SpectralField, dt: f64, epsilon: f64) -> crate::Result<SpectralField> {
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(crate::Error::arg("dt", format!("must be >= 0, got {dt}")));
    }
    let symbol = grid_symbol(u.grid(), epsilon);
    let coeffs = u
        .coeffs()
        .iter()
        .zip(&symbol)
        .map(|(c, l)| c * (l * dt).exp())
        .collect();
    Ok(SpectralField::from_raw(Arc::clone(u.grid()), coeffs))
}

/// Reusable buffers for repeated evaluations of the quadratic term.
pub(crate) struct NonlinearWorkspace {
    buf: Vec<Complex64>,
    scratch: Vec<Complex64>,
    half_ik: Vec<Complex64>,
}

impl NonlinearWorkspace {
    pub(crate) fn new(grid: &Grid) -> Self {
        let nyq = grid.nyquist_index();
        let half_ik = grid
            .wavenumbers()
            .iter()
            .enumerate()
            .map(|(i, &k)| {
                if i == nyq {
                    Complex64::default()
                } else {
                    Complex64::new(0.0, 0.5 * k)
                }
            })
            .collect();
        NonlinearWorkspace {
            buf: vec![Complex64::default(); grid.n_points()],
            scratch: vec![Complex64::default(); grid.scratch_len()],
            half_ik,
        }
    }

    pub(crate) fn eval(
        &mut self,
        grid: &Grid,
        u: &[Complex64],
        dealias: bool,
        out: &mut [Complex64],
    ) {
        self.buf.copy_from_slice(u);
        grid.inverse_in_place(&mut self.buf, &mut self.scratch);
        for v in self.buf.iter_mut() {
            *v = Complex64::new(v.re * v.re, 0.0);
        }
        grid.forward_in_place(&mut self.buf, &mut self.scratch);
        if dealias {
            dealias_in_place(grid, &mut self.buf);
        }
        for ((o, b), m) in out.iter_mut().zip(&self.buf).zip(&self.half_ik) {
            *o = b * m;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::RealField;
    use std::f64::consts::PI;

    fn grid(n: usize) -> Arc<Grid> {
        Arc::new(Grid::new(n, 2.0 * PI).unwrap())
    }

    #[test]
    fn symbol_values() {
        assert_eq!(linear_symbol(0.0, 0.3), Complex64::new(0.0, 0.0));
        assert_eq!(linear_symbol(2.0, 0.0), Complex64::new(0.0, -4.0));
        let l = linear_symbol(-3.0, 0.1);
        assert!((l - Complex64::new(-0.9, 9.0)).norm() < 1e-15);
        for k in [-7.5, -1.0, 0.3, 12.0] {
            let l = linear_symbol(k, 0.2);
            assert!(l.re <= 0.0);
            assert_eq!(linear_symbol(-k, 0.2), l.conj());
        }
    }

    #[test]
    fn nonlinear_term_examples() {
        let g = grid(32);
        let c = RealField::from_fn(g.clone(), |_| 1.7).unwrap().forward().unwrap();
        assert!(nonlinear_term(&c, true).coeffs().iter().all(|z| z.norm() < 1e-15));

        let cos = RealField::from_fn(g.clone(), f64::cos).unwrap().forward().unwrap();
        for dealias in [false, true] {
            let n = nonlinear_term(&cos, dealias).inverse();
            for (x, v) in g.points().iter().zip(n.samples()) {
                assert!((v + 0.5 * (2.0 * x).sin()).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn propagate_examples() {
        let g = grid(16);
        let cos = RealField::from_fn(g.clone(), f64::cos).unwrap().forward().unwrap();
        assert_eq!(propagate_linear(&cos, 0.0, 0.4).unwrap(), cos);

        let t = 0.8;
        let moved = propagate_linear(&cos, t, 0.0).unwrap().inverse();
        for (x, v) in g.points().iter().zip(moved.samples()) {
            assert!((v - (x - t).cos()).abs() < 1e-14);
        }

        let c2 = RealField::from_fn(g.clone(), |x| (2.0 * x).cos())
            .unwrap()
            .forward()
            .unwrap();
        let damped = propagate_linear(&c2, 0.5, 1.0).unwrap();
        assert!((damped.mode(2).norm() - 0.5 * (-2.0f64).exp()).abs() < 1e-15);
        assert!(propagate_linear(&c2, -1.0, 0.0).is_err());
    }

    #[test]
    fn propagate_keeps_nyquist_real() {
        let g = grid(8);
        let f = RealField::from_fn(g, |x| (4.0 * x).cos()).unwrap().forward().unwrap();
        let p = propagate_linear(&f, 0.3, 0.0).unwrap();
        assert_eq!(p.mode(-4).im, 0.0);
        assert!((p.mode(-4).re - 1.0).abs() < 1e-15);
    }
}

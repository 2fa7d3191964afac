//! Sobolev norms, the Benjamin-Ono energy and residuals of the exact L^2 and
//! energy balance laws.
//!
//! Norm conventions (with analysis coefficients `c_j` and period `L`):
//!
//! ```text
//! ||u||^2_{L2}      = L sum |c_j|^2
//! ||u||^2_{H^s}     = L sum (1 + k_j^2)^s |c_j|^2
//! ||D^s u||^2_{L2}  = L sum |k_j|^{2s} |c_j|^2
//! ```
//!
//! For `u_t + H u_xx - eps u_xx = u u_x` smooth solutions satisfy
//!
//! ```text
//! d/dt ||u||^2 + 2 eps ||u_x||^2 = 0
//! d/dt E(u) + eps ||D^{3/2} u||^2 = -(eps/2) int u^2 u_xx
//! ```
//!
//! with `E(u) = (1/2) ||D^{1/2} u||^2 - (1/6) int u^3`, the Hamiltonian that
//! the inviscid flow conserves for this sign of the nonlinearity.

use num_complex::Complex64;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::spectral::SpectralField;

/// Constant multiplying `||u|| ||u_x||` in [`gn_inequality_check`].
pub const GN_CONSTANT: f64 = 2.0;
/// Constant multiplying the mean correction `||u||^2 / L`.
pub const GN_MEAN_CONSTANT: f64 = 2.0;

/// Every norm the balance laws involve, evaluated at one instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiagnosticsSample {
    pub t: f64,
    /// `||u||^2_{L2}`
    pub l2_sq: f64,
    /// `||u||^2_{H^{1/2}}`, inhomogeneous weight
    pub hhalf_sq: f64,
    /// `||D^{1/2} u||^2_{L2}`
    pub dhalf_sq: f64,
    /// `||u_x||^2_{L2}`
    pub dx_sq: f64,
    /// `||D^{3/2} u||^2_{L2}`
    pub d32_sq: f64,
    pub energy: f64,
    /// `int u^3`
    pub cubic: f64,
    /// `max |u|` over the collocation points
    pub linf: f64,
    /// `int u^2 u_xx`, the source term of the energy balance
    pub u2_uxx: f64,
}

impl DiagnosticsSample {
    pub fn compute(u: &SpectralField, t: f64) -> Self {
        let grid = u.grid();
        let length = grid.length();
        let (mut l2, mut hh, mut dh, mut d1, mut d32) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (c, &k) in u.coeffs().iter().zip(grid.wavenumbers()) {
            let p = c.norm_sqr();
            let ak = k.abs();
            l2 += p;
            hh += (1.0 + k * k).sqrt() * p;
            dh += ak * p;
            d1 += k * k * p;
            d32 += ak * k * k * p;
        }
        let phys = u.inverse();
        let uxx = u
            .apply_multiplier(|_, k| Complex64::new(-k * k, 0.0))
            .inverse();
        let h = grid.spacing();
        let mut cubic = 0.0;
        let mut u2_uxx = 0.0;
        let mut linf: f64 = 0.0;
        for (&v, &w) in phys.samples().iter().zip(uxx.samples()) {
            cubic += v * v * v;
            u2_uxx += v * v * w;
            linf = linf.max(v.abs());
        }
        let dhalf_sq = length * dh;
        let cubic = h * cubic;
        DiagnosticsSample {
            t,
            l2_sq: length * l2,
            hhalf_sq: length * hh,
            dhalf_sq,
            dx_sq: length * d1,
            d32_sq: length * d32,
            energy: 0.5 * dhalf_sq - cubic / 6.0,
            cubic,
            linf,
            u2_uxx: h * u2_uxx,
        }
    }

    pub fn is_finite(&self) -> bool {
        [
            self.t,
            self.l2_sq,
            self.hhalf_sq,
            self.dhalf_sq,
            self.dx_sq,
            self.d32_sq,
            self.energy,
            self.cubic,
            self.linf,
            self.u2_uxx,
        ]
        .iter()
        .all(|v| v.is_finite())
    }
}

pub fn l2_norm_sq(u: &SpectralField) -> f64 {
    u.grid().length() * u.coeffs().iter().map(|c| c.norm_sqr()).sum::<f64>()
}

fn check_order(s: f64) -> Result<()> {
    if (0.0..=2.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::arg("s", format!("Sobolev order must lie in [0, 2], got {s}")))
    }
}

/// Inhomogeneous `||u||^2_{H^s}`.
pub fn sobolev_norm_sq(u: &SpectralField, s: f64) -> Result<f64> {
    check_order(s)?;
    if s == 0.0 {
        return Ok(l2_norm_sq(u));
    }
    let sum: f64 = u
        .coeffs()
        .iter()
        .zip(u.grid().wavenumbers())
        .map(|(c, &k)| (1.0 + k * k).powf(s) * c.norm_sqr())
        .sum();
    Ok(u.grid().length() * sum)
}

/// Homogeneous `||D^s u||^2_{L2}`.
pub fn seminorm_sq(u: &SpectralField, s: f64) -> Result<f64> {
    check_order(s)?;
    let sum: f64 = u
        .coeffs()
        .iter()
        .zip(u.grid().wavenumbers())
        .map(|(c, &k)| {
            if s == 0.0 {
                c.norm_sqr()
            } else {
                k.abs().powf(2.0 * s) * c.norm_sqr()
            }
        })
        .sum();
    Ok(u.grid().length() * sum)
}

/// `int u^3` by collocation quadrature.
pub fn cubic_integral(u: &SpectralField) -> f64 {
    let phys = u.inverse();
    phys.grid().spacing() * phys.samples().iter().map(|v| v * v * v).sum::<f64>()
}

/// `E(u) = (1/2) ||D^{1/2} u||^2 - (1/6) int u^3`.
pub fn energy(u: &SpectralField) -> f64 {
    let dhalf = seminorm_sq(u, 0.5).expect("order 1/2 is in range");
    0.5 * dhalf - cubic_integral(u) / 6.0
}

/// Outcome of one interpolation-inequality evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnCheck {
    /// `||u||^2_inf`
    pub lhs: f64,
    /// `C ||u|| ||u_x|| + C_0 ||u||^2 / L`
    pub rhs: f64,
    pub ratio: f64,
}

impl GnCheck {
    pub fn holds(&self) -> bool {
        self.ratio <= 1.0
    }
}

/// Evaluates `||u||^2_inf <= C ||u|| ||u_x|| + C_0 ||u||^2 / L` with the fixed
/// constants [`GN_CONSTANT`] and [`GN_MEAN_CONSTANT`]. The ratio is reported,
/// never compared against a sharp constant.
pub fn gn_inequality_check(u: &SpectralField) -> Result<GnCheck> {
    let l2 = l2_norm_sq(u);
    if l2 == 0.0 {
        return Err(Error::arg("u", "inequality check needs a nonzero field"));
    }
    let dx = seminorm_sq(u, 1.0)?;
    let linf = u.inverse().max_abs();
    let lhs = linf * linf;
    let rhs = GN_CONSTANT * (l2 * dx).sqrt() + GN_MEAN_CONSTANT * l2 / u.grid().length();
    Ok(GnCheck {
        lhs,
        rhs,
        ratio: lhs / rhs,
    })
}

/// Derivative of sampled data by three-point Lagrange differences: centered in
/// the interior, one-sided second order at both ends.
pub fn time_derivative(times: &[f64], values: &[f64]) -> Result<Vec<f64>> {
    let n = times.len();
    if n < 3 || values.len() != n {
        return Err(Error::TooFewSamples {
            needed: 3,
            got: n.min(values.len()),
        });
    }
    let stencil = |i: usize| -> usize {
        if i == 0 {
            0
        } else if i == n - 1 {
            n - 3
        } else {
            i - 1
        }
    };
    Ok((0..n)
        .map(|i| {
            let s = stencil(i);
            let (x0, x1, x2) = (times[s], times[s + 1], times[s + 2]);
            let (y0, y1, y2) = (values[s], values[s + 1], values[s + 2]);
            let x = times[i];
            y0 * ((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2))
                + y1 * ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2))
                + y2 * ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1))
        })
        .collect())
}

/// Integral of uniformly sampled data: composite Simpson, closed with a
/// three-eighths panel when the interval count is odd.
pub fn time_integral(times: &[f64], values: &[f64]) -> Result<f64> {
    let n = times.len();
    if n < 2 || values.len() != n {
        return Err(Error::TooFewSamples {
            needed: 2,
            got: n.min(values.len()),
        });
    }
    let intervals = n - 1;
    let h = (times[n - 1] - times[0]) / intervals as f64;
    if intervals == 1 {
        return Ok(0.5 * h * (values[0] + values[1]));
    }
    if intervals == 3 {
        return Ok(3.0 * h / 8.0 * (values[0] + 3.0 * values[1] + 3.0 * values[2] + values[3]));
    }
    let simpson_end = if intervals.is_multiple_of(2) { intervals } else { intervals - 3 };
    let mut acc = values[0] + values[simpson_end];
    for (i, v) in values.iter().enumerate().take(simpson_end).skip(1) {
        acc += if i % 2 == 1 { 4.0 * v } else { 2.0 * v };
    }
    let mut total = h / 3.0 * acc;
    if simpson_end != intervals {
        let v = &values[simpson_end..];
        total += 3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]);
    }
    Ok(total)
}

/// Pointwise residual of a balance law along a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    pub times: Vec<f64>,
    pub residual: Vec<f64>,
    /// `|residual|` divided by the dissipation scale (or by the initial
    /// norm when `eps = 0`).
    pub relative: Vec<f64>,
}

impl ResidualSeries {
    pub fn max_abs(&self) -> f64 {
        self.residual.iter().fold(0.0, |m, r| m.max(r.abs()))
    }

    pub fn max_relative(&self) -> f64 {
        self.relative.iter().fold(0.0, |m, r| m.max(*r))
    }

    fn build(times: Vec<f64>, residual: Vec<f64>, scale: impl Fn(usize) -> f64) -> Self {
        let relative = residual
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let s = scale(i);
                if s > 0.0 {
                    r.abs() / s
                } else {
                    r.abs()
                }
            })
            .collect();
        ResidualSeries {
            times,
            residual,
            relative,
        }
    }
}

/// `d/dt ||u||^2 + 2 eps ||u_x||^2`, relative to `eps ||u_x||^2`
/// (or to `||u_0||^2` when `eps = 0`).
pub fn l2_identity_residual(traj: &Trajectory) -> Result<ResidualSeries> {
    let eps = traj.config.epsilon;
    let d = &traj.diagnostics;
    let times: Vec<f64> = d.iter().map(|s| s.t).collect();
    let l2: Vec<f64> = d.iter().map(|s| s.l2_sq).collect();
    let rate = time_derivative(&times, &l2)?;
    let residual = rate
        .iter()
        .zip(d)
        .map(|(r, s)| r + 2.0 * eps * s.dx_sq)
        .collect();
    let l2_0 = d[0].l2_sq;
    Ok(ResidualSeries::build(times, residual, |i| {
        if eps > 0.0 {
            eps * d[i].dx_sq
        } else {
            l2_0
        }
    }))
}

/// `d/dt E + eps ||D^{3/2} u||^2 + (eps/2) int u^2 u_xx`, relative to
/// `eps ||D^{3/2} u||^2` (or to the initial energy scale when `eps = 0`).
pub fn energy_identity_residual(traj: &Trajectory) -> Result<ResidualSeries> {
    let eps = traj.config.epsilon;
    let d = &traj.diagnostics;
    let times: Vec<f64> = d.iter().map(|s| s.t).collect();
    let e: Vec<f64> = d.iter().map(|s| s.energy).collect();
    let rate = time_derivative(&times, &e)?;
    let residual = rate
        .iter()
        .zip(d)
        .map(|(r, s)| r + eps * s.d32_sq + 0.5 * eps * s.u2_uxx)
        .collect();
    let e_scale = energy_scale(&d[0]);
    Ok(ResidualSeries::build(times, residual, |i| {
        if eps > 0.0 {
            eps * d[i].d32_sq
        } else {
            e_scale
        }
    }))
}

/// Magnitude used to normalize energy drifts: `|E(u_0)|`, falling back to
/// the quadratic part when the energy happens to vanish.
pub fn energy_scale(sample: &DiagnosticsSample) -> f64 {
    let e = sample.energy.abs();
    if e > 0.0 {
        e
    } else {
        0.5 * sample.dhalf_sq
    }
}

/// Largest relative departures of `||u||_{L2}` and `E(u)` from their initial
/// values along a trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConservationDrift {
    pub l2_relative: f64,
    pub energy_relative: f64,
}

pub fn conservation_drift(traj: &Trajectory) -> ConservationDrift {
    let d = &traj.diagnostics;
    let n0 = d[0].l2_sq.sqrt();
    let e0 = d[0].energy;
    let e_scale = energy_scale(&d[0]);
    let rel = |delta: f64, scale: f64| if scale > 0.0 { delta / scale } else { delta };
    let l2 = d.iter().fold(0.0, |m: f64, s| m.max((s.l2_sq.sqrt() - n0).abs()));
    let en = d.iter().fold(0.0, |m: f64, s| m.max((s.energy - e0).abs()));
    ConservationDrift {
        l2_relative: rel(l2, n0),
        energy_relative: rel(en, e_scale),
    }
}

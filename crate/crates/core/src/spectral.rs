//! Periodic collocation grid, discrete Fourier transforms and Fourier-multiplier
//! operators.
//!
//! Coefficients are stored in FFT order (`j = 0, 1, .., n/2-1, -n/2, .., -1`)
//! and use the analysis normalization: the coefficient of `exp(i k_j x)` in
//! `exp(i k_j x)` is exactly one, i.e. `c_j = (1/n) sum_m u(x_m) exp(-i k_j x_m)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

pub use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Smallest admissible number of collocation points.
pub const MIN_POINTS: usize = 8;

/// Uniform periodic grid on `[0, L)` together with its FFT plans.
///
/// Plans are immutable and shared behind `Arc`, so a grid can be cloned into
/// independent workers freely.
#[derive(Clone)]
pub struct Grid {
    n_points: usize,
    length: f64,
    indices: Vec<i64>,
    wavenumbers: Vec<f64>,
    fft_forward: Arc<dyn Fft<f64>>,
    fft_inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("n_points", &self.n_points)
            .field("length", &self.length)
            .finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n_points == other.n_points && self.length == other.length
    }
}

/// Builds a grid of `n_points` collocation points on a period of `length`.
pub fn make_grid(n_points: usize, length: f64) -> Result<Grid> {
    Grid::new(n_points, length)
}

impl Grid {
    pub fn new(n_points: usize, length: f64) -> Result<Self> {
        if !n_points.is_multiple_of(2) {
            return Err(Error::InvalidGrid(format!(
                "n_points must be even, got {n_points}"
            )));
        }
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "n_points must be at least {MIN_POINTS}, got {n_points}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "length must be positive and finite, got {length}"
            )));
        }
        let half = (n_points / 2) as i64;
        let indices: Vec<i64> = (0..n_points as i64)
            .map(|i| if i < half { i } else { i - n_points as i64 })
            .collect();
        let wavenumbers = indices
            .iter()
            .map(|&j| 2.0 * PI * j as f64 / length)
            .collect();
        let mut planner = FftPlanner::new();
        Ok(Grid {
            n_points,
            length,
            indices,
            wavenumbers,
            fft_forward: planner.plan_fft_forward(n_points),
            fft_inverse: planner.plan_fft_inverse(n_points),
        })
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn spacing(&self) -> f64 {
        self.length / self.n_points as f64
    }

    /// Integer mode indices `j` in storage order.
    pub fn mode_indices(&self) -> &[i64] {
        &self.indices
    }

    /// Wavenumbers `k_j = 2 pi j / L` in storage order.
    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    /// Storage slot of the Nyquist mode `j = -n/2`.
    pub fn nyquist_index(&self) -> usize {
        self.n_points / 2
    }

    /// Storage slot of mode `j`, if representable.
    pub fn slot(&self, j: i64) -> Option<usize> {
        let half = (self.n_points / 2) as i64;
        if j >= half || j < -half {
            None
        } else if j >= 0 {
            Some(j as usize)
        } else {
            Some((j + self.n_points as i64) as usize)
        }
    }

    /// Collocation points `x_m = m L / n`.
    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n_points).map(|m| m as f64 * h).collect()
    }

    /// Largest retained `|j|` under the two-thirds rule.
    pub fn dealias_cutoff(&self) -> i64 {
        (self.n_points / 3) as i64
    }

    pub(crate) fn scratch_len(&self) -> usize {
        self.fft_forward
            .get_inplace_scratch_len()
            .max(self.fft_inverse.get_inplace_scratch_len())
    }

    /// In-place forward transform of a real signal stored in `buf`.
    /// The result is normalized and made exactly Hermitian.
    pub(crate) fn forward_in_place(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.fft_forward.process_with_scratch(buf, scratch);
        let scale = 1.0 / self.n_points as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
        enforce_hermitian(buf);
    }

    /// In-place inverse transform; the real part of `buf` holds the samples afterwards.
    pub(crate) fn inverse_in_place(&self, buf: &mut [Complex64], scratch: &mut [Complex64]) {
        self.fft_inverse.process_with_scratch(buf, scratch);
    }

    pub fn forward(&self, field: &RealField) -> Result<SpectralField> {
        if field.grid.as_ref() != self {
            return Err(Error::GridMismatch);
        }
        field.forward()
    }

    pub fn inverse(&self, field: &SpectralField) -> Result<RealField> {
        if field.grid.as_ref() != self {
            return Err(Error::GridMismatch);
        }
        Ok(field.inverse())
    }
}

/// Symmetrizes `c_{-j} = conj(c_j)` and zeroes the imaginary parts of the
/// mean and Nyquist modes.
pub(crate) fn enforce_hermitian(coeffs: &mut [Complex64]) {
    let n = coeffs.len();
    coeffs[0].im = 0.0;
    coeffs[n / 2].im = 0.0;
    for j in 1..n / 2 {
        let avg = 0.5 * (coeffs[j] + coeffs[n - j].conj());
        coeffs[j] = avg;
        coeffs[n - j] = avg.conj();
    }
}

/// A real periodic function sampled at the collocation points.
#[derive(Debug, Clone, PartialEq)]
pub struct RealField {
    grid: Arc<Grid>,
    samples: Vec<f64>,
}

impl RealField {
    pub fn new(grid: Arc<Grid>, samples: Vec<f64>) -> Result<Self> {
        if samples.len() != grid.n_points {
            return Err(Error::arg(
                "samples",
                format!("expected {} samples, got {}", grid.n_points, samples.len()),
            ));
        }
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("real field samples"));
        }
        Ok(RealField { grid, samples })
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let samples = vec![0.0; grid.n_points];
        RealField { grid, samples }
    }

    /// Samples `f` at the collocation points.
    pub fn from_fn(grid: Arc<Grid>, f: impl Fn(f64) -> f64) -> Result<Self> {
        let samples = grid.points().into_iter().map(f).collect();
        RealField::new(grid, samples)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn max_abs(&self) -> f64 {
        self.samples.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Trapezoid (equivalently rectangle) rule on the periodic grid.
    pub fn integral(&self) -> f64 {
        self.grid.spacing() * self.samples.iter().sum::<f64>()
    }

    pub fn forward(&self) -> Result<SpectralField> {
        if self.samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("forward transform input"));
        }
        let mut buf: Vec<Complex64> = self
            .samples
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        let mut scratch = vec![Complex64::default(); self.grid.scratch_len()];
        self.grid.forward_in_place(&mut buf, &mut scratch);
        Ok(SpectralField {
            grid: Arc::clone(&self.grid),
            coeffs: buf,
        })
    }
}

/// Fourier coefficients of a real periodic function, in FFT storage order.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    grid: Arc<Grid>,
    coeffs: Vec<Complex64>,
}

impl SpectralField {
    /// Wraps raw coefficients, symmetrizing them so the inverse is real.
    pub fn new(grid: Arc<Grid>, mut coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.n_points {
            return Err(Error::arg(
                "coeffs",
                format!("expected {} coefficients, got {}", grid.n_points, coeffs.len()),
            ));
        }
        if coeffs.iter().any(|c| !(c.re.is_finite() && c.im.is_finite())) {
            return Err(Error::NonFinite("spectral coefficients"));
        }
        enforce_hermitian(&mut coeffs);
        Ok(SpectralField { grid, coeffs })
    }

    /// Trusted constructor for coefficient vectors already known to be Hermitian.
    pub(crate) fn from_raw(grid: Arc<Grid>, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.n_points);
        SpectralField { grid, coeffs }
    }

    pub fn zeros(grid: Arc<Grid>) -> Self {
        let coeffs = vec![Complex64::default(); grid.n_points];
        SpectralField { grid, coeffs }
    }

    /// Builds a field from `(j, c_j)` pairs with `j >= 0`; the negative modes
    /// are filled in by conjugate symmetry.
    pub fn from_modes(grid: Arc<Grid>, modes: &[(i64, Complex64)]) -> Result<Self> {
        let mut coeffs = vec![Complex64::default(); grid.n_points];
        let n = grid.n_points;
        for &(j, c) in modes {
            let slot = grid
                .slot(j)
                .filter(|_| j >= 0)
                .ok_or_else(|| Error::arg("modes", format!("mode {j} not representable")))?;
            if j == 0 {
                coeffs[0] += Complex64::new(c.re, 0.0);
            } else {
                coeffs[slot] += c;
                coeffs[n - slot] += c.conj();
            }
        }
        SpectralField::new(grid, coeffs)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub(crate) fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Coefficient of mode `j`; zero when `j` is outside the representable band.
    pub fn mode(&self, j: i64) -> Complex64 {
        self.grid
            .slot(j)
            .map(|s| self.coeffs[s])
            .unwrap_or_default()
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    pub fn inverse(&self) -> RealField {
        let mut buf = self.coeffs.clone();
        let mut scratch = vec![Complex64::default(); self.grid.scratch_len()];
        self.grid.inverse_in_place(&mut buf, &mut scratch);
        RealField {
            grid: Arc::clone(&self.grid),
            samples: buf.into_iter().map(|c| c.re).collect(),
        }
    }

    /// Applies a real-or-complex multiplier `m(j, k_j)` mode by mode.
    pub fn apply_multiplier(&self, multiplier: impl Fn(i64, f64) -> Complex64) -> SpectralField {
        let coeffs = self
            .coeffs
            .iter()
            .zip(self.grid.indices.iter().zip(&self.grid.wavenumbers))
            .map(|(&c, (&j, &k))| c * multiplier(j, k))
            .collect();
        SpectralField::from_raw(Arc::clone(&self.grid), coeffs)
    }

    /// Hilbert transform, multiplier `-i sgn(k)` with `sgn(0) = 0`.
    ///
    /// The Nyquist coefficient is zeroed: `-i sgn(k)` at `j = -n/2` would make
    /// it purely imaginary and break realness.
    pub fn hilbert(&self) -> SpectralField {
        let nyq = -((self.grid.n_points / 2) as i64);
        self.apply_multiplier(|j, k| {
            if j == nyq {
                Complex64::default()
            } else {
                Complex64::new(0.0, -signum0(k))
            }
        })
    }

    /// Fractional derivative `D^s`, multiplier `|k|^s`.
    pub fn frac_deriv(&self, s: f64) -> Result<SpectralField> {
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::arg("s", format!("order must be >= 0, got {s}")));
        }
        if s == 0.0 {
            return Ok(self.clone());
        }
        Ok(self.apply_multiplier(|_, k| Complex64::new(k.abs().powf(s), 0.0)))
    }

    /// Spatial derivative, multiplier `i k` with the Nyquist mode zeroed.
    pub fn dx(&self) -> SpectralField {
        let nyq = -((self.grid.n_points / 2) as i64);
        self.apply_multiplier(|j, k| {
            if j == nyq {
                Complex64::default()
            } else {
                Complex64::new(0.0, k)
            }
        })
    }

    /// Two-thirds rule: zero every mode with `|j| > floor(n/3)`.
    pub fn dealias(&self) -> SpectralField {
        let mut out = self.clone();
        dealias_in_place(&self.grid, &mut out.coeffs);
        out
    }

    fn check_same_grid(&self, other: &SpectralField) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `self + alpha * other`.
    pub fn axpy(&self, alpha: f64, other: &SpectralField) -> Result<SpectralField> {
        self.check_same_grid(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b * alpha)
            .collect();
        Ok(SpectralField::from_raw(Arc::clone(&self.grid), coeffs))
    }

    pub fn scale(&self, alpha: f64) -> SpectralField {
        let coeffs = self.coeffs.iter().map(|c| c * alpha).collect();
        SpectralField::from_raw(Arc::clone(&self.grid), coeffs)
    }

    /// Largest coefficient-wise modulus of `self - other`.
    pub fn max_diff(&self, other: &SpectralField) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }

    /// Restricts or zero-pads onto another grid with the same period.
    pub fn resample(&self, target: Arc<Grid>) -> Result<SpectralField> {
        if target.length != self.grid.length {
            return Err(Error::GridMismatch);
        }
        let mut coeffs = vec![Complex64::default(); target.n_points];
        let half = (self.grid.n_points.min(target.n_points) / 2) as i64;
        // Nyquist of either grid is dropped.
        for j in (1 - half)..half {
            if let (Some(src), Some(dst)) = (self.grid.slot(j), target.slot(j)) {
                coeffs[dst] = self.coeffs[src];
            }
        }
        Ok(SpectralField::from_raw(target, coeffs))
    }
}

pub(crate) fn dealias_in_place(grid: &Grid, coeffs: &mut [Complex64]) {
    let cutoff = grid.dealias_cutoff();
    for (c, &j) in coeffs.iter_mut().zip(&grid.indices) {
        if j.abs() > cutoff {
            *c = Complex64::default();
        }
    }
}

fn signum0(k: f64) -> f64 {
    if k > 0.0 {
        1.0
    } else if k < 0.0 {
        -1.0
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize, l: f64) -> Arc<Grid> {
        Arc::new(Grid::new(n, l).unwrap())
    }

    #[test]
    fn grid_wavenumbers_follow_fft_order() {
        let g = grid(8, 2.0 * PI);
        assert_eq!(g.mode_indices(), &[0, 1, 2, 3, -4, -3, -2, -1]);
        for (&j, &k) in g.mode_indices().iter().zip(g.wavenumbers()) {
            assert!((k - j as f64).abs() < 1e-15);
        }
        let g = grid(8, PI);
        assert!((g.wavenumbers()[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn grid_rejects_bad_input() {
        assert!(matches!(Grid::new(7, 2.0 * PI), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::new(6, 2.0 * PI), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::new(8, 0.0), Err(Error::InvalidGrid(_))));
        assert!(matches!(Grid::new(8, -1.0), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn collocation_points() {
        let g = grid(8, 4.0);
        assert_eq!(g.points(), vec![0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5]);
    }

    #[test]
    fn constant_and_cosine_coefficients() {
        let g = grid(16, 2.0 * PI);
        let c = RealField::from_fn(g.clone(), |_| 3.0).unwrap().forward().unwrap();
        assert!((c.mode(0) - Complex64::new(3.0, 0.0)).norm() < 1e-15);
        assert!(c.coeffs()[1..].iter().all(|z| z.norm() < 1e-15));

        let c = RealField::from_fn(g, f64::cos).unwrap().forward().unwrap();
        assert!((c.mode(1) - 0.5).norm() < 1e-15);
        assert!((c.mode(-1) - 0.5).norm() < 1e-15);
        let rest: f64 = c
            .coeffs()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 1 && *i != 15)
            .map(|(_, z)| z.norm())
            .fold(0.0, f64::max);
        assert!(rest < 1e-15);
    }

    #[test]
    fn non_finite_rejected() {
        let g = grid(8, 1.0);
        assert!(RealField::new(g.clone(), vec![f64::NAN; 8]).is_err());
        let mut coeffs = vec![Complex64::default(); 8];
        coeffs[2] = Complex64::new(f64::INFINITY, 0.0);
        assert!(SpectralField::new(g, coeffs).is_err());
    }

    #[test]
    fn hilbert_single_modes() {
        let g = grid(16, 2.0 * PI);
        let cos = RealField::from_fn(g.clone(), f64::cos).unwrap().forward().unwrap();
        let h = cos.hilbert().inverse();
        for (x, v) in g.points().iter().zip(h.samples()) {
            assert!((v - x.sin()).abs() < 1e-14);
        }
        let sin = RealField::from_fn(g.clone(), f64::sin).unwrap().forward().unwrap();
        let h = sin.hilbert().inverse();
        for (x, v) in g.points().iter().zip(h.samples()) {
            assert!((v + x.cos()).abs() < 1e-14);
        }
        let five = RealField::from_fn(g, |_| 5.0).unwrap().forward().unwrap();
        assert!(five.hilbert().coeffs().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn frac_deriv_and_dx_single_modes() {
        let g = grid(16, 2.0 * PI);
        let f = RealField::from_fn(g.clone(), |x| (2.0 * x).cos())
            .unwrap()
            .forward()
            .unwrap();
        let half = f.frac_deriv(0.5).unwrap().inverse();
        let one = f.frac_deriv(1.0).unwrap().inverse();
        for ((x, a), b) in g.points().iter().zip(half.samples()).zip(one.samples()) {
            assert!((a - 2f64.sqrt() * (2.0 * x).cos()).abs() < 1e-14);
            assert!((b - 2.0 * (2.0 * x).cos()).abs() < 1e-14);
        }
        assert_eq!(f.frac_deriv(0.0).unwrap(), f);
        assert!(f.frac_deriv(-0.5).is_err());

        let cos = RealField::from_fn(g.clone(), f64::cos).unwrap().forward().unwrap();
        let d = cos.dx().inverse();
        for (x, v) in g.points().iter().zip(d.samples()) {
            assert!((v + x.sin()).abs() < 1e-14);
        }
        let c = RealField::from_fn(g, |_| 2.5).unwrap().forward().unwrap();
        assert!(c.dx().coeffs().iter().all(|z| z.norm() == 0.0));
    }

    #[test]
    fn dx_and_hilbert_zero_nyquist() {
        let g = grid(8, 2.0 * PI);
        let alt = RealField::from_fn(g, |x| (4.0 * x).cos()).unwrap().forward().unwrap();
        assert!((alt.mode(-4).re - 1.0).abs() < 1e-14);
        assert_eq!(alt.dx().mode(-4), Complex64::default());
        assert_eq!(alt.hilbert().mode(-4), Complex64::default());
    }

    #[test]
    fn dealias_cutoff_rule() {
        let g = grid(12, 2.0 * PI);
        let f = SpectralField::from_modes(
            g,
            &[(4, Complex64::new(1.0, 0.5)), (5, Complex64::new(0.3, -0.2))],
        )
        .unwrap();
        let d = f.dealias();
        assert_eq!(d.mode(5), Complex64::default());
        assert_eq!(d.mode(-5), Complex64::default());
        assert_eq!(d.mode(4), f.mode(4));
        assert_eq!(d.mode(-4), f.mode(-4));
        assert_eq!(d.dealias(), d);
    }

    #[test]
    fn resample_round_trip() {
        let g = grid(16, 2.0 * PI);
        let fine = grid(32, 2.0 * PI);
        let f = SpectralField::from_modes(g.clone(), &[(3, Complex64::new(0.2, 0.7))]).unwrap();
        let up = f.resample(fine).unwrap();
        assert_eq!(up.mode(3), f.mode(3));
        assert_eq!(up.resample(g).unwrap(), f);
    }
}

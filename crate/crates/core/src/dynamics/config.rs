use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::mms::Forcing;
use crate::error::{Error, Result};
use crate::spectral::{Grid, RealField, SpectralField, MIN_POINTS};

/// How the time step is chosen.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimeStep {
    /// Fixed step, rounded down so that an integer number of steps lands on `t_final`.
    Fixed(f64),
    /// `dt = cfl / max_j |Im lambda(k_j)|`.
    Cfl(f64),
}

impl Default for TimeStep {
    fn default() -> Self {
        TimeStep::Cfl(1.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// `cos(2 pi x / L)`, i.e. `cos x` on a `2 pi` box.
    Cosine,
    /// `cos(2 pi x / L) + 0.5 cos(4 pi x / L)`.
    TwoMode,
    /// `a / (1 + ((x - L/2)/w)^2)` with the mean removed.
    Lump { amplitude: f64, width: f64 },
    /// Coefficients `(j, c_j)` for `j >= 0`; negative modes follow by symmetry.
    Coefficients(Vec<(i64, Complex64)>),
}

impl InitialCondition {
    pub fn zero() -> Self {
        InitialCondition::Coefficients(Vec::new())
    }

    /// Fourier coefficients on `grid`. The Nyquist mode is always removed.
    pub fn to_spectral(&self, grid: &Arc<Grid>) -> Result<SpectralField> {
        let kappa = 2.0 * PI / grid.length();
        let mut field = match self {
            InitialCondition::Cosine => {
                RealField::from_fn(grid.clone(), |x| (kappa * x).cos())?.forward()?
            }
            InitialCondition::TwoMode => RealField::from_fn(grid.clone(), |x| {
                (kappa * x).cos() + 0.5 * (2.0 * kappa * x).cos()
            })?
            .forward()?,
            InitialCondition::Lump { amplitude, width } => {
                let centre = 0.5 * grid.length();
                let mut f = RealField::from_fn(grid.clone(), |x| {
                    let z = (x - centre) / width;
                    amplitude / (1.0 + z * z)
                })?
                .forward()?;
                f.coeffs_mut()[0] = Complex64::default();
                f
            }
            InitialCondition::Coefficients(modes) => {
                SpectralField::from_modes(grid.clone(), modes)?
            }
        };
        let nyq = grid.nyquist_index();
        field.coeffs_mut()[nyq] = Complex64::default();
        Ok(field)
    }

    fn validate(&self, n_points: usize) -> Result<()> {
        match self {
            InitialCondition::Lump { amplitude, width } => {
                if !amplitude.is_finite() {
                    return Err(Error::config("lump_amplitude", "must be finite"));
                }
                if !(width.is_finite() && *width > 0.0) {
                    return Err(Error::config("lump_width", "must be positive"));
                }
            }
            InitialCondition::Coefficients(modes) => {
                let half = (n_points / 2) as i64;
                for (j, c) in modes {
                    if *j < 0 || *j >= half {
                        return Err(Error::config(
                            "initial_condition",
                            format!("mode {j} outside 0..{half}"),
                        ));
                    }
                    if !(c.re.is_finite() && c.im.is_finite()) {
                        return Err(Error::config(
                            "initial_condition",
                            format!("coefficient of mode {j} is not finite"),
                        ));
                    }
                }
            }
            InitialCondition::Cosine | InitialCondition::TwoMode => {}
        }
        Ok(())
    }
}

/// Full parameterization of one simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Dissipation coefficient; zero selects the pure Benjamin-Ono equation.
    pub epsilon: f64,
    pub n_points: usize,
    pub length: f64,
    pub t_final: f64,
    pub time_step: TimeStep,
    pub initial_condition: InitialCondition,
    /// Apply the two-thirds rule to the quadratic product.
    pub dealias: bool,
    pub snapshot_stride: usize,
    pub forcing: Option<Forcing>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            epsilon: 0.0,
            n_points: 256,
            length: 2.0 * PI,
            t_final: 1.0,
            time_step: TimeStep::default(),
            initial_condition: InitialCondition::Cosine,
            dealias: true,
            snapshot_stride: 100,
            forcing: None,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon >= 0.0) {
            return Err(Error::config(
                "epsilon",
                format!("must be finite and >= 0, got {}", self.epsilon),
            ));
        }
        if !self.n_points.is_multiple_of(2) || self.n_points < MIN_POINTS {
            return Err(Error::config(
                "n_points",
                format!("must be even and >= {MIN_POINTS}, got {}", self.n_points),
            ));
        }
        if !(self.length.is_finite() && self.length > 0.0) {
            return Err(Error::config("length", "must be positive and finite"));
        }
        if !(self.t_final.is_finite() && self.t_final > 0.0) {
            return Err(Error::config("t_final", "must be positive and finite"));
        }
        match self.time_step {
            TimeStep::Fixed(dt) if !(dt.is_finite() && dt > 0.0) => {
                return Err(Error::config("dt", "must be positive and finite"));
            }
            TimeStep::Cfl(c) if !(c.is_finite() && c > 0.0) => {
                return Err(Error::config("cfl", "must be positive and finite"));
            }
            _ => {}
        }
        if self.snapshot_stride == 0 {
            return Err(Error::config("snapshot_stride", "must be >= 1"));
        }
        if let Some(forcing) = &self.forcing {
            forcing.check_domain(self.length)?;
        }
        self.initial_condition.validate(self.n_points)
    }

    pub fn grid(&self) -> Result<Arc<Grid>> {
        Ok(Arc::new(Grid::new(self.n_points, self.length)?))
    }

    /// Requested step before rounding to an integer number of steps.
    pub fn nominal_dt(&self) -> f64 {
        match self.time_step {
            TimeStep::Fixed(dt) => dt,
            TimeStep::Cfl(cfl) => {
                // largest |Im lambda| on the grid, Nyquist excluded
                let kmax = 2.0 * PI * ((self.n_points / 2 - 1) as f64) / self.length;
                cfl / (kmax * kmax)
            }
        }
    }

    /// Number of steps and the uniform step that reaches `t_final` exactly.
    pub fn resolved_steps(&self) -> (usize, f64) {
        let nominal = self.nominal_dt();
        let ratio = self.t_final / nominal;
        let mut steps = ratio.round() as usize;
        if (ratio - steps as f64).abs() > 1e-9 * ratio.max(1.0) {
            steps = ratio.ceil() as usize;
        }
        let steps = steps.max(1);
        (steps, self.t_final / steps as f64)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation_names_fields() {
        let field_of = |cfg: SimConfig| match cfg.validate() {
            Err(Error::Config { field, .. }) => field,
            other => panic!("expected config error, got {other:?}"),
        };
        let base = SimConfig::default();
        assert!(base.validate().is_ok());
        assert_eq!(field_of(SimConfig { epsilon: -1.0, ..base.clone() }), "epsilon");
        assert_eq!(field_of(SimConfig { n_points: 7, ..base.clone() }), "n_points");
        assert_eq!(field_of(SimConfig { length: 0.0, ..base.clone() }), "length");
        assert_eq!(field_of(SimConfig { t_final: -1.0, ..base.clone() }), "t_final");
        assert_eq!(
            field_of(SimConfig { time_step: TimeStep::Fixed(0.0), ..base.clone() }),
            "dt"
        );
        assert_eq!(
            field_of(SimConfig { snapshot_stride: 0, ..base.clone() }),
            "snapshot_stride"
        );
        assert_eq!(
            field_of(SimConfig {
                initial_condition: InitialCondition::Coefficients(vec![(128, Complex64::new(1.0, 0.0))]),
                ..base.clone()
            }),
            "initial_condition"
        );
        assert_eq!(
            field_of(SimConfig {
                initial_condition: InitialCondition::Lump { amplitude: 1.0, width: 0.0 },
                ..base
            }),
            "lump_width"
        );
    }

    #[test]
    fn step_resolution_lands_on_t_final() {
        let cfg = SimConfig {
            t_final: 1.0,
            time_step: TimeStep::Fixed(1e-3),
            ..SimConfig::default()
        };
        let (n, dt) = cfg.resolved_steps();
        assert_eq!(n, 1000);
        assert!((dt - 1e-3).abs() < 1e-18);

        let cfg = SimConfig {
            t_final: 1.0,
            time_step: TimeStep::Fixed(0.3),
            ..SimConfig::default()
        };
        let (n, dt) = cfg.resolved_steps();
        assert_eq!(n, 4);
        assert_eq!(dt, 0.25);
    }

    #[test]
    fn presets() {
        let grid = Arc::new(Grid::new(32, 2.0 * PI).unwrap());
        let two = InitialCondition::TwoMode.to_spectral(&grid).unwrap();
        assert!((two.mode(1).re - 0.5).abs() < 1e-15);
        assert!((two.mode(2).re - 0.25).abs() < 1e-15);
        let lump = InitialCondition::Lump { amplitude: 1.0, width: 0.5 }
            .to_spectral(&grid)
            .unwrap();
        assert_eq!(lump.mean(), 0.0);
        assert_eq!(lump.mode(-16), Complex64::default());
        let zero = InitialCondition::zero().to_spectral(&grid).unwrap();
        assert!(zero.coeffs().iter().all(|c| *c == Complex64::default()));
    }
}

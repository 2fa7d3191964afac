use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use super::config::InitialCondition;
use crate::error::{Error, Result};
use crate::spectral::{Grid, RealField};

/// Built-in manufactured solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Forcing {
    /// `u(x, t) = sin(x - t)` on a `2 pi` box.
    TravelingSine,
}

impl Forcing {
    pub const TRAVELING_SINE: &'static str = "traveling-sine";

    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag {
            Self::TRAVELING_SINE => Ok(Forcing::TravelingSine),
            other => Err(Error::config("forcing", format!("unknown tag `{other}`"))),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Forcing::TravelingSine => Self::TRAVELING_SINE,
        }
    }

    pub(crate) fn check_domain(&self, length: f64) -> Result<()> {
        if (length - 2.0 * PI).abs() > 1e-12 {
            return Err(Error::config(
                "forcing",
                format!("`{}` requires length = 2 pi", self.tag()),
            ));
        }
        Ok(())
    }

    pub fn exact(&self, x: f64, t: f64) -> f64 {
        match self {
            Forcing::TravelingSine => (x - t).sin(),
        }
    }

    /// The manufactured solution at `t = 0`.
    pub fn initial_condition(&self) -> InitialCondition {
        match self {
            Forcing::TravelingSine => {
                InitialCondition::Coefficients(vec![(1, Complex64::new(0.0, -0.5))])
            }
        }
    }

    /// Source term `f` such that `u_t + H u_xx - eps u_xx - u u_x = f` holds
    /// for the exact solution.
    ///
    /// For `sin(x - t)`: `u_t = -cos`, `H u_xx = H(-sin) = cos`, so the
    /// dispersive terms cancel and `f = eps sin(x - t) - sin(2(x - t))/2`.
    pub fn source(&self, x: f64, t: f64, epsilon: f64) -> f64 {
        match self {
            Forcing::TravelingSine => {
                let phase = x - t;
                epsilon * phase.sin() - 0.5 * (2.0 * phase).sin()
            }
        }
    }
}

/// Samples the manufactured source term for `tag` on `grid` at time `t`.
pub fn mms_forcing(tag: &str, t: f64, grid: &Arc<Grid>, epsilon: f64) -> Result<RealField> {
    let forcing = Forcing::from_tag(tag)?;
    forcing.check_domain(grid.length())?;
    RealField::from_fn(grid.clone(), |x| forcing.source(x, t, epsilon))
}

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid_spectral::{GridFunction, GridSpec};
use crate::leaves::UnstableCone;

/// Half-space `{x . u > offset}` or strip `{offset < x . u < offset + width}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum IndicatorShape {
    HalfSpace { offset: f64 },
    Strip { offset: f64, width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IndicatorSpec {
    pub normal: Vec<f64>,
    pub shape: IndicatorShape,
    /// Mollification width; 0 gives the sampled sharp indicator.
    pub epsilon: f64,
}

impl IndicatorSpec {
    pub fn strip(normal: Vec<f64>, width: f64, epsilon: f64) -> Self {
        IndicatorSpec { normal, shape: IndicatorShape::Strip { offset: 0.0, width }, epsilon }
    }

    pub fn half_space(normal: Vec<f64>, epsilon: f64) -> Self {
        IndicatorSpec { normal, shape: IndicatorShape::HalfSpace { offset: 0.0 }, epsilon }
    }

    pub fn validate(&self, grid: &GridSpec) -> Result<()> {
        if self.normal.len() != grid.d() {
            return Err(Error::InvalidParameter("indicator normal has wrong length".into()));
        }
        let norm = self.normal.iter().map(|x| x * x).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("indicator normal has length {norm}, not 1")));
        }
        if !(self.epsilon >= 0.0 && self.epsilon.is_finite()) {
            return Err(Error::InvalidParameter("mollification width must be >= 0".into()));
        }
        let half = grid.box_length() / 2.0;
        let reach = match self.shape {
            IndicatorShape::HalfSpace { offset } => offset.abs(),
            IndicatorShape::Strip { offset, width } => {
                if !(width > 0.0) {
                    return Err(Error::InvalidParameter("strip width must be positive".into()));
                }
                offset.abs().max((offset + width).abs())
            }
        };
        if reach + self.epsilon >= half {
            return Err(Error::InvalidParameter(format!("indicator boundary at {reach} does not fit in the box")));
        }
        Ok(())
    }

    /// Boundary normal outside the cone.
    pub fn is_transversal(&self, cone: &UnstableCone) -> Result<bool> {
        Ok(!cone.contains_direction(&self.normal)?)
    }

    /// Boundary positions along the normal.
    pub fn boundaries(&self) -> Vec<f64> {
        match self.shape {
            IndicatorShape::HalfSpace { offset } => vec![offset],
            IndicatorShape::Strip { offset, width } => vec![offset, offset + width],
        }
    }

    /// Indicator value as a function of `tau = x . u`.
    pub fn profile(&self, tau: f64, tie: f64) -> f64 {
        match self.shape {
            IndicatorShape::HalfSpace { offset } => smooth_step(tau - offset, self.epsilon, tie),
            IndicatorShape::Strip { offset, width } => {
                smooth_step(tau - offset, self.epsilon, tie) - smooth_step(tau - offset - width, self.epsilon, tie)
            }
        }
    }
}

/// Sharp step convolved with a C-infinity bump supported in `[-eps, eps]`; for `eps = 0` the
/// sharp step, equal to 1/2 within `tie` of the jump.
pub fn smooth_step(tau: f64, eps: f64, tie: f64) -> f64 {
    if eps == 0.0 {
        return if tau.abs() <= tie {
            0.5
        } else if tau > 0.0 {
            1.0
        } else {
            0.0
        };
    }
    let u = 0.5 * (tau / eps + 1.0);
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / u).exp();
    let b = (-1.0 / (1.0 - u)).exp();
    a / (a + b)
}

/// Sample the indicator; depends on `x . u` only.
pub fn make_indicator(spec: &IndicatorSpec, grid: &GridSpec) -> Result<GridFunction> {
    spec.validate(grid)?;
    let tie = 1e-9 * grid.h();
    Ok(GridFunction::from_real_fn(*grid, |x| {
        let tau: f64 = x.iter().zip(&spec.normal).map(|(a, b)| a * b).sum();
        spec.profile(tau, tie)
    }))
}

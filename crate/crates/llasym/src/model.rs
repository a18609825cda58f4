//! Bare quantities of the repulsive Bose gas.

use crate::error::{Error, Result};
use num_complex::Complex64;

/// Coupling `c` and chemical potential `h`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub c: f64,
    pub h: f64,
}

impl ModelParams {
    pub fn new(c: f64, h: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0) {
            return Err(Error::InvalidParam(format!("c must be positive, got {c}")));
        }
        if !(h.is_finite() && h > 0.0) {
            return Err(Error::InvalidParam(format!("h must be positive, got {h}")));
        }
        Ok(Self { c, h })
    }
}

/// Bare momentum, energy and their combination at fixed `t/x`.
#[derive(Debug, Clone, Copy)]
pub struct BareDispersion {
    pub params: ModelParams,
}

impl BareDispersion {
    pub fn p0(&self, lambda: f64) -> f64 {
        lambda
    }

    pub fn eps0(&self, lambda: f64) -> f64 {
        lambda * lambda - self.params.h
    }

    pub fn u0(&self, lambda: f64, ratio_t_over_x: f64) -> f64 {
        bare_u0(lambda, ratio_t_over_x, &self.params)
    }
}

/// Bare phase for real argument, `2 atan(lambda / c)`.
pub fn bare_phase(lambda: f64, params: &ModelParams) -> f64 {
    2.0 * (lambda / params.c).atan()
}

/// Bare phase `i ln((ic + z)/(ic - z))` on the principal branch.
pub fn bare_phase_c(z: Complex64, params: &ModelParams) -> Result<Complex64> {
    let c = params.c;
    if z.im.abs() >= c {
        return Err(Error::Domain(format!("{z}"), c));
    }
    Ok(theta_c(z, c))
}

/// `K(lambda) = 2c / (lambda^2 + c^2)`.
pub fn lieb_kernel(lambda: f64, params: &ModelParams) -> f64 {
    kernel(lambda, params.c)
}

pub fn lieb_kernel_c(z: Complex64, params: &ModelParams) -> Result<Complex64> {
    let c = params.c;
    if z.im.abs() >= c {
        return Err(Error::Domain(format!("{z}"), c));
    }
    Ok(kernel_c(z, c))
}

pub fn bare_u0(lambda: f64, ratio_t_over_x: f64, params: &ModelParams) -> f64 {
    lambda - ratio_t_over_x * (lambda * lambda - params.h)
}

// Unchecked versions used in inner loops.

#[inline]
pub(crate) fn theta(x: f64, c: f64) -> f64 {
    2.0 * (x / c).atan()
}

#[inline]
pub(crate) fn theta_c(z: Complex64, c: f64) -> Complex64 {
    if z.im == 0.0 {
        return Complex64::new(theta(z.re, c), 0.0);
    }
    let ic = Complex64::new(0.0, c);
    Complex64::i() * ((ic + z) / (ic - z)).ln()
}

#[inline]
pub(crate) fn kernel(x: f64, c: f64) -> f64 {
    2.0 * c / (x * x + c * c)
}

#[inline]
pub(crate) fn kernel_c(z: Complex64, c: f64) -> Complex64 {
    2.0 * c / (z * z + c * c)
}

#[inline]
pub(crate) fn kernel_d(x: f64, c: f64) -> f64 {
    let d = x * x + c * c;
    -4.0 * c * x / (d * d)
}

#[inline]
pub(crate) fn kernel_d_c(z: Complex64, c: f64) -> Complex64 {
    let d = z * z + c * c;
    -4.0 * c * z / (d * d)
}

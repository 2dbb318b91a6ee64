//! Stator-flux and torque observer.
//!
//! The flux linkage is the discrete integral of the commanded terminal
//! voltage minus the resistive drop, matching what a digital controller can
//! actually compute each period. Torque follows from the cross product of
//! flux and measured current.

use crate::plant::{wrap_two_pi, Sector};
use crate::SimError;
use std::f64::consts::PI;

/// Observer state: stator flux linkage in the stationary frame, its polar
/// decomposition, and the torque estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxEstimate {
    pub lambda_alpha: f64,
    pub lambda_beta: f64,
    /// Flux magnitude, Wb.
    pub lambda_mag: f64,
    /// Angle and sector; `None` while the flux vector sits at the origin.
    pub polar: Option<FluxPolar>,
    /// Estimated electromagnetic torque, N m.
    pub torque: f64,
}

/// Polar decomposition of a nonzero flux vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxPolar {
    /// Flux angle in `[0, 2*pi)`.
    pub theta: f64,
    /// Sixty-degree sector containing `theta`.
    pub sector: Sector,
}

impl FluxEstimate {
    /// Observer state for a machine at rest with no flux.
    pub fn at_rest() -> Self {
        FluxEstimate {
            lambda_alpha: 0.0,
            lambda_beta: 0.0,
            lambda_mag: 0.0,
            polar: None,
            torque: 0.0,
        }
    }
}

/// Magnitude, angle, and sector of a flux vector.
///
/// The angle and sector are undefined for the zero vector and reported as
/// `None`; callers must not substitute defaults for them.
pub fn flux_polar(lambda_alpha: f64, lambda_beta: f64) -> (f64, Option<FluxPolar>) {
    if lambda_alpha == 0.0 && lambda_beta == 0.0 {
        return (0.0, None);
    }
    let mag = (lambda_alpha * lambda_alpha + lambda_beta * lambda_beta).sqrt();
    let theta = wrap_two_pi(lambda_beta.atan2(lambda_alpha));
    (mag, Some(FluxPolar { theta, sector: flux_sector(theta) }))
}

/// Sector of a flux angle.
///
/// Sector k covers [(k-1)*60 - 30, (k-1)*60 + 30) degrees, half-open, so the
/// active vector Vk sits at the center of sector k.
pub fn flux_sector(theta: f64) -> Sector {
    let shifted = wrap_two_pi(theta + PI / 6.0);
    let k = ((shifted / (PI / 3.0)) as u8).min(5);
    Sector::new(k + 1).unwrap()
}

/// One explicit-Euler update of the flux integral:
/// `lambda += (v - Rs*i) * dt`, refreshing magnitude, angle, sector, and the
/// torque estimate from the supplied current sample.
pub fn update_flux(
    est: &FluxEstimate,
    v_alpha: f64,
    v_beta: f64,
    i_alpha: f64,
    i_beta: f64,
    rs: f64,
    dt: f64,
    pole_pairs: u32,
) -> Result<FluxEstimate, SimError> {
    assert!(dt > 0.0, "update_flux requires dt > 0");
    let finite = v_alpha.is_finite()
        && v_beta.is_finite()
        && i_alpha.is_finite()
        && i_beta.is_finite()
        && est.lambda_alpha.is_finite()
        && est.lambda_beta.is_finite();
    if !finite {
        return Err(SimError::NonFinite("update_flux input"));
    }
    let lambda_alpha = est.lambda_alpha + (v_alpha - rs * i_alpha) * dt;
    let lambda_beta = est.lambda_beta + (v_beta - rs * i_beta) * dt;
    let (lambda_mag, polar) = flux_polar(lambda_alpha, lambda_beta);
    Ok(FluxEstimate {
        lambda_alpha,
        lambda_beta,
        lambda_mag,
        polar,
        torque: estimate_torque(lambda_alpha, lambda_beta, i_alpha, i_beta, pole_pairs),
    })
}

/// Electromagnetic torque from flux linkage and current:
/// `Te = (3/2) * p * (lambda_alpha*i_beta - lambda_beta*i_alpha)`.
pub fn estimate_torque(
    lambda_alpha: f64,
    lambda_beta: f64,
    i_alpha: f64,
    i_beta: f64,
    pole_pairs: u32,
) -> f64 {
    1.5 * pole_pairs as f64 * (lambda_alpha * i_beta - lambda_beta * i_alpha)
}

//! Fixed points of the stroboscopic map and their linear stability.

use serde::{Deserialize, Serialize};

use super::{map_jacobian, wrap_phase, MeanFieldSettings, PhasePoint};
use crate::error::{Error, Result};
use crate::model::MeanFieldParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stability {
    /// Multipliers `exp(+-i rotation)`.
    Elliptic { rotation: f64 },
    /// Real multipliers `lambda` and `1 / lambda`.
    Hyperbolic { multipliers: [f64; 2] },
    Parabolic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PeriodicOrbit {
    pub fixed_point: PhasePoint,
    /// Jacobian of the map at the fixed point, rows and columns `(p, phi)`.
    pub monodromy: [[f64; 2]; 2],
    pub trace: f64,
    pub determinant: f64,
    pub stability: Stability,
    pub iterations: usize,
    /// Largest coordinate of `P(x) - x` at the returned point.
    pub residual: f64,
}

impl PeriodicOrbit {
    pub fn is_elliptic(&self) -> bool {
        matches!(self.stability, Stability::Elliptic { .. })
    }
}

fn classify(trace: f64, det: f64) -> Stability {
    let half = 0.5 * trace;
    if trace.abs() < 2.0 {
        Stability::Elliptic { rotation: (half / det.sqrt()).clamp(-1.0, 1.0).acos() }
    } else if trace.abs() > 2.0 {
        let root = (half * half - det).max(0.0).sqrt();
        Stability::Hyperbolic { multipliers: [half + root, half - root] }
    } else {
        Stability::Parabolic
    }
}

fn displacement(x: &PhasePoint, image: &PhasePoint) -> [f64; 2] {
    [image.p - x.p, wrap_phase(image.phi - x.phi)]
}

/// Newton iteration on `P(x) - x` with the finite-difference Jacobian.
pub fn find_periodic_orbit(
    guess: &PhasePoint,
    params: &MeanFieldParams,
    settings: &MeanFieldSettings,
) -> Result<PeriodicOrbit> {
    params.validate()?;
    let mut x = PhasePoint::new(guess.p, guess.phi);
    let mut residual = f64::INFINITY;
    for iteration in 0..=settings.max_iter {
        let (image, m) = map_jacobian(&x, params, settings)?;
        let f = displacement(&x, &image);
        residual = f[0].abs().max(f[1].abs());
        if residual < settings.newton_tol {
            let trace = m[0][0] + m[1][1];
            let determinant = m[0][0] * m[1][1] - m[0][1] * m[1][0];
            return Ok(PeriodicOrbit {
                fixed_point: x,
                monodromy: m,
                trace,
                determinant,
                stability: classify(trace, determinant),
                iterations: iteration,
                residual,
            });
        }
        if iteration == settings.max_iter {
            break;
        }
        // (M - 1) dx = -f
        let a = [[m[0][0] - 1.0, m[0][1]], [m[1][0], m[1][1] - 1.0]];
        let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
        if det.abs() < 1e-12 {
            return Err(Error::JacobianSingular { det });
        }
        let dp = (-f[0] * a[1][1] + f[1] * a[0][1]) / det;
        let dphi = (-f[1] * a[0][0] + f[0] * a[1][0]) / det;
        // damp steps that would leave the phase plane
        let mut scale = 1.0;
        while (x.p + scale * dp).abs() > 1.0 && scale > 1e-6 {
            scale *= 0.5;
        }
        x = PhasePoint::new(x.p + scale * dp, x.phi + scale * dphi);
    }
    Err(Error::NoConvergence { iterations: settings.max_iter, residual })
}

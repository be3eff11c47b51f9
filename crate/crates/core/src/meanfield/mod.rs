//! Mean-field limit: the two-mode Gross-Pitaevskii system and its driven
//! pendulum form in the imbalance-phase plane `(p, phi)`.
//!
//! Trajectories are integrated in the pendulum chart and handed over to the
//! amplitude chart when they approach the poles `|p| = 1`, where the phase
//! equation is singular.

mod curve;
mod ebk;
mod orbit;

pub use curve::{trace_invariant_curve, ActionMap, CurveSettings, InvariantCurve};
pub use ebk::{curve_family, ebk_quantize, hbar_eff, quantize_island, scan_island, EbkOutcome, EbkResult, EbkSettings, IslandScan};
pub use orbit::{find_periodic_orbit, PeriodicOrbit, Stability};

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::MeanFieldParams;
use crate::ode::{Control, Dop853};

/// Wraps a phase into `[-pi, pi)`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi - TAU * ((phi + PI) / TAU).floor();
    if w >= PI {
        w - TAU
    } else {
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhasePoint {
    /// Population imbalance `|c1|^2 - |c2|^2`.
    pub p: f64,
    /// Relative phase `arg c2 - arg c1` in `[-pi, pi)`.
    pub phi: f64,
}

impl PhasePoint {
    pub fn new(p: f64, phi: f64) -> Self {
        Self { p, phi: wrap_phase(phi) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldAmplitudes {
    pub c1: Complex64,
    pub c2: Complex64,
}

impl MeanFieldAmplitudes {
    /// Amplitudes with `c1` real and non-negative.
    pub fn from_phase_point(x: PhasePoint) -> Self {
        let p = x.p.clamp(-1.0, 1.0);
        Self {
            c1: Complex64::new((0.5 * (1.0 + p)).sqrt(), 0.0),
            c2: Complex64::from_polar((0.5 * (1.0 - p)).sqrt(), x.phi),
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.c1.norm_sqr() + self.c2.norm_sqr()
    }

    pub fn phase_point(&self) -> PhasePoint {
        PhasePoint::new(self.c1.norm_sqr() - self.c2.norm_sqr(), self.c2.arg() - self.c1.arg())
    }

    fn to_real(self) -> [f64; 4] {
        [self.c1.re, self.c1.im, self.c2.re, self.c2.im]
    }

    fn from_real(y: &[f64]) -> Self {
        Self { c1: Complex64::new(y[0], y[1]), c2: Complex64::new(y[2], y[3]) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldSettings {
    pub rtol: f64,
    pub atol: f64,
    /// `1 - p^2` below which the pendulum right-hand side refuses to evaluate.
    pub pole_guard: f64,
    /// `1 - p^2` below which trajectories continue in the amplitude chart.
    pub chart_switch: f64,
    /// Central-difference step of map Jacobians.
    pub fd_step: f64,
    pub newton_tol: f64,
    pub max_iter: usize,
}

impl Default for MeanFieldSettings {
    fn default() -> Self {
        Self { rtol: 1e-13, atol: 1e-15, pole_guard: 1e-12, chart_switch: 1e-6, fd_step: 1e-6, newton_tol: 1e-10, max_iter: 50 }
    }
}

impl MeanFieldSettings {
    fn solver(&self) -> Dop853 {
        Dop853::with_tolerances(self.rtol, self.atol)
    }
}

/// `(dc1/dtau, dc2/dtau)` of the two-mode Gross-Pitaevskii equations.
pub fn gpe_rhs(c: &MeanFieldAmplitudes, params: &MeanFieldParams, tau: f64) -> (Complex64, Complex64) {
    let f = params.drive(tau);
    let a = params.alpha;
    let i = Complex64::new(0.0, 1.0);
    let z1 = -0.5 * c.c2 + (2.0 * a * c.c1.norm_sqr() + f) * c.c1;
    let z2 = -0.5 * c.c1 + (2.0 * a * c.c2.norm_sqr() - f) * c.c2;
    (-i * z1, -i * z2)
}

fn gpe_rhs_real(params: &MeanFieldParams, tau: f64, y: &[f64], dy: &mut [f64]) {
    let (d1, d2) = gpe_rhs(&MeanFieldAmplitudes::from_real(y), params, tau);
    dy[0] = d1.re;
    dy[1] = d1.im;
    dy[2] = d2.re;
    dy[3] = d2.im;
}

/// Unchecked pendulum equations; non-finite beyond the poles.
fn pendulum_rhs_raw(params: &MeanFieldParams, tau: f64, y: &[f64], dy: &mut [f64]) {
    let (p, phi) = (y[0], y[1]);
    let root = (1.0 - p * p).sqrt();
    let (s, c) = phi.sin_cos();
    dy[0] = -root * s;
    dy[1] = 2.0 * params.alpha * p + p * c / root + 2.0 * params.drive(tau);
}

/// `(dp/dtau, dphi/dtau)` of the driven pendulum.
pub fn pendulum_rhs(x: &PhasePoint, params: &MeanFieldParams, tau: f64, pole_guard: f64) -> Result<(f64, f64)> {
    let gap = 1.0 - x.p * x.p;
    if gap < pole_guard {
        return Err(Error::PoleProximity { gap, guard: pole_guard });
    }
    let mut dy = [0.0; 2];
    pendulum_rhs_raw(params, tau, &[x.p, x.phi], &mut dy);
    Ok((dy[0], dy[1]))
}

/// Mean-field energy `alpha p^2 - sqrt(1 - p^2) cos(phi) + 2 p (mu/Omega) sin((omega/Omega) tau)`.
pub fn mf_energy(x: &PhasePoint, params: &MeanFieldParams, tau: f64) -> f64 {
    params.alpha * x.p * x.p - (1.0 - x.p * x.p).max(0.0).sqrt() * x.phi.cos() + 2.0 * x.p * params.drive(tau)
}

/// Integrates the amplitude equations from `tau0` to `tau1`.
pub fn integrate_gpe(
    c: &MeanFieldAmplitudes,
    params: &MeanFieldParams,
    settings: &MeanFieldSettings,
    tau0: f64,
    tau1: f64,
) -> Result<MeanFieldAmplitudes> {
    let mut y = c.to_real();
    settings.solver().integrate(
        |t, y, dy| gpe_rhs_real(params, t, y, dy),
        tau0,
        tau1,
        &mut y,
        false,
        |_, _| Control::Continue,
    )?;
    Ok(MeanFieldAmplitudes::from_real(&y))
}

/// Integrates the pendulum equations only, failing near the poles.
pub fn integrate_pendulum(
    x: &PhasePoint,
    params: &MeanFieldParams,
    settings: &MeanFieldSettings,
    tau0: f64,
    tau1: f64,
) -> Result<PhasePoint> {
    let mut y = [x.p, x.phi];
    let guard = settings.pole_guard;
    let stats = settings.solver().integrate(
        |t, y, dy| pendulum_rhs_raw(params, t, y, dy),
        tau0,
        tau1,
        &mut y,
        false,
        |_, y| if 1.0 - y[0] * y[0] < guard { Control::Stop } else { Control::Continue },
    )?;
    if stats.t_end != tau1 {
        return Err(Error::PoleProximity { gap: 1.0 - y[0] * y[0], guard });
    }
    Ok(PhasePoint::new(y[0], y[1]))
}

/// One period of the map for several points at once, integrated as one
/// system so that all of them share the step sequence and error control.
/// The whole batch moves to the amplitude chart as soon as any member
/// approaches a pole. Returned phases are not wrapped.
fn map_batch(xs: &[PhasePoint], params: &MeanFieldParams, settings: &MeanFieldSettings) -> Result<Vec<(f64, f64)>> {
    let period = params.period();
    let solver = settings.solver();
    let switch = settings.chart_switch;
    let near_pole = |y: &[f64]| y.chunks_exact(2).any(|x| 1.0 - x[0] * x[0] < switch);
    let mut pend: Vec<f64> = xs.iter().flat_map(|x| [x.p, x.phi]).collect();
    let mut tau = 0.0;
    if !near_pole(&pend) {
        let stats = solver.integrate(
            |t, y, dy| {
                for (yi, di) in y.chunks_exact(2).zip(dy.chunks_exact_mut(2)) {
                    pendulum_rhs_raw(params, t, yi, di);
                }
            },
            0.0,
            period,
            &mut pend,
            false,
            |_, y| if near_pole(y) { Control::Stop } else { Control::Continue },
        )?;
        tau = stats.t_end;
        if tau == period {
            return Ok(pend.chunks_exact(2).map(|x| (x[0], x[1])).collect());
        }
    }
    let mut amps: Vec<f64> = pend.chunks_exact(2).flat_map(|x| amplitudes_from_pendulum(x[0], x[1])).collect();
    solver.integrate(
        |t, y, dy| {
            for (yi, di) in y.chunks_exact(4).zip(dy.chunks_exact_mut(4)) {
                gpe_rhs_real(params, t, yi, di);
            }
        },
        tau,
        period,
        &mut amps,
        false,
        |_, _| Control::Continue,
    )?;
    Ok(amps
        .chunks_exact(4)
        .map(|y| {
            let c = MeanFieldAmplitudes::from_real(y);
            (c.c1.norm_sqr() - c.c2.norm_sqr(), c.c2.arg() - c.c1.arg())
        })
        .collect())
}

fn amplitudes_from_pendulum(p: f64, phi: f64) -> [f64; 4] {
    MeanFieldAmplitudes::from_phase_point(PhasePoint { p, phi }).to_real()
}

/// Image of `x` after one driving period, strobed at multiples of the period.
pub fn poincare_map(x: &PhasePoint, params: &MeanFieldParams, settings: &MeanFieldSettings) -> Result<PhasePoint> {
    let (p, phi) = map_batch(std::slice::from_ref(x), params, settings)?[0];
    Ok(PhasePoint::new(p, phi))
}

/// Central-difference Jacobian of the map, `J[i][j] = d x'_i / d x_j` with
/// coordinates ordered `(p, phi)`, together with the image of `x`. The four
/// displaced points are integrated together with `x`.
pub fn map_jacobian(
    x: &PhasePoint,
    params: &MeanFieldParams,
    settings: &MeanFieldSettings,
) -> Result<(PhasePoint, [[f64; 2]; 2])> {
    let h = settings.fd_step;
    let batch = [
        *x,
        PhasePoint { p: x.p + h, phi: x.phi },
        PhasePoint { p: x.p - h, phi: x.phi },
        PhasePoint { p: x.p, phi: x.phi + h },
        PhasePoint { p: x.p, phi: x.phi - h },
    ];
    let out = map_batch(&batch, params, settings)?;
    let mut jac = [[0.0; 2]; 2];
    for j in 0..2 {
        let (plus, minus) = (out[1 + 2 * j], out[2 + 2 * j]);
        jac[0][j] = (plus.0 - minus.0) / (2.0 * h);
        jac[1][j] = wrap_phase(plus.1 - minus.1) / (2.0 * h);
    }
    Ok((PhasePoint::new(out[0].0, out[0].1), jac))
}

/// Strobes of one seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectionOrbit {
    pub seed: PhasePoint,
    /// `points[k]` is the state after `k` periods; `points[0]` is the seed.
    pub points: Vec<PhasePoint>,
    /// Set when integration stopped before the requested iteration count.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoincareSection {
    pub params: MeanFieldParams,
    pub iterations: usize,
    pub orbits: Vec<SectionOrbit>,
}

pub fn iterate_map(
    seed: &PhasePoint,
    iterations: usize,
    params: &MeanFieldParams,
    settings: &MeanFieldSettings,
) -> SectionOrbit {
    let mut points = Vec::with_capacity(iterations + 1);
    let mut x = PhasePoint::new(seed.p, seed.phi);
    points.push(x);
    for _ in 0..iterations {
        match poincare_map(&x, params, settings) {
            Ok(next) => {
                x = next;
                points.push(x);
            }
            Err(e) => return SectionOrbit { seed: *seed, points, error: Some(e.to_string()) },
        }
    }
    SectionOrbit { seed: *seed, points, error: None }
}

/// Iterates every seed `iterations` times. Seeds run in parallel; the
/// output keeps seed order.
pub fn build_section(
    seeds: &[PhasePoint],
    iterations: usize,
    params: &MeanFieldParams,
    settings: &MeanFieldSettings,
) -> Result<PoincareSection> {
    params.validate()?;
    for s in seeds {
        if !(s.p.abs() <= 1.0) || !s.phi.is_finite() {
            return Err(Error::InvalidParameter { name: "seeds", reason: format!("seed ({}, {}) outside the phase plane", s.p, s.phi) });
        }
    }
    let orbits = seeds.par_iter().map(|s| iterate_map(s, iterations, params, settings)).collect();
    Ok(PoincareSection { params: *params, iterations, orbits })
}

/// Seeds on a `rows x cols` lattice of cell centres of the phase plane.
pub fn seed_grid(rows: usize, cols: usize) -> Vec<PhasePoint> {
    let mut seeds = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        let p = -1.0 + (i as f64 + 0.5) * 2.0 / rows as f64;
        for j in 0..cols {
            let phi = -PI + (j as f64 + 0.5) * TAU / cols as f64;
            seeds.push(PhasePoint::new(p, phi));
        }
    }
    seeds
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn paper() -> MeanFieldParams {
        MeanFieldParams::new(1.3, 0.41, 1.4).unwrap()
    }

    #[test]
    fn wrapping_is_half_open() {
        assert_eq!(wrap_phase(PI), -PI);
        assert_eq!(wrap_phase(-PI), -PI);
        assert_abs_diff_eq!(wrap_phase(3.0 * PI + 0.5), -PI + 0.5, epsilon = 1e-14);
        assert_eq!(wrap_phase(0.25), 0.25);
    }

    #[test]
    fn rhs_examples() {
        let params = paper();
        let c = MeanFieldAmplitudes { c1: Complex64::new(1.0, 0.0), c2: Complex64::new(0.0, 0.0) };
        let (d1, d2) = gpe_rhs(&c, &params, 0.0);
        // i dc1 = 2 alpha, i dc2 = -1/2
        assert_abs_diff_eq!((Complex64::i() * d1).re, 2.6, epsilon = 1e-15);
        assert_abs_diff_eq!((Complex64::i() * d2).re, -0.5, epsilon = 1e-15);
        assert_eq!(pendulum_rhs(&PhasePoint::new(0.0, 0.0), &params, 0.0, 1e-12).unwrap(), (0.0, 0.0));
        let (dp, _) = pendulum_rhs(&PhasePoint::new(0.0, PI / 2.0), &params, 0.0, 1e-12).unwrap();
        assert_abs_diff_eq!(dp, -1.0, epsilon = 1e-15);
        assert!(matches!(pendulum_rhs(&PhasePoint::new(1.0, 0.0), &params, 0.0, 1e-12), Err(Error::PoleProximity { .. })));
    }

    #[test]
    fn energy_examples() {
        let params = paper();
        assert_eq!(mf_energy(&PhasePoint::new(0.0, 0.0), &params, 0.0), -1.0);
        assert_eq!(mf_energy(&PhasePoint::new(1.0, 2.0), &params, 0.0), 1.3);
    }

    #[test]
    fn amplitudes_round_trip() {
        let x = PhasePoint::new(-0.3, 2.5);
        let back = MeanFieldAmplitudes::from_phase_point(x).phase_point();
        assert_abs_diff_eq!(back.p, x.p, epsilon = 1e-15);
        assert_abs_diff_eq!(back.phi, x.phi, epsilon = 1e-15);
    }

    #[test]
    fn pole_seed_uses_amplitude_chart() {
        let params = paper();
        let settings = MeanFieldSettings::default();
        let image = poincare_map(&PhasePoint::new(1.0, 0.0), &params, &settings).unwrap();
        let c = integrate_gpe(
            &MeanFieldAmplitudes::from_phase_point(PhasePoint::new(1.0, 0.0)),
            &params,
            &settings,
            0.0,
            params.period(),
        )
        .unwrap()
        .phase_point();
        assert_eq!(image, c);
    }
}

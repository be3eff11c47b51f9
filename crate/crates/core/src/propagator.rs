//! Time evolution of the driven dimer over arbitrary intervals and the
//! one-cycle evolution operator `U(T, 0)`.
//!
//! The default stepper is the fourth-order commutator-free Magnus scheme
//! with two exponentials per step. Each exponential of the tridiagonal
//! Hamiltonian is applied by a Chebyshev expansion converged to machine
//! precision, so the only discretisation error is the Magnus truncation and
//! the result is unitary up to rounding. The exponential midpoint rule and an
//! adaptive DOP853 integration of the Schrödinger equation are available as
//! alternative backends.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{vec_norm, DenseMatrix};
use crate::model::{build_static_hamiltonian, DimerParams, HamiltonianMatrix};
use crate::ode::{Control, Dop853};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Gauss nodes and weights of the commutator-free Magnus scheme.
const CF4_NODES: [f64; 2] = [0.5 - 0.288_675_134_594_812_9, 0.5 + 0.288_675_134_594_812_9];
const CF4_WEIGHTS: [f64; 2] = [(3.0 - 2.0 * 1.732_050_807_568_877_2) / 12.0, (3.0 + 2.0 * 1.732_050_807_568_877_2) / 12.0];

/// Coefficients below this size end a Chebyshev series.
const CHEBYSHEV_CUTOFF: f64 = 1e-18;

/// Amplitudes of an `N`-particle state in the Fock basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub amplitudes: Vec<Complex64>,
}

impl StateVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self { amplitudes }
    }

    /// Fock state `|m, N - m>`.
    pub fn basis(dim: usize, m: usize) -> Self {
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[m] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn n_particles(&self) -> usize {
        self.amplitudes.len() - 1
    }

    pub fn norm(&self) -> f64 {
        vec_norm(&self.amplitudes)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Fourth-order commutator-free Magnus, Chebyshev exponentials.
    Magnus4,
    /// Second-order exponential midpoint, Chebyshev exponentials.
    ExponentialMidpoint,
    /// Adaptive DOP853 on the real and imaginary parts.
    AdaptiveRk,
}

impl Method {
    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Magnus4 => "magnus4",
            Method::ExponentialMidpoint => "exponential_midpoint",
            Method::AdaptiveRk => "adaptive_rk",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "magnus4" => Ok(Method::Magnus4),
            "exponential_midpoint" => Ok(Method::ExponentialMidpoint),
            "adaptive_rk" => Ok(Method::AdaptiveRk),
            other => Err(format!("unknown integrator `{other}` (expected magnus4, exponential_midpoint or adaptive_rk)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorSettings {
    pub method: Method,
    /// Fixed steps per driving period; `None` selects [`default_steps_per_period`].
    pub steps_per_period: Option<usize>,
    /// Relative tolerance of the adaptive backend.
    pub rtol: f64,
    /// `None` selects [`default_unitarity_tolerance`].
    pub unitarity_tolerance: Option<f64>,
}

impl Default for IntegratorSettings {
    fn default() -> Self {
        Self { method: Method::Magnus4, steps_per_period: None, rtol: 1e-12, unitarity_tolerance: None }
    }
}

/// Safety constant `c` of the step rule
/// `steps >= c * max(|alpha| N, (mu/Omega) N, 1) / (omega/Omega)`.
pub const STEP_SAFETY: f64 = 0.5;

/// Lower bound on the step count regardless of `N`.
pub const MIN_STEPS_PER_PERIOD: usize = 256;

pub fn default_steps_per_period(params: &DimerParams) -> usize {
    let n = params.n_particles as f64;
    let scale = (params.alpha.abs() * n).max(params.drive_amplitude * n).max(1.0);
    let rule = (STEP_SAFETY * scale / params.drive_frequency).ceil() as usize;
    rule.max(MIN_STEPS_PER_PERIOD)
}

pub fn default_unitarity_tolerance(n_particles: usize) -> f64 {
    if n_particles <= 1000 {
        1e-10
    } else {
        1e-8
    }
}

impl IntegratorSettings {
    pub fn steps_for(&self, params: &DimerParams) -> usize {
        self.steps_per_period.unwrap_or_else(|| default_steps_per_period(params)).max(1)
    }

    pub fn tolerance_for(&self, params: &DimerParams) -> f64 {
        self.unitarity_tolerance.unwrap_or_else(|| default_unitarity_tolerance(params.n_particles))
    }
}

/// What the integrator did while building a one-cycle operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegratorReport {
    pub method: Method,
    pub steps_per_period: usize,
    pub chebyshev_terms: usize,
    pub unitarity_defect: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OneCycleOperator {
    pub matrix: DenseMatrix,
    pub params: DimerParams,
    pub report: IntegratorReport,
}

/// Bessel functions `J_0(x) .. J_K(x)` by Miller's backward recurrence,
/// truncated once the terms fall below [`CHEBYSHEV_CUTOFF`].
pub(crate) fn bessel_j_sequence(x: f64) -> Vec<f64> {
    assert!(x >= 0.0 && x.is_finite());
    if x == 0.0 {
        return vec![1.0];
    }
    let start = {
        let m = (x + 12.0 * x.cbrt() + 40.0).ceil() as usize;
        m + (m % 2)
    };
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-30;
    for k in (1..=start).rev() {
        j[k - 1] = 2.0 * k as f64 / x * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    for v in j.iter_mut() {
        *v /= norm;
    }
    let last = j.iter().rposition(|v| v.abs() > CHEBYSHEV_CUTOFF).unwrap_or(0);
    j.truncate(last + 1);
    j
}

/// Precomputed Chebyshev expansion of `exp(-i s H)` for every tridiagonal
/// `H = H_0 + g V` with `|g| <= g_max`, sharing one spectral enclosure.
#[derive(Debug, Clone)]
struct ChebyshevExp {
    /// `(2 - delta_k0) (-i)^k J_k(s r)`.
    coeffs: Vec<Complex64>,
    /// `exp(-i s c)`.
    phase: Complex64,
    scaled_diag: Vec<f64>,
    scaled_drive: Vec<f64>,
    scaled_off: Vec<f64>,
}

impl ChebyshevExp {
    fn new(h: &HamiltonianMatrix, g_max: f64, s: f64) -> Self {
        let n = h.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for m in 0..n {
            let left = if m > 0 { h.off_diagonal[m - 1].abs() } else { 0.0 };
            let right = if m + 1 < n { h.off_diagonal[m].abs() } else { 0.0 };
            let spread = g_max * h.drive_diagonal[m].abs() + left + right;
            lo = lo.min(h.diagonal[m] - spread);
            hi = hi.max(h.diagonal[m] + spread);
        }
        let center = 0.5 * (hi + lo);
        let half_width = (0.5 * (hi - lo)).max(1e-300);
        let bessel = bessel_j_sequence((s * half_width).abs());
        let sign = s.signum();
        let coeffs = bessel
            .iter()
            .enumerate()
            .map(|(k, jk)| {
                // (-i sign)^k
                let rot = match k % 4 {
                    0 => Complex64::new(1.0, 0.0),
                    1 => Complex64::new(0.0, -sign),
                    2 => Complex64::new(-1.0, 0.0),
                    _ => Complex64::new(0.0, sign),
                };
                rot * (if k == 0 { *jk } else { 2.0 * jk })
            })
            .collect();
        let phase = Complex64::from_polar(1.0, -s * center);
        Self {
            coeffs,
            phase,
            scaled_diag: h.diagonal.iter().map(|d| (d - center) / half_width).collect(),
            scaled_drive: h.drive_diagonal.iter().map(|v| v / half_width).collect(),
            scaled_off: h.off_diagonal.iter().map(|e| e / half_width).collect(),
        }
    }

    fn terms(&self) -> usize {
        self.coeffs.len()
    }

    /// `y = Htilde x`, with the drive weight `g` folded into the diagonal.
    #[inline]
    fn apply_scaled(&self, g: f64, x: &[Complex64], y: &mut [Complex64]) {
        let n = x.len();
        let d = &self.scaled_diag;
        let v = &self.scaled_drive;
        let e = &self.scaled_off;
        if n == 1 {
            y[0] = x[0] * (d[0] + g * v[0]);
            return;
        }
        y[0] = x[0] * (d[0] + g * v[0]) + x[1] * e[0];
        for m in 1..n - 1 {
            y[m] = x[m] * (d[m] + g * v[m]) + x[m - 1] * e[m - 1] + x[m + 1] * e[m];
        }
        y[n - 1] = x[n - 1] * (d[n - 1] + g * v[n - 1]) + x[n - 2] * e[n - 2];
    }

    /// `psi <- exp(-i s (H_0 + g V)) psi`.
    fn apply(&self, g: f64, psi: &mut [Complex64], work: &mut ChebyshevWork) {
        let n = psi.len();
        let ChebyshevWork { prev, curr, next } = work;
        prev.copy_from_slice(psi);
        for (p, x) in psi.iter_mut().zip(prev.iter()) {
            *p = *x * self.coeffs[0];
        }
        if self.coeffs.len() > 1 {
            self.apply_scaled(g, prev, curr);
            let c1 = self.coeffs[1];
            for (p, x) in psi.iter_mut().zip(curr.iter()) {
                *p += *x * c1;
            }
        }
        for ck in &self.coeffs[2..] {
            self.apply_scaled(g, curr, next);
            for m in 0..n {
                next[m] = 2.0 * next[m] - prev[m];
                psi[m] += next[m] * ck;
            }
            std::mem::swap(prev, curr);
            std::mem::swap(curr, next);
        }
        for p in psi.iter_mut() {
            *p *= self.phase;
        }
    }
}

struct ChebyshevWork {
    prev: Vec<Complex64>,
    curr: Vec<Complex64>,
    next: Vec<Complex64>,
}

impl ChebyshevWork {
    fn new(n: usize) -> Self {
        Self { prev: vec![ZERO; n], curr: vec![ZERO; n], next: vec![ZERO; n] }
    }
}

/// Propagator for one parameter set; reusable across states and intervals.
#[derive(Debug, Clone)]
pub struct Propagator {
    params: DimerParams,
    settings: IntegratorSettings,
    hamiltonian: HamiltonianMatrix,
    steps_per_period: usize,
}

impl Propagator {
    pub fn new(params: &DimerParams, settings: &IntegratorSettings) -> Result<Self> {
        let hamiltonian = build_static_hamiltonian(params)?;
        Ok(Self { params: *params, settings: *settings, hamiltonian, steps_per_period: settings.steps_for(params) })
    }

    pub fn params(&self) -> &DimerParams {
        &self.params
    }

    pub fn steps_per_period(&self) -> usize {
        self.steps_per_period
    }

    fn step_count(&self, span: f64) -> usize {
        let nominal = self.params.period() / self.steps_per_period as f64;
        ((span.abs() / nominal) * (1.0 - 1e-12)).ceil().max(1.0) as usize
    }

    fn exponential(&self, span: f64, steps: usize) -> ChebyshevExp {
        let h = span / steps as f64;
        let mu = self.params.drive_amplitude;
        match self.settings.method {
            Method::Magnus4 => {
                let g_max = 2.0 * (CF4_WEIGHTS[0].abs() + CF4_WEIGHTS[1].abs()) * mu;
                ChebyshevExp::new(&self.hamiltonian, g_max, 0.5 * h)
            }
            _ => ChebyshevExp::new(&self.hamiltonian, mu, h),
        }
    }

    /// Chebyshev terms used per exponential on a full period.
    pub fn chebyshev_terms(&self) -> usize {
        match self.settings.method {
            Method::AdaptiveRk => 0,
            _ => self.exponential(self.params.period(), self.steps_per_period).terms(),
        }
    }

    /// Applies `U(tau1, tau0)` in place without the norm check.
    fn evolve_in_place(&self, psi: &mut [Complex64], tau0: f64, tau1: f64) -> Result<()> {
        if tau1 == tau0 {
            return Ok(());
        }
        let span = tau1 - tau0;
        match self.settings.method {
            Method::AdaptiveRk => self.evolve_adaptive(psi, tau0, tau1),
            Method::Magnus4 => {
                let steps = self.step_count(span);
                let h = span / steps as f64;
                let exp = self.exponential(span, steps);
                let mut work = ChebyshevWork::new(psi.len());
                let [w1, w2] = CF4_WEIGHTS;
                for j in 0..steps {
                    let t = tau0 + j as f64 * h;
                    let f1 = self.params.drive(t + CF4_NODES[0] * h);
                    let f2 = self.params.drive(t + CF4_NODES[1] * h);
                    // exp(-i h (w1 H1 + w2 H2)) exp(-i h (w2 H1 + w1 H2))
                    exp.apply(2.0 * (w2 * f1 + w1 * f2), psi, &mut work);
                    exp.apply(2.0 * (w1 * f1 + w2 * f2), psi, &mut work);
                }
                Ok(())
            }
            Method::ExponentialMidpoint => {
                let steps = self.step_count(span);
                let h = span / steps as f64;
                let exp = self.exponential(span, steps);
                let mut work = ChebyshevWork::new(psi.len());
                for j in 0..steps {
                    let t = tau0 + (j as f64 + 0.5) * h;
                    exp.apply(self.params.drive(t), psi, &mut work);
                }
                Ok(())
            }
        }
    }

    fn evolve_adaptive(&self, psi: &mut [Complex64], tau0: f64, tau1: f64) -> Result<()> {
        let n = psi.len();
        let h = &self.hamiltonian;
        let params = self.params;
        let mut y: Vec<f64> = psi.iter().flat_map(|z| [z.re, z.im]).collect();
        let rhs = |t: f64, y: &[f64], dy: &mut [f64]| {
            let g = params.drive(t);
            for m in 0..n {
                let mut re = (h.diagonal[m] + g * h.drive_diagonal[m]) * y[2 * m];
                let mut im = (h.diagonal[m] + g * h.drive_diagonal[m]) * y[2 * m + 1];
                if m > 0 {
                    re += h.off_diagonal[m - 1] * y[2 * m - 2];
                    im += h.off_diagonal[m - 1] * y[2 * m - 1];
                }
                if m + 1 < n {
                    re += h.off_diagonal[m] * y[2 * m + 2];
                    im += h.off_diagonal[m] * y[2 * m + 3];
                }
                // d psi / dt = -i H psi
                dy[2 * m] = im;
                dy[2 * m + 1] = -re;
            }
        };
        let solver = Dop853::with_tolerances(self.settings.rtol, self.settings.rtol * 1e-2);
        solver.integrate(rhs, tau0, tau1, &mut y, false, |_, _| Control::Continue)?;
        for (m, z) in psi.iter_mut().enumerate() {
            *z = Complex64::new(y[2 * m], y[2 * m + 1]);
        }
        Ok(())
    }

    /// `U(tau1, tau0) psi`, failing with [`Error::StepTooLarge`] when the
    /// norm drifts by more than the unitarity tolerance.
    pub fn propagate(&self, psi: &StateVector, tau0: f64, tau1: f64) -> Result<StateVector> {
        if psi.dim() != self.params.dim() {
            return Err(Error::InvalidParameter {
                name: "psi",
                reason: format!("dimension {} does not match N + 1 = {}", psi.dim(), self.params.dim()),
            });
        }
        let before = psi.norm();
        let mut out = psi.amplitudes.clone();
        self.evolve_in_place(&mut out, tau0, tau1)?;
        let after = vec_norm(&out);
        let tolerance = self.settings.tolerance_for(&self.params);
        let drift = (after - before).abs();
        if !(drift <= tolerance) {
            return Err(Error::StepTooLarge { drift, tolerance });
        }
        Ok(StateVector { amplitudes: out })
    }

    /// Columns `U(tau1, tau0) |m>` for all Fock states, in parallel.
    pub fn evolution_matrix(&self, tau0: f64, tau1: f64) -> Result<DenseMatrix> {
        let dim = self.params.dim();
        let mut data = vec![ZERO; dim * dim];
        data.par_chunks_mut(dim).enumerate().try_for_each(|(j, col)| {
            col[j] = Complex64::new(1.0, 0.0);
            self.evolve_in_place(col, tau0, tau1)
        })?;
        Ok(DenseMatrix::from_column_major(dim, data))
    }

    /// `U(T, 0)`. Since `H(tau + T/2) = P H(tau) P` with `P` the site
    /// exchange `|m> -> |N - m>`, only the first half period is integrated and
    /// `U(T, 0) = (P U(T/2, 0))^2`.
    pub fn one_cycle_operator(&self) -> Result<OneCycleOperator> {
        let half = self.evolution_matrix(0.0, 0.5 * self.params.period())?;
        let dim = half.dim();
        let mut exchanged = DenseMatrix::zeros(dim);
        for j in 0..dim {
            for (i, z) in half.col(j).iter().enumerate() {
                exchanged[(dim - 1 - i, j)] = *z;
            }
        }
        let matrix = exchanged.matmul(&exchanged);
        let defect = matrix.unitarity_defect();
        let tolerance = self.settings.tolerance_for(&self.params);
        if !(defect <= tolerance) {
            return Err(Error::UnitarityLoss { defect, tolerance });
        }
        Ok(OneCycleOperator {
            matrix,
            params: self.params,
            report: IntegratorReport {
                method: self.settings.method,
                steps_per_period: self.steps_per_period,
                chebyshev_terms: self.chebyshev_terms(),
                unitarity_defect: defect,
            },
        })
    }
}

pub fn propagate_state(
    psi: &StateVector,
    params: &DimerParams,
    settings: &IntegratorSettings,
    tau0: f64,
    tau1: f64,
) -> Result<StateVector> {
    Propagator::new(params, settings)?.propagate(psi, tau0, tau1)
}

pub fn one_cycle_operator(params: &DimerParams, settings: &IntegratorSettings) -> Result<OneCycleOperator> {
    Propagator::new(params, settings)?.one_cycle_operator()
}

//! Spin coherent states, Husimi distributions and the one-particle reduced
//! density matrix with its degree of simplicity.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::floquet::FloquetSpectrum;
use crate::propagator::StateVector;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// `ln n! - (n + 1/2) ln n + n - ln sqrt(2 pi)`.
fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        let k = n as usize;
        let ln_fact: f64 = (2..=k).map(|i| (i as f64).ln()).sum();
        return ln_fact - (n + 0.5) * n.ln() + n - LN_SQRT_2PI;
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x ln(x / np) + np - x`, accurate when `x` is close to `np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let v2 = v * v;
        for j in 1..1000 {
            ej *= v2;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
        s
    } else {
        x * (x / np).ln() + np - x
    }
}

/// Binomial probability `C(n, x) p^x q^(n-x)` with `q = 1 - p` supplied
/// separately, evaluated without forming the binomial coefficient.
pub(crate) fn binomial_pmf(x: usize, n: usize, p: f64, q: f64) -> f64 {
    if p == 0.0 {
        return if x == 0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if x == n { 1.0 } else { 0.0 };
    }
    let nf = n as f64;
    if x == 0 {
        if n == 0 {
            return 1.0;
        }
        let lc = if p < 0.1 { -bd0(nf, nf * q) - nf * p } else { nf * q.ln() };
        return lc.exp();
    }
    if x == n {
        let lc = if q < 0.1 { -bd0(nf, nf * p) - nf * q } else { nf * p.ln() };
        return lc.exp();
    }
    let xf = x as f64;
    let lc = stirlerr(nf) - stirlerr(xf) - stirlerr(nf - xf) - bd0(xf, nf * p) - bd0(nf - xf, nf * q);
    let lf = TAU.ln() + xf.ln() + (-xf / nf).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// Moduli `|c_m|` of the coherent-state amplitudes at imbalance `p`.
fn coherent_moduli(n_particles: usize, p: f64) -> Vec<f64> {
    let p = p.clamp(-1.0, 1.0);
    let up = 0.5 * (1.0 + p);
    let down = 0.5 * (1.0 - p);
    (0..=n_particles).map(|m| binomial_pmf(m, n_particles, up, down).sqrt()).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherentStateSpec {
    pub theta: f64,
    pub phi: f64,
    pub n_particles: usize,
}

impl CoherentStateSpec {
    pub fn new(theta: f64, phi: f64, n_particles: usize) -> Result<Self> {
        if !(0.0..=PI).contains(&theta) {
            return Err(Error::InvalidParameter { name: "theta", reason: format!("{theta} outside [0, pi]") });
        }
        if !phi.is_finite() {
            return Err(Error::InvalidParameter { name: "phi", reason: "must be finite".into() });
        }
        Ok(Self { theta, phi, n_particles })
    }

    /// Coherent state centred at imbalance `p = cos(theta)`.
    pub fn from_imbalance(p: f64, phi: f64, n_particles: usize) -> Result<Self> {
        if !(-1.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter { name: "p", reason: format!("{p} outside [-1, 1]") });
        }
        Self::new(p.acos(), phi, n_particles)
    }

    pub fn p(&self) -> f64 {
        self.theta.cos()
    }
}

/// `c_m = sqrt(C(N, m)) cos^m(theta/2) sin^(N-m)(theta/2) exp(i (N-m) phi)`.
pub fn coherent_state(spec: &CoherentStateSpec) -> StateVector {
    let n = spec.n_particles;
    let half = 0.5 * spec.theta;
    let (c, s) = (half.cos(), half.sin());
    let amplitudes = (0..=n)
        .map(|m| {
            let modulus = binomial_pmf(m, n, c * c, s * s).sqrt();
            Complex64::from_polar(modulus, (n - m) as f64 * spec.phi)
        })
        .collect();
    StateVector::new(amplitudes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HusimiGridSpec {
    /// Rows, cell midpoints `p_i = -1 + (i + 1/2) * 2 / n_p`.
    pub n_p: usize,
    /// Columns, `phi_j = -pi + 2 pi j / n_phi`.
    pub n_phi: usize,
}

impl HusimiGridSpec {
    pub fn new(n_p: usize, n_phi: usize) -> Result<Self> {
        if n_p == 0 || n_phi == 0 {
            return Err(Error::InvalidParameter { name: "grid", reason: "both dimensions must be positive".into() });
        }
        Ok(Self { n_p, n_phi })
    }

    pub fn p_axis(&self) -> Vec<f64> {
        let dp = 2.0 / self.n_p as f64;
        (0..self.n_p).map(|i| -1.0 + (i as f64 + 0.5) * dp).collect()
    }

    pub fn phi_axis(&self) -> Vec<f64> {
        (0..self.n_phi).map(|j| -PI + TAU * j as f64 / self.n_phi as f64).collect()
    }

    pub fn dp(&self) -> f64 {
        2.0 / self.n_p as f64
    }

    pub fn dphi(&self) -> f64 {
        TAU / self.n_phi as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HusimiGrid {
    pub p_axis: Vec<f64>,
    pub phi_axis: Vec<f64>,
    /// Row-major, `values[i * n_phi + j] = Q(p_i, phi_j)`.
    pub values: Vec<f64>,
    pub n_particles: usize,
    pub state_label: Option<usize>,
}

impl HusimiGrid {
    pub fn n_p(&self) -> usize {
        self.p_axis.len()
    }

    pub fn n_phi(&self) -> usize {
        self.phi_axis.len()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n_phi() + j]
    }

    /// `((N + 1) / 4 pi) dp dphi sum Q`, which is 1 for a normalized state
    /// up to quadrature error.
    pub fn normalization(&self) -> f64 {
        let dp = 2.0 / self.n_p() as f64;
        let dphi = TAU / self.n_phi() as f64;
        (self.n_particles as f64 + 1.0) / (2.0 * TAU) * dp * dphi * self.values.iter().sum::<f64>()
    }

    /// Q-weighted mean of `(p, phi)`, with `phi` averaged on the circle.
    pub fn centroid(&self) -> (f64, f64) {
        let mut total = 0.0;
        let mut p_sum = 0.0;
        let mut z = Complex64::new(0.0, 0.0);
        for (i, p) in self.p_axis.iter().enumerate() {
            for (j, phi) in self.phi_axis.iter().enumerate() {
                let q = self.at(i, j);
                total += q;
                p_sum += q * p;
                z += Complex64::from_polar(q, *phi);
            }
        }
        (p_sum / total, z.arg())
    }
}

/// `Q(p, phi) = |<psi|theta, phi>|^2` at a single point.
pub fn husimi_at(state: &StateVector, p: f64, phi: f64) -> f64 {
    let n = state.n_particles();
    let moduli = coherent_moduli(n, p);
    let overlap: Complex64 = state
        .amplitudes
        .iter()
        .zip(&moduli)
        .enumerate()
        .map(|(m, (a, c))| a.conj() * Complex64::from_polar(*c, (n - m) as f64 * phi))
        .sum();
    overlap.norm_sqr()
}

/// Husimi distribution on a uniform `(p, phi)` grid. Along `phi` the overlap
/// is a trigonometric polynomial, summed by folding the Fock index modulo the
/// grid size and one FFT per row.
pub fn husimi(state: &StateVector, grid: &HusimiGridSpec) -> HusimiGrid {
    let n = state.n_particles();
    let q = grid.n_phi;
    let fft = FftPlanner::<f64>::new().plan_fft_forward(q);
    let p_axis = grid.p_axis();
    let rows: Vec<Vec<f64>> = p_axis
        .par_iter()
        .map(|p| {
            let moduli = coherent_moduli(n, *p);
            // sum_m conj(a_m) |c_m| e^{i (N - m) phi_j}; the global factor
            // e^{i N phi} drops out of the modulus, and e^{-i m phi_j} =
            // (-1)^m e^{-2 pi i m j / q}.
            let mut folded = vec![Complex64::new(0.0, 0.0); q];
            for (m, (a, c)) in state.amplitudes.iter().zip(&moduli).enumerate() {
                let w = a.conj() * *c;
                folded[m % q] += if m % 2 == 0 { w } else { -w };
            }
            fft.process(&mut folded);
            folded.iter().map(|z| z.norm_sqr()).collect()
        })
        .collect();
    HusimiGrid {
        p_axis,
        phi_axis: grid.phi_axis(),
        values: rows.concat(),
        n_particles: n,
        state_label: None,
    }
}

/// Reference evaluation of every grid node by explicit inner products.
pub fn husimi_direct(state: &StateVector, grid: &HusimiGridSpec) -> HusimiGrid {
    let p_axis = grid.p_axis();
    let phi_axis = grid.phi_axis();
    let values = p_axis
        .par_iter()
        .flat_map_iter(|p| phi_axis.iter().map(move |phi| husimi_at(state, *p, *phi)))
        .collect();
    HusimiGrid { p_axis, phi_axis, values, n_particles: state.n_particles(), state_label: None }
}

/// One-particle reduced density matrix, `entries[j][k] = <a_j^dag a_k>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReducedDensityMatrix {
    pub entries: [[Complex64; 2]; 2],
    pub n_particles: usize,
}

impl ReducedDensityMatrix {
    pub fn trace(&self) -> f64 {
        self.entries[0][0].re + self.entries[1][1].re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let a = self.entries[0][0].re;
        let d = self.entries[1][1].re;
        let b = self.entries[0][1].norm();
        let mean = 0.5 * (a + d);
        let radius = (0.25 * (a - d) * (a - d) + b * b).sqrt();
        [mean - radius, mean + radius]
    }
}

pub fn reduced_density(state: &StateVector) -> ReducedDensityMatrix {
    let n = state.n_particles();
    let c = &state.amplitudes;
    let mut n1 = 0.0;
    let mut n2 = 0.0;
    let mut hop = Complex64::new(0.0, 0.0);
    for m in 0..=n {
        let w = c[m].norm_sqr();
        n1 += m as f64 * w;
        n2 += (n - m) as f64 * w;
        if m < n {
            hop += (((m + 1) * (n - m)) as f64).sqrt() * c[m + 1].conj() * c[m];
        }
    }
    let r = |x: f64| Complex64::new(x, 0.0);
    ReducedDensityMatrix { entries: [[r(n1), hop], [hop.conj(), r(n2)]], n_particles: n }
}

/// `eta = 2 N^-2 tr rho^2 - 1`, using `tr rho^2 = sum |rho_jk|^2`.
pub fn degree_of_simplicity(rho: &ReducedDensityMatrix) -> f64 {
    let n = rho.n_particles as f64;
    let tr2: f64 = rho.entries.iter().flatten().map(|z| z.norm_sqr()).sum();
    2.0 * tr2 / (n * n) - 1.0
}

/// The same quantity from the eigenvalues of `rho`.
pub fn degree_of_simplicity_from_eigenvalues(rho: &ReducedDensityMatrix) -> f64 {
    let n = rho.n_particles as f64;
    let [l0, l1] = rho.eigenvalues();
    2.0 * (l0 * l0 + l1 * l1) / (n * n) - 1.0
}

pub fn eta_of_amplitudes(amplitudes: &[Complex64]) -> f64 {
    degree_of_simplicity(&reduced_density(&StateVector::new(amplitudes.to_vec())))
}

/// `eta` of every Floquet state, in raw eigenvector order.
pub fn eta_spectrum(spectrum: &FloquetSpectrum) -> Vec<f64> {
    (0..spectrum.dim()).into_par_iter().map(|j| eta_of_amplitudes(spectrum.eigenvector(j))).collect()
}

//! Fock basis and Hamiltonian of the driven two-site Bose-Hubbard model.
//!
//! Everything is dimensionless: energies are measured in units of the
//! tunnelling energy and time is `tau = Omega * t`. The Fock state with index
//! `m` holds `m` particles on site 1 and `N - m` on site 2.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Control parameters of the driven dimer.
///
/// The interaction enters only through `alpha = N kappa / Omega`; the bare
/// interaction per particle is derived from it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimerParams {
    pub n_particles: usize,
    pub alpha: f64,
    /// Drive amplitude `mu / Omega`.
    pub drive_amplitude: f64,
    /// Drive frequency `omega / Omega`.
    pub drive_frequency: f64,
}

impl DimerParams {
    pub fn new(
        n_particles: usize,
        alpha: f64,
        drive_amplitude: f64,
        drive_frequency: f64,
    ) -> Result<Self> {
        let params = Self { n_particles, alpha, drive_amplitude, drive_frequency };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(Error::InvalidParameter {
                name: "n_particles",
                reason: "must be at least 1".into(),
            });
        }
        self.mean_field().validate()
    }

    /// Interaction strength per particle, `kappa / Omega`.
    pub fn kappa(&self) -> f64 {
        self.alpha / self.n_particles as f64
    }

    /// Driving period in units of `1 / Omega`.
    pub fn period(&self) -> f64 {
        TAU / self.drive_frequency
    }

    pub fn dim(&self) -> usize {
        self.n_particles + 1
    }

    /// Instantaneous drive factor `(mu / Omega) sin((omega / Omega) tau)`.
    pub fn drive(&self, tau: f64) -> f64 {
        self.drive_amplitude * (self.drive_frequency * tau).sin()
    }

    pub fn mean_field(&self) -> MeanFieldParams {
        MeanFieldParams {
            alpha: self.alpha,
            drive_amplitude: self.drive_amplitude,
            drive_frequency: self.drive_frequency,
        }
    }
}

/// The three parameters the mean-field dynamics depend on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldParams {
    pub alpha: f64,
    pub drive_amplitude: f64,
    pub drive_frequency: f64,
}

impl MeanFieldParams {
    pub fn new(alpha: f64, drive_amplitude: f64, drive_frequency: f64) -> Result<Self> {
        let params = Self { alpha, drive_amplitude, drive_frequency };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.alpha.is_finite() {
            return Err(Error::InvalidParameter { name: "alpha", reason: "must be finite".into() });
        }
        if !(self.drive_amplitude.is_finite() && self.drive_amplitude >= 0.0) {
            return Err(Error::InvalidParameter {
                name: "drive_amplitude",
                reason: format!("must be finite and non-negative, got {}", self.drive_amplitude),
            });
        }
        if !(self.drive_frequency.is_finite() && self.drive_frequency > 0.0) {
            return Err(Error::InvalidParameter {
                name: "drive_frequency",
                reason: format!("must be finite and positive, got {}", self.drive_frequency),
            });
        }
        Ok(())
    }

    pub fn period(&self) -> f64 {
        TAU / self.drive_frequency
    }

    pub fn drive(&self, tau: f64) -> f64 {
        self.drive_amplitude * (self.drive_frequency * tau).sin()
    }
}

/// The `N + 1` two-mode Fock states, ordered by the occupation of site 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FockBasis {
    pub n_particles: usize,
}

impl FockBasis {
    pub fn new(n_particles: usize) -> Self {
        Self { n_particles }
    }

    pub fn len(&self) -> usize {
        self.n_particles + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Occupations `(n_1, n_2)` of basis state `m`.
    pub fn occupations(&self, m: usize) -> (usize, usize) {
        assert!(m <= self.n_particles, "basis index {m} out of range");
        (m, self.n_particles - m)
    }

    pub fn states(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..=self.n_particles).map(move |m| self.occupations(m))
    }
}

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub diagonal: Vec<f64>,
    /// `off_diagonal[m]` couples `m` and `m + 1`.
    pub off_diagonal: Vec<f64>,
}

impl Tridiagonal {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// Gershgorin enclosure `[lo, hi]` of the spectrum.
    pub fn spectral_bounds(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for m in 0..n {
            let left = if m > 0 { self.off_diagonal[m - 1].abs() } else { 0.0 };
            let right = if m + 1 < n { self.off_diagonal[m].abs() } else { 0.0 };
            lo = lo.min(self.diagonal[m] - left - right);
            hi = hi.max(self.diagonal[m] + left + right);
        }
        (lo, hi)
    }

    /// Dense row-major copy, for tests and small systems.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut dense = vec![vec![0.0; n]; n];
        for m in 0..n {
            dense[m][m] = self.diagonal[m];
            if m + 1 < n {
                dense[m][m + 1] = self.off_diagonal[m];
                dense[m + 1][m] = self.off_diagonal[m];
            }
        }
        dense
    }
}

/// Static Hamiltonian `H_0` together with the diagonal of the drive operator
/// `n_1 - n_2`, in units of the tunnelling energy.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianMatrix {
    pub diagonal: Vec<f64>,
    pub off_diagonal: Vec<f64>,
    pub drive_diagonal: Vec<f64>,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// Tridiagonal matrix with the drive diagonal weighted by `drive`.
    pub fn with_drive(&self, drive: f64) -> Tridiagonal {
        Tridiagonal {
            diagonal: self
                .diagonal
                .iter()
                .zip(&self.drive_diagonal)
                .map(|(d, v)| d + drive * v)
                .collect(),
            off_diagonal: self.off_diagonal.clone(),
        }
    }

    pub fn static_part(&self) -> Tridiagonal {
        Tridiagonal { diagonal: self.diagonal.clone(), off_diagonal: self.off_diagonal.clone() }
    }
}

pub fn build_static_hamiltonian(params: &DimerParams) -> Result<HamiltonianMatrix> {
    params.validate()?;
    let n = params.n_particles;
    let kappa = params.kappa();
    let diagonal = (0..=n)
        .map(|m| {
            let (n1, n2) = (m as f64, (n - m) as f64);
            kappa * (n1 * (n1 - 1.0) + n2 * (n2 - 1.0))
        })
        .collect();
    let off_diagonal = (0..n)
        .map(|m| -0.5 * (((m + 1) * (n - m)) as f64).sqrt())
        .collect();
    let drive_diagonal = (0..=n).map(|m| 2.0 * m as f64 - n as f64).collect();
    Ok(HamiltonianMatrix { diagonal, off_diagonal, drive_diagonal })
}

/// Instantaneous `H(tau) = H_0 + (mu/Omega) sin((omega/Omega) tau) (n_1 - n_2)`.
pub fn evaluate_hamiltonian(h: &HamiltonianMatrix, params: &DimerParams, tau: f64) -> Tridiagonal {
    h.with_drive(params.drive(tau))
}

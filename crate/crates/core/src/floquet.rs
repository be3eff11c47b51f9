//! Floquet states: eigenphases and eigenvectors of the one-cycle operator,
//! quasienergy folding and the ordering of states by their coherence.

use std::f64::consts::TAU;

use faer::c64;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{inner, vec_norm, DenseMatrix};
use crate::propagator::OneCycleOperator;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagonalizeSettings {
    /// Eigenphases closer than this are treated as one cluster.
    pub cluster_tol: f64,
    /// Eigenvectors overlapping by more than this are re-orthonormalized
    /// together even when their phases are further apart.
    pub overlap_tol: f64,
    /// `None` selects `1e-8 sqrt(N + 1)`.
    pub residual_tol: Option<f64>,
}

impl Default for DiagonalizeSettings {
    fn default() -> Self {
        Self { cluster_tol: 1e-12 * TAU, overlap_tol: 1e-10, residual_tol: None }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FloquetSpectrum {
    /// `gamma_j` in `[0, 2 pi)`, eigenvalue `exp(-i gamma_j)`, raw order.
    pub eigenphases: Vec<f64>,
    /// Quasienergies in units of the tunnelling energy, folded into
    /// `[-omega/2, omega/2)`.
    pub quasienergies: Vec<f64>,
    /// Orthonormal eigenvectors, column `j` belongs to `eigenphases[j]`.
    pub eigenvectors: DenseMatrix,
    /// `eta_order[n]` is the raw index of the state with simplicity label `n`.
    /// Identity until [`order_by_simplicity`] has been applied.
    pub eta_order: Vec<usize>,
    pub drive_frequency: f64,
    pub max_residual: f64,
    /// Number of eigenvector groups that needed re-orthonormalization.
    pub repaired_clusters: usize,
}

impl FloquetSpectrum {
    pub fn dim(&self) -> usize {
        self.eigenphases.len()
    }

    pub fn n_particles(&self) -> usize {
        self.dim() - 1
    }

    pub fn eigenvector(&self, raw: usize) -> &[Complex64] {
        self.eigenvectors.col(raw)
    }

    /// Raw index of the state carrying simplicity label `n`.
    pub fn raw_index(&self, label: usize) -> usize {
        self.eta_order[label]
    }

    pub fn labelled_state(&self, label: usize) -> &[Complex64] {
        self.eigenvector(self.eta_order[label])
    }
}

/// Folds `gamma / T` into the zone `[-omega/2, omega/2)`.
pub fn quasienergy_representative(gamma: f64, drive_frequency: f64) -> f64 {
    fold_quasienergy(gamma * drive_frequency / TAU, drive_frequency)
}

/// Shifts a quasienergy by whole multiples of `omega` into `[-omega/2, omega/2)`.
pub fn fold_quasienergy(eps: f64, drive_frequency: f64) -> f64 {
    let w = drive_frequency;
    if (-0.5 * w..0.5 * w).contains(&eps) {
        return eps;
    }
    let mut folded = eps - w * (eps / w + 0.5).floor();
    if folded >= 0.5 * w {
        folded -= w;
    }
    if folded < -0.5 * w {
        folded += w;
    }
    folded
}

fn eigenphase_of(lambda: Complex64) -> f64 {
    let g = (-lambda.arg()).rem_euclid(TAU);
    if g >= TAU {
        0.0
    } else {
        g
    }
}

/// Indices grouped into connected components of the given pairs.
fn components(n: usize, pairs: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut i: usize) -> usize {
        while parent[i] != i {
            parent[i] = parent[parent[i]];
            i = parent[i];
        }
        i
    }
    for &(a, b) in pairs {
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
        if ra != rb {
            parent[ra.max(rb)] = ra.min(rb);
        }
    }
    let mut groups: Vec<Vec<usize>> = vec![Vec::new(); n];
    for i in 0..n {
        let r = find(&mut parent, i);
        groups[r].push(i);
    }
    groups.into_iter().filter(|g| g.len() > 1).collect()
}

fn gram_schmidt(vectors: &mut DenseMatrix, group: &[usize]) {
    for _ in 0..2 {
        for (a, &i) in group.iter().enumerate() {
            for &j in &group[..a] {
                let proj = inner(vectors.col(j), vectors.col(i));
                let vj: Vec<Complex64> = vectors.col(j).to_vec();
                for (x, y) in vectors.col_mut(i).iter_mut().zip(&vj) {
                    *x -= proj * y;
                }
            }
            let norm = vec_norm(vectors.col(i));
            for x in vectors.col_mut(i) {
                *x /= norm;
            }
        }
    }
}

/// Eigen-decomposition of a unitary matrix with orthonormal eigenvectors.
pub fn diagonalize_matrix(
    u: &DenseMatrix,
    drive_frequency: f64,
    settings: &DiagonalizeSettings,
) -> Result<FloquetSpectrum> {
    let dim = u.dim();
    let eig = u.as_faer().eigen().map_err(|e| Error::DiagonalizationFailure(format!("{e:?}")))?;
    let mut vectors = DenseMatrix::from_faer(eig.U());
    let values: Vec<c64> = (0..dim).map(|j| eig.S()[j]).collect();
    for j in 0..dim {
        let norm = vec_norm(vectors.col(j));
        if !(norm > 0.0 && norm.is_finite()) {
            return Err(Error::DiagonalizationFailure(format!("eigenvector {j} has norm {norm}")));
        }
        for x in vectors.col_mut(j) {
            *x /= norm;
        }
    }

    let phases: Vec<f64> = values.iter().map(|l| eigenphase_of(*l)).collect();
    let mut pairs = Vec::new();
    let mut by_phase: Vec<usize> = (0..dim).collect();
    by_phase.sort_by(|&a, &b| phases[a].total_cmp(&phases[b]).then(a.cmp(&b)));
    for w in 0..dim {
        let (a, b) = (by_phase[w], by_phase[(w + 1) % dim]);
        if a == b {
            continue;
        }
        let mut gap = (phases[b] - phases[a]).abs();
        gap = gap.min(TAU - gap);
        if gap < settings.cluster_tol {
            pairs.push((a, b));
        }
    }
    let gram = vectors.as_faer().adjoint() * vectors.as_faer();
    for j in 0..dim {
        for i in 0..j {
            if gram[(i, j)].norm() > settings.overlap_tol {
                pairs.push((i, j));
            }
        }
    }
    let groups = components(dim, &pairs);
    for g in &groups {
        gram_schmidt(&mut vectors, g);
    }

    let image = u.matmul(&vectors);
    let mut eigenphases = Vec::with_capacity(dim);
    let mut max_residual: f64 = 0.0;
    for j in 0..dim {
        let v = vectors.col(j);
        let w = image.col(j);
        let rayleigh = inner(v, w);
        let lambda = if rayleigh.norm() > 0.0 { rayleigh / rayleigh.norm() } else { values[j] };
        let residual = vec_norm(&w.iter().zip(v).map(|(a, b)| a - lambda * b).collect::<Vec<_>>());
        max_residual = max_residual.max(residual);
        eigenphases.push(eigenphase_of(lambda));
    }
    let tolerance = settings.residual_tol.unwrap_or(1e-8 * (dim as f64).sqrt());
    if !(max_residual <= tolerance) {
        return Err(Error::DiagonalizationFailure(format!(
            "largest eigen-residual {max_residual:e} exceeds {tolerance:e}"
        )));
    }
    let quasienergies = eigenphases.iter().map(|g| quasienergy_representative(*g, drive_frequency)).collect();
    Ok(FloquetSpectrum {
        eigenphases,
        quasienergies,
        eigenvectors: vectors,
        eta_order: (0..dim).collect(),
        drive_frequency,
        max_residual,
        repaired_clusters: groups.len(),
    })
}

pub fn diagonalize(u: &OneCycleOperator) -> Result<FloquetSpectrum> {
    diagonalize_with(u, &DiagonalizeSettings::default())
}

pub fn diagonalize_with(u: &OneCycleOperator, settings: &DiagonalizeSettings) -> Result<FloquetSpectrum> {
    diagonalize_matrix(&u.matrix, u.params.drive_frequency, settings)
}

/// Permutation sorting `eta` ascending; ties keep raw index order.
pub fn simplicity_order(eta: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..eta.len()).collect();
    order.sort_by(|&a, &b| eta[a].total_cmp(&eta[b]).then(a.cmp(&b)));
    order
}

/// Attaches the ordering by ascending degree of simplicity: label 0 is the
/// least coherent state, label `N` the most coherent one.
pub fn order_by_simplicity(mut spectrum: FloquetSpectrum, eta: &[f64]) -> Result<FloquetSpectrum> {
    if eta.len() != spectrum.dim() {
        return Err(Error::InvalidParameter {
            name: "eta",
            reason: format!("{} values for {} states", eta.len(), spectrum.dim()),
        });
    }
    spectrum.eta_order = simplicity_order(eta);
    Ok(spectrum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn folding_examples() {
        assert_eq!(quasienergy_representative(0.0, 1.4), 0.0);
        assert_abs_diff_eq!(quasienergy_representative(TAU, 1.4), 0.0, epsilon = 1e-14);
        assert_eq!(quasienergy_representative(std::f64::consts::PI, 1.4), -0.7);
        for g in [0.1, 1.0, 3.0, 5.9] {
            let e = quasienergy_representative(g, 1.4);
            assert!((-0.7..0.7).contains(&e));
            assert_eq!(fold_quasienergy(e, 1.4), e);
            assert_abs_diff_eq!(fold_quasienergy(e + 3.0 * 1.4, 1.4), e, epsilon = 1e-14);
        }
    }

    #[test]
    fn identity_has_zero_phases() {
        let s = diagonalize_matrix(&DenseMatrix::identity(4), 1.4, &Default::default()).unwrap();
        assert!(s.eigenphases.iter().all(|g| *g == 0.0));
        assert_eq!(s.max_residual, 0.0);
        assert!(s.eigenvectors.unitarity_defect() < 1e-14);
    }

    #[test]
    fn degenerate_diagonal_gets_orthonormal_basis() {
        // two exactly degenerate blocks, mixed by a unitary rotation
        let phases = [0.3, 0.3, 0.3, 2.0, 2.0];
        let c = (0.6f64).cos();
        let s = (0.6f64).sin();
        let mut rot = DenseMatrix::identity(5);
        rot[(0, 0)] = Complex64::new(c, 0.0);
        rot[(1, 0)] = Complex64::new(0.0, s);
        rot[(0, 1)] = Complex64::new(0.0, s);
        rot[(1, 1)] = Complex64::new(c, 0.0);
        let mut d = DenseMatrix::zeros(5);
        for (j, g) in phases.iter().enumerate() {
            d[(j, j)] = Complex64::from_polar(1.0, -g);
        }
        let rot_h = DenseMatrix::from_faer(rot.as_faer().adjoint().to_owned().as_ref());
        let u = rot.matmul(&d).matmul(&rot_h);
        let spec = diagonalize_matrix(&u, 1.4, &Default::default()).unwrap();
        assert!(spec.eigenvectors.unitarity_defect() < 1e-12);
        let mut got = spec.eigenphases.clone();
        got.sort_by(f64::total_cmp);
        for (a, b) in got.iter().zip([0.3, 0.3, 0.3, 2.0, 2.0]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn ordering_examples() {
        assert_eq!(simplicity_order(&[0.5, 0.1, 0.9]), vec![1, 0, 2]);
        assert_eq!(simplicity_order(&[0.2; 4]), vec![0, 1, 2, 3]);
    }
}

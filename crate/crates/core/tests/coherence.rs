use std::f64::consts::{FRAC_PI_2, PI, TAU};

use dimer_core::coherence::{
    coherent_state, degree_of_simplicity, degree_of_simplicity_from_eigenvalues, husimi, husimi_at, husimi_direct,
    reduced_density,
};
use dimer_core::{CoherentStateSpec, HusimiGridSpec, StateVector};
use num_complex::Complex64;
use proptest::prelude::*;

fn bloch(theta: f64, phi: f64) -> [f64; 3] {
    [theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos()]
}

#[test]
fn coherent_overlap_matches_su2_formula() {
    let samples = [(0.3, -2.0, 1.1, 0.4), (FRAC_PI_2, 0.0, FRAC_PI_2, 0.2), (2.9, 1.0, 2.5, 1.3), (0.0, 0.0, 0.01, 3.0)];
    for n in [1, 7, 50, 200] {
        for (t1, f1, t2, f2) in samples {
            let state = coherent_state(&CoherentStateSpec::new(t1, f1, n).unwrap());
            let q = husimi_at(&state, t2.cos(), f2);
            let (a, b) = (bloch(t1, f1), bloch(t2, f2));
            let cos_angle: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
            let expected = (0.5 * (1.0 + cos_angle)).powi(n as i32);
            assert!((q - expected).abs() < 1e-10, "N = {n}: {q} vs {expected}");
        }
    }
}

#[test]
fn coherent_state_norm_at_large_n() {
    let state = coherent_state(&CoherentStateSpec::new(FRAC_PI_2, 0.7, 10_000).unwrap());
    assert!((state.norm() - 1.0).abs() < 1e-12);
    assert!(state.amplitudes.iter().all(|z| z.norm().is_finite()));
}

#[test]
fn coherent_states_are_pure() {
    for n in [10, 100, 1000] {
        for i in 0..20 {
            for j in 0..20 {
                let theta = PI * (i as f64 + 0.5) / 20.0;
                let phi = -PI + TAU * j as f64 / 20.0;
                let rho = reduced_density(&coherent_state(&CoherentStateSpec::new(theta, phi, n).unwrap()));
                assert!((degree_of_simplicity(&rho) - 1.0).abs() < 1e-10);
            }
        }
    }
}

#[test]
fn coherent_density_is_scaled_projector() {
    for n in [3, 40, 100] {
        let (theta, phi) = (1.1, -0.6);
        let rho = reduced_density(&coherent_state(&CoherentStateSpec::new(theta, phi, n).unwrap()));
        let u = [Complex64::new((0.5 * theta).cos(), 0.0), Complex64::from_polar((0.5 * theta).sin(), phi)];
        for j in 0..2 {
            for k in 0..2 {
                let expected = n as f64 * u[j].conj() * u[k];
                assert!((rho.entries[j][k] - expected).norm() < 1e-10 * n as f64);
            }
        }
        let [l0, l1] = rho.eigenvalues();
        assert!(l0.abs() < 1e-9 && (l1 - n as f64).abs() < 1e-9);
    }
}

#[test]
fn eta_extremes() {
    for n in [2, 10, 1000] {
        let top = StateVector::basis(n + 1, n);
        let bottom = StateVector::basis(n + 1, 0);
        let balanced = StateVector::basis(n + 1, n / 2);
        assert!((degree_of_simplicity(&reduced_density(&top)) - 1.0).abs() < 1e-12);
        assert!((degree_of_simplicity(&reduced_density(&bottom)) - 1.0).abs() < 1e-12);
        assert!(degree_of_simplicity(&reduced_density(&balanced)).abs() < 1e-12);
    }
}

#[test]
fn husimi_normalizes_on_fine_grid() {
    let grid = HusimiGridSpec::new(400, 400).unwrap();
    for (n, theta) in [(10, 0.4), (300, 2.0), (1000, FRAC_PI_2)] {
        let q = husimi(&coherent_state(&CoherentStateSpec::new(theta, 0.3, n).unwrap()), &grid);
        assert!((q.normalization() - 1.0).abs() < 1e-3, "N = {n}: {}", q.normalization());
        assert!(q.values.iter().all(|v| (0.0..=1.0 + 1e-12).contains(v)));
    }
}

#[test]
fn husimi_peaks_at_its_own_coherent_state() {
    let state = coherent_state(&CoherentStateSpec::from_imbalance(0.35, -1.2, 500).unwrap());
    assert!((husimi_at(&state, 0.35, -1.2) - 1.0).abs() < 1e-12);
}

fn random_state(raw: &[(f64, f64)]) -> Option<StateVector> {
    let amps: Vec<Complex64> = raw.iter().map(|(a, b)| Complex64::new(*a, *b)).collect();
    let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    (norm > 1e-3).then(|| StateVector::new(amps.iter().map(|z| z / norm).collect()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn eta_is_bounded_and_basis_independent(raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..80)) {
        let Some(state) = random_state(&raw) else { return Ok(()) };
        let rho = reduced_density(&state);
        let eta = degree_of_simplicity(&rho);
        prop_assert!((-1e-12..=1.0 + 1e-12).contains(&eta));
        prop_assert!((eta - degree_of_simplicity_from_eigenvalues(&rho)).abs() < 1e-12);
        prop_assert!((rho.trace() - state.n_particles() as f64).abs() < 1e-10 * state.n_particles() as f64);
    }

    #[test]
    fn fast_husimi_matches_direct(
        raw in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..60),
        n_p in 1usize..12,
        n_phi in 1usize..40,
    ) {
        let Some(state) = random_state(&raw) else { return Ok(()) };
        let grid = HusimiGridSpec::new(n_p, n_phi).unwrap();
        let fast = husimi(&state, &grid);
        let slow = husimi_direct(&state, &grid);
        for (a, b) in fast.values.iter().zip(&slow.values) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}

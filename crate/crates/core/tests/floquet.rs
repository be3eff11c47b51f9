mod common;

use common::*;
use dimer_core::coherence::eta_spectrum;
use dimer_core::floquet::{diagonalize, fold_quasienergy, order_by_simplicity, quasienergy_representative, simplicity_order};
use dimer_core::propagator::one_cycle_operator;
use dimer_core::{DimerParams, IntegratorSettings};
use proptest::prelude::*;

#[test]
fn single_particle_spectrum_matches_two_level_integration() {
    let params = DimerParams::new(1, 1.3, 0.41, 1.4).unwrap();
    let spec = diagonalize(&one_cycle_operator(&params, &IntegratorSettings::default()).unwrap()).unwrap();
    let u1 = single_particle_period(0.41, 1.4, 200_000);
    let expected = eigenphases_2x2(&u1);
    assert!(phase_multiset_distance(&spec.eigenphases, &expected) < 1e-10);
    assert!(spec.eigenvectors.unitarity_defect() < 1e-12);
    // eigenvectors of the reference: u v = exp(-i gamma) v
    for j in 0..2 {
        let v = spec.eigenvector(j);
        let lambda = c(0.0, -spec.eigenphases[j]).exp();
        for r in 0..2 {
            let uv = u1[r][0] * v[0] + u1[r][1] * v[1];
            assert!((uv - lambda * v[r]).norm() < 1e-9, "{:e}", (uv - lambda * v[r]).norm());
        }
    }
}

#[test]
fn paper_parameters_residuals_and_orthonormality() {
    let n = 300;
    let params = DimerParams::new(n, 1.3, 0.41, 1.4).unwrap();
    let spec = diagonalize(&one_cycle_operator(&params, &IntegratorSettings::default()).unwrap()).unwrap();
    assert!(spec.max_residual <= 1e-8 * ((n + 1) as f64).sqrt());
    assert!(spec.eigenvectors.unitarity_defect() < 1e-8);
    assert!(spec.eigenphases.iter().all(|g| (0.0..std::f64::consts::TAU).contains(g)));
    assert!(spec.quasienergies.iter().all(|e| (-0.7..0.7).contains(e)));
}

#[test]
fn noninteracting_extremal_states_are_fully_coherent() {
    let params = DimerParams::new(10, 0.0, 0.41, 1.4).unwrap();
    let spec = diagonalize(&one_cycle_operator(&params, &IntegratorSettings::default()).unwrap()).unwrap();
    let eta = eta_spectrum(&spec);
    let spec = order_by_simplicity(spec, &eta).unwrap();
    let top = eta[spec.raw_index(10)];
    let second = eta[spec.raw_index(9)];
    assert!((top - 1.0).abs() < 1e-8 && (second - 1.0).abs() < 1e-8, "{top} {second}");
    assert!(eta[spec.raw_index(8)] < 0.99);
}

#[test]
fn order_rejects_wrong_length() {
    let params = DimerParams::new(3, 1.3, 0.41, 1.4).unwrap();
    let spec = diagonalize(&one_cycle_operator(&params, &IntegratorSettings::default()).unwrap()).unwrap();
    assert!(order_by_simplicity(spec, &[0.1, 0.2]).is_err());
}

proptest! {
    #[test]
    fn folding_is_an_integer_shift(gamma in 0.0f64..std::f64::consts::TAU, omega in 0.2f64..5.0) {
        let raw = gamma * omega / std::f64::consts::TAU;
        let e = quasienergy_representative(gamma, omega);
        prop_assert!(-0.5 * omega <= e && e < 0.5 * omega);
        let shift = (raw - e) / omega;
        prop_assert!((shift - shift.round()).abs() < 1e-12);
        prop_assert_eq!(fold_quasienergy(e, omega), e);
    }

    #[test]
    fn ordering_commutes_with_permutation(
        eta in prop::collection::vec(0.0f64..1.0, 1..50),
        keys in prop::collection::vec(any::<u64>(), 50),
    ) {
        let n = eta.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by_key(|&i| keys[i]);
        let permuted: Vec<f64> = perm.iter().map(|&i| eta[i]).collect();
        let direct = simplicity_order(&eta);
        let via: Vec<usize> = simplicity_order(&permuted).iter().map(|&i| perm[i]).collect();
        let direct_vals: Vec<f64> = direct.iter().map(|&i| eta[i]).collect();
        let via_vals: Vec<f64> = via.iter().map(|&i| eta[i]).collect();
        prop_assert_eq!(direct_vals, via_vals);
        let mut distinct = eta.clone();
        distinct.sort_by(f64::total_cmp);
        distinct.dedup();
        if distinct.len() == n {
            prop_assert_eq!(direct, via);
        }
    }
}

use std::f64::consts::{PI, TAU};

use dimer_core::meanfield::{
    build_section, curve_family, ebk_quantize, find_periodic_orbit, integrate_gpe, integrate_pendulum, map_jacobian,
    mf_energy, poincare_map, quantize_island, scan_island, trace_invariant_curve, CurveSettings, EbkSettings, MeanFieldAmplitudes,
    MeanFieldSettings, PhasePoint, Stability,
};
use dimer_core::{DimerParams, MeanFieldParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn paper() -> MeanFieldParams {
    MeanFieldParams::new(1.3, 0.41, 1.4).unwrap()
}

fn main_island() -> PhasePoint {
    find_periodic_orbit(&PhasePoint::new(0.0, -2.2), &paper(), &MeanFieldSettings::default()).unwrap().fixed_point
}

#[test]
fn gpe_norm_is_conserved_over_a_thousand_periods() {
    let params = paper();
    let settings = MeanFieldSettings::default();
    for x in [PhasePoint::new(0.3, 1.0), PhasePoint::new(-0.9, -2.0), PhasePoint::new(0.99, 0.0)] {
        let c0 = MeanFieldAmplitudes::from_phase_point(x);
        let c = integrate_gpe(&c0, &params, &settings, 0.0, 1000.0 * params.period()).unwrap();
        assert!((c.norm_sqr() - 1.0).abs() < 1e-10, "{:e}", c.norm_sqr() - 1.0);
    }
}

#[test]
fn undriven_energy_is_conserved_over_a_thousand_periods() {
    let params = MeanFieldParams::new(1.3, 0.0, 1.4).unwrap();
    let settings = MeanFieldSettings::default();
    for x in [PhasePoint::new(0.3, 1.0), PhasePoint::new(-0.5, 2.8), PhasePoint::new(0.8, -0.2)] {
        let e0 = mf_energy(&x, &params, 0.0);
        let mut y = x;
        for _ in 0..1000 {
            y = poincare_map(&y, &params, &settings).unwrap();
        }
        let drift = (mf_energy(&y, &params, 0.0) - e0).abs();
        assert!(drift < 1e-9, "{drift:e}");
    }
}

#[test]
fn pendulum_and_amplitude_charts_agree() {
    let params = paper();
    let settings = MeanFieldSettings::default();
    let center = main_island();
    let pi_island = find_periodic_orbit(&PhasePoint::new(0.85, 3.1), &params, &settings).unwrap().fixed_point;
    // regular orbits: chaotic ones separate from any perturbation
    let seeds = [
        PhasePoint::new(center.p + 0.05, center.phi),
        PhasePoint::new(center.p - 0.25, center.phi),
        PhasePoint::new(pi_island.p + 0.01, pi_island.phi),
    ];
    for x in seeds {
        let t1 = 100.0 * params.period();
        let a = integrate_pendulum(&x, &params, &settings, 0.0, t1).unwrap();
        let b = integrate_gpe(&MeanFieldAmplitudes::from_phase_point(x), &params, &settings, 0.0, t1)
            .unwrap()
            .phase_point();
        let dp = (a.p - b.p).abs();
        let dphi = dimer_core::meanfield::wrap_phase(a.phi - b.phi).abs();
        assert!(dp < 1e-8 && dphi < 1e-8, "{dp:e} {dphi:e}");
    }
}

#[test]
fn map_is_area_preserving() {
    let params = paper();
    let settings = MeanFieldSettings::default();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let x = PhasePoint::new(rng.gen_range(-0.95..0.95), rng.gen_range(-PI..PI));
        let (_, j) = map_jacobian(&x, &params, &settings).unwrap();
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        assert!((det - 1.0).abs() < 1e-6, "{x:?}: {det}");
    }
}

#[test]
fn island_centres_are_elliptic() {
    let params = paper();
    let settings = MeanFieldSettings::default();
    let main = find_periodic_orbit(&PhasePoint::new(0.05, -2.1), &params, &settings).unwrap();
    assert!(main.is_elliptic() && main.trace.abs() < 2.0, "{main:?}");
    assert!((main.determinant - 1.0).abs() < 1e-6);
    for sign in [1.0, -1.0] {
        let pi_island = find_periodic_orbit(&PhasePoint::new(sign * 0.85, PI - 0.05), &params, &settings).unwrap();
        assert!(pi_island.is_elliptic(), "{pi_island:?}");
        assert!(pi_island.fixed_point.phi.abs() > 3.0);
        assert!((pi_island.fixed_point.p - sign * 0.8337).abs() < 1e-3);
    }
}

#[test]
fn undriven_map_has_centre_fixed_point() {
    let params = MeanFieldParams::new(1.3, 0.0, 1.4).unwrap();
    let image = poincare_map(&PhasePoint::new(0.0, 0.0), &params, &MeanFieldSettings::default()).unwrap();
    assert_eq!(image, PhasePoint::new(0.0, 0.0));
}

#[test]
fn hyperbolic_points_are_classified() {
    let orbit = find_periodic_orbit(&PhasePoint::new(0.0, 2.8), &paper(), &MeanFieldSettings::default()).unwrap();
    assert!(matches!(orbit.stability, Stability::Hyperbolic { .. }), "{orbit:?}");
}

fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    // Newton on P_n from Chebyshev guesses
    (0..n)
        .map(|i| {
            let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
                let dx = p1 / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            (x, 2.0 / ((1.0 - x * x) * dp * dp))
        })
        .collect()
}

/// `(1 / 2 pi)` times the area of the undriven level set `H = energy`
/// around the origin.
fn level_set_action(alpha: f64, energy: f64) -> f64 {
    let phi_max = (-energy).acos();
    let upper = |phi: f64| -> f64 {
        let c2 = phi.cos().powi(2);
        let b = c2 - 2.0 * alpha * energy;
        let disc = (b * b - 4.0 * alpha * alpha * (energy * energy - c2)).max(0.0);
        ((-b + disc.sqrt()) / (2.0 * alpha * alpha)).max(0.0).sqrt()
    };
    // phi = phi_max sin t removes the square-root endpoints
    let area: f64 = gauss_legendre(200)
        .iter()
        .map(|(x, w)| {
            let t = 0.5 * PI * x;
            w * 0.5 * PI * phi_max * t.cos() * 2.0 * upper(phi_max * t.sin())
        })
        .sum();
    area / TAU
}

#[test]
fn undriven_curve_action_matches_level_set_area() {
    let params = MeanFieldParams::new(1.3, 0.0, 1.4).unwrap();
    let settings = MeanFieldSettings::default();
    let center = PhasePoint::new(0.0, 0.0);
    for seed in [PhasePoint::new(0.0, 0.3), PhasePoint::new(0.0, 0.7)] {
        let curve = trace_invariant_curve(&seed, &center, &params, &settings, &CurveSettings::default()).unwrap();
        let expected = level_set_action(1.3, mf_energy(&seed, &params, 0.0));
        assert!((curve.action - expected).abs() < 1e-6, "{} vs {expected}", curve.action);
    }
}

#[test]
fn action_does_not_depend_on_seed_phase() {
    let params = paper();
    let settings = MeanFieldSettings::default();
    let center = main_island();
    let curve_settings = CurveSettings::default();
    let seed = PhasePoint::new(center.p + 0.1, center.phi);
    let first = trace_invariant_curve(&seed, &center, &params, &settings, &curve_settings).unwrap();
    let mut later = seed;
    for _ in 0..777 {
        later = poincare_map(&later, &params, &settings).unwrap();
    }
    let second = trace_invariant_curve(&later, &center, &params, &settings, &curve_settings).unwrap();
    assert!((first.action - second.action).abs() < 1e-6, "{} vs {}", first.action, second.action);
}

#[test]
fn actions_grow_along_the_seed_ray() {
    let params = paper();
    let settings = MeanFieldSettings::default();
    let center = main_island();
    let radii = [0.02, 0.05, 0.1, 0.15, 0.2];
    let curves = curve_family(&center, &radii, &params, &settings, &EbkSettings::default());
    let actions: Vec<f64> = curves.iter().map(|c| c.as_ref().unwrap().action).collect();
    assert!(actions.windows(2).all(|w| w[1] > w[0]), "{actions:?}");
    assert!(actions[0] > 0.0);
}

#[test]
fn ebk_ground_curve_at_hundred_particles() {
    let params = paper();
    let center = main_island();
    let out = ebk_quantize(&center, 100, 0, &params, &MeanFieldSettings::default(), &EbkSettings::default()).unwrap();
    assert_eq!(out[0].target_action, 0.01);
    let result = out[0].result.as_ref().unwrap();
    assert!(result.residual <= 1e-6 * 0.01);
    assert!(result.seed_radius > 0.0 && result.seed_radius < 0.2);
}

#[test]
fn quantizable_states_scale_with_particle_number() {
    let params = paper();
    let settings = MeanFieldSettings::default();
    let center = main_island();
    let ebk = EbkSettings {
        curve: CurveSettings { n_strobes: 500, ..Default::default() },
        rel_tol: 1e-3,
        scan_points: 16,
        ..Default::default()
    };
    let mut scan = scan_island(&center, &params, &settings, &ebk).unwrap();
    let counts: Vec<usize> = [500, 1000, 2000]
        .iter()
        .map(|n| {
            let out = quantize_island(&mut scan, *n, 10_000, &params, &settings, &ebk).unwrap();
            out.iter().filter(|o| o.result.is_ok()).count()
        })
        .collect();
    let ratio_a = counts[1] as f64 / counts[0] as f64;
    let ratio_b = counts[2] as f64 / counts[1] as f64;
    assert!((ratio_a - 2.0).abs() < 0.3 && (ratio_b - 2.0).abs() < 0.3, "{counts:?}");
}

#[test]
fn section_ignores_particle_number() {
    let seeds = [PhasePoint::new(0.1, 0.2), PhasePoint::new(-0.6, 2.0), PhasePoint::new(0.999_9, -1.0)];
    let a = DimerParams::new(100, 1.3, 0.41, 1.4).unwrap();
    let b = DimerParams::new(1000, 1.3, 0.41, 1.4).unwrap();
    let settings = MeanFieldSettings::default();
    let sa = build_section(&seeds, 20, &a.mean_field(), &settings).unwrap();
    let sb = build_section(&seeds, 20, &b.mean_field(), &settings).unwrap();
    assert_eq!(sa, sb);
    assert!(sa.orbits.iter().all(|o| o.error.is_none() && o.points.len() == 21));
}

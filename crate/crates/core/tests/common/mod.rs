#![allow(dead_code)]

use std::f64::consts::TAU;

use num_complex::Complex64;

pub type C = Complex64;

pub fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// One particle on two sites: site energies `-f` and `+f` (site order as in
/// the Fock label `m`), hopping `-1/2`, `f = mu sin(omega tau)`.
fn single_particle_h(mu: f64, omega: f64, tau: f64) -> [[f64; 2]; 2] {
    let f = mu * (omega * tau).sin();
    [[-f, -0.5], [-0.5, f]]
}

fn apply_2x2(h: &[[f64; 2]; 2], v: &[C; 2]) -> [C; 2] {
    let i = c(0.0, 1.0);
    [
        -i * (h[0][0] * v[0] + h[0][1] * v[1]),
        -i * (h[1][0] * v[0] + h[1][1] * v[1]),
    ]
}

/// Classical RK4 for the single-particle problem over one drive period.
/// Returns `u[i][j] = <i|u|j>`.
pub fn single_particle_period(mu: f64, omega: f64, steps: usize) -> [[C; 2]; 2] {
    let period = TAU / omega;
    let h = period / steps as f64;
    let mut u = [[C::default(); 2]; 2];
    for j in 0..2 {
        let mut v = [C::default(); 2];
        v[j] = c(1.0, 0.0);
        for s in 0..steps {
            let t = s as f64 * h;
            let k1 = apply_2x2(&single_particle_h(mu, omega, t), &v);
            let v2 = [v[0] + 0.5 * h * k1[0], v[1] + 0.5 * h * k1[1]];
            let k2 = apply_2x2(&single_particle_h(mu, omega, t + 0.5 * h), &v2);
            let v3 = [v[0] + 0.5 * h * k2[0], v[1] + 0.5 * h * k2[1]];
            let k3 = apply_2x2(&single_particle_h(mu, omega, t + 0.5 * h), &v3);
            let v4 = [v[0] + h * k3[0], v[1] + h * k3[1]];
            let k4 = apply_2x2(&single_particle_h(mu, omega, t + h), &v4);
            for r in 0..2 {
                v[r] += h / 6.0 * (k1[r] + 2.0 * k2[r] + 2.0 * k3[r] + k4[r]);
            }
        }
        u[0][j] = v[0];
        u[1][j] = v[1];
    }
    u
}

/// Eigenphases `gamma` (eigenvalue `exp(-i gamma)`) of a 2x2 unitary.
pub fn eigenphases_2x2(u: &[[C; 2]; 2]) -> [f64; 2] {
    let tr = u[0][0] + u[1][1];
    let det = u[0][0] * u[1][1] - u[0][1] * u[1][0];
    let disc = (tr * tr - 4.0 * det).sqrt();
    let l1 = 0.5 * (tr + disc);
    let l2 = 0.5 * (tr - disc);
    [(-l1.arg()).rem_euclid(TAU), (-l2.arg()).rem_euclid(TAU)]
}

fn poly_mul(a: &[C], b: &[C]) -> Vec<C> {
    let mut out = vec![C::default(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn ln_factorial(n: usize) -> f64 {
    (1..=n).map(|k| (k as f64).ln()).sum()
}

/// `U_N = u^{(x) N}` restricted to the symmetric subspace, in the Fock basis
/// `|m>` with `m` particles in single-particle state 1. Row-major `[m'][m]`.
/// Built from `a_j^+ -> sum_i u_ij a_i^+` by expanding
/// `(u11 x + u01 y)^m (u10 x + u00 y)^(N-m)` in powers of `x`.
pub fn symmetric_power(u: &[[C; 2]; 2], n: usize) -> Vec<Vec<C>> {
    // polynomials in x, coefficient index = power of x
    let one = [u[0][1], u[1][1]];
    let zero = [u[0][0], u[1][0]];
    let mut out = vec![vec![C::default(); n + 1]; n + 1];
    for m in 0..=n {
        let mut poly = vec![c(1.0, 0.0)];
        for _ in 0..m {
            poly = poly_mul(&poly, &one);
        }
        for _ in 0..n - m {
            poly = poly_mul(&poly, &zero);
        }
        let norm_in = ln_factorial(m) + ln_factorial(n - m);
        for (mp, coeff) in poly.iter().enumerate() {
            let norm_out = ln_factorial(mp) + ln_factorial(n - mp);
            out[mp][m] = coeff * (0.5 * (norm_out - norm_in)).exp();
        }
    }
    out
}

/// Jacobi eigenvalue sweep for small dense symmetric matrices.
pub fn jacobi_eigenvalues(mut a: Vec<Vec<f64>>) -> Vec<f64> {
    let n = a.len();
    for _ in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[i][j] * a[i][j];
                }
            }
        }
        if off < 1e-28 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = if theta == 0.0 { 1.0 } else { theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt()) };
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cs * akp - sn * akq;
                    a[k][q] = sn * akp + cs * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cs * apk - sn * aqk;
                    a[q][k] = sn * apk + cs * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Static two-site Hamiltonian written out from the occupation-number
/// matrix elements, independent of the library's builder.
pub fn dense_static_hamiltonian(n: usize, alpha: f64) -> Vec<Vec<f64>> {
    let mut h = vec![vec![0.0; n + 1]; n + 1];
    let nf = n as f64;
    for m in 0..=n {
        let (n1, n2) = (m as f64, (n - m) as f64);
        // kappa (n1 (n1 - 1) + n2 (n2 - 1)) with kappa / Omega = alpha / N
        h[m][m] = alpha / nf * (n1 * (n1 - 1.0) + n2 * (n2 - 1.0));
        if m < n {
            let hop = -0.5 * ((n1 + 1.0) * n2).sqrt();
            h[m + 1][m] = hop;
            h[m][m + 1] = hop;
        }
    }
    h
}

fn circ_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(TAU);
    d.min(TAU - d)
}

/// Largest deviation between two equally sized multisets of phases on the
/// circle, minimised over the cyclic alignments of their sorted orders.
pub fn phase_multiset_distance(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let mut x: Vec<f64> = a.iter().map(|g| g.rem_euclid(TAU)).collect();
    let mut y: Vec<f64> = b.iter().map(|g| g.rem_euclid(TAU)).collect();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let n = x.len();
    (0..n)
        .map(|shift| (0..n).map(|i| circ_dist(x[i], y[(i + shift) % n])).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

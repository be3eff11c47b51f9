//! Invariant curves around an elliptic fixed point, their actions, and the
//! action coordinate interpolated between a family of such curves.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{poincare_map, wrap_phase, MeanFieldSettings, PhasePoint};
use crate::error::{Error, Result};
use crate::model::MeanFieldParams;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CurveSettings {
    pub n_strobes: usize,
    /// Iteration continues in blocks of `n_strobes` up to this many strobes
    /// while the iterates still leave an angular gap wider than `max_angle_gap`.
    pub max_strobes: usize,
    /// Bound on the excess total variation of the radius along the sorted
    /// iterates, relative to the mean radius.
    pub max_roughness: f64,
    /// Largest allowed angular gap between consecutive sorted iterates.
    pub max_angle_gap: f64,
}

impl Default for CurveSettings {
    fn default() -> Self {
        Self { n_strobes: 2000, max_strobes: 16_000, max_roughness: 0.5, max_angle_gap: 0.25 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantCurve {
    pub center: PhasePoint,
    pub seed: PhasePoint,
    /// Iterates sorted by polar angle about `center`; the polyline closes
    /// from the last point back to the first.
    pub points: Vec<PhasePoint>,
    /// `(1 / 2 pi) |oint p dphi|` from the polar quadrature of the sorted
    /// iterates.
    pub action: f64,
    /// The same integral over the straight-chord polygon (shoelace).
    pub polygon_action: f64,
    pub roughness: f64,
    pub max_angle_gap: f64,
}

/// Offset `(dphi, dp)` of `x` from `center`, phase wrapped.
pub(crate) fn offset(x: &PhasePoint, center: &PhasePoint) -> (f64, f64) {
    (wrap_phase(x.phi - center.phi), x.p - center.p)
}

pub(crate) fn polar(x: &PhasePoint, center: &PhasePoint) -> (f64, f64) {
    let (u, v) = offset(x, center);
    (v.atan2(u), u.hypot(v))
}

/// Shoelace area of the closed polygon through `(dphi, dp)` offsets.
fn enclosed_area(offsets: &[(f64, f64)]) -> f64 {
    let n = offsets.len();
    let mut twice = 0.0;
    for i in 0..n {
        let (x0, y0) = offsets[i];
        let (x1, y1) = offsets[(i + 1) % n];
        twice += x0 * y1 - x1 * y0;
    }
    0.5 * twice.abs()
}

/// `(1/2) oint r^2 dtheta` over samples sorted by angle. Each interval is
/// integrated exactly for the cubic through its two endpoints and their outer
/// neighbours, so clustered iterates with wide gaps between the clusters
/// still give a fourth-order result. The chord polygon is second order.
fn polar_area(samples: &[(f64, f64)]) -> f64 {
    const NODES: [f64; 3] = [-0.774_596_669_241_483_4, 0.0, 0.774_596_669_241_483_4];
    const WEIGHTS: [f64; 3] = [5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0];
    let n = samples.len() as isize;
    let node = |i: isize| -> (f64, f64) {
        let (a, r) = samples[i.rem_euclid(n) as usize];
        (a + TAU * i.div_euclid(n) as f64, 0.5 * r * r)
    };
    let mut area = 0.0;
    for i in 0..n {
        let pts = [node(i - 1), node(i), node(i + 1), node(i + 2)];
        let (a, b) = (pts[1].0, pts[2].0);
        if b <= a {
            continue;
        }
        // duplicated angles make the cubic singular; use the trapezoid there
        if pts[1].0 - pts[0].0 <= 1e-12 * (b - a) || pts[3].0 - pts[2].0 <= 1e-12 * (b - a) {
            area += 0.5 * (b - a) * (pts[1].1 + pts[2].1);
            continue;
        }
        let cubic = |x: f64| -> f64 {
            (0..4)
                .map(|j| {
                    let basis: f64 = (0..4).filter(|&m| m != j).map(|m| (x - pts[m].0) / (pts[j].0 - pts[m].0)).product();
                    basis * pts[j].1
                })
                .sum()
        };
        let half = 0.5 * (b - a);
        area += half * NODES.iter().zip(WEIGHTS).map(|(t, w)| w * cubic(a + half * (1.0 + t))).sum::<f64>();
    }
    area
}

fn total_variation(r: &[f64], stride: usize) -> f64 {
    let sub: Vec<f64> = r.iter().step_by(stride).copied().collect();
    let n = sub.len();
    (0..n).map(|i| (sub[(i + 1) % n] - sub[i]).abs()).sum()
}

/// Sorts strobe points into a closed curve about `center` and checks that
/// they lie on one smooth star-shaped curve.
pub fn curve_from_points(center: &PhasePoint, seed: &PhasePoint, points: &[PhasePoint], settings: &CurveSettings) -> Result<InvariantCurve> {
    if points.len() < 16 {
        return Err(Error::NotRegular(format!("only {} iterates", points.len())));
    }
    let mut sorted: Vec<(f64, f64, PhasePoint)> = points
        .iter()
        .map(|x| {
            let (angle, r) = polar(x, center);
            (angle, r, *x)
        })
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    let mut max_gap: f64 = 0.0;
    for i in 0..n {
        let next = if i + 1 < n { sorted[i + 1].0 } else { sorted[0].0 + TAU };
        max_gap = max_gap.max(next - sorted[i].0);
    }
    let radii: Vec<f64> = sorted.iter().map(|s| s.1).collect();
    let mean_r = radii.iter().sum::<f64>() / n as f64;
    if !(mean_r > 0.0) {
        return Err(Error::NotRegular("iterates sit on the centre".into()));
    }
    let roughness = (total_variation(&radii, 1) - total_variation(&radii, 8)) / mean_r;
    if max_gap > settings.max_angle_gap {
        return Err(Error::NotRegular(format!("iterates leave an angular gap of {max_gap:.3} rad about the centre")));
    }
    if !(roughness <= settings.max_roughness) {
        return Err(Error::NotRegular(format!("iterates fill an area (roughness {roughness:.3})")));
    }
    let offsets: Vec<(f64, f64)> = sorted.iter().map(|s| offset(&s.2, center)).collect();
    let polar_samples: Vec<(f64, f64)> = sorted.iter().map(|s| (s.0, s.1)).collect();
    Ok(InvariantCurve {
        center: *center,
        seed: *seed,
        points: sorted.into_iter().map(|s| s.2).collect(),
        action: polar_area(&polar_samples) / TAU,
        polygon_action: enclosed_area(&offsets) / TAU,
        roughness,
        max_angle_gap: max_gap,
    })
}

/// Result of following one seed.
pub(crate) enum Traced {
    Curve(InvariantCurve),
    /// Bounded but not on a single smooth curve about the centre.
    Irregular(Error),
    /// Left the neighbourhood of the centre.
    Escaped(Error),
}

fn max_gap_of(points: &[PhasePoint], center: &PhasePoint) -> f64 {
    let mut angles: Vec<f64> = points.iter().map(|x| polar(x, center).0).collect();
    angles.sort_by(f64::total_cmp);
    let n = angles.len();
    (0..n).map(|i| if i + 1 < n { angles[i + 1] - angles[i] } else { angles[0] + TAU - angles[i] }).fold(0.0, f64::max)
}

pub(crate) fn follow(
    seed: &PhasePoint,
    center: &PhasePoint,
    params: &MeanFieldParams,
    settings: &MeanFieldSettings,
    curve: &CurveSettings,
) -> Result<Traced> {
    let mut x = PhasePoint::new(seed.p, seed.phi);
    let mut points = Vec::with_capacity(curve.n_strobes);
    points.push(x);
    // an orbit leaving the neighbourhood of the centre cannot encircle it
    let (_, r0) = polar(&x, center);
    let block = curve.n_strobes.max(16);
    let mut target = block;
    loop {
        while points.len() < target {
            x = poincare_map(&x, params, settings)?;
            let (_, r) = polar(&x, center);
            if r > 4.0 * r0 + 0.5 {
                return Ok(Traced::Escaped(Error::NotRegular(format!("orbit escapes to distance {r:.3} from the centre"))));
            }
            points.push(x);
        }
        // near-resonant tori need more strobes to close their gaps
        if target >= curve.max_strobes || max_gap_of(&points, center) <= curve.max_angle_gap {
            break;
        }
        target = (target + block).min(curve.max_strobes.max(block));
    }
    Ok(match curve_from_points(center, seed, &points, curve) {
        Ok(c) => Traced::Curve(c),
        Err(e) => Traced::Irregular(e),
    })
}

/// Follows `seed` for at least `n_strobes` periods and closes the iterates
/// into a curve about the fixed point `center`.
pub fn trace_invariant_curve(
    seed: &PhasePoint,
    center: &PhasePoint,
    params: &MeanFieldParams,
    settings: &MeanFieldSettings,
    curve: &CurveSettings,
) -> Result<InvariantCurve> {
    match follow(seed, center, params, settings, curve)? {
        Traced::Curve(c) => Ok(c),
        Traced::Irregular(e) | Traced::Escaped(e) => Err(e),
    }
}

/// Radius of a closed sorted curve in direction `angle`, by linear
/// interpolation between neighbouring iterates.
fn radius_towards(curve: &[(f64, f64)], angle: f64) -> f64 {
    let n = curve.len();
    let idx = curve.partition_point(|(a, _)| *a < angle);
    let (a0, r0, a1, r1) = if idx == 0 {
        let last = curve[n - 1];
        (last.0 - TAU, last.1, curve[0].0, curve[0].1)
    } else if idx == n {
        let first = curve[0];
        (curve[n - 1].0, curve[n - 1].1, first.0 + TAU, first.1)
    } else {
        (curve[idx - 1].0, curve[idx - 1].1, curve[idx].0, curve[idx].1)
    };
    if a1 - a0 <= 0.0 {
        return r0;
    }
    r0 + (r1 - r0) * (angle - a0) / (a1 - a0)
}

/// Action coordinate around one fixed point, interpolated between nested
/// invariant curves. Inside the innermost curve the action grows with the
/// squared radius; outside the outermost curve it is undefined.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionMap {
    center: PhasePoint,
    /// `(angle, radius)` samples per curve, sorted by angle, with the action.
    curves: Vec<(Vec<(f64, f64)>, f64)>,
}

impl ActionMap {
    pub fn new(center: &PhasePoint, curves: &[InvariantCurve]) -> Result<Self> {
        if curves.is_empty() {
            return Err(Error::NoCurve { target: 0.0, reason: "an action map needs at least one curve".into() });
        }
        let mut family: Vec<(Vec<(f64, f64)>, f64)> = curves
            .iter()
            .map(|c| {
                let mut samples: Vec<(f64, f64)> = c.points.iter().map(|x| polar(x, center)).collect();
                samples.sort_by(|a, b| a.0.total_cmp(&b.0));
                (samples, c.action)
            })
            .collect();
        family.sort_by(|a, b| a.1.total_cmp(&b.1));
        Ok(Self { center: *center, curves: family })
    }

    pub fn center(&self) -> PhasePoint {
        self.center
    }

    pub fn max_action(&self) -> f64 {
        self.curves.last().map(|c| c.1).unwrap_or(0.0)
    }

    pub fn action_at(&self, p: f64, phi: f64) -> Option<f64> {
        let (angle, rho) = polar(&PhasePoint { p, phi }, &self.center);
        let mut inner_r = 0.0;
        let mut inner_a = 0.0;
        for (samples, action) in &self.curves {
            let r = radius_towards(samples, angle);
            if rho <= r {
                let t = (rho * rho - inner_r * inner_r) / (r * r - inner_r * inner_r);
                return Some(inner_a + t * (action - inner_a));
            }
            if r > inner_r {
                inner_r = r;
                inner_a = *action;
            }
        }
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn ellipse(a: f64, b: f64, n: usize) -> Vec<PhasePoint> {
        // golden-angle sampling mimics a quasi-periodic rotation
        let golden = PI * (3.0 - 5f64.sqrt());
        (0..n).map(|k| {
            let t = golden * k as f64;
            PhasePoint::new(0.1 + b * t.sin(), 0.2 + a * t.cos())
        }).collect()
    }

    #[test]
    fn ellipse_action_is_area_over_two_pi() {
        let center = PhasePoint::new(0.1, 0.2);
        let pts = ellipse(0.3, 0.1, 4000);
        let curve = curve_from_points(&center, &pts[0], &pts, &CurveSettings::default()).unwrap();
        assert_abs_diff_eq!(curve.action, 0.3 * 0.1 / 2.0, epsilon = 1e-7);
    }

    #[test]
    fn scattered_points_are_rejected() {
        let center = PhasePoint::new(0.0, 0.0);
        let pts: Vec<PhasePoint> = (0..2000)
            .map(|k| {
                let t = 2.399_963 * k as f64;
                let r = 0.05 + 0.05 * ((k * 7919) % 1000) as f64 / 1000.0;
                PhasePoint::new(r * t.sin(), r * t.cos())
            })
            .collect();
        assert!(matches!(curve_from_points(&center, &pts[0], &pts, &CurveSettings::default()), Err(Error::NotRegular(_))));
    }

    #[test]
    fn action_map_interpolates_between_ellipses() {
        let center = PhasePoint::new(0.1, 0.2);
        let settings = CurveSettings::default();
        let curves: Vec<InvariantCurve> = [0.1, 0.2, 0.3]
            .iter()
            .map(|s| {
                let pts = ellipse(*s, 0.5 * s, 3000);
                curve_from_points(&center, &pts[0], &pts, &settings).unwrap()
            })
            .collect();
        let map = ActionMap::new(&center, &curves).unwrap();
        // concentric similar ellipses: action is exactly quadratic in scale
        let a = map.action_at(0.1 + 0.5 * 0.15, 0.2).unwrap();
        assert_abs_diff_eq!(a, 0.15 * 0.075 / 2.0, epsilon = 1e-6);
        let inner = map.action_at(0.1, 0.2 + 0.05).unwrap();
        assert_abs_diff_eq!(inner, 0.05 * 0.025 / 2.0, epsilon = 1e-6);
        assert!(map.action_at(0.1, 0.2 + 0.31).is_none());
    }
}

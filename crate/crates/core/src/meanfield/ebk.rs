//! Semiclassical quantization of invariant curves around an elliptic fixed
//! point: `(1 / 2 pi) oint p dphi = hbar_eff (k + 1/2)` with `hbar_eff = 2 / N`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::{follow, trace_invariant_curve, CurveSettings, InvariantCurve, Traced};
use super::{MeanFieldSettings, PhasePoint};
use crate::error::{Error, Result};
use crate::model::MeanFieldParams;

pub fn hbar_eff(n_particles: usize) -> f64 {
    2.0 / n_particles as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EbkSettings {
    pub curve: CurveSettings,
    /// Seed ray from the fixed point as `(dphi, dp)`.
    pub direction: (f64, f64),
    /// Accepted `|action - target| / target`.
    pub rel_tol: f64,
    pub max_iter: usize,
    /// First probe radius of the outward search for the island edge.
    pub r_start: f64,
    /// Evenly spaced radii traced inside the edge before root finding.
    pub scan_points: usize,
}

impl Default for EbkSettings {
    fn default() -> Self {
        Self {
            curve: CurveSettings::default(),
            direction: (0.0, 1.0),
            rel_tol: 1e-6,
            max_iter: 60,
            r_start: 1e-3,
            scan_points: 32,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EbkResult {
    pub k: usize,
    pub target_action: f64,
    pub achieved_action: f64,
    pub residual: f64,
    pub seed_radius: f64,
    pub curve: InvariantCurve,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EbkOutcome {
    pub k: usize,
    pub target_action: f64,
    pub result: Result<EbkResult>,
}

fn seed_on_ray(center: &PhasePoint, direction: (f64, f64), r: f64) -> PhasePoint {
    let norm = direction.0.hypot(direction.1);
    PhasePoint::new(center.p + r * direction.1 / norm, center.phi + r * direction.0 / norm)
}

/// Invariant curves seeded at the given distances along the ray, in order.
pub fn curve_family(
    center: &PhasePoint,
    radii: &[f64],
    params: &MeanFieldParams,
    settings: &MeanFieldSettings,
    ebk: &EbkSettings,
) -> Vec<Result<InvariantCurve>> {
    radii
        .par_iter()
        .map(|r| trace_invariant_curve(&seed_on_ray(center, ebk.direction, *r), center, params, settings, &ebk.curve))
        .collect()
}

/// Regular curves along the seed ray of one island, up to its edge.
#[derive(Debug, Clone, PartialEq)]
pub struct IslandScan {
    pub center: PhasePoint,
    pub direction: (f64, f64),
    /// Regular curves inside the edge, sorted by seed radius.
    pub regular: Vec<(f64, InvariantCurve)>,
    /// Radii whose orbits stay bounded without forming a curve.
    pub irregular: Vec<f64>,
    /// Smallest radius seen to escape, if any.
    pub edge: Option<f64>,
}

impl IslandScan {
    /// Largest action among the regular curves.
    pub fn capacity(&self) -> f64 {
        self.regular.iter().map(|(_, c)| c.action).fold(0.0, f64::max)
    }

    pub fn curves(&self) -> Vec<InvariantCurve> {
        self.regular.iter().map(|(_, c)| c.clone()).collect()
    }

    fn record(&mut self, r: f64, traced: Traced) -> Option<InvariantCurve> {
        match traced {
            Traced::Curve(c) => {
                if self.edge.is_some_and(|e| r >= e) {
                    return None;
                }
                let pos = self.regular.partition_point(|(x, _)| *x < r);
                self.regular.insert(pos, (r, c.clone()));
                Some(c)
            }
            Traced::Irregular(_) => {
                self.irregular.push(r);
                None
            }
            Traced::Escaped(_) => {
                self.edge = Some(self.edge.map_or(r, |e| e.min(r)));
                self.regular.retain(|(x, _)| *x < r);
                None
            }
        }
    }

    fn trace(&mut self, r: f64, params: &MeanFieldParams, settings: &MeanFieldSettings, ebk: &EbkSettings) -> Result<Option<InvariantCurve>> {
        if let Some(hit) = self.regular.iter().find(|(x, _)| *x == r) {
            return Ok(Some(hit.1.clone()));
        }
        let traced = follow(&seed_on_ray(&self.center, self.direction, r), &self.center, params, settings, &ebk.curve)?;
        Ok(self.record(r, traced))
    }

    /// Adjacent regular radii whose actions straddle `target`.
    fn bracket(&self, target: f64) -> Option<((f64, f64), (f64, f64))> {
        let mut lo = (0.0, 0.0);
        for (r, c) in &self.regular {
            if c.action >= target {
                return Some((lo, (*r, c.action)));
            }
            lo = (*r, c.action);
        }
        None
    }
}

/// Locates the island edge along the ray by doubling from `r_start`, then
/// traces `scan_points` evenly spaced radii inside it.
pub fn scan_island(
    center: &PhasePoint,
    params: &MeanFieldParams,
    settings: &MeanFieldSettings,
    ebk: &EbkSettings,
) -> Result<IslandScan> {
    params.validate()?;
    let mut scan = IslandScan { center: *center, direction: ebk.direction, regular: Vec::new(), irregular: Vec::new(), edge: None };
    let mut r = ebk.r_start;
    let mut inside = 0.0;
    // the ray leaves the phase plane after a distance of at most 2
    while r <= 2.0 && scan.edge.is_none() {
        let seed = seed_on_ray(center, ebk.direction, r);
        if seed.p.abs() >= 1.0 {
            break;
        }
        let traced = scan.trace(r, params, settings, ebk)?;
        if traced.is_some() || scan.edge.is_none() {
            inside = r;
        }
        r *= 2.0;
    }
    let outer = scan.edge.unwrap_or(r.min(2.0));
    // tighten the edge
    let mut hi = outer;
    for _ in 0..4 {
        let mid = 0.5 * (inside + hi);
        if seed_on_ray(center, ebk.direction, mid).p.abs() >= 1.0 {
            hi = mid;
            continue;
        }
        scan.trace(mid, params, settings, ebk)?;
        if scan.edge.is_some_and(|e| e <= mid) {
            hi = mid;
        } else {
            inside = mid;
        }
    }
    let edge = scan.edge.unwrap_or(hi);
    let radii: Vec<f64> = (1..=ebk.scan_points).map(|i| edge * i as f64 / (ebk.scan_points + 1) as f64).collect();
    let traced: Vec<Result<Traced>> = radii
        .par_iter()
        .map(|r| follow(&seed_on_ray(center, ebk.direction, *r), center, params, settings, &ebk.curve))
        .collect();
    for (r, t) in radii.iter().zip(traced) {
        scan.record(*r, t?);
    }
    Ok(scan)
}

fn solve(
    scan: &mut IslandScan,
    k: usize,
    target: f64,
    params: &MeanFieldParams,
    settings: &MeanFieldSettings,
    ebk: &EbkSettings,
) -> Result<EbkResult> {
    let tol = ebk.rel_tol * target;
    let no_curve = |reason: &str| Error::NoCurve { target, reason: reason.into() };
    let found = |r: f64, c: &InvariantCurve| EbkResult {
        k,
        target_action: target,
        achieved_action: c.action,
        residual: (c.action - target).abs(),
        seed_radius: r,
        curve: c.clone(),
    };
    let Some((mut lo, mut hi)) = scan.bracket(target) else {
        return Err(no_curve("the quantized action exceeds the regular island"));
    };
    if let Some((r, c)) = scan.regular.iter().find(|(r, c)| *r == hi.0 && (c.action - target).abs() <= tol) {
        return Ok(found(*r, c));
    }
    // Illinois regula falsi on action against squared radius
    let (mut f_lo, mut f_hi) = (lo.1 - target, hi.1 - target);
    let mut side = 0i8;
    for _ in 0..ebk.max_iter {
        let (s0, s1) = (lo.0 * lo.0, hi.0 * hi.0);
        let width = hi.0 - lo.0;
        let mut r = (s0 - f_lo * (s1 - s0) / (f_hi - f_lo)).max(0.0).sqrt();
        if !(r > lo.0 + 1e-3 * width && r < hi.0 - 1e-3 * width) {
            r = 0.5 * (lo.0 + hi.0);
        }
        let curve = match scan.trace(r, params, settings, ebk)? {
            Some(c) => Some((r, c)),
            None => {
                let mid = 0.5 * (lo.0 + hi.0);
                if mid == r { None } else { scan.trace(mid, params, settings, ebk)?.map(|c| (mid, c)) }
            }
        };
        let Some((r, c)) = curve else {
            return Err(no_curve("resonance gap: no regular curve near the quantized action"));
        };
        let f = c.action - target;
        if f.abs() <= tol {
            return Ok(found(r, &c));
        }
        if f < 0.0 {
            lo = (r, c.action);
            f_lo = f;
            if side == -1 {
                f_hi *= 0.5;
            }
            side = -1;
        } else {
            hi = (r, c.action);
            f_hi = f;
            if side == 1 {
                f_lo *= 0.5;
            }
            side = 1;
        }
        if hi.0 - lo.0 < 1e-14 {
            break;
        }
    }
    Err(no_curve("root finding did not reach the tolerance"))
}

/// Quantized curves `k = 0..=k_max` on a scanned island. Each `k`
/// succeeds or fails on its own; the loop ends at the first `k` whose action
/// lies beyond the regular curves. Curves found while solving are added to
/// the scan.
pub fn quantize_island(
    scan: &mut IslandScan,
    n_particles: usize,
    k_max: usize,
    params: &MeanFieldParams,
    settings: &MeanFieldSettings,
    ebk: &EbkSettings,
) -> Result<Vec<EbkOutcome>> {
    if n_particles == 0 {
        return Err(Error::InvalidParameter { name: "n_particles", reason: "must be at least 1".into() });
    }
    let h = hbar_eff(n_particles);
    let mut out = Vec::new();
    for k in 0..=k_max {
        let target = h * (k as f64 + 0.5);
        let result = solve(scan, k, target, params, settings, ebk);
        let beyond = matches!(&result, Err(Error::NoCurve { reason, .. }) if reason.contains("exceeds"));
        out.push(EbkOutcome { k, target_action: target, result });
        if beyond {
            break;
        }
    }
    Ok(out)
}

/// Scans the island around `center` and quantizes it for `N` particles.
pub fn ebk_quantize(
    center: &PhasePoint,
    n_particles: usize,
    k_max: usize,
    params: &MeanFieldParams,
    settings: &MeanFieldSettings,
    ebk: &EbkSettings,
) -> Result<Vec<EbkOutcome>> {
    let mut scan = scan_island(center, params, settings, ebk)?;
    quantize_island(&mut scan, n_particles, k_max, params, settings, ebk)
}

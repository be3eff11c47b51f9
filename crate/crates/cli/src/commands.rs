//! Subcommands. Each takes a validated configuration, writes its artifacts
//! under the output directory and returns their paths.

use std::fs;
use std::path::{Path, PathBuf};

use dimer_core::coherence::{eta_spectrum, husimi, HusimiGridSpec};
use dimer_core::floquet::{diagonalize_with, order_by_simplicity, FloquetSpectrum};
use dimer_core::meanfield::{
    build_section, find_periodic_orbit, hbar_eff, quantize_island, scan_island, seed_grid, PhasePoint, Stability,
};
use dimer_core::propagator::one_cycle_operator;
use dimer_core::StateVector;
use serde::Serialize;
use serde_json::json;

use crate::cache::{sha256_hex, write_atomic, SpectrumCache};
use crate::config::RunConfig;
use crate::error::CliError;
use crate::output::{f64_le_bytes, fmt_f64, write_json, Csv};

/// Floquet states ordered by simplicity, with their `eta` in raw order.
#[derive(Debug, Clone)]
pub struct LabelledSpectrum {
    pub spectrum: FloquetSpectrum,
    pub eta: Vec<f64>,
    pub unitarity_defect: f64,
    pub from_cache: bool,
}

impl LabelledSpectrum {
    pub fn eta_of_label(&self, label: usize) -> f64 {
        self.eta[self.spectrum.raw_index(label)]
    }
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = cfg.output.dir.clone();
    fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
    Ok(dir)
}

/// One-cycle operator, diagonalization and simplicity ordering, through the
/// cache when the policy allows.
pub fn labelled_spectrum(cfg: &RunConfig) -> Result<LabelledSpectrum, CliError> {
    let params = cfg.dimer_params()?;
    let (integrator, diag) = (cfg.integrator(), cfg.diagonalize());
    let cache = SpectrumCache::new(cfg.cache_dir());
    let policy = cfg.output.cache;
    let cached = if policy.reads() { cache.load(&params, &integrator, &diag) } else { None };
    let (spectrum, unitarity_defect, from_cache) = match cached {
        Some((spectrum, header)) => {
            log::info!("loaded N = {} spectrum from {}", params.n_particles, cache.dir().display());
            (spectrum, header.unitarity_defect, true)
        }
        None => {
            log::info!("propagating N = {} over one period", params.n_particles);
            let u = one_cycle_operator(&params, &integrator)?;
            log::info!("unitarity defect {:e}, diagonalizing", u.report.unitarity_defect);
            let spectrum = diagonalize_with(&u, &diag)?;
            if policy.writes() {
                cache.store(&spectrum, &params, &integrator, &diag, u.report.unitarity_defect)?;
            }
            (spectrum, u.report.unitarity_defect, false)
        }
    };
    let eta = eta_spectrum(&spectrum);
    let spectrum = order_by_simplicity(spectrum, &eta)?;
    Ok(LabelledSpectrum { spectrum, eta, unitarity_defect, from_cache })
}

/// Seeds from a file of `p,phi` lines. Blank lines, lines starting with `#`
/// and a `p,phi` header are skipped.
pub fn read_seeds(path: &Path) -> Result<Vec<PhasePoint>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let mut seeds = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.replace(' ', "") == "p,phi" {
            continue;
        }
        let bad = || CliError::Usage(format!("{}:{}: expected `p,phi`, got `{line}`", path.display(), i + 1));
        let (p, phi) = line.split_once(',').ok_or_else(bad)?;
        let p: f64 = p.trim().parse().map_err(|_| bad())?;
        let phi: f64 = phi.trim().parse().map_err(|_| bad())?;
        seeds.push(PhasePoint::new(p, phi));
    }
    if seeds.is_empty() {
        return Err(CliError::Usage(format!("{} contains no seeds", path.display())));
    }
    Ok(seeds)
}

pub fn poincare(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let params = cfg.mean_field_params()?;
    let m = &cfg.meanfield;
    let seeds = match &m.seeds {
        Some(path) => read_seeds(path)?,
        None => seed_grid(m.seed_rows, m.seed_cols),
    };
    let section = build_section(&seeds, m.iterations, &params, &cfg.mean_field_settings())?;
    let mut csv = Csv::new(&cfg.render_mean_field(), &["p", "phi", "orbit_id", "iteration"]);
    for (id, orbit) in section.orbits.iter().enumerate() {
        if let Some(err) = &orbit.error {
            log::warn!("orbit {id} stopped after {} iterations: {err}", orbit.points.len() - 1);
        }
        for (k, x) in orbit.points.iter().enumerate() {
            csv.row(&[fmt_f64(x.p), fmt_f64(x.phi), id.to_string(), k.to_string()]);
        }
    }
    Ok(vec![csv.write(&out_dir(cfg)?.join("poincare.csv"))?])
}

pub fn floquet(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let data = labelled_spectrum(cfg)?;
    let s = &data.spectrum;
    let mut csv = Csv::new(&cfg.render(), &["raw_index", "eigenphase", "quasienergy"]);
    for j in 0..s.dim() {
        csv.row(&[j.to_string(), fmt_f64(s.eigenphases[j]), fmt_f64(s.quasienergies[j])]);
    }
    let mut out = vec![csv.write(&out_dir(cfg)?.join("quasienergies.csv"))?];
    if cfg.output.cache.writes() {
        let params = cfg.dimer_params()?;
        let (head, body) = SpectrumCache::new(cfg.cache_dir()).paths(&SpectrumCache::key(&params, &cfg.integrator(), &cfg.diagonalize()));
        out.extend([head, body]);
    }
    Ok(out)
}

pub fn eta(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let data = labelled_spectrum(cfg)?;
    let n = data.spectrum.n_particles();
    let mut csv = Csv::new(&cfg.render(), &["n", "n_over_N", "eta", "raw_index"]);
    for label in 0..=n {
        let raw = data.spectrum.raw_index(label);
        csv.row(&[label.to_string(), fmt_f64(label as f64 / n as f64), fmt_f64(data.eta[raw]), raw.to_string()]);
    }
    Ok(vec![csv.write(&out_dir(cfg)?.join("eta.csv"))?])
}

pub fn husimi_state(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let data = labelled_spectrum(cfg)?;
    let n = data.spectrum.n_particles();
    let label = cfg.quantum.state.resolve(n)?;
    let raw = data.spectrum.raw_index(label);
    let (n_p, n_phi) = cfg.output.husimi_grid;
    let grid = husimi(&StateVector::new(data.spectrum.eigenvector(raw).to_vec()), &HusimiGridSpec::new(n_p, n_phi)?);
    let dir = out_dir(cfg)?;
    let stem = format!("husimi_n{label}");
    let config = cfg.render();
    let mut csv = Csv::new(&config, &["p", "phi", "q"]);
    for (i, p) in grid.p_axis.iter().enumerate() {
        for (j, phi) in grid.phi_axis.iter().enumerate() {
            csv.row(&[fmt_f64(*p), fmt_f64(*phi), fmt_f64(grid.at(i, j))]);
        }
    }
    let csv_path = csv.write(&dir.join(format!("{stem}.csv")))?;
    let body = f64_le_bytes(&grid.values);
    let bin_path = dir.join(format!("{stem}.bin"));
    write_atomic(&bin_path, &body)?;
    let sidecar = json!({
        "config": config,
        "format": "f64-le-row-major",
        "n_particles": n,
        "label": label,
        "raw_index": raw,
        "eta": data.eta[raw],
        "quasienergy": data.spectrum.quasienergies[raw],
        "rows": n_p,
        "cols": n_phi,
        "p_first": grid.p_axis[0],
        "p_step": 2.0 / n_p as f64,
        "phi_first": grid.phi_axis[0],
        "phi_step": std::f64::consts::TAU / n_phi as f64,
        "normalization": grid.normalization(),
        "body_bytes": body.len(),
        "body_sha256": sha256_hex(&body),
    });
    let json_path = write_json(&dir.join(format!("{stem}.json")), &sidecar)?;
    Ok(vec![csv_path, bin_path, json_path])
}

#[derive(Serialize)]
struct PointRecord {
    p: f64,
    phi: f64,
}

impl From<PhasePoint> for PointRecord {
    fn from(x: PhasePoint) -> Self {
        Self { p: x.p, phi: x.phi }
    }
}

fn stability_json(s: &Stability) -> serde_json::Value {
    match s {
        Stability::Elliptic { rotation } => json!({ "kind": "elliptic", "rotation": rotation }),
        Stability::Hyperbolic { multipliers } => json!({ "kind": "hyperbolic", "multipliers": multipliers }),
        Stability::Parabolic => json!({ "kind": "parabolic" }),
    }
}

pub fn orbit(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let params = cfg.mean_field_params()?;
    let guess = cfg.orbit_guess();
    let orbit = find_periodic_orbit(&guess, &params, &cfg.mean_field_settings())?;
    let record = json!({
        "config": cfg.render_mean_field(),
        "guess": PointRecord::from(guess),
        "fixed_point": PointRecord::from(orbit.fixed_point),
        "monodromy": orbit.monodromy,
        "trace": orbit.trace,
        "determinant": orbit.determinant,
        "stability": stability_json(&orbit.stability),
        "newton_iterations": orbit.iterations,
        "residual": orbit.residual,
    });
    Ok(vec![write_json(&out_dir(cfg)?.join("orbit.json"), &record)?])
}

pub fn ebk(cfg: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let n = cfg.dimer_params()?.n_particles;
    let params = cfg.mean_field_params()?;
    let settings = cfg.mean_field_settings();
    let ebk = cfg.ebk_settings();
    let orbit = find_periodic_orbit(&cfg.orbit_guess(), &params, &settings)?;
    if !orbit.is_elliptic() {
        return Err(CliError::Core(dimer_core::Error::NotRegular(format!(
            "the periodic orbit at ({}, {}) is not elliptic (trace {})",
            orbit.fixed_point.p, orbit.fixed_point.phi, orbit.trace
        ))));
    }
    let mut scan = scan_island(&orbit.fixed_point, &params, &settings, &ebk)?;
    let outcomes = quantize_island(&mut scan, n, cfg.meanfield.kmax, &params, &settings, &ebk)?;
    let dir = out_dir(cfg)?;
    let config = cfg.render();
    let mut files = Vec::new();
    let mut states = Vec::new();
    for o in &outcomes {
        match &o.result {
            Ok(r) => {
                let name = format!("ebk_curve_k{}.csv", o.k);
                let mut csv = Csv::new(&config, &["p", "phi"]);
                for x in &r.curve.points {
                    csv.row(&[fmt_f64(x.p), fmt_f64(x.phi)]);
                }
                files.push(csv.write(&dir.join(&name))?);
                states.push(json!({
                    "k": o.k,
                    "target_action": o.target_action,
                    "status": "ok",
                    "achieved_action": r.achieved_action,
                    "polygon_action": r.curve.polygon_action,
                    "residual": r.residual,
                    "seed_radius": r.seed_radius,
                    "strobes": r.curve.points.len(),
                    "curve_file": name,
                }));
            }
            Err(e) => states.push(json!({
                "k": o.k,
                "target_action": o.target_action,
                "status": "failed",
                "reason": e.to_string(),
            })),
        }
    }
    let record = json!({
        "config": config,
        "n_particles": n,
        "hbar_eff": hbar_eff(n),
        "center": PointRecord::from(orbit.fixed_point),
        "trace": orbit.trace,
        "island_edge_radius": scan.edge,
        "island_capacity": scan.capacity(),
        "regular_curves": scan.regular.len(),
        "quantized": outcomes.iter().filter(|o| o.result.is_ok()).count(),
        "states": states,
    });
    files.insert(0, write_json(&dir.join("ebk.json"), &record)?);
    Ok(files)
}

//! Run configuration: an INI-like `key = value` file with the sections
//! `[system]`, `[quantum]`, `[meanfield]` and `[output]`.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use dimer_core::floquet::DiagonalizeSettings;
use dimer_core::meanfield::{CurveSettings, EbkSettings, MeanFieldSettings, PhasePoint};
use dimer_core::{DimerParams, IntegratorSettings, MeanFieldParams, Method};
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("invalid value for `{key}`: {message}")]
    Validation { key: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CachePolicy {
    ReadWrite,
    Read,
    Write,
    Off,
}

impl CachePolicy {
    pub fn as_str(&self) -> &'static str {
        match self {
            CachePolicy::ReadWrite => "read_write",
            CachePolicy::Read => "read",
            CachePolicy::Write => "write",
            CachePolicy::Off => "off",
        }
    }

    pub fn reads(&self) -> bool {
        matches!(self, CachePolicy::ReadWrite | CachePolicy::Read)
    }

    pub fn writes(&self) -> bool {
        matches!(self, CachePolicy::ReadWrite | CachePolicy::Write)
    }
}

impl FromStr for CachePolicy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "read_write" => Ok(CachePolicy::ReadWrite),
            "read" => Ok(CachePolicy::Read),
            "write" => Ok(CachePolicy::Write),
            "off" => Ok(CachePolicy::Off),
            other => Err(format!("unknown cache policy `{other}` (read_write, read, write, off)")),
        }
    }
}

/// Floquet state selector: a simplicity label or one of the two ends.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StateSelector {
    Label(usize),
    Top,
    Bottom,
}

impl StateSelector {
    pub fn resolve(&self, n_particles: usize) -> Result<usize, ConfigError> {
        match *self {
            StateSelector::Top => Ok(n_particles),
            StateSelector::Bottom => Ok(0),
            StateSelector::Label(n) if n <= n_particles => Ok(n),
            StateSelector::Label(n) => Err(ConfigError::Validation {
                key: "state".into(),
                message: format!("label {n} exceeds N = {n_particles}"),
            }),
        }
    }
}

impl FromStr for StateSelector {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "top" => Ok(StateSelector::Top),
            "bottom" => Ok(StateSelector::Bottom),
            _ => s.parse().map(StateSelector::Label).map_err(|_| format!("expected a label, `top` or `bottom`, got `{s}`")),
        }
    }
}

impl std::fmt::Display for StateSelector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            StateSelector::Label(n) => write!(f, "{n}"),
            StateSelector::Top => f.write_str("top"),
            StateSelector::Bottom => f.write_str("bottom"),
        }
    }
}

/// `P x Q` grid size.
pub fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once('x').ok_or_else(|| format!("expected PxQ, got `{s}`"))?;
    let p: usize = a.trim().parse().map_err(|_| format!("bad row count in `{s}`"))?;
    let q: usize = b.trim().parse().map_err(|_| format!("bad column count in `{s}`"))?;
    if p == 0 || q == 0 {
        return Err(format!("grid `{s}` has an empty dimension"));
    }
    Ok((p, q))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemConfig {
    /// Particle number; only quantum subcommands need it.
    pub n: Option<usize>,
    pub alpha: f64,
    pub mu_over_omega0: f64,
    pub omega_over_omega0: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumConfig {
    pub method: Method,
    pub steps_per_period: Option<usize>,
    pub rtol: f64,
    pub unitarity_tolerance: Option<f64>,
    pub cluster_tol: f64,
    pub overlap_tol: f64,
    pub residual_tol: Option<f64>,
    pub state: StateSelector,
}

impl Default for QuantumConfig {
    fn default() -> Self {
        let integ = IntegratorSettings::default();
        let diag = DiagonalizeSettings::default();
        Self {
            method: integ.method,
            steps_per_period: integ.steps_per_period,
            rtol: integ.rtol,
            unitarity_tolerance: integ.unitarity_tolerance,
            cluster_tol: diag.cluster_tol,
            overlap_tol: diag.overlap_tol,
            residual_tol: diag.residual_tol,
            state: StateSelector::Top,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanFieldConfig {
    pub rtol: f64,
    pub atol: f64,
    pub pole_guard: f64,
    pub chart_switch: f64,
    pub fd_step: f64,
    pub newton_tol: f64,
    pub max_iter: usize,
    pub iterations: usize,
    pub seed_rows: usize,
    pub seed_cols: usize,
    pub seeds: Option<PathBuf>,
    pub orbit_p: f64,
    pub orbit_phi: f64,
    pub n_strobes: usize,
    pub max_strobes: usize,
    pub max_roughness: f64,
    pub max_angle_gap: f64,
    pub ray_dphi: f64,
    pub ray_dp: f64,
    pub ebk_rel_tol: f64,
    pub ebk_max_iter: usize,
    pub r_start: f64,
    pub scan_points: usize,
    pub kmax: usize,
}

impl Default for MeanFieldConfig {
    fn default() -> Self {
        let mf = MeanFieldSettings::default();
        let ebk = EbkSettings::default();
        Self {
            rtol: mf.rtol,
            atol: mf.atol,
            pole_guard: mf.pole_guard,
            chart_switch: mf.chart_switch,
            fd_step: mf.fd_step,
            newton_tol: mf.newton_tol,
            max_iter: mf.max_iter,
            iterations: 300,
            seed_rows: 9,
            seed_cols: 9,
            seeds: None,
            orbit_p: 0.0,
            orbit_phi: -2.2,
            n_strobes: ebk.curve.n_strobes,
            max_strobes: ebk.curve.max_strobes,
            max_roughness: ebk.curve.max_roughness,
            max_angle_gap: ebk.curve.max_angle_gap,
            ray_dphi: ebk.direction.0,
            ray_dp: ebk.direction.1,
            ebk_rel_tol: ebk.rel_tol,
            ebk_max_iter: ebk.max_iter,
            r_start: ebk.r_start,
            scan_points: ebk.scan_points,
            kmax: 1000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub cache: CachePolicy,
    /// `None` places the cache under `dir/cache`.
    pub cache_dir: Option<PathBuf>,
    pub husimi_grid: (usize, usize),
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), cache: CachePolicy::ReadWrite, cache_dir: None, husimi_grid: (400, 400) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub system: SystemConfig,
    pub quantum: QuantumConfig,
    pub meanfield: MeanFieldConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    /// The paper-style parameter set with defaults everywhere else.
    pub fn with_system(n: Option<usize>, alpha: f64, mu: f64, omega: f64) -> Self {
        Self {
            system: SystemConfig { n, alpha, mu_over_omega0: mu, omega_over_omega0: omega },
            quantum: QuantumConfig::default(),
            meanfield: MeanFieldConfig::default(),
            output: OutputConfig::default(),
        }
    }

    pub fn dimer_params(&self) -> Result<DimerParams, ConfigError> {
        let n = self.system.n.ok_or_else(|| ConfigError::Validation {
            key: "n".into(),
            message: "the particle number is required for quantum subcommands".into(),
        })?;
        DimerParams::new(n, self.system.alpha, self.system.mu_over_omega0, self.system.omega_over_omega0)
            .map_err(|e| ConfigError::Validation { key: "system".into(), message: e.to_string() })
    }

    pub fn mean_field_params(&self) -> Result<MeanFieldParams, ConfigError> {
        MeanFieldParams::new(self.system.alpha, self.system.mu_over_omega0, self.system.omega_over_omega0)
            .map_err(|e| ConfigError::Validation { key: "system".into(), message: e.to_string() })
    }

    pub fn integrator(&self) -> IntegratorSettings {
        IntegratorSettings {
            method: self.quantum.method,
            steps_per_period: self.quantum.steps_per_period,
            rtol: self.quantum.rtol,
            unitarity_tolerance: self.quantum.unitarity_tolerance,
        }
    }

    pub fn diagonalize(&self) -> DiagonalizeSettings {
        DiagonalizeSettings {
            cluster_tol: self.quantum.cluster_tol,
            overlap_tol: self.quantum.overlap_tol,
            residual_tol: self.quantum.residual_tol,
        }
    }

    pub fn mean_field_settings(&self) -> MeanFieldSettings {
        let m = &self.meanfield;
        MeanFieldSettings {
            rtol: m.rtol,
            atol: m.atol,
            pole_guard: m.pole_guard,
            chart_switch: m.chart_switch,
            fd_step: m.fd_step,
            newton_tol: m.newton_tol,
            max_iter: m.max_iter,
        }
    }

    pub fn ebk_settings(&self) -> EbkSettings {
        let m = &self.meanfield;
        EbkSettings {
            curve: CurveSettings {
                n_strobes: m.n_strobes,
                max_strobes: m.max_strobes,
                max_roughness: m.max_roughness,
                max_angle_gap: m.max_angle_gap,
            },
            direction: (m.ray_dphi, m.ray_dp),
            rel_tol: m.ebk_rel_tol,
            max_iter: m.ebk_max_iter,
            r_start: m.r_start,
            scan_points: m.scan_points,
        }
    }

    pub fn orbit_guess(&self) -> PhasePoint {
        PhasePoint::new(self.meanfield.orbit_p, self.meanfield.orbit_phi)
    }

    pub fn cache_dir(&self) -> PathBuf {
        self.output.cache_dir.clone().unwrap_or_else(|| self.output.dir.join("cache"))
    }

    /// Canonical text form; [`parse_config`] maps it back to an equal value.
    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str("[system]\n");
        out.push_str(&self.render_system(true));
        let q = &self.quantum;
        out.push_str("\n[quantum]\n");
        let _ = writeln!(out, "method = {}", q.method.as_str());
        let _ = writeln!(out, "steps_per_period = {}", opt(q.steps_per_period.map(|v| v.to_string())));
        let _ = writeln!(out, "rtol = {:e}", q.rtol);
        let _ = writeln!(out, "unitarity_tolerance = {}", opt(q.unitarity_tolerance.map(|v| format!("{v:e}"))));
        let _ = writeln!(out, "cluster_tol = {:e}", q.cluster_tol);
        let _ = writeln!(out, "overlap_tol = {:e}", q.overlap_tol);
        let _ = writeln!(out, "residual_tol = {}", opt(q.residual_tol.map(|v| format!("{v:e}"))));
        let _ = writeln!(out, "state = {}", q.state);
        out.push_str("\n[meanfield]\n");
        out.push_str(&self.render_meanfield());
        let o = &self.output;
        out.push_str("\n[output]\n");
        let _ = writeln!(out, "dir = {}", o.dir.display());
        let _ = writeln!(out, "cache = {}", o.cache.as_str());
        let _ = writeln!(out, "cache_dir = {}", opt(o.cache_dir.as_ref().map(|p| p.display().to_string())));
        let _ = writeln!(out, "husimi_grid = {}x{}", o.husimi_grid.0, o.husimi_grid.1);
        out
    }

    /// The part of the configuration that mean-field results depend on. It
    /// omits the particle number, the quantum settings and the output
    /// location, so equal mean-field runs embed equal text.
    pub fn render_mean_field(&self) -> String {
        let mut out = String::from("[system]\n");
        out.push_str(&self.render_system(false));
        out.push_str("\n[meanfield]\n");
        out.push_str(&self.render_meanfield());
        out
    }

    fn render_system(&self, with_n: bool) -> String {
        let s = &self.system;
        let mut out = String::new();
        if with_n {
            if let Some(n) = s.n {
                let _ = writeln!(out, "n = {n}");
            }
        }
        let _ = writeln!(out, "alpha = {:e}", s.alpha);
        let _ = writeln!(out, "mu_over_omega0 = {:e}", s.mu_over_omega0);
        let _ = writeln!(out, "omega_over_omega0 = {:e}", s.omega_over_omega0);
        out
    }

    fn render_meanfield(&self) -> String {
        let m = &self.meanfield;
        let mut out = String::new();
        let _ = writeln!(out, "rtol = {:e}", m.rtol);
        let _ = writeln!(out, "atol = {:e}", m.atol);
        let _ = writeln!(out, "pole_guard = {:e}", m.pole_guard);
        let _ = writeln!(out, "chart_switch = {:e}", m.chart_switch);
        let _ = writeln!(out, "fd_step = {:e}", m.fd_step);
        let _ = writeln!(out, "newton_tol = {:e}", m.newton_tol);
        let _ = writeln!(out, "max_iter = {}", m.max_iter);
        let _ = writeln!(out, "iterations = {}", m.iterations);
        let _ = writeln!(out, "seed_rows = {}", m.seed_rows);
        let _ = writeln!(out, "seed_cols = {}", m.seed_cols);
        let _ = writeln!(out, "seeds = {}", opt(m.seeds.as_ref().map(|p| p.display().to_string())));
        let _ = writeln!(out, "orbit_p = {:e}", m.orbit_p);
        let _ = writeln!(out, "orbit_phi = {:e}", m.orbit_phi);
        let _ = writeln!(out, "n_strobes = {}", m.n_strobes);
        let _ = writeln!(out, "max_strobes = {}", m.max_strobes);
        let _ = writeln!(out, "max_roughness = {:e}", m.max_roughness);
        let _ = writeln!(out, "max_angle_gap = {:e}", m.max_angle_gap);
        let _ = writeln!(out, "ray_dphi = {:e}", m.ray_dphi);
        let _ = writeln!(out, "ray_dp = {:e}", m.ray_dp);
        let _ = writeln!(out, "ebk_rel_tol = {:e}", m.ebk_rel_tol);
        let _ = writeln!(out, "ebk_max_iter = {}", m.ebk_max_iter);
        let _ = writeln!(out, "r_start = {:e}", m.r_start);
        let _ = writeln!(out, "scan_points = {}", m.scan_points);
        let _ = writeln!(out, "kmax = {}", m.kmax);
        out
    }
}

fn opt(v: Option<String>) -> String {
    v.unwrap_or_else(|| "auto".into())
}

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Validation { key: key.into(), message: message.into() }
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value.parse().map_err(|_| bad(key, format!("cannot parse `{value}`")))
}

fn float(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v: f64 = num(key, value)?;
    if !v.is_finite() {
        return Err(bad(key, "must be finite"));
    }
    Ok(v)
}

fn positive(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = float(key, value)?;
    if !(v > 0.0) {
        return Err(bad(key, "must be positive"));
    }
    Ok(v)
}

fn count(key: &str, value: &str) -> Result<usize, ConfigError> {
    let v: usize = num(key, value)?;
    if v == 0 {
        return Err(bad(key, "must be at least 1"));
    }
    Ok(v)
}

fn auto<T>(value: &str, f: impl FnOnce(&str) -> Result<T, ConfigError>) -> Result<Option<T>, ConfigError> {
    if value == "auto" {
        Ok(None)
    } else {
        f(value).map(Some)
    }
}

/// Parses and validates a configuration.
///
/// Lines are `key = value`, `[section]`, blank, or comments starting with
/// `#` or `;`. Keys are unique per section and unknown keys are errors.
/// `kappa_over_omega0` may replace `alpha` when `n` is given; then
/// `alpha = n * kappa_over_omega0`.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut cfg = RunConfig::with_system(None, f64::NAN, f64::NAN, f64::NAN);
    let mut section: Option<String> = None;
    let mut seen: Vec<(String, String)> = Vec::new();
    let mut kappa: Option<f64> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
            continue;
        }
        let perr = |message: String| ConfigError::Parse { line: line_no, message };
        if let Some(rest) = line.strip_prefix('[') {
            let name = rest.strip_suffix(']').ok_or_else(|| perr(format!("unterminated section header `{line}`")))?.trim();
            if !matches!(name, "system" | "quantum" | "meanfield" | "output") {
                return Err(perr(format!("unknown section `[{name}]`")));
            }
            section = Some(name.to_string());
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| perr(format!("expected `key = value`, got `{line}`")))?;
        let (key, value) = (key.trim(), value.trim());
        if key.is_empty() || value.is_empty() {
            return Err(perr(format!("expected `key = value`, got `{line}`")));
        }
        let sec = section.clone().ok_or_else(|| perr(format!("`{key}` appears before any section header")))?;
        if seen.iter().any(|(s, k)| *s == sec && k == key) {
            return Err(perr(format!("`{key}` is set twice in [{sec}]")));
        }
        seen.push((sec.clone(), key.to_string()));
        let with_line = |e: ConfigError| match e {
            ConfigError::Validation { key, message } => ConfigError::Parse { line: line_no, message: format!("`{key}`: {message}") },
            other => other,
        };
        set_key(&mut cfg, &mut kappa, &sec, key, value).map_err(with_line).map_err(|e| match e {
            ConfigError::Parse { message, .. } if message == "unknown" => {
                ConfigError::Parse { line: line_no, message: format!("unknown key `{key}` in [{sec}]") }
            }
            other => other,
        })?;
    }
    validate(&mut cfg, kappa)?;
    Ok(cfg)
}

fn set_key(cfg: &mut RunConfig, kappa: &mut Option<f64>, section: &str, key: &str, v: &str) -> Result<(), ConfigError> {
    let unknown = || Err(ConfigError::Parse { line: 0, message: "unknown".into() });
    match section {
        "system" => {
            let s = &mut cfg.system;
            match key {
                "n" => s.n = Some(count(key, v)?),
                "alpha" => s.alpha = float(key, v)?,
                "kappa_over_omega0" => *kappa = Some(float(key, v)?),
                "mu_over_omega0" => s.mu_over_omega0 = float(key, v)?,
                "omega_over_omega0" => s.omega_over_omega0 = positive(key, v)?,
                _ => return unknown(),
            }
        }
        "quantum" => {
            let q = &mut cfg.quantum;
            match key {
                "method" => q.method = v.parse().map_err(|e: String| bad(key, e))?,
                "steps_per_period" => q.steps_per_period = auto(v, |x| count(key, x))?,
                "rtol" => q.rtol = positive(key, v)?,
                "unitarity_tolerance" => q.unitarity_tolerance = auto(v, |x| positive(key, x))?,
                "cluster_tol" => q.cluster_tol = positive(key, v)?,
                "overlap_tol" => q.overlap_tol = positive(key, v)?,
                "residual_tol" => q.residual_tol = auto(v, |x| positive(key, x))?,
                "state" => q.state = v.parse().map_err(|e: String| bad(key, e))?,
                _ => return unknown(),
            }
        }
        "meanfield" => {
            let m = &mut cfg.meanfield;
            match key {
                "rtol" => m.rtol = positive(key, v)?,
                "atol" => m.atol = positive(key, v)?,
                "pole_guard" => m.pole_guard = positive(key, v)?,
                "chart_switch" => m.chart_switch = positive(key, v)?,
                "fd_step" => m.fd_step = positive(key, v)?,
                "newton_tol" => m.newton_tol = positive(key, v)?,
                "max_iter" => m.max_iter = count(key, v)?,
                "iterations" => m.iterations = num(key, v)?,
                "seed_rows" => m.seed_rows = count(key, v)?,
                "seed_cols" => m.seed_cols = count(key, v)?,
                "seeds" => m.seeds = auto(v, |x| Ok(PathBuf::from(x)))?,
                "orbit_p" => m.orbit_p = float(key, v)?,
                "orbit_phi" => m.orbit_phi = float(key, v)?,
                "n_strobes" => m.n_strobes = count(key, v)?,
                "max_strobes" => m.max_strobes = count(key, v)?,
                "max_roughness" => m.max_roughness = positive(key, v)?,
                "max_angle_gap" => m.max_angle_gap = positive(key, v)?,
                "ray_dphi" => m.ray_dphi = float(key, v)?,
                "ray_dp" => m.ray_dp = float(key, v)?,
                "ebk_rel_tol" => m.ebk_rel_tol = positive(key, v)?,
                "ebk_max_iter" => m.ebk_max_iter = count(key, v)?,
                "r_start" => m.r_start = positive(key, v)?,
                "scan_points" => m.scan_points = count(key, v)?,
                "kmax" => m.kmax = num(key, v)?,
                _ => return unknown(),
            }
        }
        "output" => {
            let o = &mut cfg.output;
            match key {
                "dir" => o.dir = PathBuf::from(v),
                "cache" => o.cache = v.parse().map_err(|e: String| bad(key, e))?,
                "cache_dir" => o.cache_dir = auto(v, |x| Ok(PathBuf::from(x)))?,
                "husimi_grid" => o.husimi_grid = parse_grid(v).map_err(|e| bad(key, e))?,
                _ => return unknown(),
            }
        }
        _ => unreachable!("section names are checked by the caller"),
    }
    Ok(())
}

fn validate(cfg: &mut RunConfig, kappa: Option<f64>) -> Result<(), ConfigError> {
    let s = &mut cfg.system;
    match (kappa, s.alpha.is_nan()) {
        (Some(_), false) => return Err(bad("kappa_over_omega0", "give either alpha or kappa_over_omega0, not both")),
        (Some(k), true) => {
            let n = s.n.ok_or_else(|| bad("kappa_over_omega0", "needs the particle number n"))?;
            s.alpha = n as f64 * k;
        }
        (None, true) => return Err(bad("alpha", "missing from [system]")),
        (None, false) => {}
    }
    if s.mu_over_omega0.is_nan() {
        return Err(bad("mu_over_omega0", "missing from [system]"));
    }
    if s.omega_over_omega0.is_nan() {
        return Err(bad("omega_over_omega0", "missing from [system]"));
    }
    if s.alpha < 0.0 {
        log::warn!("alpha = {} is attractive; the reference results assume repulsive interaction", s.alpha);
    }
    let m = &cfg.meanfield;
    if m.ray_dphi == 0.0 && m.ray_dp == 0.0 {
        return Err(bad("ray_dp", "the seed ray needs a nonzero direction"));
    }
    if m.max_strobes < m.n_strobes {
        return Err(bad("max_strobes", "must not be below n_strobes"));
    }
    if !(m.orbit_p.abs() <= 1.0) {
        return Err(bad("orbit_p", "must lie in [-1, 1]"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const PAPER: &str = "[system]\nn = 100\nalpha = 1.30\nmu_over_omega0 = 0.41\nomega_over_omega0 = 1.40\n";

    #[test]
    fn paper_parameters() {
        let cfg = parse_config(PAPER).unwrap();
        let p = cfg.dimer_params().unwrap();
        assert_eq!((p.n_particles, p.alpha, p.drive_amplitude, p.drive_frequency), (100, 1.3, 0.41, 1.4));
    }

    #[test]
    fn empty_quantum_section_gives_defaults() {
        let cfg = parse_config(&format!("{PAPER}\n[quantum]\n")).unwrap();
        assert_eq!(cfg.quantum, QuantumConfig::default());
        assert_eq!(cfg.meanfield, MeanFieldConfig::default());
    }

    #[test]
    fn attractive_interaction_is_accepted() {
        let cfg = parse_config(&PAPER.replace("1.30", "-1.30")).unwrap();
        assert_eq!(cfg.system.alpha, -1.3);
    }

    #[test]
    fn unknown_keys_are_errors_with_line_numbers() {
        let err = parse_config(&format!("{PAPER}[quantum]\nmethd = magnus4\n")).unwrap_err();
        assert_eq!(err, ConfigError::Parse { line: 7, message: "unknown key `methd` in [quantum]".into() });
        let err = parse_config("[system]\nn = ten\n").unwrap_err();
        assert!(matches!(err, ConfigError::Parse { line: 2, .. }), "{err}");
        assert!(matches!(parse_config("n = 3\n"), Err(ConfigError::Parse { line: 1, .. })));
        assert!(matches!(parse_config("[sytem]\n"), Err(ConfigError::Parse { line: 1, .. })));
        assert!(matches!(parse_config(&format!("{PAPER}n = 4\n")), Err(ConfigError::Parse { line: 6, .. })));
    }

    #[test]
    fn missing_keys_are_validation_errors() {
        let err = parse_config("[system]\nn = 10\nalpha = 1\nmu_over_omega0 = 0.4\n").unwrap_err();
        assert!(matches!(err, ConfigError::Validation { ref key, .. } if key == "omega_over_omega0"));
    }

    #[test]
    fn kappa_replaces_alpha() {
        let a = parse_config("[system]\nn = 100\nkappa_over_omega0 = 0.013\nmu_over_omega0 = 0.41\nomega_over_omega0 = 1.40\n").unwrap();
        let b = parse_config("[system]\nn = 1000\nkappa_over_omega0 = 0.0013\nmu_over_omega0 = 0.41\nomega_over_omega0 = 1.40\n").unwrap();
        assert_eq!(a.system.alpha, 1.3);
        assert_eq!(a.mean_field_params().unwrap(), b.mean_field_params().unwrap());
        assert!(parse_config("[system]\nkappa_over_omega0 = 0.1\nmu_over_omega0 = 0.41\nomega_over_omega0 = 1.4\n").is_err());
    }

    #[test]
    fn rendering_round_trips() {
        let mut cfg = parse_config(PAPER).unwrap();
        cfg.quantum.steps_per_period = Some(777);
        cfg.quantum.state = StateSelector::Label(93);
        cfg.meanfield.seeds = Some(PathBuf::from("seeds.csv"));
        cfg.output.cache = CachePolicy::Off;
        cfg.output.husimi_grid = (40, 80);
        let text = cfg.render();
        let back = parse_config(&text).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.render(), text);
    }

    #[test]
    fn grid_and_state_syntax() {
        assert_eq!(parse_grid("400x300"), Ok((400, 300)));
        assert!(parse_grid("400").is_err());
        assert!(parse_grid("0x3").is_err());
        assert_eq!("top".parse::<StateSelector>(), Ok(StateSelector::Top));
        assert_eq!("12".parse::<StateSelector>(), Ok(StateSelector::Label(12)));
        assert!(StateSelector::Label(11).resolve(10).is_err());
    }
}

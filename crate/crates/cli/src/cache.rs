//! On-disk cache of Floquet spectra: a JSON header next to a little-endian
//! binary body. See `docs/formats.md`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use dimer_core::floquet::{quasienergy_representative, DiagonalizeSettings, FloquetSpectrum};
use dimer_core::{DenseMatrix, DimerParams, IntegratorSettings};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const MAGIC: &str = "dimer-floquet-spectrum";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CacheHeader {
    pub magic: String,
    pub format_version: u32,
    pub params: DimerParams,
    pub integrator: IntegratorSettings,
    pub diagonalize: DiagonalizeSettings,
    pub dim: usize,
    pub max_residual: f64,
    pub repaired_clusters: usize,
    pub unitarity_defect: f64,
    pub body_bytes: u64,
    pub body_sha256: String,
}

/// Cache entries keyed by the requesting parameters and solver settings.
#[derive(Debug, Clone)]
pub struct SpectrumCache {
    dir: PathBuf,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Eigenphases, then every eigenvector column as `re, im` pairs.
pub fn encode_body(spectrum: &FloquetSpectrum) -> Vec<u8> {
    let dim = spectrum.dim();
    let mut out = Vec::with_capacity(8 * dim * (1 + 2 * dim));
    for g in &spectrum.eigenphases {
        out.extend_from_slice(&g.to_le_bytes());
    }
    for z in spectrum.eigenvectors.as_slice() {
        out.extend_from_slice(&z.re.to_le_bytes());
        out.extend_from_slice(&z.im.to_le_bytes());
    }
    out
}

fn decode_body(bytes: &[u8], dim: usize) -> Option<(Vec<f64>, DenseMatrix)> {
    if bytes.len() != 8 * dim * (1 + 2 * dim) {
        return None;
    }
    let mut words = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().expect("chunk of eight")));
    let phases: Vec<f64> = words.by_ref().take(dim).collect();
    let mut data = Vec::with_capacity(dim * dim);
    while let (Some(re), Some(im)) = (words.next(), words.next()) {
        data.push(Complex64::new(re, im));
    }
    Some((phases, DenseMatrix::from_column_major(dim, data)))
}

impl SpectrumCache {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    /// File stem derived from the exact request.
    pub fn key(params: &DimerParams, integrator: &IntegratorSettings, diagonalize: &DiagonalizeSettings) -> String {
        let request = serde_json::to_string(&(params, integrator, diagonalize)).expect("plain data serializes");
        format!("spectrum-n{}-{}", params.n_particles, &sha256_hex(request.as_bytes())[..16])
    }

    pub fn paths(&self, key: &str) -> (PathBuf, PathBuf) {
        (self.dir.join(format!("{key}.json")), self.dir.join(format!("{key}.bin")))
    }

    /// The cached spectrum, or `None` on any mismatch or damage.
    pub fn load(
        &self,
        params: &DimerParams,
        integrator: &IntegratorSettings,
        diagonalize: &DiagonalizeSettings,
    ) -> Option<(FloquetSpectrum, CacheHeader)> {
        let (head_path, body_path) = self.paths(&Self::key(params, integrator, diagonalize));
        let header: CacheHeader = serde_json::from_slice(&fs::read(&head_path).ok()?).ok()?;
        let miss = |why: &str| {
            log::info!("cache miss at {}: {why}", head_path.display());
            None
        };
        if header.magic != MAGIC || header.format_version != FORMAT_VERSION {
            return miss("unknown format");
        }
        if header.params != *params || header.integrator != *integrator || header.diagonalize != *diagonalize {
            return miss("parameters differ");
        }
        let body = fs::read(&body_path).ok()?;
        if body.len() as u64 != header.body_bytes || sha256_hex(&body) != header.body_sha256 {
            return miss("checksum mismatch");
        }
        let (eigenphases, eigenvectors) = decode_body(&body, header.dim)?;
        let quasienergies = eigenphases.iter().map(|g| quasienergy_representative(*g, params.drive_frequency)).collect();
        let spectrum = FloquetSpectrum {
            eigenphases,
            quasienergies,
            eigenvectors,
            eta_order: (0..header.dim).collect(),
            drive_frequency: params.drive_frequency,
            max_residual: header.max_residual,
            repaired_clusters: header.repaired_clusters,
        };
        Some((spectrum, header))
    }

    /// Writes both files through temporary names and renames them into
    /// place, body first.
    pub fn store(
        &self,
        spectrum: &FloquetSpectrum,
        params: &DimerParams,
        integrator: &IntegratorSettings,
        diagonalize: &DiagonalizeSettings,
        unitarity_defect: f64,
    ) -> Result<CacheHeader, CliError> {
        fs::create_dir_all(&self.dir).map_err(|e| CliError::io(&self.dir, e))?;
        let body = encode_body(spectrum);
        let header = CacheHeader {
            magic: MAGIC.into(),
            format_version: FORMAT_VERSION,
            params: *params,
            integrator: *integrator,
            diagonalize: *diagonalize,
            dim: spectrum.dim(),
            max_residual: spectrum.max_residual,
            repaired_clusters: spectrum.repaired_clusters,
            unitarity_defect,
            body_bytes: body.len() as u64,
            body_sha256: sha256_hex(&body),
        };
        let (head_path, body_path) = self.paths(&Self::key(params, integrator, diagonalize));
        let mut text = serde_json::to_string_pretty(&header).expect("plain data serializes");
        text.push('\n');
        write_atomic(&body_path, &body)?;
        write_atomic(&head_path, text.as_bytes())?;
        Ok(header)
    }
}

/// Writes `bytes` to a sibling temporary file, syncs it and renames it over
/// `path`.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let tmp = path.with_file_name(format!(".{name}.{}.tmp", std::process::id()));
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        CliError::io(path, e)
    })
}

//! Flat binary storage: little-endian `f64` pairs `(re, im)` in row-major
//! order, with a JSON sidecar `{d, n, T, kind}` next to the data file.

use std::fs;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Grid, SampledField, SampledSignal};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Signal,
    Field,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub d: usize,
    pub n: usize,
    #[serde(rename = "T")]
    pub t: f64,
    pub kind: Kind,
}

/// `data.bin` -> `data.json`.
pub fn sidecar_path(data: &Path) -> PathBuf {
    data.with_extension("json")
}

fn encode(values: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(values.len() * 16);
    for v in values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn decode(bytes: &[u8], expected: usize) -> Result<Vec<Complex64>> {
    if bytes.len() != expected * 16 {
        return Err(Error::Dimension(format!(
            "expected {} bytes for {expected} samples, found {}",
            expected * 16,
            bytes.len()
        )));
    }
    let values: Vec<Complex64> = bytes
        .chunks_exact(16)
        .map(|c| {
            let re = f64::from_le_bytes(c[..8].try_into().expect("8 bytes"));
            let im = f64::from_le_bytes(c[8..].try_into().expect("8 bytes"));
            Complex64::new(re, im)
        })
        .collect();
    if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
        return Err(Error::Parameter("non-finite sample in data file".into()));
    }
    Ok(values)
}

fn write(path: &Path, sidecar: &Sidecar, values: &[Complex64]) -> Result<()> {
    fs::write(path, encode(values))?;
    fs::write(sidecar_path(path), serde_json::to_string_pretty(sidecar)?)?;
    Ok(())
}

pub fn read_sidecar(path: &Path) -> Result<Sidecar> {
    Ok(serde_json::from_str(&fs::read_to_string(sidecar_path(path))?)?)
}

fn read_expecting(path: &Path, kind: Kind) -> Result<(Sidecar, Vec<Complex64>)> {
    let meta = read_sidecar(path)?;
    if meta.kind != kind {
        return Err(Error::Config(format!("{} holds a {:?}, expected {kind:?}", path.display(), meta.kind)));
    }
    let rank = match kind {
        Kind::Signal => meta.d,
        Kind::Field => 2 * meta.d,
    };
    let grid = Grid::new(rank, meta.n, meta.t)?;
    let values = decode(&fs::read(path)?, grid.len())?;
    Ok((meta, values))
}

pub fn write_signal(path: &Path, f: &SampledSignal) -> Result<()> {
    let meta = Sidecar { d: f.grid.rank, n: f.grid.n, t: f.grid.t, kind: Kind::Signal };
    write(path, &meta, &f.values)
}

pub fn read_signal(path: &Path) -> Result<SampledSignal> {
    let (meta, values) = read_expecting(path, Kind::Signal)?;
    SampledSignal::new(Grid::new(meta.d, meta.n, meta.t)?, values)
}

pub fn write_field(path: &Path, f: &SampledField) -> Result<()> {
    let meta = Sidecar { d: f.d, n: f.grid.n, t: f.grid.t, kind: Kind::Field };
    write(path, &meta, &f.values)
}

pub fn read_field(path: &Path) -> Result<SampledField> {
    let (meta, values) = read_expecting(path, Kind::Field)?;
    SampledField::new(meta.d, meta.n, meta.t, values)
}

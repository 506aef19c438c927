//! File formats: JSON potentials and far-field datasets, CSV field grids.
//!
//! Complex numbers are written as `[re, im]`. Floats are written with the
//! shortest representation that parses back to the same value, so a
//! potential survives a write/read cycle bit for bit.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::forward::SolvedState;
use crate::model::{
    dist, norm, ExpTerm, ExponentialSum, FarFieldOracle, IncidentVector, Potential, Scatterer, Wavenumber,
};

/// Relative agreement required between a stated `kappa` and `|k|`.
pub const KAPPA_AGREEMENT: f64 = 1e-12;
/// Grid points closer than this to a scatterer are written as `nan`.
pub const GRID_EXCLUSION: f64 = 1e-9;

/// A complex number given either as `[re, im]` or as a bare real.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexRepr {
    Pair([f64; 2]),
    Real(f64),
}

impl From<ComplexRepr> for Complex64 {
    fn from(c: ComplexRepr) -> Self {
        match c {
            ComplexRepr::Pair([re, im]) => Complex64::new(re, im),
            ComplexRepr::Real(re) => Complex64::new(re, 0.0),
        }
    }
}

impl From<Complex64> for ComplexRepr {
    fn from(c: Complex64) -> Self {
        ComplexRepr::Pair([c.re, c.im])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScattererEntry {
    pub y: Vec<f64>,
    pub alpha: ComplexRepr,
}

/// On-disk form of a potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialFile {
    pub dimension: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    pub scatterers: Vec<ScattererEntry>,
}

impl PotentialFile {
    pub fn from_potential(p: &Potential, kappa: Option<Wavenumber>) -> Self {
        Self {
            dimension: p.dim(),
            kappa: kappa.map(Wavenumber::value),
            scatterers: p
                .scatterers()
                .iter()
                .map(|s| ScattererEntry {
                    y: s.position.clone(),
                    alpha: s.strength.into(),
                })
                .collect(),
        }
    }

    /// Validates the contents.
    pub fn to_potential(&self) -> Result<(Potential, Option<Wavenumber>)> {
        let scatterers = self
            .scatterers
            .iter()
            .map(|e| Scatterer::new(e.y.clone(), e.alpha.into()))
            .collect();
        let p = Potential::new(self.dimension, scatterers)?;
        let kappa = self.kappa.map(Wavenumber::new).transpose()?;
        Ok((p, kappa))
    }
}

/// On-disk form of a far-field amplitude given as an exponential sum:
/// `u(theta) = sum_j c_j exp(-i kappa y_j . theta)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FarFieldDataset {
    pub dimension: usize,
    pub kappa: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<Vec<f64>>,
    pub terms: Vec<DatasetTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetTerm {
    pub c: ComplexRepr,
    pub y: Vec<f64>,
}

impl FarFieldDataset {
    /// Writes the backing sum of an oracle with no subtracted terms.
    pub fn from_oracle(u: &FarFieldOracle, kappa: Wavenumber, k: Option<&IncidentVector>) -> Self {
        Self {
            dimension: u.dim(),
            kappa: kappa.value(),
            k: k.map(|k| k.as_slice().to_vec()),
            terms: u
                .backing()
                .terms()
                .iter()
                .map(|t| DatasetTerm {
                    c: t.coefficient.into(),
                    y: t.frequency.iter().map(|v| -v / kappa.value()).collect(),
                })
                .collect(),
        }
    }

    pub fn to_oracle(&self) -> Result<(FarFieldOracle, Wavenumber, Option<IncidentVector>)> {
        let kappa = Wavenumber::new(self.kappa)?;
        let k = self
            .k
            .as_ref()
            .map(|k| {
                if k.len() != self.dimension {
                    return Err(Error::DimensionMismatch {
                        expected: self.dimension,
                        got: k.len(),
                    });
                }
                IncidentVector::new(k.clone(), kappa)
            })
            .transpose()?;
        let terms = self
            .terms
            .iter()
            .map(|t| ExpTerm {
                coefficient: t.c.into(),
                frequency: t.y.iter().map(|v| -kappa.value() * v).collect(),
            })
            .collect();
        let sum = ExponentialSum::new(self.dimension, terms)?;
        Ok((FarFieldOracle::new(sum), kappa, k))
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

fn with_path<T>(path: &Path, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        e @ (Error::Io { .. } | Error::Parse { .. }) => e,
        other => Error::Parse {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })
}

/// Serializes any value as pretty JSON with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads and validates a potential file.
pub fn read_potential(path: &Path) -> Result<(Potential, Option<Wavenumber>)> {
    let file: PotentialFile = read_json(path)?;
    with_path(path, file.to_potential())
}

pub fn write_potential(path: &Path, p: &Potential, kappa: Option<Wavenumber>) -> Result<()> {
    write_json(path, &PotentialFile::from_potential(p, kappa))
}

pub fn read_dataset(path: &Path) -> Result<(FarFieldOracle, Wavenumber, Option<IncidentVector>)> {
    let file: FarFieldDataset = read_json(path)?;
    with_path(path, file.to_oracle())
}

/// Combines an optional stated `kappa` with an incident vector, requiring
/// agreement with `|k|` when both are present.
pub fn resolve_kappa(stated: Option<Wavenumber>, k: &[f64]) -> Result<(IncidentVector, Wavenumber)> {
    let (kv, implied) = IncidentVector::from_vector(k.to_vec())?;
    if let Some(s) = stated {
        if (s.value() - implied.value()).abs() > KAPPA_AGREEMENT * s.value() {
            return Err(Error::OffShell {
                norm: norm(k),
                kappa: s.value(),
            });
        }
        return Ok((IncidentVector::new(k.to_vec(), s)?, s));
    }
    Ok((kv, implied))
}

/// Formats like C's `%.12g`.
pub fn format_g12(v: f64) -> String {
    format_g(v, 12)
}

fn format_g(v: f64, precision: usize) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return if v.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let p = precision.max(1);
    let sci = format!("{:.*e}", p - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if exp < -4 || exp >= p as i32 {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{m}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (p as i32 - 1 - exp) as usize;
        trim_zeros(&format!("{:.*}", decimals, v)).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Writes `x1,x2,re_psi,im_psi,abs_psi` rows of the total field on an
/// `nx` by `ny` lattice over `[x_range] x [y_range]`, `x2` varying slowest.
pub fn write_grid<W: Write>(
    out: &mut W,
    state: &SolvedState,
    x_range: (f64, f64),
    y_range: (f64, f64),
    nx: usize,
    ny: usize,
) -> Result<()> {
    if state.potential().dim() != 2 {
        return Err(Error::InvalidInput("field grids are two-dimensional".into()));
    }
    if nx < 2 || ny < 2 {
        return Err(Error::InvalidInput("grids need at least 2 points per axis".into()));
    }
    let coord = |(a, b): (f64, f64), i: usize, n: usize| a + (b - a) * i as f64 / (n - 1) as f64;
    let rows: Vec<Result<String>> = (0..ny)
        .into_par_iter()
        .map(|j| {
            let x2 = coord(y_range, j, ny);
            let mut block = String::new();
            for i in 0..nx {
                let x = [coord(x_range, i, nx), x2];
                let near = state
                    .potential()
                    .scatterers()
                    .iter()
                    .any(|s| dist(&s.position, &x) < GRID_EXCLUSION);
                let psi = if near {
                    Complex64::new(f64::NAN, f64::NAN)
                } else {
                    state.total_field(&x)?
                };
                block.push_str(&format!(
                    "{},{},{},{},{}\n",
                    format_g12(x[0]),
                    format_g12(x[1]),
                    format_g12(psi.re),
                    format_g12(psi.im),
                    format_g12(psi.norm())
                ));
            }
            Ok(block)
        })
        .collect();
    let io = |source| Error::Io {
        path: "<grid output>".into(),
        source,
    };
    out.write_all(b"x1,x2,re_psi,im_psi,abs_psi\n").map_err(io)?;
    for row in rows {
        out.write_all(row?.as_bytes()).map_err(io)?;
    }
    Ok(())
}

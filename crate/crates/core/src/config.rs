//! Versioned JSON experiment configs.
//!
//! Every object rejects unknown fields and must carry `"schema": 1`. Data
//! file paths are resolved against the directory of the config file.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::matrix::{Matrix, PartitionSpec};
use crate::rng::{streams, FieldRng};
use crate::smbmm::SmbmmParams;
use crate::ssmm::{SsmmParams, VariantChoice};

pub const SCHEMA_VERSION: u32 = 1;

/// Printed by the CLI when a config cannot be used.
pub const SCHEMA_DOC: &str = r#"Run config (JSON, schema 1; unknown fields are rejected):

{
  "schema": 1,
  "protocol": "ssmm" | "smbmm",
  "q": <prime modulus, >= 5>,
  "m": <int>, "p": <int>, "n": <int>,
  "x_a": <int>, "x_b": <int>,
  "g": <int>, "l": <int>,            // smbmm only
  "n_servers": <int>,
  "variant": "auto" | "a_major" | "b_major",   // optional, default "auto"
  "lambda": <int>, "xi": <int>, "theta": <int>, // A is lambda x xi, B is xi x theta
  "alphas": [<int>, ...],             // optional evaluation points
  "poles": [[<int>, ...], ...],       // optional, smbmm only, G rows of L
  "data": {"random": {"seed": <u64>}}
        | {"files": {"a": ["a0.txt", ...], "b": ["b0.txt", ...]}},
  "stragglers": "none" | {"fixed": [<index>, ...]}
              | {"random": {"count": <int>, "seed": <u64>}},  // optional
  "seed": <u64>                       // source noise and common randomness
}

Matrix files: first line "q rows cols", then one row per line of
space-separated residues.

Sweep config:

{
  "schema": 1,
  "protocol": "ssmm" | "smbmm",
  "q": <prime>,
  "variant": "auto" | "a_major" | "b_major",   // optional
  "grid": {"m": [..], "p": [..], "n": [..], "x_a": [..], "x_b": [..],
           "g": [..], "l": [..]},     // g and l default to [1] / [2]
  "block": <int>,                     // every block is block x block, default 1
  "extra_servers": <int>,             // N = K + extra_servers
  "stragglers": <int>,                // random stragglers per cell, <= extra_servers
  "seed": <u64>
}
"#;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DataSource {
    Random { seed: u64 },
    Files { a: Vec<PathBuf>, b: Vec<PathBuf> },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StragglerModel {
    #[default]
    None,
    Fixed(Vec<usize>),
    Random { count: usize, seed: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SsmmConfig {
    pub schema: u32,
    pub q: u64,
    pub m: usize,
    pub p: usize,
    pub n: usize,
    pub x_a: usize,
    pub x_b: usize,
    pub n_servers: usize,
    #[serde(default)]
    pub variant: VariantChoice,
    pub lambda: usize,
    pub xi: usize,
    pub theta: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<u64>>,
    pub data: DataSource,
    #[serde(default)]
    pub stragglers: StragglerModel,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SmbmmConfig {
    pub schema: u32,
    pub q: u64,
    pub m: usize,
    pub p: usize,
    pub n: usize,
    pub x_a: usize,
    pub x_b: usize,
    pub g: usize,
    pub l: usize,
    pub n_servers: usize,
    #[serde(default)]
    pub variant: VariantChoice,
    pub lambda: usize,
    pub xi: usize,
    pub theta: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphas: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub poles: Option<Vec<Vec<u64>>>,
    pub data: DataSource,
    #[serde(default)]
    pub stragglers: StragglerModel,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum RunConfig {
    Ssmm(SsmmConfig),
    Smbmm(SmbmmConfig),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Ssmm,
    Smbmm,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Ssmm => "ssmm",
            Protocol::Smbmm => "smbmm",
        }
    }
}

fn default_g() -> Vec<usize> {
    vec![1]
}

fn default_l() -> Vec<usize> {
    vec![2]
}

fn default_block() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    pub m: Vec<usize>,
    pub p: Vec<usize>,
    pub n: Vec<usize>,
    pub x_a: Vec<usize>,
    pub x_b: Vec<usize>,
    #[serde(default = "default_g")]
    pub g: Vec<usize>,
    #[serde(default = "default_l")]
    pub l: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub schema: u32,
    pub protocol: Protocol,
    pub q: u64,
    #[serde(default)]
    pub variant: VariantChoice,
    pub grid: Grid,
    #[serde(default = "default_block")]
    pub block: usize,
    #[serde(default)]
    pub extra_servers: usize,
    #[serde(default)]
    pub stragglers: usize,
    pub seed: u64,
}

/// One point of a sweep grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub m: usize,
    pub p: usize,
    pub n: usize,
    pub x_a: usize,
    pub x_b: usize,
    pub g: usize,
    pub l: usize,
}

impl Grid {
    /// Cells in lexicographic order of `(m, p, n, x_a, x_b, g, l)`.
    pub fn cells(&self, protocol: Protocol) -> Vec<Cell> {
        let (gs, ls) = match protocol {
            Protocol::Ssmm => (vec![1], vec![1]),
            Protocol::Smbmm => (self.g.clone(), self.l.clone()),
        };
        let mut out = Vec::new();
        for &m in &self.m {
            for &p in &self.p {
                for &n in &self.n {
                    for &x_a in &self.x_a {
                        for &x_b in &self.x_b {
                            for &g in &gs {
                                for &l in &ls {
                                    out.push(Cell { m, p, n, x_a, x_b, g, l });
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

fn check_schema(schema: u32) -> Result<()> {
    if schema != SCHEMA_VERSION {
        return Err(Error::Config(format!("unsupported schema {schema}, expected {SCHEMA_VERSION}")));
    }
    Ok(())
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn base_dir(path: &Path) -> PathBuf {
    path.parent().map(Path::to_path_buf).unwrap_or_default()
}

fn elems(field: &Field, vals: &[u64]) -> Result<Vec<Fe>> {
    vals.iter().map(|&v| field.try_elem(v)).collect()
}

impl RunConfig {
    pub fn from_path(path: &Path) -> Result<(Self, PathBuf)> {
        let cfg: RunConfig = read_json(path)?;
        check_schema(cfg.schema())?;
        Ok((cfg, base_dir(path)))
    }

    pub fn schema(&self) -> u32 {
        match self {
            RunConfig::Ssmm(c) => c.schema,
            RunConfig::Smbmm(c) => c.schema,
        }
    }

    pub fn protocol(&self) -> Protocol {
        match self {
            RunConfig::Ssmm(_) => Protocol::Ssmm,
            RunConfig::Smbmm(_) => Protocol::Smbmm,
        }
    }

    pub fn set_seed(&mut self, seed: u64) {
        match self {
            RunConfig::Ssmm(c) => c.seed = seed,
            RunConfig::Smbmm(c) => c.seed = seed,
        }
    }
}

impl SweepConfig {
    pub fn from_path(path: &Path) -> Result<Self> {
        let cfg: SweepConfig = read_json(path)?;
        check_schema(cfg.schema)?;
        Ok(cfg)
    }
}

/// Draws or loads `count` factor pairs of shapes `lambda x xi` and
/// `xi x theta`.
pub fn load_data(
    field: Field,
    source: &DataSource,
    count: usize,
    (lambda, xi, theta): (usize, usize, usize),
    base: &Path,
) -> Result<(Vec<Matrix>, Vec<Matrix>)> {
    match source {
        DataSource::Random { seed } => {
            let mut ra = FieldRng::new(*seed, streams::DATA_A);
            let mut rb = FieldRng::new(*seed, streams::DATA_B);
            let a = (0..count).map(|_| Matrix::random(field, lambda, xi, &mut ra)).collect();
            let b = (0..count).map(|_| Matrix::random(field, xi, theta, &mut rb)).collect();
            Ok((a, b))
        }
        DataSource::Files { a, b } => {
            if a.len() != count || b.len() != count {
                return Err(Error::Config(format!(
                    "expected {count} A and B files, got {} and {}",
                    a.len(),
                    b.len()
                )));
            }
            let read = |paths: &[PathBuf], shape: (usize, usize)| -> Result<Vec<Matrix>> {
                paths
                    .iter()
                    .map(|p| {
                        let m = Matrix::read_file(&base.join(p))?;
                        if m.field() != field {
                            return Err(Error::Config(format!("{}: modulus differs from q", p.display())));
                        }
                        if m.shape() != shape {
                            return Err(Error::Config(format!(
                                "{}: shape {:?}, expected {shape:?}",
                                p.display(),
                                m.shape()
                            )));
                        }
                        Ok(m)
                    })
                    .collect()
            };
            Ok((read(a, (lambda, xi))?, read(b, (xi, theta))?))
        }
    }
}

impl SsmmConfig {
    pub fn params(&self) -> Result<SsmmParams> {
        check_schema(self.schema)?;
        let field = Field::new(self.q)?;
        let dims = PartitionSpec::new(self.m, self.p, self.n)?;
        match &self.alphas {
            Some(a) => {
                if a.len() != self.n_servers {
                    return Err(Error::Config(format!("{} alphas for {} servers", a.len(), self.n_servers)));
                }
                SsmmParams::with_alphas(field, dims, self.x_a, self.x_b, elems(&field, a)?, self.variant)
            }
            None => SsmmParams::new(field, dims, self.x_a, self.x_b, self.n_servers, self.variant),
        }
    }

    pub fn data(&self, base: &Path) -> Result<(Matrix, Matrix)> {
        let field = Field::new(self.q)?;
        let (mut a, mut b) = load_data(field, &self.data, 1, (self.lambda, self.xi, self.theta), base)?;
        Ok((a.remove(0), b.remove(0)))
    }
}

impl SmbmmConfig {
    pub fn params(&self) -> Result<SmbmmParams> {
        check_schema(self.schema)?;
        let field = Field::new(self.q)?;
        let dims = PartitionSpec::new(self.m, self.p, self.n)?;
        if self.alphas.is_none() && self.poles.is_none() {
            return SmbmmParams::new(field, dims, self.x_a, self.x_b, self.g, self.l, self.n_servers, self.variant);
        }
        let defaults = SmbmmParams::new(field, dims, self.x_a, self.x_b, self.g, self.l, self.n_servers, self.variant);
        let poles = match &self.poles {
            Some(rows) => rows.iter().map(|r| elems(&field, r)).collect::<Result<_>>()?,
            None => defaults.as_ref().map_err(Clone::clone)?.poles.clone(),
        };
        let alphas = match &self.alphas {
            Some(a) => {
                if a.len() != self.n_servers {
                    return Err(Error::Config(format!("{} alphas for {} servers", a.len(), self.n_servers)));
                }
                elems(&field, a)?
            }
            None => defaults.as_ref().map_err(Clone::clone)?.alphas.clone(),
        };
        SmbmmParams::with_points(field, dims, self.x_a, self.x_b, self.g, self.l, poles, alphas, self.variant)
    }

    pub fn data(&self, base: &Path) -> Result<(Vec<Matrix>, Vec<Matrix>)> {
        let field = Field::new(self.q)?;
        load_data(field, &self.data, self.g * self.l, (self.lambda, self.xi, self.theta), base)
    }
}

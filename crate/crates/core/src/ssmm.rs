//! Single secure matrix multiplication.
//!
//! Both factors are cut into blocks, every block gets its own power of the
//! evaluation variable, and `X_A` (resp. `X_B`) uniformly random blocks are
//! appended at exponents past the data. Server `i` receives the two
//! encodings evaluated at `alpha_i` and returns their product. The user
//! interpolates the product polynomial from any `K` responses and reads the
//! blocks of `C = AB` off fixed coefficients.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::matpoly::MatPoly;
use crate::matrix::{Matrix, PartitionSpec};
use crate::poly::{check_distinct, Interpolator};
use crate::rng::{streams, FieldRng};

/// Which factor's blocks get the wide exponent stride.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    AMajor,
    BMajor,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::AMajor => "a_major",
            Variant::BMajor => "b_major",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantChoice {
    /// The variant with the smaller threshold, `AMajor` on ties.
    #[default]
    Auto,
    AMajor,
    BMajor,
}

impl VariantChoice {
    pub fn resolve(self, t: &Thresholds) -> Variant {
        match self {
            VariantChoice::Auto => t.best,
            VariantChoice::AMajor => Variant::AMajor,
            VariantChoice::BMajor => Variant::BMajor,
        }
    }
}

/// Recovery thresholds of both variants.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    pub a_major: usize,
    pub b_major: usize,
    pub k: usize,
    pub best: Variant,
}

impl Thresholds {
    pub fn from_pair(a_major: usize, b_major: usize) -> Self {
        let best = if b_major < a_major { Variant::BMajor } else { Variant::AMajor };
        Thresholds { a_major, b_major, k: a_major.min(b_major), best }
    }

    pub fn for_variant(&self, v: Variant) -> usize {
        match v {
            Variant::AMajor => self.a_major,
            Variant::BMajor => self.b_major,
        }
    }
}

pub fn recovery_threshold_ssmm(m: usize, p: usize, n: usize, x_a: usize, x_b: usize) -> Result<Thresholds> {
    if [m, p, n, x_a, x_b].contains(&0) {
        return Err(Error::InvalidParams("all of m, p, n, X_A, X_B must be at least 1".into()));
    }
    let a = (m + 1) * (n * p + x_b) + x_a - x_b - 1;
    let b = (n + 1) * (m * p + x_a) + x_b - x_a - 1;
    Ok(Thresholds::from_pair(a, b))
}

/// Exponent placement of one pair of encoders.
///
/// `a[k][l]` is the exponent carrying block `A_{k,l}`, `b[l][j]` the one
/// carrying `B_{l,j}`, and `desired[k][j]` the product coefficient that
/// equals `C_{k,j} = sum_l A_{k,l} B_{l,j}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub a: Vec<Vec<usize>>,
    pub b: Vec<Vec<usize>>,
    pub a_noise: Vec<usize>,
    pub b_noise: Vec<usize>,
    pub desired: Vec<Vec<usize>>,
}

impl Layout {
    pub fn ssmm(variant: Variant, dims: PartitionSpec, x_a: usize, x_b: usize) -> Layout {
        let PartitionSpec { m, p, n } = dims;
        match variant {
            Variant::AMajor => {
                let stride = n * p + x_b;
                Layout {
                    a: grid(m, p, |k, l| l + k * stride),
                    b: grid(p, n, |l, j| (p - 1 - l) + j * p),
                    a_noise: (0..x_a).map(|x| (m - 1) * stride + n * p + x).collect(),
                    b_noise: (0..x_b).map(|x| n * p + x).collect(),
                    desired: grid(m, n, |k, j| k * stride + (j + 1) * p - 1),
                }
            }
            Variant::BMajor => {
                let stride = m * p + x_a;
                Layout {
                    a: grid(m, p, |k, l| l + k * p),
                    b: grid(p, n, |l, j| (p - 1 - l) + j * stride),
                    a_noise: (0..x_a).map(|x| m * p + x).collect(),
                    b_noise: (0..x_b).map(|x| (n - 1) * stride + m * p + x).collect(),
                    desired: grid(m, n, |k, j| j * stride + (k + 1) * p - 1),
                }
            }
        }
    }

    pub fn a_degree(&self) -> usize {
        self.a.iter().flatten().chain(&self.a_noise).copied().max().unwrap_or(0)
    }

    pub fn b_degree(&self) -> usize {
        self.b.iter().flatten().chain(&self.b_noise).copied().max().unwrap_or(0)
    }

    /// Symbolic encoder `sum A_{k,l} x^{a[k][l]} + sum Z_x x^{a_noise[x]}`.
    pub fn a_poly(&self, blocks: &[Vec<Matrix>], noise: &[Matrix]) -> Result<MatPoly> {
        encoder_poly(&self.a, &self.a_noise, blocks, noise)
    }

    pub fn b_poly(&self, blocks: &[Vec<Matrix>], noise: &[Matrix]) -> Result<MatPoly> {
        encoder_poly(&self.b, &self.b_noise, blocks, noise)
    }

    /// Evaluates the A encoder, given the powers `x^0, x^1, ..` of the point.
    pub fn eval_a(&self, blocks: &[Vec<Matrix>], noise: &[Matrix], powers: &[Fe]) -> Result<Matrix> {
        eval_encoder(&self.a, &self.a_noise, blocks, noise, powers)
    }

    pub fn eval_b(&self, blocks: &[Vec<Matrix>], noise: &[Matrix], powers: &[Fe]) -> Result<Matrix> {
        eval_encoder(&self.b, &self.b_noise, blocks, noise, powers)
    }
}

fn grid(r: usize, c: usize, f: impl Fn(usize, usize) -> usize) -> Vec<Vec<usize>> {
    (0..r).map(|i| (0..c).map(|j| f(i, j)).collect()).collect()
}

fn check_blocks(exps: &[Vec<usize>], noise_exps: &[usize], blocks: &[Vec<Matrix>], noise: &[Matrix]) -> Result<(usize, usize)> {
    if blocks.len() != exps.len() || blocks.iter().zip(exps).any(|(b, e)| b.len() != e.len()) {
        return Err(Error::Shape("block grid does not match the partition".into()));
    }
    if noise.len() != noise_exps.len() {
        return Err(Error::Shape(format!("{} noise blocks, expected {}", noise.len(), noise_exps.len())));
    }
    let first = blocks.first().and_then(|r| r.first()).ok_or_else(|| Error::Shape("empty block grid".into()))?;
    Ok(first.shape())
}

fn encoder_poly(exps: &[Vec<usize>], noise_exps: &[usize], blocks: &[Vec<Matrix>], noise: &[Matrix]) -> Result<MatPoly> {
    let (r, c) = check_blocks(exps, noise_exps, blocks, noise)?;
    let field = blocks[0][0].field();
    let data = exps.iter().flatten().copied().zip(blocks.iter().flatten());
    MatPoly::from_terms(field, r, c, data.chain(noise_exps.iter().copied().zip(noise)))
}

fn eval_encoder(
    exps: &[Vec<usize>],
    noise_exps: &[usize],
    blocks: &[Vec<Matrix>],
    noise: &[Matrix],
    powers: &[Fe],
) -> Result<Matrix> {
    let (r, c) = check_blocks(exps, noise_exps, blocks, noise)?;
    let mut acc = Matrix::zeros(blocks[0][0].field(), r, c);
    let data = exps.iter().flatten().copied().zip(blocks.iter().flatten());
    for (e, m) in data.chain(noise_exps.iter().copied().zip(noise)) {
        acc.add_scaled_assign(powers[e], m)?;
    }
    Ok(acc)
}

pub(crate) fn powers(field: &Field, x: Fe, max: usize) -> Vec<Fe> {
    let mut out = Vec::with_capacity(max + 1);
    let mut pw = Fe::ONE;
    for _ in 0..=max {
        out.push(pw);
        pw = field.mul(pw, x);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SsmmParams {
    pub field: Field,
    pub partition: PartitionSpec,
    pub x_a: usize,
    pub x_b: usize,
    pub n_servers: usize,
    pub alphas: Vec<Fe>,
    pub variant: Variant,
}

impl SsmmParams {
    /// Parameters with the default evaluation points `1, 2, .., N`.
    pub fn new(
        field: Field,
        partition: PartitionSpec,
        x_a: usize,
        x_b: usize,
        n_servers: usize,
        variant: VariantChoice,
    ) -> Result<Self> {
        let alphas = (1..=n_servers as u64).map(|v| field.elem(v)).collect();
        Self::with_alphas(field, partition, x_a, x_b, alphas, variant)
    }

    pub fn with_alphas(
        field: Field,
        partition: PartitionSpec,
        x_a: usize,
        x_b: usize,
        alphas: Vec<Fe>,
        variant: VariantChoice,
    ) -> Result<Self> {
        let t = recovery_threshold_ssmm(partition.m, partition.p, partition.n, x_a, x_b)?;
        let params = SsmmParams {
            field,
            partition,
            x_a,
            x_b,
            n_servers: alphas.len(),
            alphas,
            variant: variant.resolve(&t),
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        let PartitionSpec { m, p, n } = self.partition;
        let k = recovery_threshold_ssmm(m, p, n, self.x_a, self.x_b)?.for_variant(self.variant);
        if self.alphas.len() != self.n_servers {
            return Err(Error::PointError(format!("{} points for {} servers", self.alphas.len(), self.n_servers)));
        }
        if self.field.modulus() < self.n_servers as u64 + 1 {
            return Err(Error::InvalidParams(format!(
                "q = {} leaves no room for {} distinct nonzero points",
                self.field.modulus(),
                self.n_servers
            )));
        }
        check_distinct(&self.alphas).map_err(|e| Error::PointError(e.to_string()))?;
        if self.alphas.iter().any(|a| a.is_zero()) {
            return Err(Error::PointError("evaluation points must be nonzero".into()));
        }
        if self.n_servers < k {
            return Err(Error::InvalidParams(format!("N = {} is below the recovery threshold {k}", self.n_servers)));
        }
        Ok(())
    }

    pub fn thresholds(&self) -> Thresholds {
        let PartitionSpec { m, p, n } = self.partition;
        recovery_threshold_ssmm(m, p, n, self.x_a, self.x_b).expect("validated parameters")
    }

    pub fn threshold(&self) -> usize {
        self.thresholds().for_variant(self.variant)
    }

    pub fn layout(&self) -> Layout {
        Layout::ssmm(self.variant, self.partition, self.x_a, self.x_b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SsmmShare {
    pub server_index: usize,
    pub a_share: Matrix,
    pub b_share: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SsmmResponse {
    pub server_index: usize,
    pub y: Matrix,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SsmmNoise {
    pub a: Vec<Matrix>,
    pub b: Vec<Matrix>,
}

/// Row-major grid of blocks.
pub type BlockGrid = Vec<Vec<Matrix>>;

/// Checks the factor shapes and splits them into blocks.
pub fn partition_factors(a: &Matrix, b: &Matrix, dims: PartitionSpec) -> Result<(BlockGrid, BlockGrid)> {
    if a.cols() != b.rows() {
        return Err(Error::Shape(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    if a.field() != b.field() {
        return Err(Error::Shape("factors live in different fields".into()));
    }
    Ok((a.partition(dims.m, dims.p)?, b.partition(dims.p, dims.n)?))
}

pub(crate) fn draw_noise(
    field: &Field,
    count: usize,
    rows: usize,
    cols: usize,
    rng: &mut FieldRng,
) -> Vec<Matrix> {
    (0..count).map(|_| Matrix::random(*field, rows, cols, rng)).collect()
}

pub fn encode_ssmm(a: &Matrix, b: &Matrix, params: &SsmmParams, noise_seed: u64) -> Result<Vec<SsmmShare>> {
    params.validate()?;
    let (ga, gb) = partition_factors(a, b, params.partition)?;
    let mut rng = FieldRng::new(noise_seed, streams::SOURCE_NOISE);
    let (ar, ac) = ga[0][0].shape();
    let (br, bc) = gb[0][0].shape();
    let noise = SsmmNoise {
        a: draw_noise(&params.field, params.x_a, ar, ac, &mut rng),
        b: draw_noise(&params.field, params.x_b, br, bc, &mut rng),
    };
    encode_ssmm_with_noise(&ga, &gb, &noise, params)
}

/// Encodes with caller-chosen noise blocks. Exposed inside the crate for
/// exhaustive audits only.
pub(crate) fn encode_ssmm_with_noise(
    a_blocks: &[Vec<Matrix>],
    b_blocks: &[Vec<Matrix>],
    noise: &SsmmNoise,
    params: &SsmmParams,
) -> Result<Vec<SsmmShare>> {
    let layout = params.layout();
    let max = layout.a_degree().max(layout.b_degree());
    params
        .alphas
        .par_iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let pw = powers(&params.field, alpha, max);
            Ok(SsmmShare {
                server_index: i,
                a_share: layout.eval_a(a_blocks, &noise.a, &pw)?,
                b_share: layout.eval_b(b_blocks, &noise.b, &pw)?,
            })
        })
        .collect()
}

/// The two encoders as matrix polynomials (for symbolic checks).
pub fn encoding_polynomials(
    a_blocks: &[Vec<Matrix>],
    b_blocks: &[Vec<Matrix>],
    noise: &SsmmNoise,
    params: &SsmmParams,
) -> Result<(MatPoly, MatPoly)> {
    let layout = params.layout();
    Ok((layout.a_poly(a_blocks, &noise.a)?, layout.b_poly(b_blocks, &noise.b)?))
}

pub fn server_compute_ssmm(share: &SsmmShare) -> Result<SsmmResponse> {
    Ok(SsmmResponse { server_index: share.server_index, y: share.a_share.matmul(&share.b_share)? })
}

/// Decodes from the first `K` of `responses`.
pub fn decode_ssmm(responses: &[SsmmResponse], params: &SsmmParams) -> Result<Matrix> {
    let k = params.threshold();
    if responses.len() < k {
        return Err(Error::InsufficientResponses { needed: k, got: responses.len() });
    }
    let used = &responses[..k];
    let alphas = response_points(used.iter().map(|r| r.server_index), &params.alphas)?;
    let interp = Interpolator::new(params.field, &alphas)?;
    let shape = used[0].y.shape();
    if let Some(r) = used.iter().find(|r| r.y.shape() != shape) {
        return Err(Error::Shape(format!("response from server {} has a different shape", r.server_index)));
    }
    let f = params.field;
    let layout = params.layout();
    let grid: Vec<Vec<Matrix>> = layout
        .desired
        .iter()
        .map(|row| {
            row.iter()
                .map(|&e| {
                    let w = interp.coefficient_weights(e);
                    let mut acc = Matrix::zeros(f, shape.0, shape.1);
                    for (wi, r) in w.iter().zip(used) {
                        acc.add_scaled_assign(*wi, &r.y).expect("shapes checked");
                    }
                    acc
                })
                .collect()
        })
        .collect();
    Matrix::assemble(&grid)
}

pub(crate) fn response_points(indices: impl Iterator<Item = usize>, alphas: &[Fe]) -> Result<Vec<Fe>> {
    let mut seen = vec![false; alphas.len()];
    indices
        .map(|i| {
            let a = *alphas
                .get(i)
                .ok_or_else(|| Error::PointError(format!("server index {i} out of range")))?;
            if std::mem::replace(&mut seen[i], true) {
                return Err(Error::DuplicatePoint(a.value()));
            }
            Ok(a)
        })
        .collect()
}

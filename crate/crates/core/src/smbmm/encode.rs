use rayon::prelude::*;

use super::{CommonRandomness, SmbmmParams, SmbmmPlan};
use crate::error::{Error, Result};
use crate::field::Fe;
use crate::matpoly::MatPoly;
use crate::matrix::Matrix;
use crate::rng::{streams, FieldRng};
use crate::ssmm::{draw_noise, partition_factors};

/// Block grids of every pair in the batch, indexed `h * L + l`.
#[derive(Clone, Debug)]
pub struct BatchBlocks {
    pub a: Vec<Vec<Vec<Matrix>>>,
    pub b: Vec<Vec<Vec<Matrix>>>,
}

impl BatchBlocks {
    pub fn a_block_shape(&self) -> (usize, usize) {
        self.a[0][0][0].shape()
    }

    pub fn b_block_shape(&self) -> (usize, usize) {
        self.b[0][0][0].shape()
    }

    /// Shape of every product block `C_{k,j}`.
    pub fn product_block_shape(&self) -> (usize, usize) {
        (self.a_block_shape().0, self.b_block_shape().1)
    }
}

pub fn partition_batch(batch_a: &[Matrix], batch_b: &[Matrix], params: &SmbmmParams) -> Result<BatchBlocks> {
    let size = params.batch_size();
    for got in [batch_a.len(), batch_b.len()] {
        if got != size {
            return Err(Error::BatchSize { expected: size, got });
        }
    }
    let (mut a, mut b) = (Vec::with_capacity(size), Vec::with_capacity(size));
    for (x, y) in batch_a.iter().zip(batch_b) {
        if x.shape() != batch_a[0].shape() || y.shape() != batch_b[0].shape() {
            return Err(Error::Shape("all matrices of a batch must share one shape".into()));
        }
        let (ga, gb) = partition_factors(x, y, params.partition)?;
        a.push(ga);
        b.push(gb);
    }
    Ok(BatchBlocks { a, b })
}

/// Noise blocks of the `l = 1` sub-encoders, `a[h][x]` and `b[h][x]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SourceNoise {
    pub a: Vec<Vec<Matrix>>,
    pub b: Vec<Vec<Matrix>>,
}

impl SourceNoise {
    pub fn draw(params: &SmbmmParams, blocks: &BatchBlocks, seed: u64) -> Self {
        let mut rng = FieldRng::new(seed, streams::SOURCE_NOISE);
        let (ar, ac) = blocks.a_block_shape();
        let (br, bc) = blocks.b_block_shape();
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for _ in 0..params.g {
            a.push(draw_noise(&params.field, params.x_a, ar, ac, &mut rng));
            b.push(draw_noise(&params.field, params.x_b, br, bc, &mut rng));
        }
        SourceNoise { a, b }
    }

    pub fn zero(params: &SmbmmParams, blocks: &BatchBlocks) -> Self {
        let (ar, ac) = blocks.a_block_shape();
        let (br, bc) = blocks.b_block_shape();
        let f = params.field;
        SourceNoise {
            a: vec![vec![Matrix::zeros(f, ar, ac); params.x_a]; params.g],
            b: vec![vec![Matrix::zeros(f, br, bc); params.x_b]; params.g],
        }
    }
}

/// Sub-encoders `P^{h,l}`, `Q^{h,l}` as polynomials in `s = f_{h,l} - alpha`.
#[derive(Clone, Debug)]
pub struct SubEncoders {
    pub p: Vec<Vec<MatPoly>>,
    pub q: Vec<Vec<MatPoly>>,
}

impl SubEncoders {
    pub fn build(plan: &SmbmmPlan, blocks: &BatchBlocks, noise: &SourceNoise) -> Result<Self> {
        let SmbmmParams { g, l, .. } = plan.params;
        if noise.a.len() != g || noise.b.len() != g {
            return Err(Error::Shape(format!("source noise for {} groups, expected {g}", noise.a.len())));
        }
        let (mut ps, mut qs) = (Vec::with_capacity(g), Vec::with_capacity(g));
        for h in 0..g {
            let (mut pr, mut qr) = (Vec::with_capacity(l), Vec::with_capacity(l));
            for ell in 0..l {
                let idx = h * l + ell;
                let layout = plan.layout(ell);
                let (na, nb): (&[Matrix], &[Matrix]) =
                    if ell == 0 { (&noise.a[h], &noise.b[h]) } else { (&[], &[]) };
                pr.push(layout.a_poly(&blocks.a[idx], na)?);
                qr.push(layout.b_poly(&blocks.b[idx], nb)?);
            }
            ps.push(pr);
            qs.push(qr);
        }
        Ok(SubEncoders { p: ps, q: qs })
    }

    /// Group encoders `(A~^h(alpha), B~^h(alpha))` at a non-pole point.
    pub fn group_values(&self, plan: &SmbmmPlan, h: usize, alpha: Fe) -> Result<(Matrix, Matrix)> {
        let f = plan.params.field;
        let poles = &plan.params.poles[h];
        let shifts: Vec<Fe> = poles.iter().map(|&pole| f.sub(pole, alpha)).collect();
        if shifts.iter().any(|s| s.is_zero()) {
            return Err(Error::PoleCollision(alpha.value()));
        }
        let lifted: Vec<Fe> = shifts
            .iter()
            .enumerate()
            .map(|(ell, &s)| f.pow(s, plan.indices.multiplicity(ell) as u64))
            .collect();
        let inv = f.batch_inv(&lifted)?;
        let (ar, ac) = self.p[h][0].shape();
        let (br, bc) = self.q[h][0].shape();
        let mut a = Matrix::zeros(f, ar, ac);
        let mut b = Matrix::zeros(f, br, bc);
        for ell in 0..poles.len() {
            // weight of P^{h,l}: product of the other lifted shifts
            let w = f.product(lifted.iter().enumerate().filter(|&(k, _)| k != ell).map(|(_, &v)| v));
            a.add_scaled_assign(w, &self.p[h][ell].eval(shifts[ell]))?;
            b.add_scaled_assign(inv[ell], &self.q[h][ell].eval(shifts[ell]))?;
        }
        Ok((a, b))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmbmmShare {
    pub server_index: usize,
    /// `a_shares[h] = A~^h(alpha_i)`.
    pub a_shares: Vec<Matrix>,
    pub b_shares: Vec<Matrix>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmbmmResponse {
    pub server_index: usize,
    pub y: Matrix,
}

pub fn encode_smbmm(
    batch_a: &[Matrix],
    batch_b: &[Matrix],
    params: &SmbmmParams,
    noise_seed: u64,
) -> Result<Vec<SmbmmShare>> {
    params.validate()?;
    let blocks = partition_batch(batch_a, batch_b, params)?;
    let noise = SourceNoise::draw(params, &blocks, noise_seed);
    let plan = SmbmmPlan::new(params)?;
    encode_smbmm_with_noise(&plan, &blocks, &noise)
}

pub fn encode_smbmm_with_noise(plan: &SmbmmPlan, blocks: &BatchBlocks, noise: &SourceNoise) -> Result<Vec<SmbmmShare>> {
    let enc = SubEncoders::build(plan, blocks, noise)?;
    plan.params
        .alphas
        .par_iter()
        .enumerate()
        .map(|(i, &alpha)| {
            let (mut a_shares, mut b_shares) = (Vec::new(), Vec::new());
            for h in 0..plan.params.g {
                let (a, b) = enc.group_values(plan, h, alpha)?;
                a_shares.push(a);
                b_shares.push(b);
            }
            Ok(SmbmmShare { server_index: i, a_shares, b_shares })
        })
        .collect()
}

/// `Y_i = sum_h A~^h(alpha_i) B~^h(alpha_i) + S(alpha_i)`.
pub fn server_compute_smbmm(share: &SmbmmShare, cr: &CommonRandomness, plan: &SmbmmPlan) -> Result<SmbmmResponse> {
    let alpha = *plan
        .params
        .alphas
        .get(share.server_index)
        .ok_or_else(|| Error::PointError(format!("server index {} out of range", share.server_index)))?;
    if share.a_shares.len() != plan.params.g || share.b_shares.len() != plan.params.g {
        return Err(Error::Shape(format!("share holds {} groups, expected {}", share.a_shares.len(), plan.params.g)));
    }
    let mut y = super::eval_noise_poly(cr, plan, alpha)?;
    for (a, b) in share.a_shares.iter().zip(&share.b_shares) {
        y = y.add(&a.matmul(b)?)?;
    }
    Ok(SmbmmResponse { server_index: share.server_index, y })
}

//! Exact split of a group product into its Cauchy and polynomial parts.

use super::{SmbmmPlan, SubEncoders};
use crate::error::{Error, Result};
use crate::field::Fe;
use crate::matpoly::MatPoly;
use crate::matrix::Matrix;
use crate::poly::Poly;

/// `A~^h(alpha) B~^h(alpha) = sum_l sum_{t<e_l} cauchy[l][t] / (f_{h,l} - alpha)^{e_l - t} + u(alpha)`.
#[derive(Clone, Debug)]
pub struct ProductDecomposition {
    /// `H^{h,l} = P^{h,l} Q^{h,l}` in the variable `f_{h,l} - alpha`.
    pub h: Vec<MatPoly>,
    pub cauchy: Vec<Vec<Matrix>>,
    /// The polynomial part, in `alpha`.
    pub u: MatPoly,
}

/// First `e` entries of `T(c) * (H_0, H_1, ..)`.
pub fn toeplitz_apply(c: &[Fe], h: &MatPoly, e: usize) -> Vec<Matrix> {
    (0..e)
        .map(|t| {
            let mut acc = h.coeff(0).scale(Fe::ZERO);
            for u in 0..=t {
                if let Some(&cv) = c.get(t - u) {
                    acc.add_scaled_assign(cv, &h.coeff(u)).expect("shapes agree");
                }
            }
            acc
        })
        .collect()
}

/// Evaluates the Cauchy terms of group `h` with the given coefficients.
pub fn cauchy_part(plan: &SmbmmPlan, h: usize, coeffs: &[Vec<Matrix>], alpha: Fe) -> Result<Matrix> {
    let f = plan.params.field;
    let first = coeffs
        .first()
        .and_then(|c| c.first())
        .ok_or_else(|| Error::Shape("no Cauchy coefficients".into()))?;
    let mut acc = Matrix::zeros(f, first.rows(), first.cols());
    for (l, per) in coeffs.iter().enumerate() {
        let s = f.sub(plan.params.poles[h][l], alpha);
        let u = f.inv(s).map_err(|_| Error::PoleCollision(alpha.value()))?;
        let e = plan.indices.multiplicity(l);
        if per.len() != e {
            return Err(Error::Shape(format!("{} Cauchy coefficients for multiplicity {e}", per.len())));
        }
        for (t, m) in per.iter().enumerate() {
            acc.add_scaled_assign(f.pow(u, (e - t) as u64), m)?;
        }
    }
    Ok(acc)
}

/// Computes the decomposition symbolically, with no evaluation points.
pub fn product_decomposition(plan: &SmbmmPlan, enc: &SubEncoders, h: usize) -> Result<ProductDecomposition> {
    let f = plan.params.field;
    let poles = &plan.params.poles[h];
    let big_l = poles.len();
    let lifted: Vec<Poly> = (0..big_l)
        .map(|l| Poly::pole_factor(&f, poles[l]).pow(&f, plan.indices.multiplicity(l)))
        .collect();

    let (ar, ac) = enc.p[h][0].shape();
    let mut a_tilde = MatPoly::zero(f, ar, ac);
    for (l, &pole) in poles.iter().enumerate() {
        let mut w = Poly::constant(Fe::ONE);
        for (k, lp) in lifted.iter().enumerate() {
            if k != l {
                w = w.mul(&f, lp);
            }
        }
        a_tilde = a_tilde.add(&enc.p[h][l].reflect(pole).mul_scalar_poly(&w))?;
    }

    let (_, bc) = enc.q[h][0].shape();
    let mut u = MatPoly::zero(f, ar, bc);
    let mut cauchy = Vec::with_capacity(big_l);
    let mut hs = Vec::with_capacity(big_l);
    for (l, &pole) in poles.iter().enumerate() {
        let q_alpha = enc.q[h][l].reflect(pole);
        let num = a_tilde.mul(&q_alpha)?.reflect(pole);
        let (low, high) = num.split_at(plan.indices.multiplicity(l));
        cauchy.push(low);
        u = u.add(&high.reflect(pole))?;
        hs.push(enc.p[h][l].mul(&enc.q[h][l])?);
    }
    Ok(ProductDecomposition { h: hs, cauchy, u })
}

/// The decoding-system solution with zero common randomness, computed
/// symbolically: coordinate `block_offset(h, l) + t` holds the `t`-th
/// coefficient of `H^{h,l}` and the tail holds `sum_h u^h`.
pub fn noiseless_solution(plan: &SmbmmPlan, enc: &SubEncoders) -> Result<Vec<Matrix>> {
    let mut out = Vec::with_capacity(plan.indices.k);
    let mut u: Option<MatPoly> = None;
    for h in 0..plan.params.g {
        let dec = product_decomposition(plan, enc, h)?;
        for (l, hp) in dec.h.iter().enumerate() {
            out.extend((0..plan.indices.multiplicity(l)).map(|t| hp.coeff(t)));
        }
        u = Some(match u {
            Some(acc) => acc.add(&dec.u)?,
            None => dec.u,
        });
    }
    let u = u.ok_or_else(|| Error::Shape("no groups".into()))?;
    out.extend((0..=plan.indices.phi).map(|r| u.coeff(r)));
    Ok(out)
}

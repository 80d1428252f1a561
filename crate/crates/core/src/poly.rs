//! Univariate polynomials over GF(q).

use crate::error::{Error, Result};
use crate::field::{Fe, Field};

/// Dense polynomial, `coeffs[r]` is the coefficient of `x^r`.
///
/// Trailing zero coefficients are stripped, so the zero polynomial has an
/// empty coefficient list and `degree() == None`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    coeffs: Vec<Fe>,
}

impl Poly {
    pub fn new(mut coeffs: Vec<Fe>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Poly { coeffs }
    }

    pub fn zero() -> Self {
        Poly { coeffs: Vec::new() }
    }

    pub fn constant(c: Fe) -> Self {
        Poly::new(vec![c])
    }

    /// `c - x`: the linear factor that appears around every pole.
    pub fn pole_factor(field: &Field, c: Fe) -> Self {
        Poly::new(vec![c, field.neg(Fe::ONE)])
    }

    pub fn coeffs(&self) -> &[Fe] {
        &self.coeffs
    }

    /// Coefficient of `x^r`, zero beyond the degree.
    pub fn coeff(&self, r: usize) -> Fe {
        self.coeffs.get(r).copied().unwrap_or(Fe::ZERO)
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, field: &Field, x: Fe) -> Fe {
        self.coeffs.iter().rev().fold(Fe::ZERO, |acc, &c| field.mul_add(acc, x, c))
    }

    pub fn add(&self, field: &Field, other: &Poly) -> Poly {
        let len = self.coeffs.len().max(other.coeffs.len());
        Poly::new((0..len).map(|r| field.add(self.coeff(r), other.coeff(r))).collect())
    }

    pub fn scale(&self, field: &Field, c: Fe) -> Poly {
        Poly::new(self.coeffs.iter().map(|&a| field.mul(a, c)).collect())
    }

    pub fn mul(&self, field: &Field, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        let mut out = vec![Fe::ZERO; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] = field.mul_add(a, b, out[i + j]);
            }
        }
        Poly::new(out)
    }

    pub fn pow(&self, field: &Field, e: usize) -> Poly {
        let mut acc = Poly::constant(Fe::ONE);
        for _ in 0..e {
            acc = acc.mul(field, self);
        }
        acc
    }
}

/// Precomputed Lagrange basis for a fixed set of distinct nodes.
///
/// Building costs O(K^2); afterwards any single coefficient of the
/// interpolant is an O(K) dot product with the sample values.
#[derive(Clone, Debug)]
pub struct Interpolator {
    field: Field,
    nodes: Vec<Fe>,
    // basis[i][r]: coefficient of x^r in the i-th Lagrange basis polynomial
    basis: Vec<Vec<Fe>>,
}

impl Interpolator {
    pub fn new(field: Field, nodes: &[Fe]) -> Result<Self> {
        if nodes.is_empty() {
            return Err(Error::PointError("interpolation needs at least one point".into()));
        }
        check_distinct(nodes)?;
        let k = nodes.len();

        // master(x) = prod (x - x_j), degree k, monic
        let mut master = vec![Fe::ZERO; k + 1];
        master[0] = Fe::ONE;
        for (deg, &xj) in nodes.iter().enumerate() {
            for r in (0..=deg + 1).rev() {
                let shifted = if r > 0 { master[r - 1] } else { Fe::ZERO };
                master[r] = field.sub(shifted, field.mul(master[r], xj));
            }
        }

        let mut quotients = Vec::with_capacity(k);
        let mut denoms = Vec::with_capacity(k);
        for &xi in nodes {
            // synthetic division of master by (x - xi)
            let mut quot = vec![Fe::ZERO; k];
            let mut carry = Fe::ZERO;
            for r in (0..k).rev() {
                carry = field.mul_add(carry, xi, master[r + 1]);
                quot[r] = carry;
            }
            let d = quot.iter().rev().fold(Fe::ZERO, |acc, &c| field.mul_add(acc, xi, c));
            denoms.push(d);
            quotients.push(quot);
        }
        let inv = field.batch_inv(&denoms)?;
        let basis = quotients
            .into_iter()
            .zip(inv)
            .map(|(quot, s)| quot.into_iter().map(|c| field.mul(c, s)).collect())
            .collect();
        Ok(Interpolator { field, nodes: nodes.to_vec(), basis })
    }

    pub fn nodes(&self) -> &[Fe] {
        &self.nodes
    }

    /// Weights `w_i` with `coefficient r of the interpolant = sum_i w_i y_i`.
    pub fn coefficient_weights(&self, r: usize) -> Vec<Fe> {
        self.basis.iter().map(|b| b.get(r).copied().unwrap_or(Fe::ZERO)).collect()
    }

    pub fn coefficient(&self, r: usize, values: &[Fe]) -> Fe {
        debug_assert_eq!(values.len(), self.nodes.len());
        let f = &self.field;
        f.sum(self.basis.iter().zip(values).map(|(b, &y)| f.mul(b.get(r).copied().unwrap_or(Fe::ZERO), y)))
    }

    pub fn interpolate(&self, values: &[Fe]) -> Result<Poly> {
        if values.len() != self.nodes.len() {
            return Err(Error::Shape(format!(
                "{} values for {} interpolation nodes",
                values.len(),
                self.nodes.len()
            )));
        }
        Ok(Poly::new((0..self.nodes.len()).map(|r| self.coefficient(r, values)).collect()))
    }
}

/// The unique polynomial of degree `< points.len()` through `points`.
pub fn poly_interpolate(field: &Field, points: &[(Fe, Fe)]) -> Result<Poly> {
    let xs: Vec<Fe> = points.iter().map(|p| p.0).collect();
    let ys: Vec<Fe> = points.iter().map(|p| p.1).collect();
    Interpolator::new(*field, &xs)?.interpolate(&ys)
}

/// Rewrites `prod_j (pole_j - a)^{e_j}` as a polynomial in `t = base - a`.
///
/// Each factor equals `t + (pole_j - base)`, so the expansion is a sequence
/// of binomial convolutions. The result has degree `sum e_j` and constant
/// term `prod_j (pole_j - base)^{e_j}`.
pub fn shifted_power_expand(field: &Field, base: Fe, factors: &[(Fe, usize)]) -> Result<Poly> {
    let mut acc = vec![Fe::ONE];
    for &(pole, e) in factors {
        if pole == base {
            return Err(Error::DegeneratePole(pole.value()));
        }
        let d = field.sub(pole, base);
        for _ in 0..e {
            // multiply by (t + d)
            acc.push(Fe::ZERO);
            for r in (0..acc.len()).rev() {
                let lower = if r > 0 { acc[r - 1] } else { Fe::ZERO };
                acc[r] = field.mul_add(acc[r], d, lower);
            }
        }
    }
    Ok(Poly::new(acc))
}

pub(crate) fn check_distinct(xs: &[Fe]) -> Result<()> {
    let mut sorted = xs.to_vec();
    sorted.sort_unstable();
    match sorted.windows(2).find(|w| w[0] == w[1]) {
        Some(w) => Err(Error::DuplicatePoint(w[0].value())),
        None => Ok(()),
    }
}

//! Polynomials with matrix coefficients.
//!
//! Used to build encoders symbolically, so that degrees and coefficient
//! identities can be checked exactly rather than through evaluations.

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::matrix::Matrix;
use crate::poly::Poly;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatPoly {
    field: Field,
    rows: usize,
    cols: usize,
    coeffs: Vec<Matrix>,
}

impl MatPoly {
    pub fn zero(field: Field, rows: usize, cols: usize) -> Self {
        MatPoly { field, rows, cols, coeffs: Vec::new() }
    }

    /// `sum_i terms[i].1 * x^{terms[i].0}`; repeated exponents accumulate.
    pub fn from_terms<'a>(
        field: Field,
        rows: usize,
        cols: usize,
        terms: impl IntoIterator<Item = (usize, &'a Matrix)>,
    ) -> Result<Self> {
        let mut p = MatPoly::zero(field, rows, cols);
        for (e, m) in terms {
            p.add_term(e, Fe::ONE, m)?;
        }
        Ok(p)
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn coeff(&self, r: usize) -> Matrix {
        self.coeffs.get(r).cloned().unwrap_or_else(|| Matrix::zeros(self.field, self.rows, self.cols))
    }

    pub fn coeffs(&self) -> &[Matrix] {
        &self.coeffs
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_zero())
    }

    fn normalize(&mut self) {
        let len = self.degree().map_or(0, |d| d + 1);
        self.coeffs.truncate(len);
    }

    /// `self += c * m * x^e`.
    pub fn add_term(&mut self, e: usize, c: Fe, m: &Matrix) -> Result<()> {
        if m.shape() != (self.rows, self.cols) {
            return Err(Error::Shape(format!(
                "{}x{} term in a {}x{} matrix polynomial",
                m.rows(),
                m.cols(),
                self.rows,
                self.cols
            )));
        }
        while self.coeffs.len() <= e {
            self.coeffs.push(Matrix::zeros(self.field, self.rows, self.cols));
        }
        self.coeffs[e].add_scaled_assign(c, m)?;
        self.normalize();
        Ok(())
    }

    pub fn add(&self, other: &MatPoly) -> Result<MatPoly> {
        let mut out = self.clone();
        for (e, m) in other.coeffs.iter().enumerate() {
            out.add_term(e, Fe::ONE, m)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &MatPoly) -> Result<MatPoly> {
        let mut out = self.clone();
        let minus_one = self.field.neg(Fe::ONE);
        for (e, m) in other.coeffs.iter().enumerate() {
            out.add_term(e, minus_one, m)?;
        }
        Ok(out)
    }

    pub fn mul(&self, other: &MatPoly) -> Result<MatPoly> {
        if self.cols != other.rows {
            return Err(Error::Shape("inner dimensions of matrix polynomials differ".into()));
        }
        let mut out = MatPoly::zero(self.field, self.rows, other.cols);
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out.add_term(i + j, Fe::ONE, &a.matmul(b)?)?;
            }
        }
        Ok(out)
    }

    /// Product with a scalar polynomial.
    pub fn mul_scalar_poly(&self, p: &Poly) -> MatPoly {
        let mut out = MatPoly::zero(self.field, self.rows, self.cols);
        for (i, m) in self.coeffs.iter().enumerate() {
            for (j, &c) in p.coeffs().iter().enumerate() {
                out.add_term(i + j, c, m).expect("shapes agree");
            }
        }
        out
    }

    pub fn eval(&self, x: Fe) -> Matrix {
        let mut acc = Matrix::zeros(self.field, self.rows, self.cols);
        for m in self.coeffs.iter().rev() {
            acc = acc.scale(x);
            acc.add_scaled_assign(Fe::ONE, m).expect("shapes agree");
        }
        acc
    }

    /// Substitutes `x -> f - x`. Applying it twice gives back `self`.
    pub fn reflect(&self, f: Fe) -> MatPoly {
        let factor = Poly::pole_factor(&self.field, f);
        let mut acc = MatPoly::zero(self.field, self.rows, self.cols);
        for m in self.coeffs.iter().rev() {
            acc = acc.mul_scalar_poly(&factor);
            acc.add_term(0, Fe::ONE, m).expect("shapes agree");
        }
        acc
    }

    /// Splits into (coefficients below `e`, quotient by `x^e`).
    pub fn split_at(&self, e: usize) -> (Vec<Matrix>, MatPoly) {
        let low = (0..e).map(|r| self.coeff(r)).collect();
        let mut high = MatPoly::zero(self.field, self.rows, self.cols);
        for (r, m) in self.coeffs.iter().enumerate().skip(e) {
            high.add_term(r - e, Fe::ONE, m).expect("shapes agree");
        }
        (low, high)
    }
}

//! Arithmetic in the prime field GF(q).
//!
//! A [`Field`] carries the modulus; elements are plain canonical residues
//! wrapped in [`Fe`]. Moduli up to 64 bits are supported, products are
//! reduced through 128-bit intermediates (or 64-bit ones when `q < 2^32`).

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A canonical residue in `[0, q)`.
///
/// `Fe` does not remember its field; mixing elements of different fields is
/// a logic error the type system does not catch.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fe(u64);

impl Fe {
    pub const ZERO: Fe = Fe(0);
    pub const ONE: Fe = Fe(1);

    #[inline]
    pub fn value(self) -> u64 {
        self.0
    }

    #[inline]
    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

impl fmt::Display for Fe {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// GF(q) for a prime `q >= 5`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Field {
    q: u64,
}

/// Binary field operations, mostly useful for table-driven callers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldOp {
    Add,
    Sub,
    Mul,
    Div,
    /// Unary: the second operand is ignored.
    Inv,
    /// The second operand is used as an integer exponent.
    Pow,
}

impl Field {
    /// Smallest modulus accepted.
    pub const MIN_MODULUS: u64 = 5;

    pub fn new(q: u64) -> Result<Self> {
        if q < Self::MIN_MODULUS || !is_prime(q) {
            return Err(Error::InvalidModulus(q));
        }
        Ok(Field { q })
    }

    #[inline]
    pub fn modulus(&self) -> u64 {
        self.q
    }

    /// Reduces an arbitrary integer into the field.
    #[inline]
    pub fn elem(&self, v: u64) -> Fe {
        Fe(v % self.q)
    }

    /// Reduces a signed integer into the field.
    pub fn elem_i64(&self, v: i64) -> Fe {
        Fe((v as i128).rem_euclid(self.q as i128) as u64)
    }

    /// Checked construction: `v` must already be canonical.
    pub fn try_elem(&self, v: u64) -> Result<Fe> {
        if v < self.q {
            Ok(Fe(v))
        } else {
            Err(Error::Parse(format!("residue {v} is not below the modulus {}", self.q)))
        }
    }

    #[inline]
    pub fn zero(&self) -> Fe {
        Fe::ZERO
    }

    #[inline]
    pub fn one(&self) -> Fe {
        Fe::ONE
    }

    #[inline]
    pub fn add(&self, a: Fe, b: Fe) -> Fe {
        let s = a.0 as u128 + b.0 as u128;
        let q = self.q as u128;
        Fe(if s >= q { (s - q) as u64 } else { s as u64 })
    }

    #[inline]
    pub fn sub(&self, a: Fe, b: Fe) -> Fe {
        if a.0 >= b.0 {
            Fe(a.0 - b.0)
        } else {
            Fe(self.q - (b.0 - a.0))
        }
    }

    #[inline]
    pub fn neg(&self, a: Fe) -> Fe {
        if a.0 == 0 {
            a
        } else {
            Fe(self.q - a.0)
        }
    }

    #[inline]
    pub fn mul(&self, a: Fe, b: Fe) -> Fe {
        if self.q <= u32::MAX as u64 {
            Fe(a.0 * b.0 % self.q)
        } else {
            Fe(((a.0 as u128 * b.0 as u128) % self.q as u128) as u64)
        }
    }

    /// `a * b + c`.
    #[inline]
    pub fn mul_add(&self, a: Fe, b: Fe, c: Fe) -> Fe {
        self.add(self.mul(a, b), c)
    }

    pub fn pow(&self, a: Fe, mut e: u64) -> Fe {
        let mut base = a;
        let mut acc = Fe::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse by the extended Euclidean algorithm.
    pub fn inv(&self, a: Fe) -> Result<Fe> {
        if a.0 == 0 {
            return Err(Error::ZeroInverse);
        }
        let (mut r0, mut r1) = (self.q as i128, a.0 as i128);
        let (mut t0, mut t1) = (0i128, 1i128);
        while r1 != 0 {
            let quot = r0 / r1;
            (r0, r1) = (r1, r0 - quot * r1);
            (t0, t1) = (t1, t0 - quot * t1);
        }
        debug_assert_eq!(r0, 1);
        Ok(Fe(t0.rem_euclid(self.q as i128) as u64))
    }

    pub fn div(&self, a: Fe, b: Fe) -> Result<Fe> {
        Ok(self.mul(a, self.inv(b)?))
    }

    /// Inverts every element of `xs` with a single field inversion.
    pub fn batch_inv(&self, xs: &[Fe]) -> Result<Vec<Fe>> {
        let mut prefix = Vec::with_capacity(xs.len());
        let mut acc = Fe::ONE;
        for &x in xs {
            if x.is_zero() {
                return Err(Error::ZeroInverse);
            }
            prefix.push(acc);
            acc = self.mul(acc, x);
        }
        let mut inv_acc = self.inv(acc)?;
        let mut out = vec![Fe::ZERO; xs.len()];
        for i in (0..xs.len()).rev() {
            out[i] = self.mul(inv_acc, prefix[i]);
            inv_acc = self.mul(inv_acc, xs[i]);
        }
        Ok(out)
    }

    pub fn apply(&self, op: FieldOp, a: Fe, b: Fe) -> Result<Fe> {
        match op {
            FieldOp::Add => Ok(self.add(a, b)),
            FieldOp::Sub => Ok(self.sub(a, b)),
            FieldOp::Mul => Ok(self.mul(a, b)),
            FieldOp::Div => self.div(a, b),
            FieldOp::Inv => self.inv(a),
            FieldOp::Pow => Ok(self.pow(a, b.0)),
        }
    }

    pub fn sum<I: IntoIterator<Item = Fe>>(&self, it: I) -> Fe {
        it.into_iter().fold(Fe::ZERO, |acc, x| self.add(acc, x))
    }

    pub fn product<I: IntoIterator<Item = Fe>>(&self, it: I) -> Fe {
        it.into_iter().fold(Fe::ONE, |acc, x| self.mul(acc, x))
    }
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut a: u64, mut e: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, m);
        }
        a = mul_mod(a, a, m);
        e >>= 1;
    }
    acc
}

/// Deterministic Miller-Rabin for all 64-bit integers.
pub fn is_prime(n: u64) -> bool {
    const WITNESSES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &p in &WITNESSES {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for &a in &WITNESSES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

//! Structured matrices and exact linear solves over GF(q).

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::matrix::Matrix;
use crate::poly::check_distinct;

/// Rows `[1/(d_1-a)^{n_1}, .., 1/(d_1-a), .., 1/(d_r-a), 1, a, .., a^{w-1}]`.
pub fn build_cauchy_vandermonde(
    field: &Field,
    alphas: &[Fe],
    poles: &[(Fe, usize)],
    vander_width: usize,
) -> Result<Matrix> {
    let cauchy: usize = poles.iter().map(|p| p.1).sum();
    let k = cauchy + vander_width;
    if alphas.len() != k {
        return Err(Error::Shape(format!(
            "{} evaluation points for {k} columns ({cauchy} Cauchy + {vander_width} Vandermonde)",
            alphas.len()
        )));
    }
    check_distinct(alphas)?;
    let pole_points: Vec<Fe> = poles.iter().map(|p| p.0).collect();
    check_distinct(&pole_points)?;
    if let Some(a) = alphas.iter().find(|a| pole_points.contains(a)) {
        return Err(Error::PoleCollision(a.value()));
    }

    let mut out = Matrix::zeros(*field, k, k);
    for (i, &a) in alphas.iter().enumerate() {
        let mut col = 0;
        for &(d, mult) in poles {
            let u = field.inv(field.sub(d, a))?;
            // columns run from u^mult down to u^1
            let mut pw = field.pow(u, mult as u64);
            let u_inv = field.sub(d, a);
            for _ in 0..mult {
                out.set(i, col, pw);
                pw = field.mul(pw, u_inv);
                col += 1;
            }
        }
        let mut pw = Fe::ONE;
        for _ in 0..vander_width {
            out.set(i, col, pw);
            pw = field.mul(pw, a);
            col += 1;
        }
    }
    Ok(out)
}

/// Lower-triangular Toeplitz matrix with first column `c`.
pub fn build_toeplitz_lower(field: &Field, c: &[Fe]) -> Result<Matrix> {
    if c.is_empty() {
        return Err(Error::Shape("Toeplitz generator must be nonempty".into()));
    }
    let n = c.len();
    Ok(Matrix::from_fn(*field, n, n, |i, j| if i >= j { c[i - j] } else { Fe::ZERO }))
}

/// Block-diagonal matrix from square blocks.
pub fn block_diagonal(field: &Field, blocks: &[Matrix]) -> Result<Matrix> {
    let n: usize = blocks.iter().map(|b| b.rows()).sum();
    let mut out = Matrix::zeros(*field, n, n);
    let mut off = 0;
    for b in blocks {
        if b.rows() != b.cols() {
            return Err(Error::Shape(format!("block {}x{} is not square", b.rows(), b.cols())));
        }
        for i in 0..b.rows() {
            for j in 0..b.cols() {
                out.set(off + i, off + j, b.get(i, j));
            }
        }
        off += b.rows();
    }
    Ok(out)
}

#[derive(Debug)]
struct Lu {
    // packed: strictly lower part holds L (unit diagonal), upper part holds U
    lu: Matrix,
    perm: Vec<usize>,
}

/// A square system whose LU factorization is computed once, on first solve,
/// and then shared by every right-hand side.
#[derive(Debug)]
pub struct SquareSystem {
    matrix: Matrix,
    lu: OnceLock<Option<Lu>>,
}

impl SquareSystem {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if matrix.rows() != matrix.cols() {
            return Err(Error::Shape(format!("{}x{} system is not square", matrix.rows(), matrix.cols())));
        }
        Ok(SquareSystem { matrix, lu: OnceLock::new() })
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    fn factor(&self) -> Result<&Lu> {
        self.lu.get_or_init(|| lu_decompose(&self.matrix)).as_ref().ok_or(Error::SingularSystem)
    }

    pub fn is_singular(&self) -> bool {
        self.factor().is_err()
    }

    pub fn solve_one(&self, rhs: &[Fe]) -> Result<Vec<Fe>> {
        let n = self.dim();
        if rhs.len() != n {
            return Err(Error::Shape(format!("right-hand side of length {} for a {n}x{n} system", rhs.len())));
        }
        let Lu { lu, perm } = self.factor()?;
        let f = lu.field();
        let mut x: Vec<Fe> = perm.iter().map(|&p| rhs[p]).collect();
        for i in 0..n {
            let row = lu.row(i);
            let mut acc = x[i];
            for j in 0..i {
                acc = f.sub(acc, f.mul(row[j], x[j]));
            }
            x[i] = acc;
        }
        for i in (0..n).rev() {
            let row = lu.row(i);
            let mut acc = x[i];
            for j in i + 1..n {
                acc = f.sub(acc, f.mul(row[j], x[j]));
            }
            x[i] = f.div(acc, row[i])?;
        }
        Ok(x)
    }

    pub fn solve(&self, rhs_columns: &[Vec<Fe>]) -> Result<Vec<Vec<Fe>>> {
        rhs_columns.iter().map(|c| self.solve_one(c)).collect()
    }
}

fn lu_decompose(m: &Matrix) -> Option<Lu> {
    let f = m.field();
    let n = m.rows();
    let mut a = m.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    for col in 0..n {
        let pivot = (col..n).find(|&r| !a.get(r, col).is_zero())?;
        if pivot != col {
            for j in 0..n {
                let t = a.get(col, j);
                a.set(col, j, a.get(pivot, j));
                a.set(pivot, j, t);
            }
            perm.swap(col, pivot);
        }
        let inv = f.inv(a.get(col, col)).ok()?;
        for r in col + 1..n {
            let factor = f.mul(a.get(r, col), inv);
            a.set(r, col, factor);
            if factor.is_zero() {
                continue;
            }
            for j in col + 1..n {
                let v = f.sub(a.get(r, j), f.mul(factor, a.get(col, j)));
                a.set(r, j, v);
            }
        }
    }
    Some(Lu { lu: a, perm })
}

/// Rank by plain Gaussian elimination (kept separate from the LU solver so
/// it can serve as an independent check).
pub fn rank(m: &Matrix) -> usize {
    let f = m.field();
    let mut a = m.clone();
    let (rows, cols) = a.shape();
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows).find(|&i| !a.get(i, c).is_zero()) else {
            continue;
        };
        for j in 0..cols {
            let t = a.get(r, j);
            a.set(r, j, a.get(p, j));
            a.set(p, j, t);
        }
        let inv = f.inv(a.get(r, c)).expect("pivot is nonzero");
        for i in 0..rows {
            if i == r {
                continue;
            }
            let factor = f.mul(a.get(i, c), inv);
            if factor.is_zero() {
                continue;
            }
            for j in c..cols {
                let v = f.sub(a.get(i, j), f.mul(factor, a.get(r, j)));
                a.set(i, j, v);
            }
        }
        r += 1;
        if r == rows {
            break;
        }
    }
    r
}

pub fn determinant(m: &Matrix) -> Result<Fe> {
    if m.rows() != m.cols() {
        return Err(Error::Shape("determinant of a non-square matrix".into()));
    }
    let f = m.field();
    let n = m.rows();
    let mut a = m.clone();
    let mut det = Fe::ONE;
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a.get(i, c).is_zero()) else {
            return Ok(Fe::ZERO);
        };
        if p != c {
            for j in 0..n {
                let t = a.get(c, j);
                a.set(c, j, a.get(p, j));
                a.set(p, j, t);
            }
            det = f.neg(det);
        }
        let piv = a.get(c, c);
        det = f.mul(det, piv);
        let inv = f.inv(piv)?;
        for i in c + 1..n {
            let factor = f.mul(a.get(i, c), inv);
            for j in c..n {
                let v = f.sub(a.get(i, j), f.mul(factor, a.get(c, j)));
                a.set(i, j, v);
            }
        }
    }
    Ok(det)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::FieldRng;
    use proptest::prelude::*;

    fn elems(f: &Field, vs: &[u64]) -> Vec<Fe> {
        vs.iter().map(|&v| f.elem(v)).collect()
    }

    #[test]
    fn cauchy_vandermonde_examples() {
        let f = Field::new(7).unwrap();
        let m = build_cauchy_vandermonde(&f, &elems(&f, &[3]), &[], 1).unwrap();
        assert_eq!(m, Matrix::from_rows(f, &[vec![1]]).unwrap());
        let m = build_cauchy_vandermonde(&f, &elems(&f, &[3, 4]), &[(f.elem(1), 1)], 1).unwrap();
        assert_eq!(m, Matrix::from_rows(f, &[vec![3, 1], vec![2, 1]]).unwrap());
    }

    #[test]
    fn cauchy_vandermonde_errors() {
        let f = Field::new(7).unwrap();
        let one = f.elem(1);
        assert_eq!(
            build_cauchy_vandermonde(&f, &elems(&f, &[1, 4]), &[(one, 1)], 1),
            Err(Error::PoleCollision(1))
        );
        assert_eq!(build_cauchy_vandermonde(&f, &elems(&f, &[4, 4]), &[(one, 1)], 1), Err(Error::DuplicatePoint(4)));
        assert!(matches!(build_cauchy_vandermonde(&f, &elems(&f, &[4]), &[(one, 1)], 1), Err(Error::Shape(_))));
        assert_eq!(
            build_cauchy_vandermonde(&f, &elems(&f, &[3, 4, 5]), &[(one, 1), (one, 1)], 1),
            Err(Error::DuplicatePoint(1))
        );
    }

    #[test]
    fn cauchy_vandermonde_higher_multiplicity_row() {
        let f = Field::new(101).unwrap();
        let (d, a) = (f.elem(5), f.elem(2));
        let m = build_cauchy_vandermonde(&f, &[a, f.elem(7), f.elem(8), f.elem(9)], &[(d, 3)], 1).unwrap();
        let u = f.inv(f.sub(d, a)).unwrap();
        assert_eq!(m.row(0), &[f.pow(u, 3), f.pow(u, 2), u, Fe::ONE]);
    }

    #[test]
    fn cauchy_vandermonde_nonsingular_example() {
        let f = Field::new(101).unwrap();
        let alphas: Vec<Fe> = (20..40).map(|v| f.elem(v)).collect();
        let m = build_cauchy_vandermonde(&f, &alphas, &[(f.elem(5), 7), (f.elem(9), 6)], 7).unwrap();
        assert_eq!(rank(&m), 20);
    }

    #[test]
    fn toeplitz_examples() {
        let f = Field::new(101).unwrap();
        assert_eq!(build_toeplitz_lower(&f, &elems(&f, &[1])).unwrap(), Matrix::identity(f, 1));
        assert_eq!(
            build_toeplitz_lower(&f, &elems(&f, &[1, 2])).unwrap(),
            Matrix::from_rows(f, &[vec![1, 0], vec![2, 1]]).unwrap()
        );
        let c = elems(&f, &[3, 50, 7, 0, 99]);
        let t = build_toeplitz_lower(&f, &c).unwrap();
        assert_eq!(determinant(&t).unwrap(), f.pow(f.elem(3), 5));
        assert!(build_toeplitz_lower(&f, &[]).is_err());
    }

    #[test]
    fn solve_examples() {
        let f = Field::new(101).unwrap();
        let id = SquareSystem::new(Matrix::identity(f, 2)).unwrap();
        assert_eq!(id.solve_one(&elems(&f, &[5, 6])).unwrap(), elems(&f, &[5, 6]));
        let swap = SquareSystem::new(Matrix::from_rows(f, &[vec![0, 1], vec![1, 0]]).unwrap()).unwrap();
        assert_eq!(swap.solve_one(&elems(&f, &[8, 9])).unwrap(), elems(&f, &[9, 8]));
        let sing = SquareSystem::new(Matrix::from_rows(f, &[vec![1, 2], vec![2, 4]]).unwrap()).unwrap();
        assert_eq!(sing.solve_one(&elems(&f, &[1, 1])), Err(Error::SingularSystem));
        assert!(SquareSystem::new(Matrix::zeros(f, 2, 3)).is_err());
    }

    #[test]
    fn solve_round_trip_reuses_factorization() {
        let f = Field::new(101).unwrap();
        let mut rng = FieldRng::new(17, 0);
        let a = loop {
            let a = Matrix::random(f, 8, 8, &mut rng);
            if rank(&a) == 8 {
                break a;
            }
        };
        let sys = SquareSystem::new(a.clone()).unwrap();
        let ys: Vec<Vec<Fe>> = (0..5).map(|_| (0..8).map(|_| rng.uniform(&f)).collect()).collect();
        let rhs: Vec<Vec<Fe>> = ys.iter().map(|y| a.mul_vec(y).unwrap()).collect();
        assert_eq!(sys.solve(&rhs).unwrap(), ys);
    }

    #[test]
    fn rank_and_determinant_agree() {
        let f = Field::new(7).unwrap();
        let mut rng = FieldRng::new(2, 0);
        for _ in 0..200 {
            let a = Matrix::random(f, 3, 3, &mut rng);
            assert_eq!(rank(&a) == 3, !determinant(&a).unwrap().is_zero());
        }
        assert_eq!(rank(&Matrix::zeros(f, 3, 4)), 0);
        assert_eq!(rank(&Matrix::from_rows(f, &[vec![1, 2, 3], vec![2, 4, 6]]).unwrap()), 1);
    }

    proptest! {
        #[test]
        fn toeplitz_nonsingular_iff_leading_nonzero(seed in any::<u64>(), len in 1usize..7, zero_lead in any::<bool>()) {
            let f = Field::new(101).unwrap();
            let mut rng = FieldRng::new(seed, 0);
            let mut c: Vec<Fe> = (0..len).map(|_| rng.uniform(&f)).collect();
            if zero_lead {
                c[0] = Fe::ZERO;
            }
            let t = build_toeplitz_lower(&f, &c).unwrap();
            prop_assert_eq!(rank(&t) == len, !c[0].is_zero());
        }
    }
}

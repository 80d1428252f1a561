//! Dense row-major matrices over GF(q) and block partitioning.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::rng::FieldRng;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Matrix {
    field: Field,
    rows: usize,
    cols: usize,
    data: Vec<Fe>,
}

/// Block counts of the two factors: `A` is split `m x p`, `B` is split `p x n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct PartitionSpec {
    pub m: usize,
    pub p: usize,
    pub n: usize,
}

impl PartitionSpec {
    pub fn new(m: usize, p: usize, n: usize) -> Result<Self> {
        if m == 0 || p == 0 || n == 0 {
            return Err(Error::InvalidParams(format!("partition ({m},{p},{n}) has a zero block count")));
        }
        Ok(PartitionSpec { m, p, n })
    }
}

impl Matrix {
    pub fn zeros(field: Field, rows: usize, cols: usize) -> Self {
        Matrix { field, rows, cols, data: vec![Fe::ZERO; rows * cols] }
    }

    pub fn identity(field: Field, n: usize) -> Self {
        let mut m = Matrix::zeros(field, n, n);
        for i in 0..n {
            m.set(i, i, Fe::ONE);
        }
        m
    }

    pub fn from_vec(field: Field, rows: usize, cols: usize, data: Vec<Fe>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!("{} entries for a {rows}x{cols} matrix", data.len())));
        }
        Ok(Matrix { field, rows, cols, data })
    }

    /// Builds from integer rows, reducing every entry mod q.
    pub fn from_rows(field: Field, rows: &[Vec<u64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        let data = rows.iter().flatten().map(|&v| field.elem(v)).collect();
        Matrix::from_vec(field, rows.len(), cols, data)
    }

    pub fn from_fn(field: Field, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Fe) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { field, rows, cols, data }
    }

    /// Uniform entries from a deterministic seeded stream.
    pub fn random(field: Field, rows: usize, cols: usize, rng: &mut FieldRng) -> Self {
        let data = (0..rows * cols).map(|_| rng.uniform(&field)).collect();
        Matrix { field, rows, cols, data }
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn data(&self) -> &[Fe] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Fe {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Fe) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[Fe] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|v| v.is_zero())
    }

    fn check_same_shape(&self, other: &Matrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(Error::Shape(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        let f = self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.add(a, b)).collect();
        Ok(Matrix { data, ..*self })
    }

    pub fn sub(&self, other: &Matrix) -> Result<Matrix> {
        self.check_same_shape(other)?;
        let f = self.field;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f.sub(a, b)).collect();
        Ok(Matrix { data, ..*self })
    }

    /// `self += c * other`.
    pub fn add_scaled_assign(&mut self, c: Fe, other: &Matrix) -> Result<()> {
        self.check_same_shape(other)?;
        if c.is_zero() {
            return Ok(());
        }
        let f = self.field;
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a = f.mul_add(c, b, *a);
        }
        Ok(())
    }

    pub fn scale(&self, c: Fe) -> Matrix {
        let f = self.field;
        Matrix { data: self.data.iter().map(|&a| f.mul(a, c)).collect(), ..*self }
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.field, self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Textbook triple-loop product.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let f = self.field;
        let (n, k, m) = (self.rows, self.cols, other.cols);
        let mut data = vec![Fe::ZERO; n * m];
        let row_product = |(i, out): (usize, &mut [Fe])| {
            for l in 0..k {
                let a = self.data[i * k + l];
                if a.is_zero() {
                    continue;
                }
                let brow = &other.data[l * m..(l + 1) * m];
                for (o, &b) in out.iter_mut().zip(brow) {
                    *o = f.mul_add(a, b, *o);
                }
            }
        };
        if n * m * k >= 1 << 16 {
            data.par_chunks_mut(m.max(1)).enumerate().for_each(row_product);
        } else {
            data.chunks_mut(m.max(1)).enumerate().for_each(row_product);
        }
        Ok(Matrix { field: f, rows: n, cols: m, data })
    }

    pub fn mul_vec(&self, v: &[Fe]) -> Result<Vec<Fe>> {
        if v.len() != self.cols {
            return Err(Error::Shape(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        let f = self.field;
        Ok((0..self.rows)
            .map(|i| f.sum(self.row(i).iter().zip(v).map(|(&a, &b)| f.mul(a, b))))
            .collect())
    }

    /// Splits into a `row_blocks x col_blocks` grid of equal blocks.
    pub fn partition(&self, row_blocks: usize, col_blocks: usize) -> Result<Vec<Vec<Matrix>>> {
        if row_blocks == 0 || col_blocks == 0 || !self.rows.is_multiple_of(row_blocks) || !self.cols.is_multiple_of(col_blocks) {
            return Err(Error::Shape(format!(
                "{}x{} matrix is not divisible into {row_blocks}x{col_blocks} blocks",
                self.rows, self.cols
            )));
        }
        let (br, bc) = (self.rows / row_blocks, self.cols / col_blocks);
        Ok((0..row_blocks)
            .map(|k| {
                (0..col_blocks)
                    .map(|l| Matrix::from_fn(self.field, br, bc, |i, j| self.get(k * br + i, l * bc + j)))
                    .collect()
            })
            .collect())
    }

    /// Concatenates a rectangular grid of equally sized blocks.
    pub fn assemble(grid: &[Vec<Matrix>]) -> Result<Matrix> {
        let first = grid
            .first()
            .and_then(|r| r.first())
            .ok_or_else(|| Error::Shape("empty block grid".into()))?;
        let (br, bc) = first.shape();
        let gc = grid[0].len();
        for row in grid {
            if row.len() != gc {
                return Err(Error::Shape("ragged block grid".into()));
            }
            if let Some(b) = row.iter().find(|b| b.shape() != (br, bc)) {
                return Err(Error::Shape(format!("block {}x{} in a grid of {br}x{bc} blocks", b.rows, b.cols)));
            }
        }
        Ok(Matrix::from_fn(first.field, grid.len() * br, gc * bc, |i, j| {
            grid[i / br][j / bc].get(i % br, j % bc)
        }))
    }

    /// Canonical text form: `q rows cols` header, then one line per row.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.field.modulus(), self.rows, self.cols);
        for i in 0..self.rows {
            let line: Vec<String> = self.row(i).iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    /// Parses the canonical text form. Entries must already be reduced.
    pub fn from_text(text: &str) -> Result<Matrix> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
        let nums = parse_u64s(header)?;
        let [q, rows, cols] = nums[..] else {
            return Err(Error::Parse(format!("bad header line {header:?}")));
        };
        let field = Field::new(q)?;
        let (rows, cols) = (rows as usize, cols as usize);
        let mut data = Vec::with_capacity(rows * cols);
        for (i, line) in lines.enumerate() {
            let vals = parse_u64s(line)?;
            if vals.len() != cols {
                return Err(Error::Parse(format!("row {i} has {} entries, expected {cols}", vals.len())));
            }
            for v in vals {
                data.push(field.try_elem(v)?);
            }
        }
        if data.len() != rows * cols {
            return Err(Error::Parse(format!("expected {rows} rows, got {}", data.len() / cols.max(1))));
        }
        Matrix::from_vec(field, rows, cols, data)
    }

    pub fn read_file(path: &Path) -> Result<Matrix> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Matrix::from_text(&text)
    }

    pub fn write_file(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }
}

fn parse_u64s(line: &str) -> Result<Vec<u64>> {
    line.split_whitespace()
        .map(|tok| {
            if tok.len() > 1 && tok.starts_with('0') {
                return Err(Error::Parse(format!("non-canonical number {tok:?}")));
            }
            tok.parse::<u64>().map_err(|_| Error::Parse(format!("not a residue: {tok:?}")))
        })
        .collect()
}

/// Ground-truth product used to check every decoded result.
pub fn matmul_oracle(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.field != b.field {
        return Err(Error::Shape("operands live in different fields".into()));
    }
    a.matmul(b)
}

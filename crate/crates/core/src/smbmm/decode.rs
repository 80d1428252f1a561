use rayon::prelude::*;

use super::{SmbmmParams, SmbmmPlan, SmbmmResponse};
use crate::error::{Error, Result};
use crate::field::Fe;
use crate::linalg::{block_diagonal, build_cauchy_vandermonde, build_toeplitz_lower, SquareSystem};
use crate::matrix::Matrix;
use crate::ssmm::response_points;

/// `V1 * V2` for the given evaluation points.
pub fn decoding_matrix(plan: &SmbmmPlan, alphas: &[Fe]) -> Result<Matrix> {
    let f = plan.params.field;
    let v1 = build_cauchy_vandermonde(&f, alphas, &plan.pole_list(), plan.indices.phi + 1)?;
    let mut blocks = Vec::with_capacity(plan.params.g * plan.params.l + 1);
    for per in &plan.constants {
        for c in per {
            blocks.push(build_toeplitz_lower(&f, c)?);
        }
    }
    blocks.push(Matrix::identity(f, plan.indices.phi + 1));
    v1.matmul(&block_diagonal(&f, &blocks)?)
}

/// Solution vectors of the decoding system, one per scalar position of the
/// product blocks (row-major). This is everything the user learns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolvedResponses {
    pub rows: usize,
    pub cols: usize,
    pub used: Vec<usize>,
    pub solutions: Vec<Vec<Fe>>,
}

impl SolvedResponses {
    pub fn at(&self, i: usize, j: usize) -> &[Fe] {
        &self.solutions[i * self.cols + j]
    }
}

/// Solves the decoding system from the first `K` responses.
pub fn solve_responses(responses: &[SmbmmResponse], plan: &SmbmmPlan) -> Result<SolvedResponses> {
    let k = plan.indices.k;
    if responses.len() < k {
        return Err(Error::InsufficientResponses { needed: k, got: responses.len() });
    }
    let used = &responses[..k];
    let alphas = response_points(used.iter().map(|r| r.server_index), &plan.params.alphas)?;
    let (rows, cols) = used[0].y.shape();
    if let Some(r) = used.iter().find(|r| r.y.shape() != (rows, cols)) {
        return Err(Error::Shape(format!("response from server {} has a different shape", r.server_index)));
    }
    let system = SquareSystem::new(decoding_matrix(plan, &alphas)?)?;
    if system.is_singular() {
        return Err(Error::SingularSystem);
    }
    let solutions = (0..rows * cols)
        .into_par_iter()
        .map(|pos| {
            let rhs: Vec<Fe> = used.iter().map(|r| r.y.data()[pos]).collect();
            system.solve_one(&rhs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SolvedResponses { rows, cols, used: used.iter().map(|r| r.server_index).collect(), solutions })
}

/// Recovers all `G * L` products, indexed `h * L + l`.
pub fn decode_smbmm(responses: &[SmbmmResponse], params: &SmbmmParams) -> Result<Vec<Matrix>> {
    let plan = SmbmmPlan::new(params)?;
    let solved = solve_responses(responses, &plan)?;
    let (m, n) = (params.partition.m, params.partition.n);
    let f = params.field;
    let mut out = Vec::with_capacity(params.batch_size());
    for h in 0..params.g {
        for l in 0..params.l {
            let off = plan.block_offset(h, l);
            let desired = plan.indices.desired(l);
            let grid: Vec<Vec<Matrix>> = (0..m)
                .map(|k| {
                    (0..n)
                        .map(|j| {
                            let coord = off + desired[k * n + j];
                            Matrix::from_fn(f, solved.rows, solved.cols, |a, b| solved.at(a, b)[coord])
                        })
                        .collect()
                })
                .collect();
            out.push(Matrix::assemble(&grid)?);
        }
    }
    Ok(out)
}

use super::SmbmmPlan;
use crate::error::{Error, Result};
use crate::field::Fe;
use crate::matrix::Matrix;
use crate::rng::{streams, FieldRng};

/// Noise shared by all servers.
///
/// `cauchy[h][l][r]` masks solution coordinate `r` of product `(h, l)` and
/// is pinned to zero on the desired coordinates; `vander[r]` masks the
/// coefficient of `alpha^r` of the interference polynomial.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommonRandomness {
    pub cauchy: Vec<Vec<Vec<Matrix>>>,
    pub vander: Vec<Matrix>,
    drawn: usize,
}

impl CommonRandomness {
    pub fn zero(plan: &SmbmmPlan, rows: usize, cols: usize) -> Self {
        Self::fill(plan, rows, cols, |_| None)
    }

    fn fill(plan: &SmbmmPlan, rows: usize, cols: usize, mut draw: impl FnMut(usize) -> Option<Matrix>) -> Self {
        let f = plan.params.field;
        let ind = &plan.indices;
        let mut drawn = 0;
        let mut take = |coord: usize| match draw(coord) {
            Some(m) => {
                drawn += 1;
                m
            }
            None => Matrix::zeros(f, rows, cols),
        };
        let mut cauchy = Vec::with_capacity(plan.params.g);
        for h in 0..plan.params.g {
            let mut per = Vec::with_capacity(plan.params.l);
            for l in 0..plan.params.l {
                let pinned = ind.desired(l);
                let off = plan.block_offset(h, l);
                per.push(
                    (0..ind.multiplicity(l))
                        .map(|r| if pinned.contains(&r) { Matrix::zeros(f, rows, cols) } else { take(off + r) })
                        .collect(),
                );
            }
            cauchy.push(per);
        }
        let off = plan.vander_offset();
        let vander = (0..=ind.phi).map(|r| take(off + r)).collect();
        CommonRandomness { cauchy, vander, drawn }
    }

    /// Number of uniformly drawn matrices (zero for [`CommonRandomness::zero`]).
    pub fn count(&self) -> usize {
        self.drawn
    }

    /// The masking value added to every solution coordinate at scalar
    /// position `(i, j)` of the product blocks.
    pub fn solution_offsets(&self, i: usize, j: usize) -> Vec<Fe> {
        self.cauchy
            .iter()
            .flatten()
            .flatten()
            .chain(&self.vander)
            .map(|m| m.get(i, j))
            .collect()
    }

    /// Randomness that is zero except for one matrix at solution coordinate
    /// `coord`.
    pub fn unit(plan: &SmbmmPlan, rows: usize, cols: usize, coord: usize, value: &Matrix) -> Result<Self> {
        if coord >= plan.indices.k || plan.is_desired_coordinate(coord) {
            return Err(Error::InvalidParams(format!("coordinate {coord} is not a masked coordinate")));
        }
        Ok(Self::fill(plan, rows, cols, |c| (c == coord).then(|| value.clone())))
    }
}

/// Draws the shared randomness for product blocks of shape `rows x cols`.
pub fn gen_common_randomness(plan: &SmbmmPlan, rows: usize, cols: usize, seed: u64) -> CommonRandomness {
    let mut rng = FieldRng::new(seed, streams::COMMON_RANDOMNESS);
    let f = plan.params.field;
    CommonRandomness::fill(plan, rows, cols, |_| Some(Matrix::random(f, rows, cols, &mut rng)))
}

/// `S(alpha)`: the shared noise, shaped like the server response.
pub fn eval_noise_poly(cr: &CommonRandomness, plan: &SmbmmPlan, alpha: Fe) -> Result<Matrix> {
    let f = plan.params.field;
    let (rows, cols) = cr.vander[0].shape();
    let mut acc = Matrix::zeros(f, rows, cols);
    for h in 0..plan.params.g {
        for l in 0..plan.params.l {
            let s = f.sub(plan.params.poles[h][l], alpha);
            let u = f.inv(s).map_err(|_| Error::PoleCollision(alpha.value()))?;
            let c = &plan.constants[h][l];
            let e = c.len();
            // weight of coordinate r is g_{e-r} with g_j = sum_{t=1}^{j} c_{j-t} u^t,
            // and g_j = u (c_{j-1} + g_{j-1})
            let mut g = vec![Fe::ZERO; e + 1];
            for j in 1..=e {
                g[j] = f.mul(u, f.add(c[j - 1], g[j - 1]));
            }
            for (r, z) in cr.cauchy[h][l].iter().enumerate() {
                acc.add_scaled_assign(g[e - r], z)?;
            }
        }
    }
    let mut pw = Fe::ONE;
    for z in &cr.vander {
        acc.add_scaled_assign(pw, z)?;
        pw = f.mul(pw, alpha);
    }
    Ok(acc)
}

//! Secure batch matrix multiplication with user-side privacy.
//!
//! The `M = G * L` products are split into `G` groups of `L`. Inside a group
//! every product `(h, l)` owns a pole `f_{h,l}`; its sub-encoders are
//! polynomials in `f_{h,l} - alpha`, and the group encoders combine them so
//! that the desired coefficients of each product sit on the Cauchy columns
//! of that pole, while all cross terms collapse onto a shared polynomial of
//! degree at most `phi`. Servers add common randomness with the same
//! structure, so after solving the Cauchy-Vandermonde system the user sees
//! only the desired coefficients in the clear.

mod decode;
mod encode;
mod identity;
mod randomness;

pub use decode::{decode_smbmm, decoding_matrix, solve_responses, SolvedResponses};
pub use encode::{
    encode_smbmm, encode_smbmm_with_noise, partition_batch, server_compute_smbmm, BatchBlocks, SmbmmResponse,
    SmbmmShare, SourceNoise, SubEncoders,
};
pub use identity::{cauchy_part, noiseless_solution, product_decomposition, toeplitz_apply, ProductDecomposition};
pub use randomness::{eval_noise_poly, gen_common_randomness, CommonRandomness};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::matrix::PartitionSpec;
use crate::poly::{check_distinct, shifted_power_expand};
use crate::ssmm::{Layout, Thresholds, Variant, VariantChoice};

pub fn recovery_threshold_smbmm(
    m: usize,
    p: usize,
    n: usize,
    x_a: usize,
    x_b: usize,
    g: usize,
    l: usize,
) -> Result<Thresholds> {
    if m <= 1 || n <= 1 || l < 2 {
        return Err(Error::HypothesisViolation(format!("need m > 1, n > 1 and L >= 2 (got m={m}, n={n}, L={l})")));
    }
    if [p, x_a, x_b, g].contains(&0) {
        return Err(Error::InvalidParams("p, X_A, X_B and G must be at least 1".into()));
    }
    let body = (l * g + l - 1) * m * p * n;
    let k1 = body + n * p + x_a + (g + 1) * (m - 1) * x_b - 1;
    let k2 = body + m * p + x_b + (g + 1) * (n - 1) * x_a - 1;
    Ok(Thresholds::from_pair(k1, k2))
}

/// Index bookkeeping of one variant.
///
/// `gamma[k*n + j]` is the coefficient of the `l = 1` product that carries
/// `C_{k,j}`, `lambda[k*n + j]` the same for `l >= 2`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DerivedIndices {
    pub psi: usize,
    pub kappa: usize,
    pub phi: usize,
    pub delta: usize,
    pub gamma: Vec<usize>,
    pub lambda: Vec<usize>,
    pub k: usize,
}

impl DerivedIndices {
    pub fn new(variant: Variant, dims: PartitionSpec, x_a: usize, x_b: usize, g: usize, l: usize) -> Self {
        let PartitionSpec { m, p, n } = dims;
        let kappa = m * p * n;
        let cells = || (0..m).flat_map(move |k| (0..n).map(move |j| (k, j)));
        let (psi, phi, delta, gamma, lambda) = match variant {
            Variant::AMajor => (
                (m - 1) * (n * p + x_b) + n * p,
                (l - 1) * kappa + n * p + x_a + (m - 1) * x_b - 2,
                (m + 1) * (n * p + x_b) + x_a - x_b - 2,
                cells().map(|(k, j)| k * (p * n + x_b) + (j + 1) * p - 1).collect(),
                cells().map(|(k, j)| k * p * n + (j + 1) * p - 1).collect(),
            ),
            Variant::BMajor => (
                (n - 1) * (m * p + x_a) + m * p,
                (l - 1) * kappa + m * p + x_b + (n - 1) * x_a - 2,
                (n + 1) * (m * p + x_a) + x_b - x_a - 2,
                cells().map(|(k, j)| j * (m * p + x_a) + (k + 1) * p - 1).collect(),
                cells().map(|(k, j)| j * m * p + (k + 1) * p - 1).collect(),
            ),
        };
        let k = g * psi + g * (l - 1) * kappa + phi + 1;
        DerivedIndices { psi, kappa, phi, delta, gamma, lambda, k }
    }

    /// Cauchy multiplicity of product `l` (0-based) in its group.
    pub fn multiplicity(&self, l: usize) -> usize {
        if l == 0 {
            self.psi
        } else {
            self.kappa
        }
    }

    pub fn desired(&self, l: usize) -> &[usize] {
        if l == 0 {
            &self.gamma
        } else {
            &self.lambda
        }
    }

    /// Number of uniform matrices in the common randomness.
    pub fn randomness_count(&self, g: usize, l: usize) -> usize {
        let mn = self.gamma.len();
        g * (self.psi - mn) + g * (l - 1) * (self.kappa - mn) + self.phi + 1
    }
}

/// Exponent layout of the `l >= 2` sub-encoders (no noise blocks).
pub fn inner_layout(variant: Variant, dims: PartitionSpec) -> Layout {
    let PartitionSpec { m, p, n } = dims;
    let grid = |r: usize, c: usize, f: &dyn Fn(usize, usize) -> usize| -> Vec<Vec<usize>> {
        (0..r).map(|i| (0..c).map(|j| f(i, j)).collect()).collect()
    };
    match variant {
        Variant::AMajor => Layout {
            a: grid(m, p, &|k, l| l + k * n * p),
            b: grid(p, n, &|l, j| (p - 1 - l) + j * p),
            a_noise: Vec::new(),
            b_noise: Vec::new(),
            desired: grid(m, n, &|k, j| k * p * n + (j + 1) * p - 1),
        },
        Variant::BMajor => Layout {
            a: grid(m, p, &|k, l| l + k * p),
            b: grid(p, n, &|l, j| (p - 1 - l) + j * m * p),
            a_noise: Vec::new(),
            b_noise: Vec::new(),
            desired: grid(m, n, &|k, j| j * m * p + (k + 1) * p - 1),
        },
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmbmmParams {
    pub field: Field,
    pub partition: PartitionSpec,
    pub x_a: usize,
    pub x_b: usize,
    pub g: usize,
    pub l: usize,
    pub n_servers: usize,
    /// `poles[h][l]` is `f_{h,l}`.
    pub poles: Vec<Vec<Fe>>,
    pub alphas: Vec<Fe>,
    pub variant: Variant,
}

impl SmbmmParams {
    /// Default points: poles `0 .. GL-1` in group-major order, then the
    /// evaluation points `GL .. GL+N-1`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        field: Field,
        partition: PartitionSpec,
        x_a: usize,
        x_b: usize,
        g: usize,
        l: usize,
        n_servers: usize,
        variant: VariantChoice,
    ) -> Result<Self> {
        let gl = (g * l) as u64;
        if field.modulus() < gl + n_servers as u64 {
            return Err(Error::InvalidParams(format!(
                "q = {} is too small for {} poles and {n_servers} evaluation points",
                field.modulus(),
                gl
            )));
        }
        let poles = (0..g).map(|h| (0..l).map(|j| field.elem((h * l + j) as u64)).collect()).collect();
        let alphas = (0..n_servers as u64).map(|i| field.elem(gl + i)).collect();
        Self::with_points(field, partition, x_a, x_b, g, l, poles, alphas, variant)
    }

    #[allow(clippy::too_many_arguments)]
    pub fn with_points(
        field: Field,
        partition: PartitionSpec,
        x_a: usize,
        x_b: usize,
        g: usize,
        l: usize,
        poles: Vec<Vec<Fe>>,
        alphas: Vec<Fe>,
        variant: VariantChoice,
    ) -> Result<Self> {
        let t = recovery_threshold_smbmm(partition.m, partition.p, partition.n, x_a, x_b, g, l)?;
        let params = SmbmmParams {
            field,
            partition,
            x_a,
            x_b,
            g,
            l,
            n_servers: alphas.len(),
            poles,
            alphas,
            variant: variant.resolve(&t),
        };
        params.validate()?;
        Ok(params)
    }

    /// Checks everything except `N >= K`.
    pub fn validate_points(&self) -> Result<()> {
        let PartitionSpec { m, p, n } = self.partition;
        recovery_threshold_smbmm(m, p, n, self.x_a, self.x_b, self.g, self.l)?;
        if self.poles.len() != self.g || self.poles.iter().any(|r| r.len() != self.l) {
            return Err(Error::PointError(format!("poles must form a {}x{} grid", self.g, self.l)));
        }
        if self.alphas.len() != self.n_servers {
            return Err(Error::PointError(format!("{} points for {} servers", self.alphas.len(), self.n_servers)));
        }
        let flat: Vec<Fe> = self.poles.iter().flatten().copied().collect();
        check_distinct(&flat).map_err(|e| Error::PointError(format!("poles: {e}")))?;
        check_distinct(&self.alphas).map_err(|e| Error::PointError(format!("evaluation points: {e}")))?;
        if let Some(a) = self.alphas.iter().find(|a| flat.contains(a)) {
            return Err(Error::PoleCollision(a.value()));
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.validate_points()?;
        if self.field.modulus() < (self.n_servers + self.g * self.l) as u64 {
            return Err(Error::InvalidParams(format!(
                "q = {} must be at least N + GL = {}",
                self.field.modulus(),
                self.n_servers + self.g * self.l
            )));
        }
        let k = self.threshold();
        if self.n_servers < k {
            return Err(Error::InvalidParams(format!("N = {} is below the recovery threshold {k}", self.n_servers)));
        }
        Ok(())
    }

    pub fn thresholds(&self) -> Thresholds {
        let PartitionSpec { m, p, n } = self.partition;
        recovery_threshold_smbmm(m, p, n, self.x_a, self.x_b, self.g, self.l).expect("validated parameters")
    }

    pub fn threshold(&self) -> usize {
        self.thresholds().for_variant(self.variant)
    }

    pub fn indices(&self) -> DerivedIndices {
        DerivedIndices::new(self.variant, self.partition, self.x_a, self.x_b, self.g, self.l)
    }

    pub fn batch_size(&self) -> usize {
        self.g * self.l
    }
}

/// Everything derived from the parameters that encoding, the servers and
/// decoding share.
#[derive(Clone, Debug)]
pub struct SmbmmPlan {
    pub params: SmbmmParams,
    pub indices: DerivedIndices,
    /// Layout of the `l = 1` sub-encoders, including noise.
    pub outer: Layout,
    pub inner: Layout,
    /// `constants[h][l]`: the first `multiplicity(l)` expansion coefficients
    /// of the weight that multiplies `P^{h,l}` inside the group encoder.
    pub constants: Vec<Vec<Vec<Fe>>>,
}

impl SmbmmPlan {
    pub fn new(params: &SmbmmParams) -> Result<Self> {
        params.validate_points()?;
        let indices = params.indices();
        let f = params.field;
        let mut constants = Vec::with_capacity(params.g);
        for h in 0..params.g {
            let row = &params.poles[h];
            let mut per = Vec::with_capacity(params.l);
            for l in 0..params.l {
                let factors: Vec<(Fe, usize)> = (0..params.l)
                    .filter(|&k| k != l)
                    .map(|k| (row[k], indices.multiplicity(k)))
                    .collect();
                let c = shifted_power_expand(&f, row[l], &factors)?;
                per.push((0..indices.multiplicity(l)).map(|r| c.coeff(r)).collect());
            }
            constants.push(per);
        }
        Ok(SmbmmPlan {
            outer: Layout::ssmm(params.variant, params.partition, params.x_a, params.x_b),
            inner: inner_layout(params.variant, params.partition),
            params: params.clone(),
            indices,
            constants,
        })
    }

    pub fn layout(&self, l: usize) -> &Layout {
        if l == 0 {
            &self.outer
        } else {
            &self.inner
        }
    }

    /// First solution coordinate belonging to product `(h, l)`.
    pub fn block_offset(&self, h: usize, l: usize) -> usize {
        let per_group = self.indices.psi + (self.params.l - 1) * self.indices.kappa;
        h * per_group + if l == 0 { 0 } else { self.indices.psi + (l - 1) * self.indices.kappa }
    }

    pub fn vander_offset(&self) -> usize {
        self.block_offset(self.params.g, 0)
    }

    /// Poles with their multiplicities in solution-coordinate order.
    pub fn pole_list(&self) -> Vec<(Fe, usize)> {
        let mut out = Vec::with_capacity(self.params.g * self.params.l);
        for h in 0..self.params.g {
            for l in 0..self.params.l {
                out.push((self.params.poles[h][l], self.indices.multiplicity(l)));
            }
        }
        out
    }

    /// True for solution coordinates the user is meant to read in the clear.
    pub fn is_desired_coordinate(&self, idx: usize) -> bool {
        if idx >= self.vander_offset() {
            return false;
        }
        (0..self.params.g).any(|h| {
            (0..self.params.l).any(|l| {
                let off = self.block_offset(h, l);
                idx >= off && self.indices.desired(l).contains(&(idx - off))
            })
        })
    }
}

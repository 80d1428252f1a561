//! Finite security checks.
//!
//! * [`certify_server_privacy`]: for every `X`-subset of servers the matrix
//!   of noise coefficients they see must be nonsingular, so the noise acts as
//!   a one-time pad on their joint view.
//! * [`enumerate_share_leakage`] and [`enumerate_user_view`]: exhaustive
//!   enumeration at toy scale, reporting the exact largest statistical
//!   distance between views induced by different data.
//!
//! The user-view check is coordinatewise: each masked solution coordinate is
//! enumerated on its own. It is a surrogate for, not a proof of, privacy of
//! the joint view.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use itertools::Itertools;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::Protocol;
use crate::cost::{ratio_string, Rational};
use crate::error::{Error, Result};
use crate::field::{Fe, Field};
use crate::linalg::rank;
use crate::matrix::{Matrix, PartitionSpec};
use crate::rng::{streams, FieldRng};
use crate::smbmm::{
    encode_smbmm_with_noise, eval_noise_poly, gen_common_randomness, noiseless_solution, partition_batch,
    server_compute_smbmm, solve_responses, BatchBlocks, CommonRandomness, SmbmmParams, SmbmmPlan, SourceNoise,
    SubEncoders,
};
use crate::ssmm::{encode_ssmm_with_noise, recovery_threshold_ssmm, SsmmNoise, SsmmParams, VariantChoice};

pub const DEFAULT_BUDGET: u128 = 10_000_000;
/// Largest `N` for which all subsets are checked unless sampling is asked for.
pub const EXHAUSTIVE_MAX_SERVERS: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    A,
    B,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::A => "A",
            Side::B => "B",
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub enum AuditTarget<'a> {
    Ssmm(&'a SsmmParams),
    Smbmm(&'a SmbmmParams),
}

/// Parameters for certification only: the recovery threshold is computed,
/// but neither `N >= K` nor `alpha != 0` is enforced.
pub fn audit_params_ssmm(
    field: Field,
    dims: PartitionSpec,
    x_a: usize,
    x_b: usize,
    alphas: Vec<Fe>,
    variant: VariantChoice,
) -> Result<SsmmParams> {
    let t = recovery_threshold_ssmm(dims.m, dims.p, dims.n, x_a, x_b)?;
    Ok(SsmmParams { field, partition: dims, x_a, x_b, n_servers: alphas.len(), alphas, variant: variant.resolve(&t) })
}

/// Default points (poles `0..GL-1`, then `N` evaluation points) without the
/// `N >= K` requirement. `n_servers = 0` is allowed for user-view audits.
#[allow(clippy::too_many_arguments)]
pub fn audit_params_smbmm(
    field: Field,
    dims: PartitionSpec,
    x_a: usize,
    x_b: usize,
    g: usize,
    l: usize,
    n_servers: usize,
    variant: VariantChoice,
) -> Result<SmbmmParams> {
    let t = crate::smbmm::recovery_threshold_smbmm(dims.m, dims.p, dims.n, x_a, x_b, g, l)?;
    let gl = (g * l) as u64;
    if field.modulus() < gl + n_servers as u64 {
        return Err(Error::InvalidParams(format!("q = {} is too small for the default points", field.modulus())));
    }
    let params = SmbmmParams {
        field,
        partition: dims,
        x_a,
        x_b,
        g,
        l,
        n_servers,
        poles: (0..g).map(|h| (0..l).map(|j| field.elem((h * l + j) as u64)).collect()).collect(),
        alphas: (0..n_servers as u64).map(|i| field.elem(gl + i)).collect(),
        variant: variant.resolve(&t),
    };
    params.validate_points()?;
    Ok(params)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrivacyCertificate {
    pub protocol: Protocol,
    pub side: Side,
    pub n_servers: usize,
    /// Collusion size that was certified, `min(X, N)`.
    pub x: usize,
    pub groups: usize,
    pub exhaustive: bool,
    pub subsets_checked: usize,
    pub subsets: Vec<Vec<usize>>,
}

impl PrivacyCertificate {
    pub fn to_text(&self) -> String {
        format!(
            "{} side {}: {} {}-subsets of {} servers certified ({}), {} group(s)\n",
            self.protocol.name(),
            self.side.name(),
            self.subsets_checked,
            self.x,
            self.n_servers,
            if self.exhaustive { "exhaustive" } else { "sampled" },
            self.groups
        )
    }
}

/// Noise-coefficient rows, one per server: `rows[h][i][x]` is the factor
/// multiplying noise block `x` of group `h` in the share of server `i`.
fn noise_rows(target: AuditTarget<'_>, side: Side) -> Result<(Field, Vec<Vec<Vec<Fe>>>)> {
    match target {
        AuditTarget::Ssmm(p) => {
            let f = p.field;
            let layout = p.layout();
            let exps = match side {
                Side::A => &layout.a_noise,
                Side::B => &layout.b_noise,
            };
            let rows = p.alphas.iter().map(|&a| exps.iter().map(|&e| f.pow(a, e as u64)).collect()).collect();
            Ok((f, vec![rows]))
        }
        AuditTarget::Smbmm(p) => {
            let f = p.field;
            let plan = SmbmmPlan::new(p)?;
            let ind = &plan.indices;
            let mut groups = Vec::with_capacity(p.g);
            for poles in &p.poles {
                let mut rows = Vec::with_capacity(p.alphas.len());
                for &alpha in &p.alphas {
                    let s: Vec<Fe> = poles.iter().map(|&d| f.sub(d, alpha)).collect();
                    if s.iter().any(|v| v.is_zero()) {
                        return Err(Error::PoleCollision(alpha.value()));
                    }
                    let row = match side {
                        Side::A => {
                            let w = f.product((1..p.l).map(|k| f.pow(s[k], ind.multiplicity(k) as u64)));
                            plan.outer.a_noise.iter().map(|&e| f.mul(w, f.pow(s[0], e as u64))).collect()
                        }
                        Side::B => {
                            let lift = f.inv(f.pow(s[0], ind.multiplicity(0) as u64))?;
                            plan.outer.b_noise.iter().map(|&e| f.mul(lift, f.pow(s[0], e as u64))).collect()
                        }
                    };
                    rows.push(row);
                }
                groups.push(rows);
            }
            Ok((f, groups))
        }
    }
}

/// Rank certification of the noise seen by every `min(X, N)`-subset.
///
/// With `sample = None` all subsets are checked, which requires
/// `N <= EXHAUSTIVE_MAX_SERVERS`; otherwise `(count, seed)` random subsets
/// are drawn.
pub fn certify_server_privacy(
    target: AuditTarget<'_>,
    side: Side,
    sample: Option<(usize, u64)>,
) -> Result<PrivacyCertificate> {
    let (protocol, n_servers, x) = match (target, side) {
        (AuditTarget::Ssmm(p), Side::A) => (Protocol::Ssmm, p.n_servers, p.x_a),
        (AuditTarget::Ssmm(p), Side::B) => (Protocol::Ssmm, p.n_servers, p.x_b),
        (AuditTarget::Smbmm(p), Side::A) => (Protocol::Smbmm, p.n_servers, p.x_a),
        (AuditTarget::Smbmm(p), Side::B) => (Protocol::Smbmm, p.n_servers, p.x_b),
    };
    let t = x.min(n_servers);
    let subsets: Vec<Vec<usize>> = match sample {
        None => {
            if n_servers > EXHAUSTIVE_MAX_SERVERS {
                return Err(Error::InvalidParams(format!(
                    "N = {n_servers} is too large for exhaustive certification; pass a sample count"
                )));
            }
            (0..n_servers).combinations(t).collect()
        }
        Some((count, seed)) => {
            let mut rng = FieldRng::new(seed, streams::AUDIT);
            (0..count).map(|_| rng.sample_indices(n_servers, t)).collect()
        }
    };
    let (f, groups) = noise_rows(target, side)?;
    for rows in &groups {
        let bad = subsets.par_iter().find_first(|sub| {
            let data: Vec<Fe> = sub.iter().flat_map(|&i| rows[i].iter().copied()).collect();
            let m = Matrix::from_vec(f, sub.len(), x, data).expect("row lengths agree");
            rank(&m) < sub.len()
        });
        if let Some(sub) = bad {
            return Err(Error::SingularNoiseMatrix(sub.clone()));
        }
    }
    Ok(PrivacyCertificate {
        protocol,
        side,
        n_servers,
        x: t,
        groups: groups.len(),
        exhaustive: sample.is_none(),
        subsets_checked: subsets.len(),
        subsets,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub kind: String,
    pub q: u64,
    /// Coordinates (user view) or servers (share view) enumerated.
    pub targets: Vec<usize>,
    pub data_assignments: u128,
    pub cases: u128,
    /// Number of distinct view distributions that occurred.
    pub distinct_distributions: usize,
    /// Targets whose unmasked value depends on the data.
    pub data_dependent: usize,
    #[serde(with = "ratio_string")]
    pub max_distance: Rational,
}

impl LeakageReport {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{} over GF({}), targets {:?}", self.kind, self.q, self.targets);
        let _ = writeln!(
            s,
            "  {} data assignments, {} cases, {} distinct view distribution(s), {} data-dependent target(s)",
            self.data_assignments, self.cases, self.distinct_distributions, self.data_dependent
        );
        let _ = writeln!(s, "  max statistical distance: {}", self.max_distance);
        s
    }
}

fn check_tiny(q: u64) -> Result<()> {
    if q > 7 {
        return Err(Error::InvalidParams(format!("leakage enumeration is limited to q <= 7, got {q}")));
    }
    Ok(())
}

fn checked_pow(q: u64, e: usize) -> u128 {
    (q as u128).checked_pow(e as u32).unwrap_or(u128::MAX)
}

/// Digits of `idx` in base `q`, least significant first.
fn digits(field: &Field, mut idx: u64, len: usize) -> Vec<Fe> {
    let q = field.modulus();
    (0..len)
        .map(|_| {
            let d = idx % q;
            idx /= q;
            field.elem(d)
        })
        .collect()
}

/// Largest total-variation distance between histograms with equal totals.
fn max_distance(hists: &BTreeSet<Vec<u64>>) -> Rational {
    let mut best = Ratio::from_integer(0);
    for (x, y) in hists.iter().tuple_combinations() {
        let total: u64 = x.iter().sum();
        let diff: u64 = x.iter().zip(y).map(|(&a, &b)| a.abs_diff(b)).sum();
        best = best.max(Ratio::new(diff, 2 * total));
    }
    best
}

/// Exact distribution of the shares seen by `servers` for every data
/// assignment of one factor of a `1 x 1`-block SSMM instance.
///
/// More than `X` servers may be listed; the distance is then expected to
/// be positive.
pub fn enumerate_share_leakage(params: &SsmmParams, side: Side, servers: &[usize], budget: u128) -> Result<LeakageReport> {
    let f = params.field;
    check_tiny(f.modulus())?;
    if servers.is_empty() || servers.iter().any(|&i| i >= params.n_servers) || !servers.iter().all_unique() {
        return Err(Error::InvalidParams(format!("bad server subset {servers:?}")));
    }
    let PartitionSpec { m, p, n } = params.partition;
    let (rows, cols, x) = match side {
        Side::A => (m, p, params.x_a),
        Side::B => (p, n, params.x_b),
    };
    let data_len = rows * cols;
    let cases = checked_pow(f.modulus(), data_len + x);
    if cases > budget {
        return Err(Error::EnumerationBudgetExceeded { needed: cases, budget });
    }

    // Probe the encoder with unit inputs: shares are linear in data and noise.
    let zero_a = vec![vec![Matrix::zeros(f, 1, 1); p]; m];
    let zero_b = vec![vec![Matrix::zeros(f, 1, 1); n]; p];
    let zero_noise = SsmmNoise { a: vec![Matrix::zeros(f, 1, 1); params.x_a], b: vec![Matrix::zeros(f, 1, 1); params.x_b] };
    let probe = |blocks_a: &[Vec<Matrix>], blocks_b: &[Vec<Matrix>], noise: &SsmmNoise| -> Result<Vec<Fe>> {
        let shares = encode_ssmm_with_noise(blocks_a, blocks_b, noise, params)?;
        Ok(servers
            .iter()
            .map(|&i| match side {
                Side::A => shares[i].a_share.get(0, 0),
                Side::B => shares[i].b_share.get(0, 0),
            })
            .collect())
    };
    let one = Matrix::identity(f, 1);
    let mut data_coef = Vec::with_capacity(data_len);
    for r in 0..rows {
        for c in 0..cols {
            let (mut a, mut b) = (zero_a.clone(), zero_b.clone());
            match side {
                Side::A => a[r][c] = one.clone(),
                Side::B => b[r][c] = one.clone(),
            }
            data_coef.push(probe(&a, &b, &zero_noise)?);
        }
    }
    let mut noise_coef = Vec::with_capacity(x);
    for k in 0..x {
        let mut noise = zero_noise.clone();
        match side {
            Side::A => noise.a[k] = one.clone(),
            Side::B => noise.b[k] = one.clone(),
        }
        noise_coef.push(probe(&zero_a, &zero_b, &noise)?);
    }

    let q = f.modulus();
    let view_space = q.pow(servers.len() as u32) as usize;
    let n_data = q.pow(data_len as u32);
    let n_noise = q.pow(x as u32);
    let combine = |coef: &[Vec<Fe>], vals: &[Fe], acc: &mut [Fe]| {
        for (cv, &v) in coef.iter().zip(vals) {
            for (a, &c) in acc.iter_mut().zip(cv) {
                *a = f.mul_add(c, v, *a);
            }
        }
    };
    let hists: BTreeSet<Vec<u64>> = (0..n_data)
        .into_par_iter()
        .map(|d| {
            let dv = digits(&f, d, data_len);
            let mut base = vec![Fe::ZERO; servers.len()];
            combine(&data_coef, &dv, &mut base);
            let mut hist = vec![0u64; view_space];
            for z in 0..n_noise {
                let mut view = base.clone();
                combine(&noise_coef, &digits(&f, z, x), &mut view);
                let idx = view.iter().rev().fold(0u64, |acc, v| acc * q + v.value());
                hist[idx as usize] += 1;
            }
            hist
        })
        .collect();
    let data_dependent = servers
        .iter()
        .enumerate()
        .filter(|&(s, _)| data_coef.iter().any(|c| !c[s].is_zero()))
        .count();
    Ok(LeakageReport {
        kind: format!("ssmm share view, side {}", side.name()),
        q,
        targets: servers.to_vec(),
        data_assignments: n_data as u128,
        cases,
        distinct_distributions: hists.len(),
        data_dependent,
        max_distance: max_distance(&hists),
    })
}

/// Checks that the shared noise polynomial enters the decoding system with
/// coefficient one on every masked coordinate, at every non-pole point of
/// the field. Returns the number of points checked.
pub fn check_masking_rows(plan: &SmbmmPlan) -> Result<usize> {
    let f = plan.params.field;
    let ind = &plan.indices;
    let poles: Vec<Fe> = plan.params.poles.iter().flatten().copied().collect();
    let one = Matrix::identity(f, 1);
    let masked: Vec<usize> = (0..ind.k).filter(|&c| !plan.is_desired_coordinate(c)).collect();
    let mut checked = 0;
    for alpha in (0..f.modulus()).map(|v| f.elem(v)).filter(|a| !poles.contains(a)) {
        // row of V1 * V2 at alpha, written out from the Toeplitz structure
        let mut row = Vec::with_capacity(ind.k);
        for h in 0..plan.params.g {
            for l in 0..plan.params.l {
                let c = &plan.constants[h][l];
                let e = c.len();
                let u = f.inv(f.sub(plan.params.poles[h][l], alpha))?;
                row.extend((0..e).map(|r| f.sum((r..e).map(|t| f.mul(c[t - r], f.pow(u, (e - t) as u64))))));
            }
        }
        row.extend((0..=ind.phi).map(|v| f.pow(alpha, v as u64)));
        for &coord in &masked {
            let cr = CommonRandomness::unit(plan, 1, 1, coord, &one)?;
            if eval_noise_poly(&cr, plan, alpha)?.get(0, 0) != row[coord] {
                return Err(Error::HypothesisViolation(format!(
                    "noise polynomial does not match the decoding row at coordinate {coord}"
                )));
            }
        }
        checked += 1;
    }
    Ok(checked)
}

/// Coordinatewise enumeration of what the user decodes, for a `1 x 1`-block
/// SMBMM instance over a tiny field.
///
/// Source noise is fixed to zero, which only strengthens the check since
/// that noise is not part of the masking. For each masked coordinate `r`
/// (all of them when `coordinates` is `None`) the exact distribution of
/// `x_r = beta_r(A, B) + Z_r` is tabulated for every data assignment, with
/// `beta_r` the bilinear form read off the symbolic decoder.
pub fn enumerate_user_view(params: &SmbmmParams, coordinates: Option<&[usize]>, budget: u128) -> Result<LeakageReport> {
    let f = params.field;
    check_tiny(f.modulus())?;
    let plan = SmbmmPlan::new(params)?;
    check_masking_rows(&plan)?;
    let targets: Vec<usize> = match coordinates {
        Some(c) => c.to_vec(),
        None => (0..plan.indices.k).filter(|&c| !plan.is_desired_coordinate(c)).collect(),
    };
    if let Some(&c) = targets.iter().find(|&&c| c >= plan.indices.k || plan.is_desired_coordinate(c)) {
        return Err(Error::InvalidParams(format!("coordinate {c} is not masked")));
    }

    let PartitionSpec { m, p, n } = params.partition;
    let size = params.batch_size();
    let (a_len, b_len) = (m * p, p * n);
    let (na, nb) = (size * a_len, size * b_len);
    let q = f.modulus();
    let cases = checked_pow(q, na + nb + 1);
    if cases > budget {
        return Err(Error::EnumerationBudgetExceeded { needed: cases, budget });
    }

    let zero_a = vec![Matrix::zeros(f, m, p); size];
    let zero_b = vec![Matrix::zeros(f, p, n); size];
    let blocks0 = partition_batch(&zero_a, &zero_b, params)?;
    let noise = SourceNoise::zero(params, &blocks0);
    let solve = |a: &[Matrix], b: &[Matrix]| -> Result<Vec<Fe>> {
        let blocks: BatchBlocks = partition_batch(a, b, params)?;
        let enc = SubEncoders::build(&plan, &blocks, &noise)?;
        Ok(noiseless_solution(&plan, &enc)?.iter().map(|m| m.get(0, 0)).collect())
    };
    let unit = |len: usize, rows: usize, cols: usize, idx: usize, zero: &[Matrix]| {
        let mut v = zero.to_vec();
        let (which, pos) = (idx / len, idx % len);
        v[which].set(pos / cols, pos % cols, Fe::ONE);
        debug_assert!(pos / cols < rows);
        v
    };
    // beta[i][j] is the solution vector for unit A entry i and unit B entry j
    let beta: Vec<Vec<Vec<Fe>>> = (0..na)
        .into_par_iter()
        .map(|i| {
            let a = unit(a_len, m, p, i, &zero_a);
            (0..nb).map(|j| solve(&a, &unit(b_len, p, n, j, &zero_b))).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;

    let n_data = q.pow((na + nb) as u32);
    let mut all = BTreeSet::new();
    let mut worst = Ratio::from_integer(0);
    let mut data_dependent = 0;
    for &r in &targets {
        if beta.iter().flatten().any(|v| !v[r].is_zero()) {
            data_dependent += 1;
        }
        let hists: BTreeSet<Vec<u64>> = (0..n_data)
            .into_par_iter()
            .map(|d| {
                let vals = digits(&f, d, na + nb);
                let (av, bv) = vals.split_at(na);
                let mut v = Fe::ZERO;
                for (i, &ai) in av.iter().enumerate() {
                    if ai.is_zero() {
                        continue;
                    }
                    for (j, &bj) in bv.iter().enumerate() {
                        v = f.add(v, f.mul(beta[i][j][r], f.mul(ai, bj)));
                    }
                }
                let mut hist = vec![0u64; q as usize];
                for z in 0..q {
                    hist[f.add(v, f.elem(z)).value() as usize] += 1;
                }
                hist
            })
            .collect();
        worst = worst.max(max_distance(&hists));
        all.extend(hists);
    }
    Ok(LeakageReport {
        kind: "smbmm user view".into(),
        q,
        targets,
        data_assignments: n_data as u128,
        cases: cases.saturating_mul(data_dependent.max(1) as u128),
        distinct_distributions: all.len(),
        data_dependent,
        max_distance: worst,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResampleReport {
    pub masked_coordinates: usize,
    /// Masked coordinates that changed at one or more scalar positions.
    pub changed: usize,
    pub desired_unchanged: bool,
    /// Every change equals the difference of the two randomness draws.
    pub offsets_match: bool,
}

/// Decodes the same encoded batch under two common-randomness draws and
/// compares the solved coordinates.
pub fn resample_check(
    params: &SmbmmParams,
    batch_a: &[Matrix],
    batch_b: &[Matrix],
    noise_seed: u64,
    seeds: (u64, u64),
) -> Result<ResampleReport> {
    let f = params.field;
    let plan = SmbmmPlan::new(params)?;
    let blocks = partition_batch(batch_a, batch_b, params)?;
    let noise = SourceNoise::draw(params, &blocks, noise_seed);
    let shares = encode_smbmm_with_noise(&plan, &blocks, &noise)?;
    let (rows, cols) = blocks.product_block_shape();
    let k = plan.indices.k;
    let solve = |cr: &CommonRandomness| {
        let responses = shares[..k].iter().map(|s| server_compute_smbmm(s, cr, &plan)).collect::<Result<Vec<_>>>()?;
        solve_responses(&responses, &plan)
    };
    let (c1, c2) = (gen_common_randomness(&plan, rows, cols, seeds.0), gen_common_randomness(&plan, rows, cols, seeds.1));
    let (s1, s2) = (solve(&c1)?, solve(&c2)?);
    let mut changed = vec![false; k];
    let mut desired_unchanged = true;
    let mut offsets_match = true;
    for i in 0..rows {
        for j in 0..cols {
            let (o1, o2) = (c1.solution_offsets(i, j), c2.solution_offsets(i, j));
            for coord in 0..k {
                let d = f.sub(s2.at(i, j)[coord], s1.at(i, j)[coord]);
                offsets_match &= d == f.sub(o2[coord], o1[coord]);
                if plan.is_desired_coordinate(coord) {
                    desired_unchanged &= d.is_zero();
                } else if !d.is_zero() {
                    changed[coord] = true;
                }
            }
        }
    }
    Ok(ResampleReport {
        masked_coordinates: (0..k).filter(|&c| !plan.is_desired_coordinate(c)).count(),
        changed: changed.iter().filter(|&&c| c).count(),
        desired_unchanged,
        offsets_match,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssmm::Variant;

    fn f(q: u64) -> Field {
        Field::new(q).unwrap()
    }

    fn dims(m: usize, p: usize, n: usize) -> PartitionSpec {
        PartitionSpec::new(m, p, n).unwrap()
    }

    fn ssmm(q: u64, d: PartitionSpec, xa: usize, xb: usize, alphas: &[u64], v: VariantChoice) -> SsmmParams {
        let field = f(q);
        audit_params_ssmm(field, d, xa, xb, alphas.iter().map(|&a| field.elem(a)).collect(), v).unwrap()
    }

    #[test]
    fn ssmm_exhaustive_certificate() {
        let p = ssmm(101, dims(2, 3, 2), 2, 3, &[1, 2, 3, 4, 5, 6], VariantChoice::AMajor);
        let c = certify_server_privacy(AuditTarget::Ssmm(&p), Side::A, None).unwrap();
        assert_eq!(c.subsets_checked, 15);
        assert!(c.exhaustive);
        let c = certify_server_privacy(AuditTarget::Ssmm(&p), Side::B, None).unwrap();
        assert_eq!(c.subsets_checked, 20);
    }

    #[test]
    fn zero_point_is_caught() {
        let p = ssmm(101, dims(1, 1, 1), 1, 1, &[0, 1, 2], VariantChoice::AMajor);
        assert_eq!(certify_server_privacy(AuditTarget::Ssmm(&p), Side::A, None), Err(Error::SingularNoiseMatrix(vec![0])));
        let p = ssmm(101, dims(2, 1, 2), 1, 1, &[1, 2, 3, 4], VariantChoice::AMajor);
        assert!(certify_server_privacy(AuditTarget::Ssmm(&p), Side::B, None).is_ok());
    }

    #[test]
    fn sampling_and_limits() {
        let alphas: Vec<u64> = (1..=30).collect();
        let p = ssmm(257, dims(2, 3, 2), 2, 3, &alphas, VariantChoice::Auto);
        assert!(certify_server_privacy(AuditTarget::Ssmm(&p), Side::A, None).is_err());
        let c = certify_server_privacy(AuditTarget::Ssmm(&p), Side::A, Some((50, 1))).unwrap();
        assert_eq!((c.subsets_checked, c.exhaustive), (50, false));
    }

    #[test]
    fn smbmm_certificate() {
        let p = audit_params_smbmm(f(1009), dims(2, 3, 2), 2, 3, 2, 2, 12, VariantChoice::AMajor).unwrap();
        for side in [Side::A, Side::B] {
            let c = certify_server_privacy(AuditTarget::Smbmm(&p), side, None).unwrap();
            assert_eq!(c.groups, 2);
        }
    }

    #[test]
    fn share_leakage_is_zero() {
        let p = ssmm(5, dims(1, 1, 1), 1, 1, &[1, 2, 3], VariantChoice::AMajor);
        let r = enumerate_share_leakage(&p, Side::A, &[0], DEFAULT_BUDGET).unwrap();
        assert_eq!(r.max_distance, Ratio::from_integer(0));
        assert_eq!((r.data_dependent, r.cases), (1, 25));

        let p = ssmm(5, dims(1, 1, 1), 2, 1, &[1, 2, 3, 4], VariantChoice::AMajor);
        let r = enumerate_share_leakage(&p, Side::A, &[0, 1], DEFAULT_BUDGET).unwrap();
        assert_eq!(r.max_distance, Ratio::from_integer(0));
        // three servers against X = 2 do see the data
        let r = enumerate_share_leakage(&p, Side::A, &[0, 1, 2], DEFAULT_BUDGET).unwrap();
        assert!(r.max_distance > Ratio::from_integer(0));
    }

    #[test]
    fn leakage_preconditions() {
        let p = ssmm(11, dims(1, 1, 1), 1, 1, &[1, 2, 3], VariantChoice::AMajor);
        assert!(matches!(enumerate_share_leakage(&p, Side::A, &[0], DEFAULT_BUDGET), Err(Error::InvalidParams(_))));
        let p = ssmm(7, dims(2, 2, 1), 2, 2, &[1, 2, 3, 4, 5, 6], VariantChoice::AMajor);
        assert!(matches!(
            enumerate_share_leakage(&p, Side::A, &[0], 1000),
            Err(Error::EnumerationBudgetExceeded { needed: 117649, budget: 1000 })
        ));
    }

    #[test]
    fn user_view_is_masked() {
        let p = audit_params_smbmm(f(5), dims(2, 1, 2), 1, 1, 1, 2, 0, VariantChoice::AMajor).unwrap();
        assert_eq!(p.variant, Variant::AMajor);
        let plan = SmbmmPlan::new(&p).unwrap();
        assert_eq!(check_masking_rows(&plan).unwrap(), 3);
        let masked: Vec<usize> = (0..plan.indices.k).filter(|&c| !plan.is_desired_coordinate(c)).collect();
        let r = enumerate_user_view(&p, Some(&masked[..1]), DEFAULT_BUDGET).unwrap();
        assert_eq!(r.max_distance, Ratio::from_integer(0));
        assert_eq!(r.data_assignments, 390_625);
    }

    #[test]
    fn resampling_moves_only_masked_coordinates() {
        let field = f(1009);
        let p = SmbmmParams::new(field, dims(2, 1, 2), 1, 1, 1, 2, 16, VariantChoice::AMajor).unwrap();
        let mut rng = FieldRng::new(3, streams::DATA_A);
        let a: Vec<Matrix> = (0..2).map(|_| Matrix::random(field, 4, 2, &mut rng)).collect();
        let b: Vec<Matrix> = (0..2).map(|_| Matrix::random(field, 2, 4, &mut rng)).collect();
        let r = resample_check(&p, &a, &b, 1, (10, 11)).unwrap();
        assert!(r.desired_unchanged && r.offsets_match);
        assert_eq!(r.masked_coordinates, 8);
        assert_eq!(r.changed, 8);
    }
}

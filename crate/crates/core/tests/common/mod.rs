#![allow(dead_code)]

use secmm_core::rng::FieldRng;
use secmm_core::smbmm::{
    encode_smbmm, gen_common_randomness, partition_batch, recovery_threshold_smbmm, server_compute_smbmm,
    SmbmmParams, SmbmmPlan, SmbmmResponse, SourceNoise, SubEncoders,
};
use secmm_core::ssmm::VariantChoice;
use secmm_core::ssmm::{encode_ssmm, server_compute_ssmm, SsmmParams, SsmmResponse};
use secmm_core::{Field, Matrix, PartitionSpec};

pub fn field(q: u64) -> Field {
    Field::new(q).unwrap()
}

pub fn dims(m: usize, p: usize, n: usize) -> PartitionSpec {
    PartitionSpec::new(m, p, n).unwrap()
}

/// Random factors whose shapes are `(m*r, p*s)` and `(p*s, n*t)`.
pub fn factors(f: Field, d: PartitionSpec, (r, s, t): (usize, usize, usize), rng: &mut FieldRng) -> (Matrix, Matrix) {
    (Matrix::random(f, d.m * r, d.p * s, rng), Matrix::random(f, d.p * s, d.n * t, rng))
}

pub fn batch(
    f: Field,
    d: PartitionSpec,
    count: usize,
    blk: (usize, usize, usize),
    rng: &mut FieldRng,
) -> (Vec<Matrix>, Vec<Matrix>) {
    (0..count).map(|_| factors(f, d, blk, rng)).unzip()
}

pub fn ssmm_responses(params: &SsmmParams, a: &Matrix, b: &Matrix, seed: u64) -> Vec<SsmmResponse> {
    encode_ssmm(a, b, params, seed).unwrap().iter().map(|s| server_compute_ssmm(s).unwrap()).collect()
}

pub fn smbmm_responses(params: &SmbmmParams, a: &[Matrix], b: &[Matrix], seed: u64) -> Vec<SmbmmResponse> {
    let plan = SmbmmPlan::new(params).unwrap();
    let shares = encode_smbmm(a, b, params, seed).unwrap();
    let (rows, cols) = (a[0].rows() / params.partition.m, b[0].cols() / params.partition.n);
    let cr = gen_common_randomness(&plan, rows, cols, seed ^ 0x5eed);
    shares.iter().map(|s| server_compute_smbmm(s, &cr, &plan).unwrap()).collect()
}

/// Responses of the servers in `idx`, in that order.
pub fn pick<T: Clone>(all: &[T], idx: &[usize]) -> Vec<T> {
    idx.iter().map(|&i| all[i].clone()).collect()
}

fn between(rng: &mut FieldRng, lo: usize, hi: usize) -> usize {
    lo + rng.below((hi - lo + 1) as u64) as usize
}

/// A random SSMM instance over GF(7919) with a few spare servers.
pub fn random_ssmm_case(rng: &mut FieldRng) -> (SsmmParams, Matrix, Matrix) {
    use secmm_core::ssmm::recovery_threshold_ssmm;
    let f = field(7919);
    let d = dims(between(rng, 1, 3), between(rng, 1, 3), between(rng, 1, 3));
    let (xa, xb) = (between(rng, 1, 4), between(rng, 1, 4));
    let choice = [VariantChoice::Auto, VariantChoice::AMajor, VariantChoice::BMajor][between(rng, 0, 2)];
    let t = recovery_threshold_ssmm(d.m, d.p, d.n, xa, xb).unwrap();
    let k = t.for_variant(choice.resolve(&t));
    let params = SsmmParams::new(f, d, xa, xb, k + between(rng, 0, 6), choice).unwrap();
    let blk = (between(rng, 1, 2), between(rng, 1, 2), between(rng, 1, 2));
    let (a, b) = factors(f, d, blk, rng);
    (params, a, b)
}

/// A random SMBMM instance over GF(7919) with a few spare servers.
pub fn random_smbmm_case(rng: &mut FieldRng) -> (SmbmmParams, Vec<Matrix>, Vec<Matrix>) {
    let f = field(7919);
    let d = dims(between(rng, 2, 3), between(rng, 1, 2), between(rng, 2, 3));
    let (xa, xb) = (between(rng, 1, 3), between(rng, 1, 3));
    let (g, l) = (between(rng, 1, 2), between(rng, 2, 3));
    let choice = [VariantChoice::Auto, VariantChoice::AMajor, VariantChoice::BMajor][between(rng, 0, 2)];
    let t = recovery_threshold_smbmm(d.m, d.p, d.n, xa, xb, g, l).unwrap();
    let k = t.for_variant(choice.resolve(&t));
    let params = SmbmmParams::new(f, d, xa, xb, g, l, k + between(rng, 0, 6), choice).unwrap();
    let (a, b) = batch(f, d, g * l, (1, between(rng, 1, 2), 1), rng);
    (params, a, b)
}

/// Random distinct poles with multiplicities and evaluation points that
/// avoid them, sized for a square Cauchy-Vandermonde matrix.
pub fn random_cauchy_vandermonde(f: Field, rng: &mut FieldRng) -> secmm_core::Result<Matrix> {
    let q = f.modulus() as usize;
    let budget = (q / 2).min(60);
    let n_poles = between(rng, 0, 4);
    let mults: Vec<usize> = (0..n_poles).map(|_| between(rng, 1, 6)).collect();
    let cauchy: usize = mults.iter().sum();
    let width = between(rng, 1, budget - cauchy.min(budget - 1));
    let k = cauchy + width;
    let picked = rng.sample_indices(q, n_poles + k);
    let mut picked = picked;
    for i in (1..picked.len()).rev() {
        picked.swap(i, rng.below(i as u64 + 1) as usize);
    }
    let poles: Vec<(secmm_core::Fe, usize)> =
        picked[..n_poles].iter().zip(&mults).map(|(&v, &e)| (f.elem(v as u64), e)).collect();
    let alphas: Vec<secmm_core::Fe> = picked[n_poles..].iter().map(|&v| f.elem(v as u64)).collect();
    secmm_core::linalg::build_cauchy_vandermonde(&f, &alphas, &poles, width)
}

pub fn random_plan(rng: &mut FieldRng) -> (SmbmmPlan, SubEncoders) {
    let f = field(257);
    let pick = |rng: &mut FieldRng, lo: u64, hi: u64| (lo + rng.below(hi - lo + 1)) as usize;
    let (m, p, n) = (pick(rng, 2, 3), pick(rng, 1, 2), pick(rng, 2, 3));
    let (xa, xb) = (pick(rng, 1, 3), pick(rng, 1, 3));
    let (g, l) = (pick(rng, 1, 2), pick(rng, 2, 3));
    let variant = if rng.below(2) == 0 { VariantChoice::AMajor } else { VariantChoice::BMajor };
    // random distinct poles; evaluation points are not needed here
    let idx = rng.sample_indices(257, g * l);
    let mut shuffled = idx.clone();
    for i in (1..shuffled.len()).rev() {
        shuffled.swap(i, rng.below(i as u64 + 1) as usize);
    }
    let poles = (0..g).map(|h| (0..l).map(|j| f.elem(shuffled[h * l + j] as u64)).collect()).collect();
    let t = recovery_threshold_smbmm(m, p, n, xa, xb, g, l).unwrap();
    let params = SmbmmParams {
        field: f,
        partition: dims(m, p, n),
        x_a: xa,
        x_b: xb,
        g,
        l,
        n_servers: 0,
        poles,
        alphas: Vec::new(),
        variant: variant.resolve(&t),
    };
    let plan = SmbmmPlan::new(&params).unwrap();
    let (a, b) = batch(f, params.partition, g * l, (1, 2, 1), rng);
    let blocks = partition_batch(&a, &b, &params).unwrap();
    let noise = SourceNoise::draw(&params, &blocks, rng.next_u64());
    let enc = SubEncoders::build(&plan, &blocks, &noise).unwrap();
    (plan, enc)
}

/// Checks the split of every group product into Cauchy and polynomial
/// parts. The polynomial part is interpolated from `phi + 1` points and
/// the identity is then tested at `held_out` further points per group.
/// Returns the number of held-out evaluations.
pub fn check_decomposition(plan: &SmbmmPlan, enc: &SubEncoders, held_out: usize) -> Result<usize, String> {
    use secmm_core::poly::Interpolator;
    use secmm_core::smbmm::{cauchy_part, product_decomposition, toeplitz_apply};
    use secmm_core::Fe;

    let f = plan.params.field;
    let phi = plan.indices.phi;
    let poles: Vec<Fe> = plan.params.poles.iter().flatten().copied().collect();
    let points: Vec<Fe> =
        (0..f.modulus()).map(|v| f.elem(v)).filter(|a| !poles.contains(a)).take(phi + 1 + held_out).collect();
    if points.len() < phi + 1 + held_out {
        return Err(format!("GF({}) has too few non-pole points", f.modulus()));
    }
    let (fit, rest) = points.split_at(phi + 1);
    let err = |e: secmm_core::Error| e.to_string();
    let mut checked = 0;
    for h in 0..plan.params.g {
        let dec = product_decomposition(plan, enc, h).map_err(err)?;
        if dec.u.degree().is_some_and(|d| d > phi) {
            return Err(format!("group {h}: polynomial part has degree above phi = {phi}"));
        }
        // Cauchy coefficients rebuilt from H and the expansion constants
        let cauchy: Vec<Vec<Matrix>> = dec
            .h
            .iter()
            .enumerate()
            .map(|(l, hp)| toeplitz_apply(&plan.constants[h][l], hp, plan.indices.multiplicity(l)))
            .collect();
        if cauchy != dec.cauchy {
            return Err(format!("group {h}: Cauchy part differs from T(c) H"));
        }
        let residual = |alpha: Fe| -> Result<Matrix, String> {
            let (at, bt) = enc.group_values(plan, h, alpha).map_err(err)?;
            let c = cauchy_part(plan, h, &cauchy, alpha).map_err(err)?;
            at.matmul(&bt).and_then(|p| p.sub(&c)).map_err(err)
        };
        let values = fit.iter().map(|&a| residual(a)).collect::<Result<Vec<_>, _>>()?;
        let interp = Interpolator::new(f, fit).map_err(err)?;
        let (rows, cols) = values[0].shape();
        let mut u = Vec::with_capacity(phi + 1);
        for r in 0..=phi {
            let mut acc = Matrix::zeros(f, rows, cols);
            for (w, v) in interp.coefficient_weights(r).iter().zip(&values) {
                acc.add_scaled_assign(*w, v).map_err(err)?;
            }
            if acc != dec.u.coeff(r) {
                return Err(format!("group {h}: interpolated coefficient {r} differs from the symbolic one"));
            }
            u.push(acc);
        }
        for &alpha in rest {
            let mut u_val = Matrix::zeros(f, rows, cols);
            let mut pw = f.one();
            for c in &u {
                u_val.add_scaled_assign(pw, c).map_err(err)?;
                pw = f.mul(pw, alpha);
            }
            if residual(alpha)? != u_val {
                return Err(format!("group {h}: identity fails at alpha = {}", alpha.value()));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

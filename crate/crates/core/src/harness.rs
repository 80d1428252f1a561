//! In-process simulation: sources, `N` servers with stragglers, one user.

use std::time::Instant;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{Cell, DataSource, Protocol, StragglerModel, SweepConfig};
use crate::cost::{cost_report_smbmm, cost_report_ssmm, ratio_string, CostReport, Rational};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::matrix::{matmul_oracle, Matrix, PartitionSpec};
use crate::rng::{derive_seed, streams, FieldRng};
use crate::smbmm::{
    decode_smbmm, encode_smbmm_with_noise, gen_common_randomness, partition_batch, server_compute_smbmm,
    SmbmmParams, SmbmmPlan, SourceNoise,
};
use crate::ssmm::{decode_ssmm, encode_ssmm, server_compute_ssmm, SsmmParams, Thresholds, Variant};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunParams {
    pub q: u64,
    pub m: usize,
    pub p: usize,
    pub n: usize,
    pub x_a: usize,
    pub x_b: usize,
    pub g: usize,
    pub l: usize,
    pub n_servers: usize,
    pub lambda: usize,
    pub xi: usize,
    pub theta: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ThresholdReport {
    pub a_major: usize,
    pub b_major: usize,
    /// Threshold of the variant that ran.
    pub k: usize,
    pub note: String,
}

impl ThresholdReport {
    fn new(t: &Thresholds, v: Variant, label: &str) -> Self {
        let note = if t.a_major == t.b_major {
            format!("both variants need {} responses", t.a_major)
        } else {
            format!(
                "{label}: a_major needs {}, b_major needs {}; running {} with K = {}",
                t.a_major,
                t.b_major,
                v.name(),
                t.for_variant(v)
            )
        };
        ThresholdReport { a_major: t.a_major, b_major: t.b_major, k: t.for_variant(v), note }
    }
}

/// Element counts actually moved during the run, and the same numbers
/// normalized by the size of the data.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RealizedCosts {
    pub upload_a_elements: u64,
    pub upload_b_elements: u64,
    pub download_elements: u64,
    pub randomness_elements: u64,
    #[serde(with = "ratio_string")]
    pub upload_a: Rational,
    #[serde(with = "ratio_string")]
    pub upload_b: Rational,
    #[serde(with = "ratio_string")]
    pub download: Rational,
    #[serde(with = "ratio_string")]
    pub randomness: Rational,
}

impl RealizedCosts {
    fn matches(&self, c: &CostReport) -> bool {
        (self.upload_a, self.upload_b, self.download, self.randomness)
            == (c.upload_a, c.upload_b, c.download, c.randomness)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub protocol: Protocol,
    pub variant: Variant,
    pub params: RunParams,
    pub seed: u64,
    pub stragglers: Vec<usize>,
    pub responding: Vec<usize>,
    pub used: Vec<usize>,
    pub thresholds: ThresholdReport,
    pub pass: bool,
    pub costs: CostReport,
    pub realized: RealizedCosts,
    pub costs_match: bool,
    pub randomness_count: usize,
    /// SHA-256 over the text form of the decoded products.
    pub product_digest: String,
    pub wall_ms: Option<f64>,
    #[serde(skip)]
    pub products: Vec<Matrix>,
}

/// Indices of the servers that never answer.
pub fn resolve_stragglers(model: &StragglerModel, n_servers: usize, k: usize) -> Result<Vec<usize>> {
    let tolerable = n_servers.saturating_sub(k);
    let out = match model {
        StragglerModel::None => Vec::new(),
        StragglerModel::Fixed(list) => {
            let mut v = list.clone();
            v.sort_unstable();
            v.dedup();
            if v.len() != list.len() {
                return Err(Error::InvalidParams("straggler list has duplicates".into()));
            }
            if let Some(&i) = v.iter().find(|&&i| i >= n_servers) {
                return Err(Error::InvalidParams(format!("straggler {i} out of range for N = {n_servers}")));
            }
            v
        }
        StragglerModel::Random { count, seed } => {
            if *count > tolerable {
                return Err(Error::TooManyStragglers { stragglers: *count, tolerable });
            }
            FieldRng::new(*seed, streams::STRAGGLERS).sample_indices(n_servers, *count)
        }
    };
    if out.len() > tolerable {
        return Err(Error::TooManyStragglers { stragglers: out.len(), tolerable });
    }
    Ok(out)
}

fn digest(products: &[Matrix]) -> String {
    let mut h = Sha256::new();
    for m in products {
        h.update(m.to_text().as_bytes());
    }
    hex::encode(h.finalize())
}

fn ratio(num: usize, den: usize) -> Rational {
    Ratio::new(num as u64, den as u64)
}

fn responding(n_servers: usize, stragglers: &[usize]) -> Vec<usize> {
    (0..n_servers).filter(|i| stragglers.binary_search(i).is_err()).collect()
}

pub fn run_ssmm(params: &SsmmParams, a: &Matrix, b: &Matrix, stragglers: &StragglerModel, seed: u64) -> Result<RunRecord> {
    let start = Instant::now();
    params.validate()?;
    let k = params.threshold();
    let dropped = resolve_stragglers(stragglers, params.n_servers, k)?;
    let alive = responding(params.n_servers, &dropped);

    let shares = encode_ssmm(a, b, params, seed)?;
    let responses = alive
        .par_iter()
        .map(|&i| server_compute_ssmm(&shares[i]))
        .collect::<Result<Vec<_>>>()?;
    let product = decode_ssmm(&responses, params)?;
    let pass = product == matmul_oracle(a, b)?;

    let PartitionSpec { m, p, n } = params.partition;
    let a_share = shares[0].a_share.rows() * shares[0].a_share.cols();
    let b_share = shares[0].b_share.rows() * shares[0].b_share.cols();
    let y = responses[0].y.rows() * responses[0].y.cols();
    let big_n = params.n_servers;
    let realized = RealizedCosts {
        upload_a_elements: (big_n * a_share) as u64,
        upload_b_elements: (big_n * b_share) as u64,
        download_elements: (k * y) as u64,
        randomness_elements: 0,
        upload_a: ratio(big_n * a_share, a.rows() * a.cols()),
        upload_b: ratio(big_n * b_share, b.rows() * b.cols()),
        download: ratio(k * y, a.rows() * b.cols()),
        randomness: Ratio::from_integer(0),
    };
    let costs = cost_report_ssmm(params);
    let products = vec![product];
    Ok(RunRecord {
        protocol: Protocol::Ssmm,
        variant: params.variant,
        params: RunParams {
            q: params.field.modulus(),
            m,
            p,
            n,
            x_a: params.x_a,
            x_b: params.x_b,
            g: 1,
            l: 1,
            n_servers: big_n,
            lambda: a.rows(),
            xi: a.cols(),
            theta: b.cols(),
        },
        seed,
        stragglers: dropped,
        used: alive[..k].to_vec(),
        responding: alive,
        thresholds: ThresholdReport::new(&params.thresholds(), params.variant, "recovery threshold"),
        pass,
        costs_match: realized.matches(&costs),
        costs,
        realized,
        randomness_count: 0,
        product_digest: digest(&products),
        wall_ms: Some(start.elapsed().as_secs_f64() * 1e3),
        products,
    })
}

pub fn run_smbmm(
    params: &SmbmmParams,
    batch_a: &[Matrix],
    batch_b: &[Matrix],
    stragglers: &StragglerModel,
    seed: u64,
) -> Result<RunRecord> {
    let start = Instant::now();
    params.validate()?;
    let k = params.threshold();
    let dropped = resolve_stragglers(stragglers, params.n_servers, k)?;
    let alive = responding(params.n_servers, &dropped);

    let plan = SmbmmPlan::new(params)?;
    let blocks = partition_batch(batch_a, batch_b, params)?;
    let noise = SourceNoise::draw(params, &blocks, seed);
    let shares = encode_smbmm_with_noise(&plan, &blocks, &noise)?;
    let (rows, cols) = blocks.product_block_shape();
    let cr = gen_common_randomness(&plan, rows, cols, seed);
    let responses = alive
        .par_iter()
        .map(|&i| server_compute_smbmm(&shares[i], &cr, &plan))
        .collect::<Result<Vec<_>>>()?;
    let products = decode_smbmm(&responses, params)?;
    let mut pass = products.len() == batch_a.len();
    for ((c, a), b) in products.iter().zip(batch_a).zip(batch_b) {
        pass &= *c == matmul_oracle(a, b)?;
    }

    let PartitionSpec { m, p, n } = params.partition;
    let (a0, b0) = (&batch_a[0], &batch_b[0]);
    let big_n = params.n_servers;
    let g = params.g;
    let a_share = shares[0].a_shares[0].rows() * shares[0].a_shares[0].cols();
    let b_share = shares[0].b_shares[0].rows() * shares[0].b_shares[0].cols();
    let y = rows * cols;
    let size = params.batch_size();
    let (all_a, all_b, all_c) = (size * a0.rows() * a0.cols(), size * b0.rows() * b0.cols(), size * a0.rows() * b0.cols());
    let realized = RealizedCosts {
        upload_a_elements: (big_n * g * a_share) as u64,
        upload_b_elements: (big_n * g * b_share) as u64,
        download_elements: (k * y) as u64,
        randomness_elements: (cr.count() * y) as u64,
        upload_a: ratio(big_n * g * a_share, all_a),
        upload_b: ratio(big_n * g * b_share, all_b),
        download: ratio(k * y, all_c),
        randomness: ratio(cr.count() * y, all_c),
    };
    let costs = cost_report_smbmm(params);
    Ok(RunRecord {
        protocol: Protocol::Smbmm,
        variant: params.variant,
        params: RunParams {
            q: params.field.modulus(),
            m,
            p,
            n,
            x_a: params.x_a,
            x_b: params.x_b,
            g,
            l: params.l,
            n_servers: big_n,
            lambda: a0.rows(),
            xi: a0.cols(),
            theta: b0.cols(),
        },
        seed,
        stragglers: dropped,
        used: alive[..k].to_vec(),
        responding: alive,
        thresholds: ThresholdReport::new(&params.thresholds(), params.variant, "K' (a_major) vs K'' (b_major)"),
        pass,
        costs_match: realized.matches(&costs),
        costs,
        realized,
        randomness_count: cr.count(),
        product_digest: digest(&products),
        wall_ms: Some(start.elapsed().as_secs_f64() * 1e3),
        products,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub protocol: Protocol,
    pub cell: Cell,
    pub q: u64,
    pub record: Option<RunRecord>,
    pub error: Option<String>,
}

fn run_cell(cfg: &SweepConfig, cell: &Cell, seed: u64) -> Result<RunRecord> {
    let field = Field::new(cfg.q)?;
    let dims = PartitionSpec::new(cell.m, cell.p, cell.n)?;
    let b = cfg.block;
    let shape = (cell.m * b, cell.p * b, cell.n * b);
    let data = DataSource::Random { seed };
    let stragglers = StragglerModel::Random { count: cfg.stragglers, seed };
    if cfg.stragglers > cfg.extra_servers {
        return Err(Error::TooManyStragglers { stragglers: cfg.stragglers, tolerable: cfg.extra_servers });
    }
    match cfg.protocol {
        Protocol::Ssmm => {
            let t = crate::ssmm::recovery_threshold_ssmm(cell.m, cell.p, cell.n, cell.x_a, cell.x_b)?;
            let big_n = t.for_variant(cfg.variant.resolve(&t)) + cfg.extra_servers;
            let params = SsmmParams::new(field, dims, cell.x_a, cell.x_b, big_n, cfg.variant)?;
            let (a, bm) = crate::config::load_data(field, &data, 1, shape, std::path::Path::new(""))?;
            run_ssmm(&params, &a[0], &bm[0], &stragglers, seed)
        }
        Protocol::Smbmm => {
            let t = crate::smbmm::recovery_threshold_smbmm(cell.m, cell.p, cell.n, cell.x_a, cell.x_b, cell.g, cell.l)?;
            let big_n = t.for_variant(cfg.variant.resolve(&t)) + cfg.extra_servers;
            let params = SmbmmParams::new(field, dims, cell.x_a, cell.x_b, cell.g, cell.l, big_n, cfg.variant)?;
            let (a, bm) = crate::config::load_data(field, &data, cell.g * cell.l, shape, std::path::Path::new(""))?;
            run_smbmm(&params, &a, &bm, &stragglers, seed)
        }
    }
}

/// Runs every grid cell in order. Cell `i` uses the seed
/// `derive_seed(master, SWEEP_CELLS, i)`; a failing cell is recorded and
/// the sweep moves on.
pub fn sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let cells = cfg.grid.cells(cfg.protocol);
    if cells.is_empty() {
        return Err(Error::InvalidParams("sweep grid is empty".into()));
    }
    Ok(cells
        .iter()
        .enumerate()
        .map(|(i, cell)| {
            let seed = derive_seed(cfg.seed, streams::SWEEP_CELLS, i as u64);
            let (record, error) = match run_cell(cfg, cell, seed) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SweepRow { protocol: cfg.protocol, cell: *cell, q: cfg.q, record, error }
        })
        .collect())
}

pub const SWEEP_COLUMNS: [&str; 20] = [
    "protocol", "variant", "m", "p", "n", "x_a", "x_b", "g", "l", "q", "K", "N", "stragglers", "pass", "U_A", "U_B",
    "D", "rho", "wall_ms", "error",
];

/// CSV summary; `wall_ms` is left empty unless `timing` is set, so that
/// reruns are byte-identical.
pub fn sweep_csv(rows: &[SweepRow], timing: bool) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(SWEEP_COLUMNS).map_err(io)?;
    for row in rows {
        let c = row.cell;
        let mut rec: Vec<String> = vec![row.protocol.name().into()];
        match &row.record {
            Some(r) => {
                rec.push(r.variant.name().into());
                rec.extend([c.m, c.p, c.n, c.x_a, c.x_b, c.g, c.l].map(|v| v.to_string()));
                rec.push(row.q.to_string());
                rec.extend([r.thresholds.k, r.params.n_servers, r.stragglers.len()].map(|v| v.to_string()));
                rec.push(r.pass.to_string());
                let re = &r.realized;
                rec.extend([re.upload_a, re.upload_b, re.download, re.randomness].map(|v| v.to_string()));
                rec.push(match (timing, r.wall_ms) {
                    (true, Some(ms)) => format!("{ms:.3}"),
                    _ => String::new(),
                });
                rec.push(String::new());
            }
            None => {
                rec.push(String::new());
                rec.extend([c.m, c.p, c.n, c.x_a, c.x_b, c.g, c.l].map(|v| v.to_string()));
                rec.push(row.q.to_string());
                rec.extend(std::iter::repeat_n(String::new(), 3));
                rec.push("false".into());
                rec.extend(std::iter::repeat_n(String::new(), 5));
                rec.push(row.error.clone().unwrap_or_default());
            }
        }
        w.write_record(&rec).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Grid;
    use crate::ssmm::VariantChoice;

    fn ssmm_small() -> (SsmmParams, Matrix, Matrix) {
        let f = Field::new(257).unwrap();
        let params = SsmmParams::new(f, PartitionSpec::new(2, 1, 2).unwrap(), 1, 1, 12, VariantChoice::Auto).unwrap();
        let mut rng = FieldRng::new(9, streams::DATA_A);
        (params, Matrix::random(f, 4, 3, &mut rng), Matrix::random(f, 3, 4, &mut rng))
    }

    #[test]
    fn straggler_models() {
        assert_eq!(resolve_stragglers(&StragglerModel::Fixed(vec![3, 1]), 10, 7).unwrap(), vec![1, 3]);
        assert_eq!(
            resolve_stragglers(&StragglerModel::Fixed(vec![0, 1, 2, 3]), 10, 7),
            Err(Error::TooManyStragglers { stragglers: 4, tolerable: 3 })
        );
        assert!(resolve_stragglers(&StragglerModel::Fixed(vec![1, 1]), 10, 7).is_err());
        assert!(resolve_stragglers(&StragglerModel::Fixed(vec![10]), 10, 7).is_err());
        let r = resolve_stragglers(&StragglerModel::Random { count: 3, seed: 4 }, 10, 7).unwrap();
        assert_eq!(r.len(), 3);
        assert_eq!(resolve_stragglers(&StragglerModel::Random { count: 3, seed: 4 }, 10, 7).unwrap(), r);
    }

    #[test]
    fn ssmm_run_record() {
        let (params, a, b) = ssmm_small();
        let k = params.threshold();
        let rec = run_ssmm(&params, &a, &b, &StragglerModel::Fixed(vec![0, 5]), 1).unwrap();
        assert!(rec.pass && rec.costs_match);
        assert_eq!(rec.used.len(), k);
        assert_eq!(rec.used[0], 1);
        assert_eq!(rec.realized.download_elements, (k * 2 * 2) as u64);
        let too_many = StragglerModel::Random { count: 12 - k + 1, seed: 0 };
        assert!(matches!(run_ssmm(&params, &a, &b, &too_many, 1), Err(Error::TooManyStragglers { .. })));
    }

    #[test]
    fn stragglers_do_not_change_the_product() {
        let (params, a, b) = ssmm_small();
        let r1 = run_ssmm(&params, &a, &b, &StragglerModel::None, 1).unwrap();
        let r2 = run_ssmm(&params, &a, &b, &StragglerModel::Random { count: 4, seed: 8 }, 2).unwrap();
        assert_eq!(r1.product_digest, r2.product_digest);
        assert_ne!(r1.used, r2.used);
    }

    fn sweep_cfg(xs: Vec<usize>) -> SweepConfig {
        SweepConfig {
            schema: 1,
            protocol: Protocol::Ssmm,
            q: 257,
            variant: VariantChoice::Auto,
            grid: Grid { m: vec![2], p: vec![1], n: vec![2], x_a: xs.clone(), x_b: xs, g: vec![1], l: vec![2] },
            block: 2,
            extra_servers: 2,
            stragglers: 1,
            seed: 11,
        }
    }

    #[test]
    fn sweep_rows_and_replay() {
        let mut cfg = sweep_cfg(vec![1, 2, 3]);
        cfg.grid.x_b = vec![1];
        let rows = sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.record.as_ref().is_some_and(|r| r.pass)));
        let csv1 = sweep_csv(&rows, false).unwrap();
        assert_eq!(csv1, sweep_csv(&sweep(&cfg).unwrap(), false).unwrap());
        assert_eq!(csv1.lines().count(), 4);
        assert_eq!(csv1.lines().next().unwrap(), SWEEP_COLUMNS.join(","));
    }

    #[test]
    fn sweep_records_cell_errors() {
        let mut cfg = sweep_cfg(vec![1]);
        cfg.grid.n = vec![2, 0];
        let rows = sweep(&cfg).unwrap();
        assert!(rows[0].error.is_none());
        assert!(rows[1].error.is_some());
        let csv = sweep_csv(&rows, false).unwrap();
        assert!(csv.lines().nth(2).unwrap().starts_with("ssmm,,2,1,0,"));
        cfg.grid.m.clear();
        assert!(sweep(&cfg).is_err());
    }

    #[test]
    fn one_cell_sweep_is_a_run() {
        let cfg = sweep_cfg(vec![1]);
        let rows = sweep(&cfg).unwrap();
        let seed = derive_seed(11, streams::SWEEP_CELLS, 0);
        let rec = rows[0].record.as_ref().unwrap();
        let f = Field::new(257).unwrap();
        let params = SsmmParams::new(f, PartitionSpec::new(2, 1, 2).unwrap(), 1, 1, rec.params.n_servers, VariantChoice::Auto).unwrap();
        let (a, b) = crate::config::load_data(f, &DataSource::Random { seed }, 1, (4, 2, 4), std::path::Path::new("")).unwrap();
        let direct = run_ssmm(&params, &a[0], &b[0], &StragglerModel::Random { count: 1, seed }, seed).unwrap();
        assert_eq!(direct.product_digest, rec.product_digest);
        assert_eq!(direct.used, rec.used);
    }
}

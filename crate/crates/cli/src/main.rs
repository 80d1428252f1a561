use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use secmm_core::analysis::{table_ii, table_iii, table_iv, table_v, Table};
use secmm_core::audit::{
    audit_params_smbmm, audit_params_ssmm, certify_server_privacy, enumerate_share_leakage, enumerate_user_view,
    resample_check, AuditTarget, Side, DEFAULT_BUDGET, EXHAUSTIVE_MAX_SERVERS,
};
use secmm_core::cost::Rational;
use secmm_core::config::{Protocol, RunConfig, SweepConfig, SCHEMA_DOC};
use secmm_core::harness::{run_smbmm, run_ssmm, sweep, sweep_csv, RunRecord, SweepRow};
use secmm_core::smbmm::recovery_threshold_smbmm;
use secmm_core::ssmm::{recovery_threshold_ssmm, VariantChoice};
use secmm_core::{Error, Field, PartitionSpec};

#[derive(Parser)]
#[command(name = "secmm", version, about = "Secure distributed matrix multiplication over GF(q)")]
struct Cli {
    /// JSON config (run, sweep or audit).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Keep wall-clock times in reports (makes output nondeterministic).
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Md,
}

#[derive(Subcommand)]
enum Command {
    /// Single-product protocol.
    Ssmm {
        #[command(subcommand)]
        action: RunAction,
    },
    /// Batch protocol.
    Smbmm {
        #[command(subcommand)]
        action: RunAction,
    },
    /// Run a parameter grid.
    Sweep,
    /// Recovery thresholds of both variants.
    Thresholds(ThresholdArgs),
    /// Threshold comparison tables against published baselines.
    Compare(CompareArgs),
    /// Security audit of a run config, or the built-in toy-scale suite.
    Audit(AuditArgs),
}

#[derive(Subcommand)]
enum RunAction {
    /// Encode, compute with stragglers, decode and check against the oracle.
    Run,
}

#[derive(Args)]
struct ThresholdArgs {
    #[arg(long)]
    m: usize,
    #[arg(long)]
    p: usize,
    #[arg(long)]
    n: usize,
    #[arg(long)]
    xa: usize,
    #[arg(long)]
    xb: usize,
    /// Number of groups; with `--l` selects the batch protocol.
    #[arg(long, requires = "l")]
    g: Option<usize>,
    #[arg(long, requires = "g")]
    l: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TableId {
    V,
    Iv,
    Ii,
    Iii,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long, value_enum, default_value = "v")]
    table: TableId,
    #[arg(long)]
    m: Option<usize>,
    #[arg(long)]
    p: Option<usize>,
    #[arg(long)]
    n: Option<usize>,
    #[arg(long)]
    g: Option<usize>,
    #[arg(long)]
    l: Option<usize>,
    /// Collusion levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    x: Option<Vec<usize>>,
    /// Bilinear complexity R(m,p,n) for the E-EP rows.
    #[arg(long)]
    r: Option<usize>,
}

#[derive(Args)]
struct AuditArgs {
    /// Certify only one side.
    #[arg(long, value_enum)]
    side: Option<SideArg>,
    /// Check this many random subsets instead of all of them.
    #[arg(long)]
    sample: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    A,
    B,
}

/// Failures mapped to exit codes.
enum Failure {
    Usage(String),
    Protocol(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Config(_) | Error::Parse(_) => Failure::Usage(e.to_string()),
            other => Failure::Protocol(other.to_string()),
        }
    }
}

struct Report {
    body: String,
    pass: bool,
}

fn load_run_config(cli: &Cli) -> Result<(RunConfig, PathBuf), Failure> {
    let path = cli.config.as_ref().ok_or_else(|| Failure::Usage("missing --config".into()))?;
    let (mut cfg, base) = RunConfig::from_path(path).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(s) = cli.seed {
        cfg.set_seed(s);
    }
    Ok((cfg, base))
}

fn to_json(v: &impl serde::Serialize) -> String {
    serde_json::to_string_pretty(v).expect("serializable") + "\n"
}

fn record_md(r: &RunRecord) -> String {
    let p = &r.params;
    let mut s = format!("### {} run ({})\n\n| field | value |\n|---|---|\n", r.protocol.name(), r.variant.name());
    let rows: Vec<(&str, String)> = vec![
        ("q", p.q.to_string()),
        ("(m, p, n)", format!("({}, {}, {})", p.m, p.p, p.n)),
        ("(X_A, X_B)", format!("({}, {})", p.x_a, p.x_b)),
        ("(G, L)", format!("({}, {})", p.g, p.l)),
        ("N", p.n_servers.to_string()),
        ("K", r.thresholds.k.to_string()),
        ("thresholds", r.thresholds.note.clone()),
        ("stragglers", format!("{:?}", r.stragglers)),
        ("pass", r.pass.to_string()),
        ("U_A", r.realized.upload_a.to_string()),
        ("U_B", r.realized.upload_b.to_string()),
        ("D", r.realized.download.to_string()),
        ("rho", r.realized.randomness.to_string()),
        ("randomness count", r.randomness_count.to_string()),
        ("costs match closed form", r.costs_match.to_string()),
        ("product sha256", r.product_digest.clone()),
    ];
    for (k, v) in rows {
        let _ = writeln!(s, "| {k} | {v} |");
    }
    if let Some(ms) = r.wall_ms {
        let _ = writeln!(s, "| wall ms | {ms:.3} |");
    }
    s
}

fn run(cli: &Cli, protocol: Protocol) -> Result<Report, Failure> {
    let (cfg, base) = load_run_config(cli)?;
    let mut rec = match (&cfg, protocol) {
        (RunConfig::Ssmm(c), Protocol::Ssmm) => {
            let params = c.params()?;
            let (a, b) = c.data(&base)?;
            run_ssmm(&params, &a, &b, &c.stragglers, c.seed)?
        }
        (RunConfig::Smbmm(c), Protocol::Smbmm) => {
            let params = c.params()?;
            let (a, b) = c.data(&base)?;
            run_smbmm(&params, &a, &b, &c.stragglers, c.seed)?
        }
        (other, _) => {
            return Err(Failure::Usage(format!(
                "config is for {}, not {}",
                other.protocol().name(),
                protocol.name()
            )))
        }
    };
    if !cli.timing {
        rec.wall_ms = None;
    }
    let body = match cli.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&rec),
        Format::Md => record_md(&rec),
        Format::Csv => {
            let p = rec.params;
            let cell = secmm_core::config::Cell { m: p.m, p: p.p, n: p.n, x_a: p.x_a, x_b: p.x_b, g: p.g, l: p.l };
            let pass = rec.pass;
            let row = SweepRow { protocol, cell, q: p.q, record: Some(rec), error: None };
            let csv = sweep_csv(&[row], cli.timing)?;
            return Ok(Report { body: csv, pass });
        }
    };
    Ok(Report { body, pass: rec.pass })
}

fn run_sweep(cli: &Cli) -> Result<Report, Failure> {
    let path = cli.config.as_ref().ok_or_else(|| Failure::Usage("missing --config".into()))?;
    let mut cfg = SweepConfig::from_path(path).map_err(|e| Failure::Usage(e.to_string()))?;
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    let mut rows = sweep(&cfg).map_err(|e| Failure::Usage(e.to_string()))?;
    let pass = rows.iter().all(|r| r.record.as_ref().is_some_and(|r| r.pass));
    if !cli.timing {
        for r in rows.iter_mut().filter_map(|r| r.record.as_mut()) {
            r.wall_ms = None;
        }
    }
    let body = match cli.format.unwrap_or(Format::Csv) {
        Format::Csv => sweep_csv(&rows, cli.timing)?,
        Format::Json => to_json(&rows),
        Format::Md => {
            let csv = sweep_csv(&rows, cli.timing)?;
            let mut lines = csv.lines();
            let header: Vec<&str> = lines.next().unwrap_or_default().split(',').collect();
            let table = Table {
                title: "Sweep".into(),
                headers: header.iter().map(|s| s.to_string()).collect(),
                rows: rows
                    .iter()
                    .zip(lines)
                    .map(|(_, l)| l.split(',').map(String::from).collect())
                    .collect(),
            };
            table.to_markdown()
        }
    };
    Ok(Report { body, pass })
}

fn thresholds(cli: &Cli, a: &ThresholdArgs) -> Result<Report, Failure> {
    let (label, t) = match (a.g, a.l) {
        (Some(g), Some(l)) => ("smbmm", recovery_threshold_smbmm(a.m, a.p, a.n, a.xa, a.xb, g, l)?),
        _ => ("ssmm", recovery_threshold_ssmm(a.m, a.p, a.n, a.xa, a.xb)?),
    };
    let body = match cli.format.unwrap_or(Format::Md) {
        Format::Json => to_json(&json!({
            "protocol": label,
            "a_major": t.a_major,
            "b_major": t.b_major,
            "k": t.k,
            "best": t.best.name(),
        })),
        Format::Csv => format!("protocol,a_major,b_major,k,best\n{label},{},{},{},{}\n", t.a_major, t.b_major, t.k, t.best.name()),
        Format::Md => format!(
            "| protocol | a_major | b_major | K | best |\n|---|---|---|---|---|\n| {label} | {} | {} | {} | {} |\n",
            t.a_major,
            t.b_major,
            t.k,
            t.best.name()
        ),
    };
    Ok(Report { body, pass: true })
}

fn compare(cli: &Cli, a: &CompareArgs) -> Result<Report, Failure> {
    let table = match a.table {
        TableId::V => table_v(
            a.m.unwrap_or(2),
            a.p.unwrap_or(3),
            a.n.unwrap_or(2),
            a.g.unwrap_or(2),
            a.l.unwrap_or(2),
            a.x.as_deref().unwrap_or(&[1, 2, 3]),
        )?,
        TableId::Iv => table_iv(
            a.m.unwrap_or(2),
            a.p.unwrap_or(2),
            a.n.unwrap_or(2),
            Some(a.r.unwrap_or(7)),
            a.x.as_deref().unwrap_or(&[1, 2, 3, 4, 5]),
        )?,
        TableId::Ii => table_ii(a.m.unwrap_or(2), a.n.unwrap_or(2), a.x.as_deref().unwrap_or(&[1, 2, 3, 4])),
        TableId::Iii => table_iii(
            a.m.unwrap_or(2),
            a.p.unwrap_or(2),
            a.n.unwrap_or(2),
            a.r,
            a.x.as_deref().unwrap_or(&[1, 2, 3, 4]),
        ),
    };
    let body = match cli.format.unwrap_or(Format::Md) {
        Format::Md => table.to_markdown(),
        Format::Csv => table.to_csv()?,
        Format::Json => to_json(&table),
    };
    Ok(Report { body, pass: true })
}

fn sides(a: &AuditArgs) -> Vec<Side> {
    match a.side {
        Some(SideArg::A) => vec![Side::A],
        Some(SideArg::B) => vec![Side::B],
        None => vec![Side::A, Side::B],
    }
}

fn audit(cli: &Cli, a: &AuditArgs) -> Result<Report, Failure> {
    let seed = cli.seed.unwrap_or(0);
    let mut text = String::new();
    let mut certs = Vec::new();
    let mut leaks = Vec::new();
    let mut resample = Value::Null;
    let mut pass = true;
    let zero = Rational::from_integer(0);

    if cli.config.is_some() {
        let (cfg, base) = load_run_config(cli)?;
        let n_servers = match &cfg {
            RunConfig::Ssmm(c) => c.n_servers,
            RunConfig::Smbmm(c) => c.n_servers,
        };
        let sample = a.sample.map(|s| (s, seed)).or_else(|| (n_servers > EXHAUSTIVE_MAX_SERVERS).then_some((1000, seed)));
        match &cfg {
            RunConfig::Ssmm(c) => {
                let params = c.params()?;
                for side in sides(a) {
                    let cert = certify_server_privacy(AuditTarget::Ssmm(&params), side, sample)?;
                    text.push_str(&cert.to_text());
                    certs.push(cert);
                }
            }
            RunConfig::Smbmm(c) => {
                let params = c.params()?;
                for side in sides(a) {
                    let cert = certify_server_privacy(AuditTarget::Smbmm(&params), side, sample)?;
                    text.push_str(&cert.to_text());
                    certs.push(cert);
                }
                let (ba, bb) = c.data(&base)?;
                let r = resample_check(&params, &ba, &bb, c.seed, (c.seed, c.seed.wrapping_add(1)))?;
                pass &= r.desired_unchanged && r.offsets_match && r.changed == r.masked_coordinates;
                let _ = writeln!(
                    text,
                    "common randomness resampled: {}/{} masked coordinates changed, desired unchanged: {}",
                    r.changed, r.masked_coordinates, r.desired_unchanged
                );
                resample = serde_json::to_value(&r).expect("serializable");
            }
        }
    } else {
        // toy-scale suite
        let f5 = Field::new(5)?;
        let one = PartitionSpec::new(1, 1, 1)?;
        for (xa, servers) in [(1usize, vec![0usize]), (2, vec![0, 1])] {
            let alphas = (1..=4).map(|v| f5.elem(v)).collect();
            let p = audit_params_ssmm(f5, one, xa, 1, alphas, VariantChoice::AMajor)?;
            let r = enumerate_share_leakage(&p, Side::A, &servers, DEFAULT_BUDGET)?;
            pass &= r.max_distance == zero;
            text.push_str(&r.to_text());
            leaks.push(r);
        }
        let f101 = Field::new(101)?;
        let alphas = (1..=6).map(|v| f101.elem(v)).collect();
        let p = audit_params_ssmm(f101, PartitionSpec::new(2, 3, 2)?, 2, 3, alphas, VariantChoice::AMajor)?;
        for side in sides(a) {
            let cert = certify_server_privacy(AuditTarget::Ssmm(&p), side, None)?;
            text.push_str(&cert.to_text());
            certs.push(cert);
        }
        let p = audit_params_smbmm(f5, PartitionSpec::new(2, 1, 2)?, 1, 1, 1, 2, 0, VariantChoice::AMajor)?;
        let r = enumerate_user_view(&p, None, DEFAULT_BUDGET)?;
        pass &= r.max_distance == zero;
        text.push_str(&r.to_text());
        leaks.push(r);
    }

    let body = match cli.format.unwrap_or(Format::Json) {
        Format::Json => to_json(&json!({
            "pass": pass,
            "certificates": certs,
            "leakage": leaks,
            "resample": resample,
        })),
        Format::Md | Format::Csv => text + &format!("overall: {}\n", if pass { "PASS" } else { "FAIL" }),
    };
    Ok(Report { body, pass })
}

fn emit(out: Option<&Path>, body: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, body).map_err(|e| Failure::Usage(format!("{}: {e}", p.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ssmm { action: RunAction::Run } => run(&cli, Protocol::Ssmm),
        Command::Smbmm { action: RunAction::Run } => run(&cli, Protocol::Smbmm),
        Command::Sweep => run_sweep(&cli),
        Command::Thresholds(a) => thresholds(&cli, a),
        Command::Compare(a) => compare(&cli, a),
        Command::Audit(a) => audit(&cli, a),
    };
    match result.and_then(|r| emit(cli.out.as_deref(), &r.body).map(|_| r.pass)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{SCHEMA_DOC}");
            ExitCode::from(2)
        }
        Err(Failure::Protocol(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
    }
}

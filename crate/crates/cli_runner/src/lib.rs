//! Batch front end: bound tables, exact suprema, Monte Carlo verification
//! and constant audits. Every command writes machine-readable output.

mod manifest;
mod parse;

use std::io::Write;
use std::path::{Path, PathBuf};

use bounds::{BoundEvaluation, BoundParams, Theorem};
use clap::{Args, Parser, Subcommand, ValueEnum};
use exact_supremum::{BandSupremum, DenominatorKind, GridOracle};
use levy_ciesielski::TruncatedPath;
use montecarlo::{ExperimentConfig, ExperimentReport, Verdict};
use serde::Serialize;
use thiserror::Error;

pub use manifest::{config_hash, RunManifest};
pub use parse::{parse_real, parse_real_list, parse_u32_list};

/// Output directory when neither `--out-dir` nor the environment sets one.
pub const DEFAULT_OUT_DIR: &str = "levy-modulus-out";
pub const OUT_DIR_ENV: &str = "LEVY_MODULUS_OUT_DIR";

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_VIOLATED: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Bound(#[from] bounds::BoundError),
    #[error(transparent)]
    Sup(#[from] exact_supremum::SupError),
    #[error(transparent)]
    Experiment(#[from] montecarlo::McError),
    #[error("config: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Stdout(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Stdout(_) | CliError::Csv(_) => EXIT_IO,
            CliError::Experiment(montecarlo::McError::Pool(_)) => EXIT_IO,
            _ => EXIT_USAGE,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;

#[derive(Debug, Parser)]
#[command(name = "levy-modulus", version, about = "Modulus-of-continuity bounds for Brownian motion: evaluate, compute, verify")]
pub struct Cli {
    /// Monte Carlo worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Directory for report files.
    #[arg(long, global = true, env = OUT_DIR_ENV)]
    pub out_dir: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a bound over a parameter grid.
    Bound(BoundArgs),
    /// Exact supremum of a statistic on one sampled path.
    Sup(SupArgs),
    /// Run Monte Carlo verification experiments.
    Verify(VerifyArgs),
    /// Compare the series constants with their claimed bounds.
    Audit(AuditArgs),
    /// Exact supremum against the brute-force grid oracle at several resolutions.
    OracleCompare(OracleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// Comma-separated reals parsed as one argument value.
pub type RealList = Vec<f64>;
/// Comma list or range of levels parsed as one argument value.
pub type LevelList = Vec<u32>;

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Theorem id, e.g. fixed-delta, uniform, local-deviation.
    #[arg(value_parser = parse_theorem)]
    pub theorem: Theorem,
    /// Comma list of ε values.
    #[arg(long = "eps", value_parser = parse_real_list)]
    pub epsilon: Option<RealList>,
    /// Comma list of δ (or δ0) values; `2^-k` accepted.
    #[arg(long, value_parser = parse_real_list)]
    pub delta: Option<RealList>,
    /// Levels: comma list or `a..=b`.
    #[arg(long, value_parser = parse_u32_list)]
    pub n: Option<LevelList>,
    #[arg(long, value_parser = parse_real_list)]
    pub d: Option<RealList>,
    #[arg(long, value_parser = parse_u32_list)]
    pub m: Option<LevelList>,
    /// Horizon T of the scaled theorems.
    #[arg(long = "T", value_parser = parse_real_list)]
    pub horizon_t: Option<RealList>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SupArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub level: u32,
    #[arg(long, value_parser = parse_real)]
    pub delta: Option<f64>,
    /// gap-global, fixed-global, gap-global-corrected (or uniform),
    /// local-plain, local-corrected, block.
    #[arg(long)]
    pub kind: String,
    /// ε of local-corrected and block.
    #[arg(long = "eps", value_parser = parse_real)]
    pub epsilon: Option<f64>,
    /// Block index for kind block.
    #[arg(long)]
    pub m: Option<u32>,
    /// Also evaluate the grid oracle at this resolution.
    #[arg(long, value_parser = parse_real)]
    pub oracle: Option<f64>,
    /// Use the all-zero path instead of sampling.
    #[arg(long)]
    pub zero: bool,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// JSON file holding one experiment config or an array of them.
    #[arg(long, conflicts_with = "theorem")]
    pub config: Option<PathBuf>,
    #[arg(long, value_parser = parse_theorem, required_unless_present = "config")]
    pub theorem: Option<Theorem>,
    #[arg(long = "eps", value_parser = parse_real)]
    pub epsilon: Option<f64>,
    #[arg(long, value_parser = parse_real)]
    pub delta: Option<f64>,
    #[arg(long = "n")]
    pub level_n: Option<u32>,
    #[arg(long = "N")]
    pub approx_level_n: Option<u32>,
    #[arg(long)]
    pub m: Option<u32>,
    #[arg(long, value_parser = parse_real)]
    pub d: Option<f64>,
    #[arg(long = "J")]
    pub horizon_j: Option<u32>,
    #[arg(long, default_value_t = 10_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.99)]
    pub ci_level: f64,
    /// Test hook: sample the zero path.
    #[arg(long)]
    pub zero_path: bool,
    /// Test hook: multiply the bound before the verdict.
    #[arg(long, value_parser = parse_real)]
    pub bound_scale: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AuditArgs {
    #[arg(long, value_parser = parse_u32_list, default_value = "1,2")]
    pub k: LevelList,
    #[arg(long = "eps", value_parser = parse_real_list, default_value = "1")]
    pub epsilon: RealList,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub level: u32,
    #[arg(long, value_parser = parse_real)]
    pub delta: Option<f64>,
    #[arg(long)]
    pub kind: String,
    #[arg(long = "eps", value_parser = parse_real)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub m: Option<u32>,
    /// Resolutions (default `2^-(level+4)` and `2^-(level+6)`).
    #[arg(long, value_parser = parse_real_list)]
    pub resolutions: Option<RealList>,
}

fn parse_theorem(s: &str) -> std::result::Result<Theorem, String> {
    s.parse().map_err(|e: bounds::BoundError| e.to_string())
}

/// Run a parsed command line; returns the process exit code.
pub fn execute(cli: &Cli, argv: &[String], out: &mut dyn Write) -> Result<i32> {
    match &cli.command {
        Command::Bound(a) => cmd_bound(a, out),
        Command::Sup(a) => cmd_sup(a, out),
        Command::Verify(a) => cmd_verify(a, cli, argv, out),
        Command::Audit(a) => cmd_audit(a, out),
        Command::OracleCompare(a) => cmd_oracle_compare(a, out),
    }
}

#[derive(Debug, Serialize)]
struct BoundRow {
    theorem: Theorem,
    epsilon: Option<f64>,
    delta: Option<f64>,
    n: Option<u32>,
    d: Option<f64>,
    m: Option<u32>,
    #[serde(rename = "T")]
    horizon_t: Option<f64>,
    raw: f64,
    clamped: f64,
    vacuous: bool,
}

fn axis<T: Copy>(v: &Option<Vec<T>>) -> Vec<Option<T>> {
    match v {
        Some(xs) => xs.iter().copied().map(Some).collect(),
        None => vec![None],
    }
}

pub fn bound_grid(a: &BoundArgs) -> Result<Vec<BoundEvaluation>> {
    let mut rows = Vec::new();
    for epsilon in axis(&a.epsilon) {
        for delta in axis(&a.delta) {
            for n in axis(&a.n) {
                for d in axis(&a.d) {
                    for m in axis(&a.m) {
                        for horizon_t in axis(&a.horizon_t) {
                            let p = BoundParams {
                                epsilon,
                                delta,
                                n,
                                d,
                                m,
                                horizon_t,
                            };
                            rows.push(bounds::evaluate(a.theorem, &p)?);
                        }
                    }
                }
            }
        }
    }
    Ok(rows)
}

fn cmd_bound(a: &BoundArgs, out: &mut dyn Write) -> Result<i32> {
    let rows = bound_grid(a)?;
    match a.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &rows)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for e in rows {
                w.serialize(BoundRow {
                    theorem: e.theorem,
                    epsilon: e.params.epsilon,
                    delta: e.params.delta,
                    n: e.params.n,
                    d: e.params.d,
                    m: e.params.m,
                    horizon_t: e.params.horizon_t,
                    raw: e.raw,
                    clamped: e.clamped,
                    vacuous: e.vacuous,
                })?;
            }
            w.flush()?;
        }
    }
    Ok(EXIT_OK)
}

/// Statistic selected on the command line.
#[derive(Debug, Clone, Copy)]
pub enum Statistic {
    Global(DenominatorKind, f64),
    Local(DenominatorKind, f64),
    Block { m: u32, epsilon: f64 },
}

pub fn parse_statistic(kind: &str, delta: Option<f64>, epsilon: Option<f64>, m: Option<u32>) -> Result<Statistic> {
    let need_delta = || delta.ok_or_else(|| CliError::Usage(format!("--delta is required for kind {kind}")));
    let need_eps = || epsilon.ok_or_else(|| CliError::Usage(format!("--eps is required for kind {kind}")));
    Ok(match kind.replace('_', "-").as_str() {
        "gap-global" => Statistic::Global(DenominatorKind::GapGlobal, need_delta()?),
        "fixed-global" => Statistic::Global(DenominatorKind::FixedGlobal, need_delta()?),
        "gap-global-corrected" | "uniform" => Statistic::Global(DenominatorKind::GapGlobalCorrected, need_delta()?),
        "local-plain" => Statistic::Local(DenominatorKind::LocalPlain, need_delta()?),
        "local-corrected" => Statistic::Local(DenominatorKind::LocalCorrected { epsilon: need_eps()? }, need_delta()?),
        "block" => Statistic::Block {
            m: m.ok_or_else(|| CliError::Usage("--m is required for kind block".into()))?,
            epsilon: need_eps()?,
        },
        other => return Err(CliError::Usage(format!("unknown kind `{other}`"))),
    })
}

pub fn exact_statistic(path: &TruncatedPath, stat: Statistic) -> Result<BandSupremum> {
    Ok(match stat {
        Statistic::Global(kind, delta) => exact_supremum::global_band_sup(path, delta, kind)?,
        Statistic::Local(kind, delta) => exact_supremum::local_sup(path, delta, kind)?,
        Statistic::Block { m, epsilon } => exact_supremum::block_sup(path, m, epsilon)?,
    })
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct OracleComparison {
    pub resolution: f64,
    pub exact: f64,
    pub oracle: f64,
    /// `exact - oracle`.
    pub gap: f64,
    pub slack: f64,
    pub dominated: bool,
    pub within_slack: bool,
}

pub fn oracle_comparison(path: &TruncatedPath, stat: Statistic, resolution: f64) -> Result<OracleComparison> {
    let exact = exact_statistic(path, stat)?.value;
    let max_delta = match stat {
        Statistic::Global(_, d) | Statistic::Local(_, d) => d,
        Statistic::Block { m, .. } => (-(m as f64)).exp2(),
    };
    let oracle = GridOracle::new(path, resolution, max_delta)?;
    let o = match stat {
        Statistic::Global(kind, d) => oracle.global(d, kind)?,
        Statistic::Local(kind, d) => oracle.local(d, kind)?,
        Statistic::Block { m, .. } => oracle.block(m),
    };
    let gap = exact - o.value;
    Ok(OracleComparison {
        resolution,
        exact,
        oracle: o.value,
        gap,
        slack: o.slack,
        dominated: o.value <= exact + 1e-12,
        within_slack: gap <= o.slack + 1e-12,
    })
}

#[derive(Serialize)]
struct SupOutput {
    #[serde(flatten)]
    supremum: BandSupremum,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracle: Option<OracleComparison>,
}

fn sample_or_zero(level: u32, seed: u64, zero: bool) -> Result<TruncatedPath> {
    if level > levy_ciesielski::MAX_LEVEL {
        return Err(CliError::Usage(format!("--level {level} exceeds {}", levy_ciesielski::MAX_LEVEL)));
    }
    Ok(if zero {
        TruncatedPath::zero(level)
    } else {
        TruncatedPath::sample(level, seed)
    })
}

fn cmd_sup(a: &SupArgs, out: &mut dyn Write) -> Result<i32> {
    let stat = parse_statistic(&a.kind, a.delta, a.epsilon, a.m)?;
    let path = sample_or_zero(a.level, a.seed, a.zero)?;
    let supremum = exact_statistic(&path, stat)?;
    let oracle = a.oracle.map(|r| oracle_comparison(&path, stat, r)).transpose()?;
    serde_json::to_writer_pretty(&mut *out, &SupOutput { supremum, oracle })?;
    writeln!(out)?;
    Ok(EXIT_OK)
}

fn cmd_oracle_compare(a: &OracleArgs, out: &mut dyn Write) -> Result<i32> {
    let stat = parse_statistic(&a.kind, a.delta, a.epsilon, a.m)?;
    let path = sample_or_zero(a.level, a.seed, false)?;
    let res = a.resolutions.clone().unwrap_or_else(|| {
        let n = a.level as f64;
        vec![(-(n + 4.0)).exp2(), (-(n + 6.0)).exp2()]
    });
    let mut w = csv::Writer::from_writer(out);
    for r in res {
        w.serialize(oracle_comparison(&path, stat, r)?)?;
    }
    w.flush()?;
    Ok(EXIT_OK)
}

fn cmd_audit(a: &AuditArgs, out: &mut dyn Write) -> Result<i32> {
    let mut rows = Vec::new();
    for &k in &a.k {
        for &e in &a.epsilon {
            rows.push(bounds::series_audit(k, e)?);
        }
    }
    match a.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut *out, &rows)?;
            writeln!(out)?;
        }
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            for r in rows {
                w.serialize(r)?;
            }
            w.flush()?;
        }
    }
    Ok(EXIT_OK)
}

/// Configs named by `verify`: the file's object or array, or one built from flags.
pub fn verify_configs(a: &VerifyArgs) -> Result<(Vec<ExperimentConfig>, bool)> {
    if let Some(p) = &a.config {
        let text = std::fs::read_to_string(p).map_err(|source| CliError::Io {
            path: p.clone(),
            source,
        })?;
        let v: serde_json::Value = serde_json::from_str(&text)?;
        return Ok(match v {
            serde_json::Value::Array(_) => (serde_json::from_value(v)?, true),
            _ => (vec![serde_json::from_value(v)?], false),
        });
    }
    let theorem = a.theorem.ok_or_else(|| CliError::Usage("--theorem or --config is required".into()))?;
    let c = ExperimentConfig {
        epsilon: a.epsilon,
        delta: a.delta,
        level_n: a.level_n,
        approx_level_n: a.approx_level_n,
        m: a.m,
        d: a.d,
        horizon_j: a.horizon_j,
        ci_level: a.ci_level,
        zero_path: a.zero_path,
        bound_scale: a.bound_scale,
        ..ExperimentConfig::new(theorem, a.trials, a.seed)
    };
    Ok((vec![c], false))
}

#[derive(Serialize)]
struct ReportFile<'a> {
    manifest: &'a RunManifest,
    report: &'a ExperimentReport,
}

#[derive(Serialize)]
struct SummaryRow<'a> {
    theorem: Theorem,
    epsilon: Option<f64>,
    delta: Option<f64>,
    level_used: u32,
    trials: u64,
    seed: u64,
    exceedances: u64,
    rate: f64,
    ci_low: f64,
    ci_high: f64,
    bracket_high_exceedances: Option<u64>,
    error_budget: Option<f64>,
    bound_raw: f64,
    bound_clamped: f64,
    vacuous: bool,
    verdict: &'a str,
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn cmd_verify(a: &VerifyArgs, cli: &Cli, argv: &[String], out: &mut dyn Write) -> Result<i32> {
    let (configs, sweep) = verify_configs(a)?;
    if configs.is_empty() {
        return Err(CliError::Usage("config array is empty".into()));
    }
    for c in &configs {
        c.validate_common()?;
    }
    let started = chrono::Utc::now();
    let reports = configs
        .iter()
        .map(|c| montecarlo::run_with_workers(c, cli.workers))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let manifest = RunManifest::new(&configs, started, argv);
    let dir = cli.out_dir.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR));
    std::fs::create_dir_all(&dir).map_err(|source| CliError::Io {
        path: dir.clone(),
        source,
    })?;
    let stem = format!("verify-{}", &manifest.config_hash[..12]);
    if sweep {
        let mut lines = Vec::new();
        for r in &reports {
            serde_json::to_writer(&mut lines, r)?;
            lines.push(b'\n');
        }
        write_file(&dir.join(format!("{stem}.jsonl")), &lines)?;
        write_file(
            &dir.join(format!("{stem}.manifest.json")),
            &serde_json::to_vec_pretty(&manifest)?,
        )?;
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &reports {
            w.serialize(SummaryRow {
                theorem: r.config.theorem,
                epsilon: r.config.epsilon,
                delta: r.config.delta,
                level_used: r.level_used,
                trials: r.config.trials,
                seed: r.config.seed,
                exceedances: r.exceedances,
                rate: r.rate,
                ci_low: r.ci_low,
                ci_high: r.ci_high,
                bracket_high_exceedances: r.bracket_high_exceedances,
                error_budget: r.bracket.as_ref().map(|b| b.error_budget),
                bound_raw: r.bound.raw,
                bound_clamped: r.bound.clamped,
                vacuous: r.bound.vacuous,
                verdict: r.verdict.name(),
            })?;
        }
        let csv_bytes = w.into_inner().map_err(|e| CliError::Stdout(e.into_error()))?;
        write_file(&dir.join(format!("{stem}.csv")), &csv_bytes)?;
    } else {
        let file = ReportFile {
            manifest: &manifest,
            report: &reports[0],
        };
        write_file(&dir.join(format!("{stem}.json")), &serde_json::to_vec_pretty(&file)?)?;
    }
    for r in &reports {
        writeln!(
            out,
            "{} seed={} trials={} exceedances={} rate={:.6} ci=[{:.6}, {:.6}] bound={:.6} verdict={}",
            r.config.theorem,
            r.config.seed,
            r.config.trials,
            r.exceedances,
            r.rate,
            r.ci_low,
            r.ci_high,
            r.bound.clamped,
            r.verdict.name()
        )?;
    }
    writeln!(out, "wrote {}", dir.join(&stem).display())?;
    Ok(if reports.iter().any(|r| r.verdict == Verdict::Violated) {
        EXIT_VIOLATED
    } else {
        EXIT_OK
    })
}

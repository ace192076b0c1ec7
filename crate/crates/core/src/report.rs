//! Command-line front end: argument parsing, route orchestration and
//! table / CSV / JSON output.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::borel::{self, mutual_information_from_j};
use crate::dims::{casimir_counts, leading_order, Dimensions};
use crate::error::{Error, Result};
use crate::haar::{run_oracle, Estimate, RNG_NAME};
use crate::page::{mutual_information_exact, mutual_information_rational, Regime};
use crate::series::{expand, SeriesExpansion, MAX_K};
use crate::special::rational_to_f64;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_VERIFY_FAILED: i32 = 4;
pub const EXIT_IO: i32 = 5;

pub const CSV_COLUMNS: [&str; 16] = [
    "dA",
    "dB",
    "dE",
    "N",
    "regime",
    "I_exact",
    "I_diag",
    "Delta_ev",
    "I_leading",
    "I_series_opt",
    "series_err",
    "I_integral",
    "J",
    "bound_deficit",
    "oracle_mean",
    "oracle_stderr",
];

/// Exit code for a library error.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io(_) => EXIT_IO,
        Error::NonConvergence { .. }
        | Error::SeriesOverflow { .. }
        | Error::NegativeEigenvalue(_)
        | Error::InvalidDensityMatrix(_) => EXIT_NUMERICAL,
        Error::OracleAborted { source, .. } => exit_code(source),
        _ => EXIT_USAGE,
    }
}

/// Inclusive integer range written `a` or `a..b`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DimRange {
    pub lo: u64,
    pub hi: u64,
}

impl DimRange {
    pub fn values(&self) -> impl Iterator<Item = u64> {
        self.lo..=self.hi
    }
}

impl FromStr for DimRange {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let parse = |t: &str| {
            t.trim()
                .parse::<u64>()
                .map_err(|_| format!("'{t}' is not a non-negative integer"))
        };
        let (lo, hi) = match s.split_once("..") {
            Some((a, b)) => (parse(a)?, parse(b.strip_prefix('=').unwrap_or(b))?),
            None => {
                let v = parse(s)?;
                (v, v)
            }
        };
        if lo == 0 {
            return Err("dimensions start at 1".into());
        }
        if lo > hi {
            return Err(format!("empty range {lo}..{hi}"));
        }
        Ok(Self { lo, hi })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CommandKind {
    Exact,
    Series,
    Integral,
    Oracle,
    Verify,
    Sweep,
}

#[derive(Debug, Parser)]
#[command(name = "haar-mi", version, about = "Haar-average mutual information <I(A:B)> of random pure states")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed form from digamma functions
    Exact(CommonArgs),
    /// Optimally truncated Bernoulli series
    Series(CommonArgs),
    /// Bose-Einstein kernel integral
    Integral(CommonArgs),
    /// Monte Carlo estimate from Haar-random states
    Oracle(CommonArgs),
    /// Cross-check every route; exits 4 on disagreement
    Verify(CommonArgs),
    /// All analytic routes over a grid of dimensions
    Sweep(CommonArgs),
}

#[derive(Debug, clap::Args)]
struct CommonArgs {
    /// d_A, as `n` or an inclusive range `a..b`
    #[arg(long)]
    da: DimRange,
    /// d_B, as `n` or an inclusive range `a..b`
    #[arg(long)]
    db: DimRange,
    /// d_E, as `n` or an inclusive range `a..b`
    #[arg(long, required_unless_present = "de_mult", conflicts_with = "de_mult")]
    de: Option<DimRange>,
    /// d_E as a multiple of d_A*d_B
    #[arg(long)]
    de_mult: Option<DimRange>,
    /// Absolute tolerance on J
    #[arg(long, default_value_t = borel::DEFAULT_TOL)]
    tol: f64,
    /// Highest series order
    #[arg(long, default_value_t = crate::series::DEFAULT_K_MAX)]
    kmax: usize,
    /// Monte Carlo sample count
    #[arg(long, default_value_t = 20_000)]
    samples: u64,
    #[arg(long, env = "HAAR_MI_SEED", default_value_t = 42)]
    seed: u64,
    /// Monte Carlo worker threads [default: available parallelism]
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add Monte Carlo columns to verify and sweep
    #[arg(long)]
    oracle: bool,
    #[arg(long, hide = true, default_value_t = 0.0, allow_hyphen_values = true)]
    inject_j_fault: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: CommandKind,
    pub dims: Vec<Dimensions>,
    pub tol: f64,
    pub k_max: usize,
    pub n_samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub oracle: bool,
    /// Added to every computed `J`; used to prove that `verify` can fail.
    pub j_fault: f64,
}

impl RunConfig {
    fn runs_oracle(&self) -> bool {
        self.command == CommandKind::Oracle || self.oracle
    }
}

#[derive(Debug)]
pub enum CliError {
    /// Help, version or a malformed command line, rendered by clap.
    Clap(clap::Error),
    Usage(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Clap(e) => e.exit_code(),
            CliError::Usage(_) => EXIT_USAGE,
        }
    }
}

/// Parses and validates a full argument vector, program name included.
pub fn parse_args<I, T>(argv: I) -> std::result::Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(CliError::Clap)?;
    let (command, args) = match cli.command {
        Command::Exact(a) => (CommandKind::Exact, a),
        Command::Series(a) => (CommandKind::Series, a),
        Command::Integral(a) => (CommandKind::Integral, a),
        Command::Oracle(a) => (CommandKind::Oracle, a),
        Command::Verify(a) => (CommandKind::Verify, a),
        Command::Sweep(a) => (CommandKind::Sweep, a),
    };
    let usage = |m: String| CliError::Usage(m);
    if !(args.tol > 0.0 && args.tol.is_finite()) {
        return Err(usage(format!("--tol must be positive, got {}", args.tol)));
    }
    if args.kmax == 0 || args.kmax > MAX_K {
        return Err(usage(format!("--kmax must be in 1..={MAX_K}, got {}", args.kmax)));
    }
    let oracle = command == CommandKind::Oracle || args.oracle;
    if oracle && args.samples < 2 {
        return Err(usage(format!("--samples must be at least 2, got {}", args.samples)));
    }
    let workers = match args.workers {
        Some(0) => return Err(usage("--workers must be positive".into())),
        Some(w) => w,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    if !args.inject_j_fault.is_finite() {
        return Err(usage("fault offset must be finite".into()));
    }

    let mut dims = Vec::new();
    for a in args.da.values() {
        for b in args.db.values() {
            let environments: Vec<u64> = match (args.de, args.de_mult) {
                (Some(r), _) => r.values().collect(),
                (None, Some(m)) => m
                    .values()
                    .map(|k| k.checked_mul(a * b).ok_or_else(|| usage(format!("d_E = {k}*{a}*{b} overflows"))))
                    .collect::<std::result::Result<_, _>>()?,
                (None, None) => unreachable!("clap requires --de or --de-mult"),
            };
            for e in environments {
                dims.push(Dimensions::new(a, b, e).map_err(|err| usage(err.to_string()))?);
            }
        }
    }

    Ok(RunConfig {
        command,
        dims,
        tol: args.tol,
        k_max: args.kmax,
        n_samples: args.samples,
        seed: args.seed,
        workers,
        format: args.format,
        out: args.out,
        oracle: args.oracle,
        j_fault: args.inject_j_fault,
    })
}

/// One line of output. Field names match [`CSV_COLUMNS`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    #[serde(rename = "dA")]
    pub d_a: u64,
    #[serde(rename = "dB")]
    pub d_b: u64,
    #[serde(rename = "dE")]
    pub d_e: u64,
    #[serde(rename = "N")]
    pub n: u64,
    pub regime: Regime,
    #[serde(rename = "I_exact")]
    pub i_exact: f64,
    #[serde(rename = "I_diag")]
    pub i_diag: f64,
    #[serde(rename = "Delta_ev")]
    pub delta_ev: f64,
    #[serde(rename = "I_leading")]
    pub i_leading: f64,
    #[serde(rename = "I_series_opt")]
    pub i_series_opt: Option<f64>,
    pub series_err: Option<f64>,
    #[serde(rename = "I_integral")]
    pub i_integral: Option<f64>,
    #[serde(rename = "J")]
    pub j: Option<f64>,
    pub bound_deficit: Option<f64>,
    pub oracle_mean: Option<f64>,
    pub oracle_stderr: Option<f64>,
}

impl Row {
    fn new(dims: &Dimensions) -> Self {
        let mi = mutual_information_exact(dims);
        Self {
            d_a: dims.d_a(),
            d_b: dims.d_b(),
            d_e: dims.d_e(),
            n: dims.total(),
            regime: mi.regime,
            i_exact: mi.total,
            i_diag: mi.i_diag,
            delta_ev: mi.delta_ev,
            i_leading: leading_order(dims),
            i_series_opt: None,
            series_err: None,
            i_integral: None,
            j: None,
            bound_deficit: None,
            oracle_mean: None,
            oracle_stderr: None,
        }
    }

    fn add_series(&mut self, s: &SeriesExpansion) {
        self.i_series_opt = Some(s.optimal_value());
        self.series_err = Some(s.error_estimate);
    }

    fn add_integral(&mut self, dims: &Dimensions, cfg: &RunConfig) -> Result<()> {
        let j = borel::compute_j(dims, cfg.tol)?.value + cfg.j_fault;
        let (su, _) = casimir_counts(dims);
        self.j = Some(j);
        self.i_integral = Some(if su == 0 { 0.0 } else { mutual_information_from_j(dims, j) });
        self.bound_deficit = Some(2.0 * su as f64 * j);
        Ok(())
    }

    fn add_oracle(&mut self, est: &Estimate) {
        self.oracle_mean = Some(est.mean);
        self.oracle_stderr = Some(est.stderr);
    }

    fn csv_fields(&self) -> [String; 16] {
        let num = |x: Option<f64>| x.map(fmt_exact).unwrap_or_default();
        [
            self.d_a.to_string(),
            self.d_b.to_string(),
            self.d_e.to_string(),
            self.n.to_string(),
            self.regime.as_str().to_string(),
            fmt_exact(self.i_exact),
            fmt_exact(self.i_diag),
            fmt_exact(self.delta_ev),
            fmt_exact(self.i_leading),
            num(self.i_series_opt),
            num(self.series_err),
            num(self.i_integral),
            num(self.j),
            num(self.bound_deficit),
            num(self.oracle_mean),
            num(self.oracle_stderr),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub dims: Dimensions,
    pub regime: Regime,
    pub exact_float: f64,
    pub exact_rational_as_float: f64,
    pub series_optimal: Option<f64>,
    pub series_error: Option<f64>,
    pub integral: Option<f64>,
    pub diff_exact_rational: f64,
    pub diff_exact_series: Option<f64>,
    pub diff_exact_integral: Option<f64>,
    pub bound_deficit: Option<f64>,
    pub oracle: Option<Estimate>,
    pub checks: Vec<Check>,
    pub passed: bool,
}

fn verify_row(dims: &Dimensions, row: &Row, cfg: &RunConfig) -> VerifyReport {
    let exact_rational = rational_to_f64(&mutual_information_rational(dims));
    let mut checks = Vec::new();

    let diff_rational = (row.i_exact - exact_rational).abs();
    let allowed = 1e-12 * exact_rational.abs().max(1.0);
    checks.push(Check {
        name: "digamma vs rational",
        passed: diff_rational <= allowed,
        detail: format!("|diff| = {diff_rational:.3e} <= {allowed:.1e}"),
    });

    let diff_series = row.i_series_opt.map(|s| (s - exact_rational).abs());
    if let (Some(d), Some(err)) = (diff_series, row.series_err) {
        checks.push(Check {
            name: "series within 2x estimate",
            passed: d <= 2.0 * err,
            detail: format!("|diff| = {d:.3e} <= {:.3e}", 2.0 * err),
        });
    }

    let diff_integral = row.i_integral.map(|v| (v - row.i_exact).abs());
    if let Some(d) = diff_integral {
        let allowed = (10.0 * cfg.tol).max(1e-12);
        checks.push(Check {
            name: "integral vs exact",
            passed: d <= allowed,
            detail: format!("|diff| = {d:.3e} <= {allowed:.1e}"),
        });
    }

    if let Some(deficit) = row.bound_deficit {
        if !dims.has_trivial_subsystem() {
            checks.push(Check {
                name: "strict bound",
                passed: deficit > 0.0,
                detail: format!("deficit = {deficit:.6e} > 0"),
            });
        }
    }

    let oracle = row.oracle_mean.zip(row.oracle_stderr).map(|(mean, stderr)| Estimate { mean, stderr });
    if let Some(est) = oracle {
        checks.push(Check {
            name: "oracle within 3 SE",
            passed: est.within(row.i_exact, 3.0),
            detail: format!("{:.6} ± {:.6} vs {:.6}", est.mean, est.stderr, row.i_exact),
        });
    }

    let passed = checks.iter().all(|c| c.passed);
    VerifyReport {
        dims: *dims,
        regime: row.regime,
        exact_float: row.i_exact,
        exact_rational_as_float: exact_rational,
        series_optimal: row.i_series_opt,
        series_error: row.series_err,
        integral: row.i_integral,
        diff_exact_rational: diff_rational,
        diff_exact_series: diff_series,
        diff_exact_integral: diff_integral,
        bound_deficit: row.bound_deficit,
        oracle,
        checks,
        passed,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub version: &'static str,
    pub command: CommandKind,
    pub seed: u64,
    pub tol: f64,
    pub k_max: usize,
    pub n_samples: Option<u64>,
    pub rng: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub metadata: Metadata,
    pub rows: Vec<Row>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub series: Vec<SeriesExpansion>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub verify: Vec<VerifyReport>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verify.iter().all(|v| v.passed)
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            EXIT_OK
        } else {
            EXIT_VERIFY_FAILED
        }
    }
}

fn require_factorised(dims: &Dimensions) -> Result<()> {
    if dims.is_factorised() {
        Ok(())
    } else {
        Err(Error::Regime {
            d_a: dims.d_a(),
            d_b: dims.d_b(),
            d_e: dims.d_e(),
        })
    }
}

/// Evaluates the routes requested by `cfg` over its dimension grid.
pub fn run(cfg: &RunConfig) -> Result<Report> {
    use CommandKind::*;
    let mut report = Report {
        metadata: Metadata {
            version: env!("CARGO_PKG_VERSION"),
            command: cfg.command,
            seed: cfg.seed,
            tol: cfg.tol,
            k_max: cfg.k_max,
            n_samples: cfg.runs_oracle().then_some(cfg.n_samples),
            rng: RNG_NAME,
        },
        rows: Vec::new(),
        series: Vec::new(),
        verify: Vec::new(),
    };
    for dims in &cfg.dims {
        let mut row = Row::new(dims);
        let factorised = dims.is_factorised();
        if matches!(cfg.command, Series | Integral) {
            require_factorised(dims)?;
        }
        if factorised && matches!(cfg.command, Series | Verify | Sweep) {
            let s = expand(dims, cfg.k_max)?;
            row.add_series(&s);
            if cfg.command == Series {
                report.series.push(s);
            }
        }
        if factorised && matches!(cfg.command, Integral | Verify | Sweep) {
            row.add_integral(dims, cfg)?;
        }
        if cfg.runs_oracle() {
            let stats = run_oracle(dims, cfg.n_samples, cfg.seed, cfg.workers)?;
            row.add_oracle(&stats.mutual_information);
        }
        if cfg.command == Verify {
            report.verify.push(verify_row(dims, &row, cfg));
        }
        report.rows.push(row);
    }
    Ok(report)
}

/// 17 significant digits: round-trip exact for binary64.
pub fn fmt_exact(x: f64) -> String {
    format!("{x:.16e}")
}

/// `sig` significant digits, positional for moderate magnitudes.
pub fn fmt_sig(x: f64, sig: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return x.to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    if (-4..sig as i32).contains(&exponent) {
        let decimals = (sig as i32 - 1 - exponent).max(0) as usize;
        format!("{x:.decimals$}")
    } else {
        format!("{x:.*e}", sig - 1)
    }
}

pub fn to_csv(report: &Report) -> String {
    let mut out = CSV_COLUMNS.join(",");
    out.push('\n');
    for row in &report.rows {
        out.push_str(&row.csv_fields().join(","));
        out.push('\n');
    }
    out
}

pub fn to_json(report: &Report) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialises");
    s.push('\n');
    s
}

pub fn to_table(report: &Report) -> String {
    let header: Vec<&str> = CSV_COLUMNS.iter().copied().filter(|c| *c != "N").collect();
    let cells: Vec<Vec<String>> = report
        .rows
        .iter()
        .map(|r| {
            let num = |x: Option<f64>| x.map_or("-".to_string(), |v| fmt_sig(v, 10));
            vec![
                r.d_a.to_string(),
                r.d_b.to_string(),
                r.d_e.to_string(),
                r.regime.as_str().to_string(),
                fmt_sig(r.i_exact, 10),
                fmt_sig(r.i_diag, 10),
                fmt_sig(r.delta_ev, 10),
                fmt_sig(r.i_leading, 10),
                num(r.i_series_opt),
                num(r.series_err),
                num(r.i_integral),
                num(r.j),
                num(r.bound_deficit),
                num(r.oracle_mean),
                num(r.oracle_stderr),
            ]
        })
        .collect();
    // drop columns that are empty in every row
    let keep: Vec<usize> = (0..header.len())
        .filter(|&i| i < 8 || cells.iter().any(|row| row[i] != "-"))
        .collect();
    let widths: Vec<usize> = keep
        .iter()
        .map(|&i| cells.iter().map(|r| r[i].len()).chain([header[i].len()]).max().unwrap())
        .collect();
    let mut out = String::new();
    let line = |out: &mut String, fields: Vec<&str>| {
        let padded: Vec<String> = fields.iter().zip(&widths).map(|(f, w)| format!("{f:>w$}")).collect();
        out.push_str(padded.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut out, keep.iter().map(|&i| header[i]).collect());
    for row in &cells {
        line(&mut out, keep.iter().map(|&i| row[i].as_str()).collect());
    }

    for s in &report.series {
        let _ = writeln!(
            out,
            "\nseries {}: optimal k = {}, value {}, error {}, terms grow from k = {}",
            s.dims,
            s.optimal_k,
            fmt_sig(s.optimal_value(), 10),
            fmt_sig(s.error_estimate, 3),
            s.divergence_k.map_or("-".to_string(), |k| k.to_string()),
        );
        let _ = writeln!(out, "{:>4}  {:>17}  {:>17}", "k", "t_k", "partial sum");
        for k in 1..=s.k_max() {
            let _ = writeln!(
                out,
                "{k:>4}  {:>17}  {:>17}",
                fmt_sig(s.term(k), 10),
                fmt_sig(s.partial_sums[k], 10)
            );
        }
    }

    for v in &report.verify {
        let _ = writeln!(out, "\nverify {}: {}", v.dims, if v.passed { "PASS" } else { "FAIL" });
        for c in &v.checks {
            let _ = writeln!(out, "  [{}] {}: {}", if c.passed { "ok" } else { "FAIL" }, c.name, c.detail);
        }
    }
    out
}

pub fn emit(report: &Report, format: Format) -> String {
    match format {
        Format::Table => to_table(report),
        Format::Csv => to_csv(report),
        Format::Json => to_json(report),
    }
}

/// Runs the tool end to end and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cfg = match parse_args(argv) {
        Ok(cfg) => cfg,
        Err(CliError::Clap(e)) => {
            let _ = e.print();
            return e.exit_code();
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return EXIT_USAGE;
        }
    };
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return exit_code(&e);
        }
    };
    let text = emit(&report, cfg.format);
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, text),
        None => {
            use std::io::Write;
            std::io::stdout().lock().write_all(text.as_bytes())
        }
    };
    if let Err(e) = written {
        eprintln!("error: {}", Error::Io(e));
        return EXIT_IO;
    }
    if !report.passed() {
        eprintln!("verification failed");
    }
    report.exit_code()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(args: &str) -> RunConfig {
        parse_args(std::iter::once("haar-mi").chain(args.split_whitespace())).unwrap()
    }

    fn usage_code(args: &str) -> i32 {
        parse_args(std::iter::once("haar-mi").chain(args.split_whitespace()))
            .unwrap_err()
            .exit_code()
    }

    #[test]
    fn range_parsing() {
        assert_eq!("3".parse::<DimRange>().unwrap(), DimRange { lo: 3, hi: 3 });
        assert_eq!("2..4".parse::<DimRange>().unwrap(), DimRange { lo: 2, hi: 4 });
        assert_eq!("2..=4".parse::<DimRange>().unwrap(), DimRange { lo: 2, hi: 4 });
        assert!("0".parse::<DimRange>().is_err());
        assert!("4..2".parse::<DimRange>().is_err());
        assert!("a..2".parse::<DimRange>().is_err());
        assert!("".parse::<DimRange>().is_err());
    }

    #[test]
    fn single_evaluation_config() {
        let c = cfg("exact --da 2 --db 3 --de 7");
        assert_eq!(c.command, CommandKind::Exact);
        assert_eq!(c.dims, vec![Dimensions::new(2, 3, 7).unwrap()]);
        assert_eq!(c.tol, 1e-14);
        assert_eq!(c.k_max, 40);
        assert_eq!(c.n_samples, 20_000);
        assert_eq!(c.format, Format::Table);
        assert_eq!(c.j_fault, 0.0);
        assert!(c.workers >= 1);
    }

    #[test]
    fn sweep_config_uses_multipliers() {
        let c = cfg("sweep --da 2..4 --db 2..4 --de-mult 1..4 --format csv");
        assert_eq!(c.dims.len(), 36);
        assert!(c.dims.iter().all(|d| d.is_factorised()));
        assert_eq!(c.dims[0], Dimensions::new(2, 2, 4).unwrap());
        assert_eq!(c.dims[3], Dimensions::new(2, 2, 16).unwrap());
        assert_eq!(c.format, Format::Csv);
    }

    #[test]
    fn usage_errors() {
        assert_eq!(usage_code("exact --da 0 --db 3 --de 7"), EXIT_USAGE);
        assert_eq!(usage_code("exact --da 2 --db 3"), EXIT_USAGE);
        assert_eq!(usage_code("exact --da 2 --db 3 --de 7 --de-mult 2"), EXIT_USAGE);
        assert_eq!(usage_code("exact --da 2 --db 3 --de 7 --bogus"), EXIT_USAGE);
        assert_eq!(usage_code("exact --da 2 --db 3 --de 7 --tol 0"), EXIT_USAGE);
        assert_eq!(usage_code("series --da 2 --db 3 --de 7 --kmax 0"), EXIT_USAGE);
        assert_eq!(usage_code("oracle --da 2 --db 3 --de 7 --samples 1"), EXIT_USAGE);
        assert_eq!(usage_code("oracle --da 2 --db 3 --de 7 --workers 0"), EXIT_USAGE);
        assert_eq!(usage_code("frobnicate"), EXIT_USAGE);
    }

    #[test]
    fn swapped_rows_leave_factorised_columns_empty() {
        let r = run(&cfg("sweep --da 3 --db 4 --de 2")).unwrap();
        let row = &r.rows[0];
        assert_eq!(row.regime, Regime::Swapped);
        assert!((row.i_exact - 1.378).abs() < 1e-3);
        assert!(row.i_series_opt.is_none() && row.i_integral.is_none());
        assert!(row.j.is_none() && row.bound_deficit.is_none());
        let csv = to_csv(&r);
        let fields: Vec<&str> = csv.lines().nth(1).unwrap().split(',').collect();
        assert_eq!(fields.len(), 16);
        assert_eq!(fields[4], "Swapped");
        for i in 9..=15 {
            assert_eq!(fields[i], "", "column {}", CSV_COLUMNS[i]);
        }
        assert!(matches!(run(&cfg("integral --da 3 --db 4 --de 2")), Err(Error::Regime { .. })));
    }

    #[test]
    fn trivial_series_is_zero() {
        let r = run(&cfg("series --da 1 --db 5 --de 9")).unwrap();
        assert!(r.series[0].terms.iter().all(|&t| t == 0.0));
        assert_eq!(r.rows[0].i_series_opt, Some(0.0));
    }

    #[test]
    fn verify_passes_and_fault_fails() {
        let r = run(&cfg("verify --da 2 --db 3 --de 7")).unwrap();
        assert!(r.passed(), "{:?}", r.verify);
        assert_eq!(r.exit_code(), EXIT_OK);
        let v = &r.verify[0];
        assert!((v.integral.unwrap() - 0.284_583_68).abs() < 1e-8);
        let r = run(&cfg("verify --da 2 --db 3 --de 7 --inject-j-fault 1e-6")).unwrap();
        assert!(!r.passed());
        assert_eq!(r.exit_code(), EXIT_VERIFY_FAILED);
    }

    #[test]
    fn csv_uses_seventeen_digits() {
        let r = run(&cfg("sweep --da 2 --db 3 --de 7")).unwrap();
        let csv = to_csv(&r);
        let mut lines = csv.lines();
        assert_eq!(lines.next().unwrap(), CSV_COLUMNS.join(","));
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(&fields[..5], &["2", "3", "7", "42", "Factorised"]);
        assert_eq!(fields[5], "2.8458368008518736e-1");
        assert_eq!(fields[5].parse::<f64>().unwrap(), r.rows[0].i_exact);
        assert!(fields[14].is_empty() && fields[15].is_empty());
    }

    #[test]
    fn significant_digit_formatting() {
        assert_eq!(fmt_sig(0.2845836800851875, 10), "0.2845836801");
        assert_eq!(fmt_sig(1.5, 3), "1.50");
        assert_eq!(fmt_sig(2.355_428_393_954_635e-5, 4), "2.355e-5");
        assert_eq!(fmt_sig(0.0, 10), "0");
        assert_eq!(fmt_sig(123.0, 10), "123.0000000");
    }

    #[test]
    fn error_exit_codes() {
        assert_eq!(exit_code(&Error::Regime { d_a: 3, d_b: 4, d_e: 2 }), EXIT_USAGE);
        assert_eq!(
            exit_code(&Error::NonConvergence {
                evaluations: 1,
                last_change: 1.0
            }),
            EXIT_NUMERICAL
        );
        assert_eq!(exit_code(&Error::Io(std::io::Error::other("x"))), EXIT_IO);
    }
}

//! Command-line front end: `eval`, `audit`, `schedule` and `depr`.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::thread;

use clap::{Parser, Subcommand, ValueEnum};
use ledgerlint_core::audit::{run_rules, Finding, RuleConfig, RuleId, Severity};
use ledgerlint_core::depreciation::{db_schedule, reconcile};
use ledgerlint_core::formula::{evaluate, load_workbook, parse, CellAddr, ParseError, Sheet};
use ledgerlint_core::loan::{build_schedule, verify_schedule, Discrepancy};
use ledgerlint_core::rates::parse_rate;
use ledgerlint_core::{
    DepreciationSpec, LoanSpec, PeriodicConvention, PrecisionMode, PublishedTable,
};
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_INVALID: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ledgerlint", version, about = "Spreadsheet finance checks and audits")]
pub struct Cli {
    /// Rounding behaviour for depreciation.
    #[arg(long, global = true, value_enum, default_value_t = Mode::Exact)]
    pub mode: Mode,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// How a quoted annual rate becomes a monthly rate.
    #[arg(long, global = true, value_enum, default_value_t = Convention::Uk)]
    pub convention: Convention,
    /// TOML rule configuration for `audit`.
    #[arg(long, global = true, env = "LEDGERLINT_RULES")]
    pub rules: Option<PathBuf>,
    /// Rules to switch off, by code or name.
    #[arg(long, global = true, value_delimiter = ',')]
    pub disable: Vec<RuleId>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    Compat,
    Exact,
}

impl From<Mode> for PrecisionMode {
    fn from(mode: Mode) -> Self {
        match mode {
            Mode::Compat => PrecisionMode::Compat,
            Mode::Exact => PrecisionMode::Exact,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Convention {
    Us,
    Uk,
}

impl From<Convention> for PeriodicConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Us => PeriodicConvention::UsNominalDivide,
            Convention::Uk => PeriodicConvention::UkEffectiveRoot,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate one formula.
    Eval {
        expr: String,
        /// Cell value, e.g. `A1=100`. Repeatable.
        #[arg(long = "bind", value_name = "CELL=VALUE")]
        bindings: Vec<String>,
    },
    /// Audit CSV workbooks for financial-function misuse.
    Audit {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Build a loan amortization schedule, or verify a published one.
    Schedule {
        #[arg(long)]
        principal: f64,
        /// Quoted annual rate: `0.119` or `11.9%`.
        #[arg(long, value_parser = rate_arg)]
        rate: f64,
        /// Term in months.
        #[arg(long)]
        term: u32,
        /// Leading months with no payment.
        #[arg(long, default_value_t = 0)]
        holiday: u32,
        /// Published table CSV to check against.
        #[arg(long)]
        published: Option<PathBuf>,
        #[arg(long, default_value_t = 0.005)]
        tolerance: f64,
    },
    /// Declining-balance depreciation schedule with reconciliation.
    Depr {
        #[arg(long)]
        cost: f64,
        #[arg(long)]
        salvage: f64,
        #[arg(long)]
        life: u32,
        /// Months in service during the first year.
        #[arg(long, default_value_t = 12)]
        month: u32,
    },
}

fn rate_arg(text: &str) -> Result<f64, String> {
    parse_rate(text).map_err(|e| e.to_string())
}

/// Parses `args` (program name first) and runs the command. Returns the exit
/// code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return e.exit_code();
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(e) if e.kind() == io::ErrorKind::BrokenPipe => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_INVALID
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> io::Result<i32> {
    match &cli.command {
        Command::Eval { expr, bindings } => cmd_eval(cli, expr, bindings, out, err),
        Command::Audit { files } => cmd_audit(cli, files, out, err),
        Command::Schedule {
            principal,
            rate,
            term,
            holiday,
            published,
            tolerance,
        } => {
            let spec = LoanSpec {
                principal: *principal,
                quoted_annual: *rate,
                convention: cli.convention.into(),
                term_months: *term,
                holiday_months: *holiday,
            };
            cmd_schedule(cli, &spec, published.as_deref(), *tolerance, out, err)
        }
        Command::Depr {
            cost,
            salvage,
            life,
            month,
        } => {
            let spec = DepreciationSpec {
                cost: *cost,
                salvage: *salvage,
                life: *life,
                month: *month,
            };
            cmd_depr(cli, &spec, out, err)
        }
    }
}

fn parse_error_report(expr: &str, e: &ParseError) -> String {
    let column = expr[..e.position.min(expr.len())].chars().count();
    format!(
        "parse error at position {}: {}\n  {expr}\n  {}^",
        e.position,
        e.message,
        " ".repeat(column)
    )
}

fn cmd_eval(
    cli: &Cli,
    expr: &str,
    bindings: &[String],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<i32> {
    let mut sheet = Sheet::new();
    for binding in bindings {
        let parsed = binding
            .split_once('=')
            .and_then(|(cell, value)| Some((cell.trim().parse::<CellAddr>().ok()?, value)));
        match parsed {
            Some((addr, value)) => sheet.set(addr, value),
            None => {
                writeln!(err, "error: --bind expects CELL=VALUE, got {binding:?}")?;
                return Ok(EXIT_INVALID);
            }
        }
    }
    let node = match parse(expr) {
        Ok(node) => node,
        Err(e) => {
            writeln!(err, "{}", parse_error_report(expr, &e))?;
            return Ok(EXIT_INVALID);
        }
    };
    let value = evaluate(&node, &sheet);
    match cli.format {
        Format::Text => writeln!(out, "{value}")?,
        Format::Structured => writeln!(out, "{}", json!({ "expr": expr, "value": value }))?,
    }
    Ok(if value.is_error() { EXIT_INVALID } else { EXIT_OK })
}

fn rule_config(cli: &Cli) -> ledgerlint_core::Result<RuleConfig> {
    let mut config = match &cli.rules {
        Some(path) => RuleConfig::load(path)?,
        None => RuleConfig::default(),
    };
    for &rule in &cli.disable {
        config = config.without(rule);
    }
    Ok(config)
}

fn cmd_audit(
    cli: &Cli,
    files: &[PathBuf],
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<i32> {
    let config = match rule_config(cli) {
        Ok(config) => config,
        Err(e) => {
            writeln!(err, "error: {e}")?;
            return Ok(EXIT_INVALID);
        }
    };
    let results: Vec<ledgerlint_core::Result<Vec<Finding>>> = thread::scope(|scope| {
        let handles: Vec<_> = files
            .iter()
            .map(|path| {
                let config = &config;
                scope.spawn(move || load_workbook(path).map(|sheet| run_rules(&sheet, config)))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("audit worker panicked"))
            .collect()
    });

    let mut code = EXIT_OK;
    for (path, result) in files.iter().zip(results) {
        let findings = match result {
            Ok(findings) => findings,
            Err(e) => {
                writeln!(err, "error: {e}")?;
                code = EXIT_INVALID;
                continue;
            }
        };
        for finding in &findings {
            if finding.severity >= Severity::Warning && code == EXIT_OK {
                code = EXIT_FINDINGS;
            }
            match cli.format {
                Format::Text => writeln!(out, "{}:{finding}", path.display())?,
                Format::Structured => {
                    let mut record = serde_json::to_value(finding).map_err(io::Error::other)?;
                    record["file"] = json!(path.display().to_string());
                    writeln!(out, "{record}")?;
                }
            }
        }
    }
    Ok(code)
}

/// The flag responsible for an invalid loan spec.
fn loan_flag(spec: &LoanSpec) -> &'static str {
    if !spec.principal.is_finite() || spec.principal <= 0.0 {
        "--principal"
    } else if !spec.quoted_annual.is_finite() || spec.quoted_annual <= -1.0 {
        "--rate"
    } else if spec.term_months == 0 {
        "--term"
    } else {
        "--holiday"
    }
}

fn cmd_schedule(
    cli: &Cli,
    spec: &LoanSpec,
    published: Option<&Path>,
    tolerance: f64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<i32> {
    let schedule = match build_schedule(spec) {
        Ok(s) => s,
        Err(e) => {
            writeln!(err, "error: {}: {e}", loan_flag(spec))?;
            return Ok(EXIT_INVALID);
        }
    };
    if tolerance.is_nan() || tolerance < 0.0 {
        writeln!(err, "error: --tolerance must be non-negative, got {tolerance}")?;
        return Ok(EXIT_INVALID);
    }
    let Some(path) = published else {
        match cli.format {
            Format::Text => schedule.write_csv(&mut *out).map_err(io::Error::other)?,
            Format::Structured => writeln!(out, "{}", json!(schedule))?,
        }
        return Ok(EXIT_OK);
    };

    let table = match File::open(path)
        .map_err(ledgerlint_core::Error::from)
        .and_then(PublishedTable::read_csv)
    {
        Ok(t) => t,
        Err(e) => {
            writeln!(err, "error: --published {}: {e}", path.display())?;
            return Ok(EXIT_INVALID);
        }
    };
    let found = verify_schedule(&schedule, &table, tolerance);
    for d in &found {
        match cli.format {
            Format::Structured => writeln!(out, "{}", json!(d))?,
            Format::Text => match d {
                Discrepancy::RowCount {
                    candidate,
                    published,
                } => writeln!(out, "row count: candidate {candidate}, published {published}")?,
                Discrepancy::Row { month, deltas } => {
                    for fd in deltas {
                        writeln!(
                            out,
                            "month {month}: {} candidate={} published={} delta={}",
                            json!(fd.field).as_str().unwrap_or_default(),
                            fd.candidate,
                            fd.published,
                            fd.delta
                        )?;
                    }
                }
            },
        }
    }
    if cli.format == Format::Text {
        writeln!(out, "{} discrepancies at tolerance {tolerance}", found.len())?;
    }
    Ok(if found.is_empty() { EXIT_OK } else { EXIT_FINDINGS })
}

fn depr_flag(spec: &DepreciationSpec) -> &'static str {
    if !spec.cost.is_finite() || spec.cost <= 0.0 {
        "--cost"
    } else if spec.life == 0 {
        "--life"
    } else if !(1..=12).contains(&spec.month) {
        "--month"
    } else {
        "--salvage"
    }
}

fn cmd_depr(
    cli: &Cli,
    spec: &DepreciationSpec,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> io::Result<i32> {
    let schedule = match spec.validate().and_then(|_| db_schedule(spec, cli.mode.into())) {
        Ok(s) => s,
        Err(e) => {
            writeln!(err, "error: {}: {e}", depr_flag(spec))?;
            return Ok(EXIT_INVALID);
        }
    };
    let rec = reconcile(&schedule, spec);
    match cli.format {
        Format::Text => {
            schedule.write_csv(&mut *out).map_err(io::Error::other)?;
            writeln!(
                out,
                "reconciliation: rate={} total={} residual={} salvage={} gap={} flagged={}",
                schedule.rate,
                rec.total_depreciation,
                rec.residual_book_value,
                spec.salvage,
                rec.gap,
                rec.flagged
            )?;
        }
        Format::Structured => {
            let record = json!({
                "mode": schedule.mode,
                "rate": schedule.rate,
                "saturated": schedule.saturated,
                "rows": schedule.rows,
                "reconciliation": rec,
            });
            writeln!(out, "{record}")?;
        }
    }
    Ok(EXIT_OK)
}

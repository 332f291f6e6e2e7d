//! The `selinf` command line: `check`, `jdc` and `demo-normal`.
//!
//! Exit status is 0 when the test passes, 2 when the method's verdict is
//! negative (violation, infeasibility, failed marginal selectivity) and 1
//! for usage or input errors.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::gauss::{binormal_order_distance, demo_chain_violation, BinormalSystem, Correlation};
use crate::jdc::{fine_inequalities, jdc_feasible, verify_order_chain_identity, JdcError, JdcOptions, JdcReport};
use crate::metrics::MetricConfig;
use crate::num::Arithmetic;
use crate::probspace::{load_system, LoadOptions, System};
use crate::report::{render_chain, render_jdc, render_suite, to_json};
use crate::selectivity::{
    default_order_metrics, run_suite, EnumerationOptions, NamedMetric, SuiteOptions, DEFAULT_EPS_TEST,
    DEFAULT_MAX_LEN, DEFAULT_MAX_SEQUENCES,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NEGATIVE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "selinf", version, about = "Tests for selective influence of inputs on random outputs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Marginal selectivity and chain inequalities over irreducible sequences.
    Check(CheckArgs),
    /// Decide whether a joint distribution of hidden outputs exists.
    Jdc(JdcArgs),
    /// The bivariate normal counterexample.
    DemoNormal(DemoArgs),
}

#[derive(Debug, Args)]
pub struct Common {
    /// Emit JSON instead of text.
    #[arg(long)]
    pub json: bool,
    #[arg(long, default_value = "auto", value_parser = parse_arithmetic)]
    pub arithmetic: Arithmetic,
    /// Tolerance on |sum - 1| for float tables.
    #[arg(long, default_value_t = crate::probspace::DEFAULT_EPS_SUM, value_parser = parse_tol)]
    pub tol_sum: f64,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    /// System JSON file.
    pub system: PathBuf,
    /// Metric JSON (one metric or a list), as a file path or inline.
    /// Repeatable. Without it, order-distances over every combination of
    /// natural and reversed output order are used.
    #[arg(long = "metric")]
    pub metrics: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_MAX_LEN)]
    pub max_len: usize,
    /// Stop after this many sequences.
    #[arg(long, default_value_t = DEFAULT_MAX_SEQUENCES)]
    pub cap: usize,
    /// Residuals below -tol count as violations in float mode.
    #[arg(long, default_value_t = DEFAULT_EPS_TEST, value_parser = parse_tol)]
    pub tol_test: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct JdcArgs {
    /// System JSON file.
    pub system: PathBuf,
    /// Largest hidden space accepted.
    #[arg(long, default_value_t = crate::jdc::DEFAULT_HIDDEN_CAP)]
    pub cap: usize,
    #[arg(long, default_value_t = crate::jdc::DEFAULT_EPS_LP, value_parser = parse_tol)]
    pub tol_lp: f64,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Args)]
pub struct DemoArgs {
    #[arg(long)]
    pub json: bool,
    /// Correlation: `saturating` (min(1, v+w)), `product` (v*w) or a
    /// constant in [-1, 1].
    #[arg(long, default_value = "saturating", value_parser = parse_correlation)]
    pub correlation: Correlation,
    /// Also tabulate arccos(ρ)/2π over [-1, 1] with this step.
    #[arg(long, num_args = 0..=1, default_missing_value = "0.1")]
    pub rho_grid: Option<f64>,
}

fn parse_arithmetic(s: &str) -> Result<Arithmetic, String> {
    s.parse().map_err(|e: String| e)
}

fn parse_tol(s: &str) -> Result<f64, String> {
    match s.parse::<f64>() {
        Ok(x) if x > 0.0 && x.is_finite() => Ok(x),
        _ => Err(format!("tolerance must be a positive number, got `{s}`")),
    }
}

fn parse_correlation(s: &str) -> Result<Correlation, String> {
    match s {
        "saturating" => Ok(Correlation::Saturating),
        "product" => Ok(Correlation::Product),
        other => match other.parse::<f64>() {
            Ok(rho) if (-1.0..=1.0).contains(&rho) => Ok(Correlation::Constant { rho }),
            _ => Err(format!("unknown correlation `{other}`")),
        },
    }
}

/// An input or usage error, reported with exit status 1.
#[derive(Debug)]
pub struct Failure(pub String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
            } else {
                let _ = out.write_all(text.as_bytes());
            }
            return code;
        }
    };
    let result = match &cli.command {
        Command::Check(a) => cmd_check(a),
        Command::Jdc(a) => cmd_jdc(a),
        Command::DemoNormal(a) => cmd_demo_normal(a),
    };
    match result {
        Ok((code, text)) => {
            let _ = out.write_all(text.as_bytes());
            code
        }
        Err(Failure(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            EXIT_ERROR
        }
    }
}

fn load(path: &Path, common: &Common) -> Result<System, Failure> {
    Ok(load_system(
        path,
        LoadOptions {
            arithmetic: common.arithmetic,
            eps_sum: common.tol_sum,
        },
    )?)
}

fn metric_text(arg: &str) -> Result<String, Failure> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(arg).map_err(|e| Failure(format!("cannot read metric file {arg}: {e}")))
}

fn metrics(args: &CheckArgs, system: &System) -> Result<Vec<NamedMetric>, Failure> {
    if args.metrics.is_empty() {
        return Ok(default_order_metrics(system));
    }
    let mut out = Vec::new();
    for arg in &args.metrics {
        for cfg in MetricConfig::list_from_json(&metric_text(arg)?)? {
            let metric = cfg.build(args.common.arithmetic)?;
            let name = cfg
                .label()
                .map(str::to_string)
                .unwrap_or_else(|| format!("metric{} ({})", out.len() + 1, metric.describe()));
            out.push(NamedMetric::new(name, metric));
        }
    }
    Ok(out)
}

pub fn cmd_check(args: &CheckArgs) -> Result<(i32, String), Failure> {
    let system = load(&args.system, &args.common)?;
    let metrics = metrics(args, &system)?;
    let opts = SuiteOptions {
        enumeration: EnumerationOptions {
            max_len: args.max_len,
            max_sequences: args.cap,
            ..EnumerationOptions::default()
        },
        eps_test: args.tol_test,
        eps_marginal: args.common.tol_sum,
    };
    let report = run_suite(&system, &metrics, opts)?;
    let text = if args.common.json { to_json(&report) } else { render_suite(&report) };
    Ok((if report.passed() { EXIT_OK } else { EXIT_NEGATIVE }, text))
}

pub fn cmd_jdc(args: &JdcArgs) -> Result<(i32, String), Failure> {
    let system = load(&args.system, &args.common)?;
    let opts = JdcOptions {
        hidden_cap: args.cap,
        eps_lp: args.tol_lp,
        max_pivots: None,
    };
    let (problem, result) = jdc_feasible(&system, opts)?;
    let mut report = JdcReport::new(&system, &problem, &result);
    match fine_inequalities(&system, args.common.tol_sum) {
        Ok(f) => {
            report.fine = Some(f);
            report.chain_identity_max_discrepancy = Some(verify_order_chain_identity(&system, args.common.tol_sum)?);
        }
        Err(JdcError::NotTwoByTwo(_) | JdcError::MarginalSelectivityViolated(_)) => {}
        Err(e) => return Err(e.into()),
    }
    let text = if args.common.json { to_json(&report) } else { render_jdc(&report) };
    Ok((if report.feasible { EXIT_OK } else { EXIT_NEGATIVE }, text))
}

#[derive(Serialize)]
struct GridRow {
    rho: f64,
    distance: f64,
}

#[derive(Serialize)]
struct DemoWithGrid {
    chain: crate::selectivity::ChainReport,
    grid: Vec<GridRow>,
}

fn grid(step: f64) -> Result<Vec<GridRow>, Failure> {
    if !(step > 0.0 && step <= 2.0) {
        return Err(Failure(format!("grid step must be in (0, 2], got {step}")));
    }
    let n = (2.0 / step).round() as usize;
    (0..=n)
        .map(|k| {
            let rho = (-1.0 + k as f64 * step).clamp(-1.0, 1.0);
            let rho = (rho * 1e12).round() / 1e12;
            Ok(GridRow {
                rho,
                distance: binormal_order_distance(rho)?,
            })
        })
        .collect()
}

pub fn cmd_demo_normal(args: &DemoArgs) -> Result<(i32, String), Failure> {
    let chain = match args.correlation {
        Correlation::Saturating => demo_chain_violation(),
        c => BinormalSystem::new(c).chain(&crate::gauss::demo_sequence())?,
    };
    let text = match (args.rho_grid, args.json) {
        (None, true) => to_json(&chain),
        (None, false) => render_chain(&chain),
        (Some(step), true) => to_json(&DemoWithGrid { chain, grid: grid(step)? }),
        (Some(step), false) => {
            let mut s = render_chain(&chain);
            s.push_str("\n     rho   arccos(rho)/2pi\n");
            for row in grid(step)? {
                s.push_str(&format!("{:>8.3}   {:.12}\n", row.rho, row.distance));
            }
            s
        }
    };
    Ok((EXIT_OK, text))
}

//! Command-line front end for the verification engine.
//!
//! `yano verify` assembles a run configuration from an optional TOML file
//! and command-line flags (flags win), executes the requested suites, and
//! prints a per-check summary. Exit status: 0 when every check passes, 1
//! when any check fails, 2 on configuration or evaluation errors.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};

use yano_core::catalog::{build, known_ids, ParameterRecord};
use yano_core::suite::{applicable_suites, run, RunConfig, Suite, VerificationReport};

#[derive(Parser)]
#[command(
    name = "yano",
    version,
    about = "Numerical verification of conformal Killing-Yano calculus on a catalog of metrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run verification suites on one catalog metric.
    Verify(VerifyArgs),
    /// List the catalog metrics and the suites that apply to them.
    Catalog,
}

#[derive(Args)]
struct VerifyArgs {
    /// Catalog id of the metric to verify.
    #[arg(long)]
    metric: Option<String>,

    /// Number of 2-plane factors m; the dimension is 2m, or 2m+1 with --odd 1.
    #[arg(long = "dim-m")]
    dim_m: Option<usize>,

    /// Odd-dimension flag: 1 adds the unit leg.
    #[arg(long, value_parser = parse_bool01)]
    odd: Option<bool>,

    /// Comma-separated suites (cky, foliation, weyl, spin, hamiltonian,
    /// identities), or "all" for every suite the metric supports.
    #[arg(long, value_delimiter = ',')]
    suite: Vec<String>,

    /// Number of sample points.
    #[arg(long)]
    points: Option<usize>,

    /// Seed for the rejection sampler.
    #[arg(long)]
    seed: Option<u64>,

    /// Residual bound for gated checks.
    #[arg(long)]
    tol: Option<f64>,

    /// Floor a negative check must stay above.
    #[arg(long)]
    floor: Option<f64>,

    /// TOML run configuration; explicit flags override its fields.
    #[arg(long)]
    config: Option<PathBuf>,

    /// Write the JSON report to this path.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_bool01(s: &str) -> Result<bool, String> {
    match s {
        "0" | "false" => Ok(false),
        "1" | "true" => Ok(true),
        other => Err(format!("expected 0 or 1, got '{other}'")),
    }
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(2)
        }
    }
}

fn dispatch() -> Result<ExitCode> {
    match Cli::parse().command {
        Command::Verify(args) => verify(args),
        Command::Catalog => {
            print_catalog()?;
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn verify(args: VerifyArgs) -> Result<ExitCode> {
    let config = assemble_config(&args)?;
    let report = run(&config).map_err(anyhow::Error::from)?;
    print_summary(&report);
    if let Some(path) = &config.out {
        println!("report written to {path}");
    }
    if report.overall_pass() {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}

/// Merge the TOML file (if any) with the flags; flags win field by field.
fn assemble_config(args: &VerifyArgs) -> Result<RunConfig> {
    let mut config = match &args.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("cannot read config {}", path.display()))?;
            toml::from_str::<RunConfig>(&text)
                .with_context(|| format!("cannot parse config {}", path.display()))?
        }
        None => RunConfig::default(),
    };

    if let Some(metric) = &args.metric {
        config.metric = metric.clone();
    }
    if config.metric.is_empty() {
        anyhow::bail!("no metric selected; pass --metric or a config file");
    }
    // model-shape flags; the builders fill family defaults for any
    // parameter vectors left empty
    if let Some(m) = args.dim_m {
        config.params.m = m;
    }
    if let Some(odd) = args.odd {
        config.params.odd = odd;
    }
    if let Some(points) = args.points {
        config.points = points;
    }
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(tol) = args.tol {
        config.tolerance = tol;
    }
    if let Some(floor) = args.floor {
        config.negative_floor = floor;
    }
    if let Some(out) = &args.out {
        config.out = Some(out.to_string_lossy().into_owned());
    }

    if !args.suite.is_empty() {
        config.suites = parse_suites(&args.suite, &config)?;
    } else if args.config.is_none() {
        // bare invocation: run everything the metric supports
        config.suites = expand_all(&config)?;
    }
    Ok(config)
}

fn parse_suites(names: &[String], config: &RunConfig) -> Result<Vec<Suite>> {
    let mut suites = Vec::new();
    for name in names {
        if name.trim().eq_ignore_ascii_case("all") {
            for s in expand_all(config)? {
                if !suites.contains(&s) {
                    suites.push(s);
                }
            }
        } else {
            let s: Suite = name.parse().map_err(anyhow::Error::from)?;
            if !suites.contains(&s) {
                suites.push(s);
            }
        }
    }
    Ok(suites)
}

/// Every suite whose data requirements the configured model satisfies.
fn expand_all(config: &RunConfig) -> Result<Vec<Suite>> {
    let model = build(&config.metric, &config.params).map_err(anyhow::Error::from)?;
    Ok(applicable_suites(&model))
}

fn print_summary(report: &VerificationReport) {
    let config = &report.config;
    println!(
        "{}  m={} odd={}  {} points, seed {}",
        config.metric, config.params.m, config.params.odd, config.points, config.seed
    );
    // per-check verdicts: a check passes when every record of it passed
    let mut passes: BTreeMap<&str, bool> = BTreeMap::new();
    for rec in &report.records {
        *passes.entry(rec.check.as_str()).or_insert(true) &= rec.pass;
    }
    let width = report
        .summary
        .max_residual
        .keys()
        .map(String::len)
        .max()
        .unwrap_or(0);
    for (check, max) in &report.summary.max_residual {
        let ok = passes.get(check.as_str()).copied().unwrap_or(true);
        println!(
            "  {} {:width$}  max {:9.3e}",
            if ok { "PASS" } else { "FAIL" },
            check,
            max,
        );
    }
    println!(
        "overall: {}",
        if report.overall_pass() { "PASS" } else { "FAIL" }
    );
}

fn print_catalog() -> Result<()> {
    for id in known_ids() {
        let params = ParameterRecord::defaults(id, 2, *id == "lmp5");
        let model = build(id, &params).map_err(anyhow::Error::from)?;
        let suites: Vec<&str> = applicable_suites(&model)
            .into_iter()
            .map(Suite::name)
            .collect();
        println!(
            "{:14} n={} (m={}, {})  suites: {}",
            model.id,
            model.n,
            model.m,
            if model.odd { "odd" } else { "even" },
            suites.join(", ")
        );
    }
    Ok(())
}

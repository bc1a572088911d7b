//! Command-line runner for perturbed Nikishin Hermite–Padé sweeps.
//!
//! Exit codes: 0 when every requested check passes, 1 when some check fails,
//! 2 for a malformed or invalid config, 3 for I/O or numerical failures.

mod cache;
mod config;
mod error;
mod report;
mod run;

use std::collections::BTreeSet;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use nikishin_hp::Precision;

use crate::config::Check;
use crate::error::CliError;
use crate::run::{Gate, Settings};

const PRECISION_ENV: &str = "NIKISHIN_HP_PRECISION";

#[derive(Parser)]
#[command(
    name = "nikishin-hp",
    version,
    about = "Hermite-Padé sweeps for perturbed Nikishin systems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run(RunArgs),
}

#[derive(Args)]
struct RunArgs {
    config: PathBuf,
    /// Directory for reports and the moment cache.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Working precision in bits; overrides the config.
    #[arg(long)]
    precision_bits: Option<u32>,
    /// Check to run (repeatable); replaces the config's list.
    #[arg(long = "check", value_enum)]
    checks: Vec<Check>,
    /// Neither read nor write the moment cache.
    #[arg(long)]
    no_cache: bool,
}

fn resolve_precision(flag: Option<u32>, config: Option<u32>) -> Result<Precision, CliError> {
    let bits = match flag.or(config) {
        Some(b) => b,
        None => match std::env::var(PRECISION_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| {
                CliError::Validation(format!("{PRECISION_ENV}={v:?} is not a bit count"))
            })?,
            Err(_) => return Ok(Precision::default()),
        },
    };
    Precision::new(bits).map_err(|e| CliError::Validation(e.to_string()))
}

fn run(args: RunArgs) -> Result<bool, CliError> {
    let text = std::fs::read_to_string(&args.config)
        .map_err(|e| CliError::Io(format!("{}: {e}", args.config.display())))?;
    let cfg = config::parse(&text)?;
    let checks: BTreeSet<Check> = if !args.checks.is_empty() {
        args.checks.iter().copied().collect()
    } else if !cfg.checks.is_empty() {
        cfg.checks.iter().copied().collect()
    } else {
        Check::ALL.into_iter().collect()
    };
    let settings = Settings {
        precision: resolve_precision(args.precision_bits, cfg.precision_bits)?,
        output_dir: args
            .output_dir
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("nikishin-hp-report")),
        checks,
        use_cache: !args.no_cache,
    };
    let outcome = run::execute(&cfg, &settings)?;
    report::write_all(&settings.output_dir, &outcome)?;

    let digits = 6;
    let bits: Vec<u32> = outcome
        .rows
        .iter()
        .map(|r| r.outcome.row.precision_used.bits())
        .collect();
    match (bits.iter().min(), bits.iter().max()) {
        (Some(lo), Some(hi)) => {
            println!("rows solved: {} (precision {lo} to {hi} bits)", bits.len())
        }
        _ => println!("rows solved: 0"),
    }
    println!(
        "moments cache: {} hits, {} misses",
        outcome.cache_hits, outcome.cache_misses
    );
    for (check, gate, ok) in &outcome.gates {
        let verdict = if *ok { "pass" } else { "FAIL" };
        let detail = match gate {
            Gate::NotApplicable(why) => format!("not applicable: {why}"),
            Gate::Residual { max, tolerance, .. } => format!(
                "max {} against {}",
                max.to_sci_string(digits),
                tolerance.to_sci_string(digits)
            ),
            Gate::SignChanges { min_margin, .. } => format!("smallest margin {min_margin}"),
            Gate::Attraction { row } => format!("at {}", outcome.rows[*row].n()),
        };
        println!("check {check}: {verdict} ({detail})");
    }
    let passed = outcome.passed();
    println!(
        "result: {} (reports in {})",
        if passed { "pass" } else { "fail" },
        settings.output_dir.display()
    );
    Ok(passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(args) => run(args),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", e.to_json());
            e.exit_code()
        }
    }
}

//! `mara-sim` command-line entry point.
//!
//! Exit codes: 0 success, 1 error, 2 assertion failure.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::diagnostics::{
    check_factorization, check_gradients, check_orthonormality, check_parseval, pattern_oracle, position_oracle,
    SuiteReport,
};
use crate::harness::{run_experiment, summarize, ExperimentSpec, RowStatus, Sweep, WallTime};
use crate::optim::{OptimOptions, OPTION_KEYS};
use crate::scenario::{SystemConfig, CONFIG_KEYS};
use crate::{Error, Result};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_ASSERTION: i32 = 2;

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "MARA_SIM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "mara-sim", version, about = "Movable and reconfigurable antenna SE simulator")]
struct Cli {
    /// Suppress the summary on standard output.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an experiment and write results.csv and summary.csv.
    Run(RunArgs),
    /// Run the invariant suites at reduced size.
    Check(CommonArgs),
    /// Compare the optimizer against brute-force references.
    Oracle(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// JSON system configuration; the built-in reference is used if absent.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Override a config, optimizer or subcommand setting.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR", default_value = ".")]
    out: PathBuf,
    /// Seeds as a comma list; `a-b` expands to an inclusive range.
    #[arg(long, value_name = "LIST")]
    seeds: Option<String>,
    /// Sweep one parameter, e.g. `total_power_w=1,10,100`.
    #[arg(long, value_name = "NAME=V1,V2,...")]
    sweep: Option<String>,
    /// Print the summary as JSON instead of text.
    #[arg(long)]
    json_summary: bool,
    /// Write 0 in the wall_time_s column.
    #[arg(long)]
    no_wall_time: bool,
    #[arg(long, hide = true)]
    inject_nesting_violation: bool,
}

/// Runs the CLI on the process arguments.
pub fn main_entry() -> i32 {
    run_cli(std::env::args_os())
}

/// Runs the CLI on explicit arguments (the first is the program name).
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return EXIT_ERROR;
    }
    let outcome = match &cli.command {
        Command::Run(args) => cmd_run(args, cli.quiet),
        Command::Check(args) => cmd_check(args, cli.quiet),
        Command::Oracle(args) => cmd_oracle(args, cli.quiet),
    };
    outcome.unwrap_or_else(|e| {
        eprintln!("error: {e}");
        EXIT_ERROR
    })
}

fn configure_threads() -> Result<()> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Error::validation(THREADS_ENV, format!("expected a positive integer, got `{raw}`")))?;
    // A pool configured earlier in the same process stays in place.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

/// `--set` pairs split by destination.
#[derive(Debug, Default)]
struct Overrides {
    config: Vec<(String, String)>,
    options: Vec<(String, String)>,
    local: Vec<(String, String)>,
}

fn split_overrides(raw: &[String], local_keys: &[&str]) -> Result<Overrides> {
    let mut out = Overrides::default();
    for item in raw {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::validation("--set", format!("expected KEY=VALUE, got `{item}`")))?;
        let pair = (key.trim().to_string(), value.trim().to_string());
        if CONFIG_KEYS.contains(&pair.0.as_str()) {
            out.config.push(pair);
        } else if OPTION_KEYS.contains(&pair.0.as_str()) {
            out.options.push(pair);
        } else if local_keys.contains(&pair.0.as_str()) {
            out.local.push(pair);
        } else {
            return Err(Error::UnknownKey(pair.0));
        }
    }
    Ok(out)
}

/// Validated config, optimizer options and subcommand-local overrides.
type Loaded = (SystemConfig, OptimOptions, Vec<(String, String)>);

fn load(common: &CommonArgs, local_keys: &[&str]) -> Result<Loaded> {
    let overrides = split_overrides(&common.overrides, local_keys)?;
    let text = match &common.config {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?,
        None => serde_json::to_string(&SystemConfig::reference()).expect("config serializes"),
    };
    let config = SystemConfig::from_json_with_overrides(&text, &overrides.config)?;
    let mut options = OptimOptions::default();
    for (k, v) in &overrides.options {
        options.set(k, v)?;
    }
    options.validate()?;
    Ok((config, options, overrides.local))
}

fn parse_seeds(list: &str) -> Result<Vec<u64>> {
    let bad = |tok: &str| Error::validation("--seeds", format!("cannot parse `{tok}`"));
    let mut seeds = Vec::new();
    for tok in list.split(',').map(str::trim).filter(|t| !t.is_empty()) {
        match tok.split_once('-') {
            Some((a, b)) => {
                let a: u64 = a.trim().parse().map_err(|_| bad(tok))?;
                let b: u64 = b.trim().parse().map_err(|_| bad(tok))?;
                if b < a {
                    return Err(bad(tok));
                }
                seeds.extend(a..=b);
            }
            None => seeds.push(tok.parse().map_err(|_| bad(tok))?),
        }
    }
    if seeds.is_empty() {
        return Err(Error::validation("--seeds", "no seeds given"));
    }
    Ok(seeds)
}

fn parse_sweep(text: &str) -> Result<Sweep> {
    let (name, values) = text
        .split_once('=')
        .ok_or_else(|| Error::validation("--sweep", "expected NAME=V1,V2,..."))?;
    let param = name.trim().parse()?;
    let values = values
        .split(',')
        .map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::validation("--sweep", format!("cannot parse `{v}`")))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Sweep { param, values })
}

fn cmd_run(args: &RunArgs, quiet: bool) -> Result<i32> {
    let (config, options, _) = load(&args.common, &[])?;
    let seeds = match &args.seeds {
        Some(list) => parse_seeds(list)?,
        None => vec![config.seed],
    };
    let mut spec = ExperimentSpec::new(config, seeds);
    spec.options = options;
    spec.sweep = args.sweep.as_deref().map(parse_sweep).transpose()?;
    spec.inject_nesting_violation = args.inject_nesting_violation;

    let rows = run_experiment(&spec)?;
    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let wall = if args.no_wall_time {
        WallTime::Omit
    } else {
        WallTime::Record
    };
    crate::harness::emit_csv(&rows, args.out.join("results.csv"), wall)?;
    let summary = summarize(&rows)?;
    summary.emit_csv(args.out.join("summary.csv"))?;
    if args.json_summary {
        println!("{}", summary.to_json());
    } else if !quiet {
        print!("{}", summary.to_text());
    }

    let mut nesting = false;
    let mut failed = false;
    for row in &rows {
        let detail = row.detail().unwrap_or_default();
        match row.status {
            RowStatus::Ok => {}
            RowStatus::NestingViolation(_) | RowStatus::TraceViolation(_) => {
                nesting = true;
                eprintln!("assertion failed (seed {}): {detail}", row.seed);
            }
            RowStatus::Failed(_) => {
                failed = true;
                eprintln!("error (seed {}): {detail}", row.seed);
            }
        }
    }
    Ok(if nesting {
        EXIT_ASSERTION
    } else if failed {
        EXIT_ERROR
    } else {
        EXIT_OK
    })
}

fn report_suites(reports: &[SuiteReport], quiet: bool) -> i32 {
    if !quiet {
        for r in reports {
            println!("{r}");
        }
    }
    if reports.iter().all(SuiteReport::passed) {
        EXIT_OK
    } else {
        EXIT_ASSERTION
    }
}

fn cmd_check(args: &CommonArgs, quiet: bool) -> Result<i32> {
    let (config, options, _) = load(args, &[])?;
    let seed = config.seed;
    let n = config.shod_max_degree;
    let mut reports = vec![
        check_orthonormality(n.max(6)),
        check_parseval(n, 200, seed)?,
        check_factorization(&config, 1000, seed)?,
    ];
    let (positions, patterns) = check_gradients(&config, 10, seed, options.fd_step)?;
    reports.push(positions);
    reports.push(patterns);
    Ok(report_suites(&reports, quiet))
}

/// Subcommand-local keys of `oracle`: `grid_step` (fraction of the antenna
/// spacing) and `instances`.
pub const ORACLE_KEYS: [&str; 2] = ["grid_step", "instances"];

fn cmd_oracle(args: &CommonArgs, quiet: bool) -> Result<i32> {
    let (config, options, local) = load(args, &ORACLE_KEYS)?;
    let mut grid_step: f64 = 1.0 / 40.0;
    let mut instances = 10usize;
    for (k, v) in &local {
        let bad = || Error::validation(k, format!("cannot parse `{v}`"));
        match k.as_str() {
            "grid_step" => grid_step = v.parse().map_err(|_| bad())?,
            _ => instances = v.parse().map_err(|_| bad())?,
        }
    }
    if !(grid_step.is_finite() && grid_step > 0.0) {
        return Err(Error::validation("grid_step", "must be positive"));
    }
    let positions = position_oracle(&config, instances, grid_step, &options)?;
    let patterns = pattern_oracle(&config, instances, &options)?;
    let max_gap = positions.max_gap.max(patterns.max_gap);
    if !quiet {
        println!("{positions}");
        println!("{patterns}");
        println!("max relative SE gap: {max_gap:.3e}");
    }
    Ok(if positions.passed() && patterns.passed() {
        EXIT_OK
    } else {
        EXIT_ASSERTION
    })
}

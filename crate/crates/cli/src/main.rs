mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use dlseries::root_datum::ROOT_ORDER_VERSION;
use dlseries::Exec;

use crate::config::JobConfig;
use crate::error::{CliError, CliResult};

/// Exact index computations for Deligne-Lusztig series.
///
/// Exit status: 0 on success, 1 on input errors, 2 when an identity that
/// must hold was observed to fail.
#[derive(Debug, Parser)]
#[command(name = "dlseries", version)]
struct Cli {
    /// JSON job configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Largest Weyl group to enumerate.
    #[arg(long, global = true)]
    max_weyl: Option<u64>,
    /// Largest parameter denominator in sweeps and comparisons.
    #[arg(long, global = true)]
    denominator_bound: Option<i64>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build and validate a root datum.
    Datum,
    /// Endoscopic datum, 𝔅_L with its action, forms and component groups.
    Endoscopy,
    /// Geometric or rational series report.
    Series {
        #[arg(value_enum)]
        kind: SeriesKind,
    },
    /// Regular embedding into a group with connected center.
    Embed,
    /// Semisimple class census of a small matrix group.
    Census,
    /// Compare predicted rational series with the census of the dual group.
    Compare,
    /// Property suite over a grid of data.
    Sweep,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SeriesKind {
    Geom,
    Rat,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Datum => "datum",
            Command::Endoscopy => "endoscopy",
            Command::Series { kind: SeriesKind::Geom } => "series geom",
            Command::Series { kind: SeriesKind::Rat } => "series rat",
            Command::Embed => "embed",
            Command::Census => "census",
            Command::Compare => "compare",
            Command::Sweep => "sweep",
        }
    }
}

fn load_config(cli: &Cli) -> CliResult<JobConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
                path: path.display().to_string(),
                source,
            })?;
            JobConfig::parse(&text)?
        }
        None if matches!(cli.command, Command::Sweep) => JobConfig::default(),
        None => return Err(CliError::Usage(format!("{} needs --config", cli.command.name()))),
    };
    if cli.max_weyl.is_some() {
        cfg.max_weyl = cli.max_weyl;
    }
    if cli.denominator_bound.is_some() {
        cfg.denominator_bound = cli.denominator_bound;
    }
    Ok(cfg)
}

fn executor(jobs: Option<usize>) -> CliResult<Exec> {
    match jobs {
        Some(0) => Err(CliError::Usage("--jobs must be positive".into())),
        Some(1) => Ok(Exec::Sequential),
        #[cfg(feature = "parallel")]
        Some(n) => {
            // the global pool can only be set once; later calls keep the first size
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            Ok(Exec::Parallel)
        }
        #[cfg(not(feature = "parallel"))]
        Some(_) => Ok(Exec::Sequential),
        None => Ok(Exec::default()),
    }
}

fn run(cli: &Cli) -> CliResult<u8> {
    let cfg = load_config(cli)?;
    let exec = executor(cli.jobs)?;
    let outcome = match cli.command {
        Command::Datum => commands::datum(&cfg)?,
        Command::Endoscopy => commands::endoscopy(&cfg)?,
        Command::Series { kind: SeriesKind::Geom } => commands::series_geometric(&cfg)?,
        Command::Series { kind: SeriesKind::Rat } => commands::series_rational(&cfg)?,
        Command::Embed => commands::embed(&cfg)?,
        Command::Census => commands::census_cmd(&cfg, exec)?,
        Command::Compare => commands::compare_cmd(&cfg, exec)?,
        Command::Sweep => commands::sweep_cmd(&cfg, exec)?,
    };
    let document = json!({
        "command": cli.command.name(),
        "config_hash": cfg.hash(cli.command.name()),
        "root_order_version": ROOT_ORDER_VERSION,
        "violation": outcome.violation.as_ref().map(|(identity, detail)| json!({ "identity": identity, "detail": detail })),
        "report": outcome.report,
    });
    let mut text = serde_json::to_string_pretty(&document).expect("reports serialize");
    text.push('\n');
    match &cli.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write {
            path: path.display().to_string(),
            source,
        })?,
        None => print!("{text}"),
    }
    for line in &outcome.summary {
        eprintln!("{line}");
    }
    Ok(match outcome.violation {
        Some((identity, detail)) => {
            eprintln!("invariant violated [{identity}]: {detail}");
            2
        }
        None => 0,
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

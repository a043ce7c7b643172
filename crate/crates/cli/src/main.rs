//! `ldis`: large-deviation efficiency analysis for importance sampling.

mod commands;
mod config;
mod error;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ldis_core::subset_analysis::Side;

use crate::config::AnalysisConfig;
use crate::error::CliError;
use crate::report::{Report, TOOL};

#[derive(Parser)]
#[command(name = "ldis", version, about = "Large-deviation efficiency analysis for importance sampling")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rate analysis of a model
    Analyze {
        #[arg(value_enum)]
        kind: AnalyzeKind,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Exact-computation checks
    Verify {
        #[arg(value_enum)]
        kind: VerifyKind,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Monte Carlo estimates of deviation-event probabilities
    Simulate {
        #[command(flatten)]
        run: RunArgs,
    },
    /// Print γ⁺ or γ⁻ over a grid of s as CSV
    Gamma {
        #[arg(long, allow_negative_numbers = true)]
        eps: f64,
        #[arg(long, value_enum)]
        side: SideArg,
        /// a:b:step
        #[arg(long = "s-grid")]
        s_grid: String,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum AnalyzeKind {
    Subset,
    Quantile,
    RandomWalk,
}

#[derive(Clone, Copy, ValueEnum)]
enum VerifyKind {
    Laplace,
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Plus,
    Minus,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed
    #[arg(long)]
    seed: Option<u64>,
    /// Report path; overrides the config, stdout when neither is set
    #[arg(long)]
    out: Option<PathBuf>,
    /// CSV series path; overrides the config
    #[arg(long)]
    series: Option<PathBuf>,
}

fn execute(command: &str, expected_kind: &str, args: &RunArgs) -> Result<(), CliError> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| CliError::Config(format!("{}: {e}", args.config.display())))?;
    let mut cfg = AnalysisConfig::from_json(&text)?;
    if let Some(seed) = args.seed {
        cfg.seed = Some(seed);
    }
    if let Some(out) = &args.out {
        cfg.output.report = Some(out.clone());
    }
    if let Some(series) = &args.series {
        cfg.output.series = Some(series.clone());
    }
    if cfg.analysis.kind() != expected_kind {
        return Err(CliError::Config(format!(
            "analysis.kind: `{}` does not match command `{command}` (expected `{expected_kind}`)",
            cfg.analysis.kind()
        )));
    }
    if cfg.threads == Some(0) {
        return Err(CliError::Config("threads: must be at least 1".into()));
    }

    let start = Instant::now();
    let results = match cfg.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| CliError::Io(format!("thread pool: {e}")))?
            .install(|| commands::run(&cfg))?,
        None => commands::run(&cfg)?,
    };
    let csv = report::series_csv(&results);
    let report = Report {
        tool: TOOL.into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        config: cfg.clone(),
        results,
        wall_clock: start.elapsed().as_secs_f64(),
    };
    let json = report::to_json(&report)?;
    match &cfg.output.report {
        Some(path) => report::write_atomic(path, &json)?,
        None => print!("{json}"),
    }
    if let Some(path) = &cfg.output.series {
        report::write_atomic(path, &csv)?;
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Analyze { kind, run } => match kind {
            AnalyzeKind::Subset => execute("analyze subset", "subset", run),
            AnalyzeKind::Quantile => execute("analyze quantile", "quantile", run),
            AnalyzeKind::RandomWalk => execute("analyze random-walk", "random-walk", run),
        },
        Command::Verify { kind: VerifyKind::Laplace, run } => execute("verify laplace", "laplace", run),
        Command::Simulate { run } => execute("simulate", "simulate", run),
        Command::Gamma { eps, side, s_grid } => commands::parse_grid(s_grid).and_then(|grid| {
            let side = match side {
                SideArg::Plus => Side::Plus,
                SideArg::Minus => Side::Minus,
            };
            print!("{}", commands::gamma_csv(*eps, side, &grid)?);
            Ok(())
        }),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

//! `covlab`: command-line runner for the covlab experiments.
//!
//! Exit status: 0 on success, 1 when a checked inequality fails or output
//! cannot be written, 2 on usage or input errors.

mod commands;
mod error;
mod matrix_file;
mod render;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{GameArgs, GameMode};
use error::{CliError, CliResult};
use render::{render, Format, Report};

#[derive(Debug, Parser)]
#[command(
    name = "covlab",
    version,
    about = "Wishart TV bounds, conditional correlations and rank-detection games"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Monte Carlo trials (proposals for `alpha`).
    #[arg(long, global = true, default_value_t = 100_000)]
    trials: u64,

    /// Slab half-width for `alpha`.
    #[arg(long, global = true, default_value_t = 0.05)]
    epsilon: f64,

    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,

    /// Worker threads; defaults to the available cores. Results do not depend on it.
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Closed-form TV bound for all 1 <= n < d <= d-max.
    BoundTable {
        #[arg(long, default_value_t = 30)]
        d_max: usize,
    },
    /// TV between W_n(Id, d-1) and W_n(Id, d): bounds and Monte Carlo.
    Tv {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
    },
    /// Conditional correlation matrix of a coordinate pair (0-based indices).
    Alpha {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 0)]
        i: usize,
        #[arg(long, default_value_t = 1)]
        j: usize,
    },
    /// Determinant moments of W_n(Id, p) with a Monte Carlo cross-check.
    Moments {
        #[arg(long)]
        n: usize,
        #[arg(long, visible_alias = "d")]
        p: usize,
    },
    /// Rank-detection game.
    Game {
        #[arg(long, value_enum, default_value_t = GameMode::TwoWay)]
        mode: GameMode,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        d: usize,
        /// Rank deficiency of the deficient ensemble (two-way mode).
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value = "lr")]
        detector: String,
        /// Comma-separated direction for fixed-theta mode; normalized to unit length.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        theta: Option<Vec<f64>>,
    },
    /// Section covariance and its rank for a PSD matrix file.
    Section {
        #[arg(long)]
        matrix: PathBuf,
    },
}

fn execute(cli: &Cli) -> CliResult<Report> {
    match &cli.command {
        Command::BoundTable { d_max } => commands::bound_table(*d_max),
        Command::Tv { n, d } => commands::tv(*n, *d, cli.trials, cli.seed),
        Command::Alpha { matrix, i, j } => {
            commands::alpha(matrix, *i, *j, cli.epsilon, cli.trials, cli.seed)
        }
        Command::Moments { n, p } => commands::moments(*n, *p, cli.trials, cli.seed),
        Command::Game {
            mode,
            n,
            d,
            k,
            detector,
            theta,
        } => commands::game(GameArgs {
            mode: *mode,
            n: *n,
            d: *d,
            k: *k,
            detector,
            theta: theta.clone(),
            trials: cli.trials,
            seed: cli.seed,
        }),
        Command::Section { matrix } => commands::section(matrix),
    }
}

fn run(cli: &Cli) -> CliResult<Option<String>> {
    if cli.workers == Some(0) {
        return Err(CliError::Usage("--workers must be positive".to_string()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let report = pool.install(|| execute(cli))?;
    match &cli.out {
        Some(path) => {
            let file = File::create(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            let mut w = BufWriter::new(file);
            render(&report, cli.format, &mut w)?;
            w.flush().map_err(CliError::Output)?;
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            render(&report, cli.format, &mut lock)?;
            lock.flush().map_err(CliError::Output)?;
        }
    }
    Ok(report.violation)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(violation)) => {
            eprintln!("covlab: invariant failed: {violation}");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("covlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

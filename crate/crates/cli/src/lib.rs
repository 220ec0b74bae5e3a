//! Batch runner behind the `schatten` binary.
//!
//! Every subcommand produces one [`Table`] whose rows are sorted by
//! `(instance, p)` and carry the seed that regenerates them.

mod commands;
pub mod table;

use std::fmt;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use table::{Cell, RowKey, Table};

#[derive(Debug, Clone, Parser)]
#[command(
    name = "schatten",
    version,
    about = "Schatten-class experiments at finite matrix sizes"
)]
pub struct Config {
    #[command(subcommand)]
    pub command: Command,

    /// Exponent; repeat for several.
    #[arg(long = "p", global = true)]
    pub p: Vec<f64>,

    /// Matrix size; repeat for several.
    #[arg(long, global = true)]
    pub size: Vec<usize>,

    /// Half-size of a 2m x 2m matrix (paving commands).
    #[arg(long, global = true)]
    pub m: Option<usize>,

    /// Number of matrices in an embedding family.
    #[arg(long, global = true)]
    pub k: Option<usize>,

    /// Number of random instances (sampler steps for `projection`).
    #[arg(long, global = true)]
    pub trials: Option<usize>,

    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    #[arg(long, global = true)]
    pub depth: Option<usize>,

    #[arg(long, global = true)]
    pub epsilon: Option<f64>,

    #[arg(long, global = true, value_enum, default_value_t = StrategyArg::Exhaustive)]
    pub strategy: StrategyArg,

    /// JSON matrix (or embedding instance) to read instead of sampling.
    #[arg(long, global = true)]
    pub input: Option<PathBuf>,

    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// All norms of an input matrix.
    Norms,
    /// Row-norm slacks over random complex matrices.
    Fact1,
    /// Exhaustive sign averages against the unconditional norm.
    Fact2,
    /// Round trip, projection slacks and a lower bound on the projection norm.
    Projection,
    /// Rank bound reports for near-diagonal families.
    Embedding,
    /// One balanced split with its certificate.
    PavingFind,
    /// Paved norm and certified bound against depth.
    PavingDecay,
    /// Exhaustive balanced averages and the binomial identities.
    PropAverage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Exhaustive,
    Random,
    Greedy,
}

impl From<StrategyArg> for schatten::paving::Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Exhaustive => Self::Exhaustive,
            StrategyArg::Random => Self::Random,
            StrategyArg::Greedy => Self::Greedy,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug)]
pub enum CliError {
    Core(schatten::Error),
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    Usage(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Io { path, source } => write!(f, "{}: {source}", path.display()),
            CliError::Usage(msg) => f.write_str(msg),
        }
    }
}

impl std::error::Error for CliError {}

impl From<schatten::Error> for CliError {
    fn from(e: schatten::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    /// 3 for numerical failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical() => 3,
            _ => 2,
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Core(e) if e.is_numerical() => "numerical",
            CliError::Core(_) => "precondition",
            CliError::Io { .. } => "io",
            CliError::Usage(_) => "usage",
        }
    }

    /// One-line JSON error record.
    pub fn record(&self) -> String {
        serde_json::json!({
            "error": self.kind(),
            "message": self.to_string(),
            "exit_code": self.exit_code(),
        })
        .to_string()
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

/// Runs the subcommand and returns its sorted table.
pub fn build_table(config: &Config) -> CliResult<Table> {
    let mut table = commands::dispatch(config)?;
    table.sort();
    Ok(table)
}

/// The rendered output of [`build_table`] in the requested format.
pub fn render(config: &Config) -> CliResult<String> {
    let table = build_table(config)?;
    Ok(match config.format {
        Format::Csv => table.to_csv(),
        Format::Json => table.to_json(),
    })
}

/// Renders and writes to `--out`, or standard output.
pub fn run(config: &Config) -> CliResult<()> {
    let text = render(config)?;
    match &config.out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            use std::io::Write;
            std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|source| CliError::Io {
                    path: "<stdout>".into(),
                    source,
                })
        }
    }
}

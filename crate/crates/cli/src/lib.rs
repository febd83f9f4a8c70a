//! Command-line front end for the weekly peak demand pipeline.

pub mod config;
mod commands;
mod pipeline;
pub mod report;

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use peakload::Error;

pub use config::{ConfigArgs, FutureExog, RunConfig};

/// Exit statuses.
pub mod exit {
    pub const SUCCESS: u8 = 0;
    pub const INPUT: u8 = 2;
    pub const NUMERICAL: u8 = 3;
    pub const CONFIG: u8 = 4;
}

/// A failure with its exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        Self {
            code: exit::CONFIG,
            message: message.into(),
        }
    }

    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: exit::INPUT,
            message: message.into(),
        }
    }

    pub(crate) fn io(path: &Path, err: impl fmt::Display) -> Self {
        Self::input(format!("{}: {err}", path.display()))
    }

    /// Prefixes the message with the pipeline stage that failed.
    pub fn at(mut self, stage: &str) -> Self {
        self.message = format!("stage {stage}: {}", self.message);
        self
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

/// Exit status for a library error.
pub fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parse { .. }
        | Error::Io { .. }
        | Error::Duplicate(_)
        | Error::Gap(_)
        | Error::Span(_)
        | Error::Alignment(_) => exit::INPUT,
        Error::Config(_) | Error::Arity(_) => exit::CONFIG,
        Error::TooShort { .. }
        | Error::LagOutOfRange { .. }
        | Error::Degenerate(_)
        | Error::Domain(_)
        | Error::Collinear { .. }
        | Error::Oversaturated { .. }
        | Error::NonStationarizable { .. }
        | Error::SelectionFailed { .. } => exit::NUMERICAL,
    }
}

impl From<Error> for CliError {
    fn from(err: Error) -> Self {
        Self {
            code: exit_code(&err),
            message: err.to_string(),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "peakload", version, about = "Weekly peak electricity demand forecasting with SARIMA models")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Aggregate interval demand to weekly peaks, align with weather and split.
    Ingest {
        /// Demand file (timestamp,region,demand_mw).
        #[arg(long)]
        demand: PathBuf,
        /// Weekly weather file (iso_week,max_temp_c,min_temp_c,solar_mj_m2).
        #[arg(long)]
        env: Option<PathBuf>,
        /// Region to extract when the demand file holds several.
        #[arg(long)]
        region: Option<String>,
        /// Dataset path [default: <out-dir>/dataset.csv].
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// KPSS statistics and suggested differencing for the training span.
    Kpss {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// AICc search over SARIMA orders, then weather-term combinations.
    Search {
        #[arg(long)]
        dataset: PathBuf,
    },
    /// Forecast from a saved model.
    Forecast {
        #[arg(long)]
        model: PathBuf,
        /// Dataset holding weather for the forecast span (hybrid models).
        #[arg(long)]
        dataset: Option<PathBuf>,
        /// Forecast path [default: <out-dir>/forecast.csv].
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// MAE and MAPE of forecasts against actual values.
    Evaluate {
        /// Forecast file, optionally labelled as NAME=PATH; repeatable. The
        /// first is the baseline for improvement percentages.
        #[arg(long = "forecast", required = true)]
        forecasts: Vec<String>,
        /// Dataset file (test rows are used) or an iso_week,value file.
        #[arg(long)]
        actuals: PathBuf,
    },
    /// Simulate a SARIMA series into a dataset file.
    Simulate {
        /// Nonseasonal orders p,d,q.
        #[arg(long, default_value = "0,0,0")]
        order: String,
        /// Seasonal orders P,D,Q (period from --period).
        #[arg(long, default_value = "0,0,0")]
        seasonal_order: String,
        #[arg(long, default_value = "")]
        phi: String,
        #[arg(long, default_value = "")]
        theta: String,
        #[arg(long, default_value = "")]
        seasonal_phi: String,
        #[arg(long, default_value = "")]
        seasonal_theta: String,
        #[arg(long, default_value_t = 0.0)]
        delta: f64,
        #[arg(long, default_value_t = 1.0)]
        sigma2: f64,
        /// Number of weeks.
        #[arg(long)]
        n: usize,
        /// First week of the series.
        #[arg(long, default_value = "2000-W01")]
        start: String,
        /// Output path [default: <out-dir>/simulated.csv].
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write synthetic three-region demand and weather input files.
    Fixture {
        /// First ISO year covered.
        #[arg(long, default_value_t = 2011)]
        start_year: i32,
        /// Number of years.
        #[arg(long, default_value_t = 7)]
        years: usize,
    },
    /// Run every stage for each region and write all report tables.
    Reproduce {
        #[arg(long)]
        demand: PathBuf,
        /// Weather file per region as REGION=PATH; repeatable.
        #[arg(long = "env", required = true)]
        envs: Vec<String>,
    },
}

/// Parses arguments and runs the command, returning the exit status.
pub fn main_with_args<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::CONFIG } else { exit::SUCCESS };
            let _ = e.print();
            return code;
        }
    };
    match run(cli) {
        Ok(()) => exit::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.code
        }
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    let cfg = RunConfig::resolve(&cli.config)?;
    commands::dispatch(&cfg, cli.command)
}

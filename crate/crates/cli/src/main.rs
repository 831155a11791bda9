mod commands;
mod scan;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use darkstate::angular::Transition;
use darkstate::Error;

/// Generalized dark states of atoms in two circularly polarized photon modes.
#[derive(Debug, Parser)]
#[command(name = "darkstate", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GdsType {
    Lambda,
    N,
    V,
    Polariton,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StatisticsArg {
    Bose,
    Fermi,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// List the chains of a transition with their couplings.
    Classify {
        /// Transition `Fg:Fe`, e.g. `2:1` or `3/2:1/2`.
        #[arg(long, value_parser = parse_transition)]
        transition: Transition,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Build one dark state and check it against the full coupling.
    Gds(GdsArgs),
    /// Compare constructed dark-state counts with brute-force null spaces.
    Scan {
        /// Largest `2F_g` and `2F_e` in the sweep.
        #[arg(long = "max-2f", default_value_t = 5)]
        max_2f: i32,
        /// Largest photon number per mode.
        #[arg(long, default_value_t = 3)]
        caps: u32,
        /// Atoms in the sector.
        #[arg(long, default_value_t = 1)]
        atoms: u32,
        /// Write the CSV here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the quantum-jump ensemble described by a key=value file.
    Filter {
        #[arg(long)]
        config: PathBuf,
        /// Summary JSON destination, `-` for stdout.
        #[arg(long, default_value = "-")]
        summary: String,
        /// Time-series CSV destination, `-` for stdout.
        #[arg(long, default_value = "series.csv")]
        series: String,
    },
}

#[derive(Debug, clap::Args)]
pub struct GdsArgs {
    #[arg(long, value_parser = parse_transition)]
    pub transition: Transition,
    /// Position of the chain in `classify` output.
    #[arg(long = "chain-index")]
    pub chain_index: usize,
    #[arg(long = "type", value_enum)]
    pub kind: GdsType,
    /// Atoms per momentum class, comma separated.
    #[arg(long, default_value = "1", value_delimiter = ',')]
    pub n: Vec<u32>,
    /// Constrained (N), σ+ (V) or weak-mode (polariton) photon number.
    #[arg(long, default_value_t = 0)]
    pub m: u32,
    /// σ- photon number for V chains.
    #[arg(long, default_value_t = 0)]
    pub mprime: u32,
    /// Photon functional: `fock:P,M`, `coherent:Z,M,WEAK,T` or `two-mode:ZP,ZM,T`.
    #[arg(long, default_value = "fock:0,0")]
    pub phi: String,
    /// Polariton strong-mode amplitude.
    #[arg(long, default_value_t = 1.0)]
    pub z: f64,
    /// Polariton weak mode, `+` or `-`.
    #[arg(long, default_value = "+")]
    pub weak: String,
    /// Polariton strong-mode truncation.
    #[arg(long, default_value_t = 14)]
    pub truncation: u32,
    #[arg(long = "force-equal-g")]
    pub force_equal_g: bool,
    #[arg(long, value_enum)]
    pub statistics: Option<StatisticsArg>,
    /// Write the JSON here instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

fn parse_transition(s: &str) -> Result<Transition, String> {
    s.parse::<Transition>().map_err(|e| e.to_string())
}

/// Failure of a subcommand, with the exit code it maps to.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::ConstraintViolation(_) | Error::ZeroState(_) | Error::ChainMismatch(_) => 2,
            Error::Capacity { .. }
            | Error::CapOverflow { .. }
            | Error::TruncationTooSmall { .. } => 3,
            Error::Parse(_) | Error::InvalidAngularMomentum(_) | Error::Config(_) => 4,
            _ => 1,
        };
        Failure::new(code, e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(1, e.to_string())
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::new(1, e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::new(1, e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let usage = e.use_stderr();
            let _ = e.print();
            return ExitCode::from(if usage { 4 } else { 0 });
        }
    };
    let result = match cli.command {
        Command::Classify { transition, format } => commands::classify(transition, format),
        Command::Gds(args) => commands::gds(&args),
        Command::Scan {
            max_2f,
            caps,
            atoms,
            output,
        } => scan::run(max_2f, caps, atoms, output.as_deref()),
        Command::Filter {
            config,
            summary,
            series,
        } => commands::filter(&config, &summary, &series),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

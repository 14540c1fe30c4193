//! Command-line front end.
//!
//! Values come from flags, then from the `--config` file, then from the
//! built-in defaults (the reference parameter set with `λ = 2`). Exit codes:
//! 0 on success, 1 when output cannot be written, 2 for invalid input and 3
//! for a numerical failure at run time.

mod analyze;
mod config;
mod encounter;
mod ladder;
mod simulate;
mod sweep;

pub use analyze::{analyze_report, AnalyzeReport};
pub use config::{ConfigFile, KEYS};
pub use ladder::{multistage_report, MultistageReport};
pub use simulate::{simulate_report, SimulateReport};
pub use sweep::{sweep, SweepAxis, SweepReport, SweepRow};

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::Error;
use crate::model::TwoTypeParams;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;

/// Default encounter rate of the reference parameter set.
pub const DEFAULT_LAMBDA: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_IO,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::InvalidParameter { .. }
            | Error::InvalidInit
            | Error::InvalidCap { .. }
            | Error::TooManyTypes(_)
            | Error::NotSupercritical { .. }
            | Error::HorizonTooShort { .. }
            | Error::Domain(_)
            | Error::DegenerateDesign(_) => EXIT_USAGE,
            Error::DegenerateMutation
            | Error::SingularSensitivity
            | Error::ReducibleGenerator
            | Error::AllExtinct
            | Error::MaxTimeExceeded(_)
            | Error::NeverSubcritical(_)
            | Error::AlreadySubcritical
            | Error::Singular => EXIT_NUMERIC,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        <Self as ValueEnum>::from_str(s, true)
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "virulence",
    version,
    about = "Two-strain branching model of pathogen virulence: analysis, simulation and scaling experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

/// Options shared by every subcommand.
#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// Death rate of strain 1
    #[arg(long, allow_negative_numbers = true, global = true)]
    pub alpha1: Option<f64>,
    /// Death rate of strain 2
    #[arg(long, allow_negative_numbers = true, global = true)]
    pub alpha2: Option<f64>,
    /// Transmission probability of strain 1
    #[arg(long, allow_negative_numbers = true, global = true)]
    pub beta1: Option<f64>,
    /// Transmission probability of strain 2
    #[arg(long, allow_negative_numbers = true, global = true)]
    pub beta2: Option<f64>,
    /// Mutation probability of strain 1
    #[arg(long, allow_negative_numbers = true, global = true)]
    pub mu1: Option<f64>,
    /// Mutation probability of strain 2
    #[arg(long, allow_negative_numbers = true, global = true)]
    pub mu2: Option<f64>,
    /// Encounter rate
    #[arg(long, allow_negative_numbers = true, global = true)]
    pub lambda: Option<f64>,
    /// Lethality multiplier between ladder levels
    #[arg(long, allow_negative_numbers = true, global = true)]
    pub r: Option<f64>,
    /// Base lethality of the ladder
    #[arg(long, allow_negative_numbers = true, global = true)]
    pub alpha0: Option<f64>,
    /// Parameter axis `name:min:max:steps` (at most two)
    #[arg(long, global = true, value_name = "NAME:MIN:MAX:STEPS")]
    pub sweep: Vec<String>,
    /// Number of replicates
    #[arg(long, global = true)]
    pub replicates: Option<usize>,
    /// Time horizon
    #[arg(long, allow_negative_numbers = true, global = true)]
    pub horizon: Option<f64>,
    /// Base random seed
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output file (stdout when absent)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Flat `key = value` file supplying defaults for any flag
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads (results do not depend on it)
    #[arg(long, global = true)]
    pub threads: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectrum, limiting ratio, sensitivities and criticality
    Analyze,
    /// Limiting ratio and Malthusian parameter over one or two parameter axes
    Sweep,
    /// Ensemble simulation beside the analytic means
    Simulate(simulate::SimulateArgs),
    /// Meeting-time scaling under contraction of the world
    Scaling(encounter::ScalingArgs),
    /// Enclosure-to-enclosure lethality ladder
    Multistage(ladder::MultistageArgs),
}

/// Flags merged with the config file.
pub struct Resolved {
    pub common: Common,
    pub file: ConfigFile,
}

impl Resolved {
    pub fn new(common: Common) -> Result<Self, CliError> {
        let file = match &common.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        Ok(Self { common, file })
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        self.file.resolve(key, flag, default)
    }

    pub fn params(&self) -> Result<TwoTypeParams, CliError> {
        let c = &self.common;
        let d = TwoTypeParams::reference(DEFAULT_LAMBDA);
        let p = TwoTypeParams {
            alpha1: self.get("alpha1", c.alpha1, d.alpha1)?,
            alpha2: self.get("alpha2", c.alpha2, d.alpha2)?,
            beta1: self.get("beta1", c.beta1, d.beta1)?,
            beta2: self.get("beta2", c.beta2, d.beta2)?,
            mu1: self.get("mu1", c.mu1, d.mu1)?,
            mu2: self.get("mu2", c.mu2, d.mu2)?,
            lambda: self.get("lambda", c.lambda, d.lambda)?,
        };
        Ok(p.validated()?)
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.get("seed", self.common.seed, 0)
    }

    pub fn format(&self) -> Result<Format, CliError> {
        self.get("format", self.common.format, Format::Csv)
    }

    pub fn out(&self) -> Option<PathBuf> {
        self.common
            .out
            .clone()
            .or_else(|| self.file.raw("out").map(PathBuf::from))
    }

    pub fn sweep_specs(&self) -> Vec<String> {
        if self.common.sweep.is_empty() {
            self.file.all("sweep").to_vec()
        } else {
            self.common.sweep.clone()
        }
    }

    pub fn emit(&self, bytes: &[u8]) -> Result<(), CliError> {
        match self.out() {
            Some(path) => {
                std::fs::write(&path, bytes).map_err(|e| CliError::io(format!("cannot write {}: {e}", path.display())))
            }
            None => {
                let mut out = std::io::stdout().lock();
                out.write_all(bytes)
                    .and_then(|_| out.flush())
                    .map_err(|e| CliError::io(e.to_string()))
            }
        }
    }
}

pub(crate) fn to_json<T: serde::Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("reports serialise");
    v.push(b'\n');
    v
}

pub(crate) fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for row in rows {
        w.write_record(&row).expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

pub(crate) fn opt_str(x: Option<f64>) -> String {
    x.map_or(String::new(), |v| v.to_string())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let res = Resolved::new(cli.common)?;
    let threads: usize = res.get("threads", res.common.threads, 0)?;
    let run = || match cli.command {
        Command::Analyze => analyze::run(&res),
        Command::Sweep => sweep::run(&res),
        Command::Simulate(a) => simulate::run(&res, &a),
        Command::Scaling(a) => encounter::run(&res, &a),
        Command::Multistage(a) => ladder::run(&res, &a),
    };
    if threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| CliError::usage(e.to_string()))?
            .install(run)
    } else {
        run()
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match dispatch(cli) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {}", e.message);
            e.code
        }
    }
}

pub fn main() -> i32 {
    run_with_args(std::env::args_os())
}

//! `selfaffine`: pressure, dimension and equilibrium-state reports for affine
//! iterated function systems.
//!
//! Exit status is 0 on success, 1 on a validation or config error and 2 when
//! a word enumeration would exceed the budget.

mod commands;
mod config;
mod report;

use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use commands::{Artifact, ModeChoice, PotentialChoice};
use config::{ConfigError, System};
use selfaffine::Budget;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Lib(#[from] selfaffine::Error),
    #[error("{0}")]
    Usage(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(selfaffine::Error::Overflow { .. }) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Debug, Parser)]
#[command(name = "selfaffine", version, about = "Thermodynamic formalism for affine iterated function systems")]
struct Cli {
    /// Output format: JSON reports or gnuplot-ready CSV tables.
    #[arg(long, value_enum, default_value = "json", global = true)]
    out: Format,
    /// Write the artifact to this file instead of standard output.
    #[arg(long, short = 'o', global = true)]
    output: Option<PathBuf>,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized sampling. Recorded in every report.
    #[arg(long, default_value_t = 0, global = true)]
    seed: u64,
    /// Maximum number of words a single level may enumerate.
    #[arg(long, env = "SELFAFFINE_BUDGET", global = true)]
    budget: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct Source {
    /// Built-in system: thm1, thm2 or eq1-3x3.
    #[arg(long)]
    fixture: Option<String>,
    /// TOML system description.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Source {
    fn load(&self) -> Result<System, ConfigError> {
        match (&self.fixture, &self.config) {
            (Some(name), _) => config::fixture(name),
            (None, Some(path)) => config::load_file(path),
            (None, None) => unreachable!("clap enforces the group"),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Level pressures P_1..P_n with upper and periodic lower bounds.
    Pressure {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        s: f64,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, value_enum, default_value = "phi")]
        potential: PotentialChoice,
    },
    /// Affinity dimension bracket by bisection on the level-n pressure.
    Dimaff {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
    /// Level-n Gibbs weights, with the total variation distance between the
    /// two factor potentials of a Kronecker system.
    Gibbs {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 1.5)]
        s: f64,
        #[arg(long, default_value_t = 6)]
        n: usize,
    },
    /// Normalized log-ratio of the factor potentials along powers of a word.
    Distinct {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 1.5)]
        s: f64,
        /// Base word, digits or comma-separated symbols. Defaults to the
        /// shortest spectral witness.
        #[arg(long)]
        word: Option<String>,
        #[arg(long, default_value_t = 24)]
        nmax: usize,
    },
    /// Quasi-multiplicativity ratios for n = 1..nmax.
    Qm {
        #[command(flatten)]
        source: Source,
        #[arg(long)]
        s: f64,
        /// Longest connecting word.
        #[arg(long, default_value_t = 3)]
        n0: usize,
        #[arg(long, default_value_t = 10)]
        nmax: usize,
    },
    /// Invariant subspace search, conjugacy obstructions and spectral witnesses.
    Irred {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 4)]
        depth: usize,
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, value_enum, default_value = "both")]
        mode: ModeChoice,
        /// Search on the k-th exterior power instead.
        #[arg(long)]
        wedge: Option<usize>,
    },
    /// Ball certificate for the strong separation condition.
    Separation {
        #[command(flatten)]
        source: Source,
        /// Defaults to 1 + √(3/2) for the thm2 fixture.
        #[arg(long)]
        radius: Option<f64>,
        /// Ball center, comma separated; defaults to the origin.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        center: Option<Vec<f64>>,
    },
    /// Seeded sample of attractor points.
    Attractor {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value_t = 30)]
        depth: usize,
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
    /// Every check of the four-map example.
    Thm2 {
        #[arg(long, default_value_t = selfaffine::fixtures::ALPHA1)]
        alpha1: f64,
        #[arg(long, default_value_t = selfaffine::fixtures::ALPHA2)]
        alpha2: f64,
        /// Rotation angle in radians.
        #[arg(long, default_value_t = selfaffine::fixtures::THETA)]
        theta: f64,
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
    },
}

fn dispatch(cli: &Cli) -> Result<Artifact, CliError> {
    let budget = cli.budget.map_or_else(Budget::default, Budget);
    let seed = cli.seed;
    match &cli.command {
        Command::Pressure { source, s, n, potential } => commands::pressure(&source.load()?, seed, *potential, *s, *n, budget),
        Command::Dimaff { source, n, tol } => commands::dimaff(&source.load()?, seed, *n, *tol, budget),
        Command::Gibbs { source, s, n } => commands::gibbs(&source.load()?, seed, *s, *n, budget),
        Command::Distinct { source, s, word, nmax } => commands::distinct(&source.load()?, seed, *s, word.as_deref(), *nmax),
        Command::Qm { source, s, n0, nmax } => commands::qm(&source.load()?, seed, *s, *n0, *nmax, budget),
        Command::Irred { source, depth, tol, mode, wedge } => commands::irred(&source.load()?, seed, *depth, *tol, *mode, *wedge),
        Command::Separation { source, radius, center } => commands::separation(&source.load()?, seed, *radius, center.clone()),
        Command::Attractor { source, depth, count } => commands::attractor(&source.load()?, seed, *depth, *count),
        Command::Thm2 { alpha1, alpha2, theta, n, tol } => commands::thm2(seed, *alpha1, *alpha2, *theta, *n, *tol, budget),
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    if let Some(k) = cli.threads {
        if k == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CliError::Usage(format!("cannot size the thread pool: {e}")))?;
    }
    let artifact = dispatch(cli)?;
    let text = match cli.out {
        Format::Json => report::json(&artifact.meta, &artifact.json),
        Format::Csv => report::csv(&artifact.meta, &artifact.csv),
    };
    match &cli.output {
        Some(path) => std::fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            // Help and version are successes; every usage error is a validation error.
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("selfaffine: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

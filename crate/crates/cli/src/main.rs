mod commands;
mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use domino_core::Error;

#[derive(Debug, Parser)]
#[command(name = "domino-cool", version, about = "Feedback cooling of coupled mechanical-resonator chains")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Absolute quadrature tolerance on each variance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Worker threads (defaults to DOMINO_COOL_THREADS, then the core count).
    #[arg(long, global = true, env = "DOMINO_COOL_THREADS")]
    pub threads: Option<usize>,
    /// Print errors as JSON on stderr.
    #[arg(long, global = true)]
    pub json_errors: bool,
    /// Output file; standard output when absent (a directory for `figure`).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SolverChoice {
    Quadrature,
    Appendix,
    Lyapunov,
    All,
}

#[derive(Debug, Args)]
pub struct ConfigArg {
    /// Parameter file with a [physical] or [dimensionless] section.
    #[arg(long)]
    pub config: PathBuf,
}

#[derive(Debug, Args)]
pub struct Grid {
    #[arg(long, allow_hyphen_values = true)]
    pub omega_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub omega_max: Option<f64>,
    #[arg(long)]
    pub omega_points: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Final phonon numbers, with cross-solver differences for `--solver all`.
    Cool {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long, value_enum, default_value_t = SolverChoice::All)]
        solver: SolverChoice,
    },
    /// Position spectra (and noise terms for two resonators) on a frequency grid.
    Spectra {
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        grid: Grid,
    },
    /// Effective frequencies and dampings on a frequency grid (two resonators).
    Response {
        #[command(flatten)]
        config: ConfigArg,
        #[command(flatten)]
        grid: Grid,
    },
    /// Phonon numbers over a one- or two-dimensional parameter grid.
    Sweep {
        #[command(flatten)]
        config: ConfigArg,
        /// Axis as name:lo:hi:points[:lin|log]; give once or twice.
        #[arg(long, required_unless_present = "replay")]
        axis: Vec<String>,
        /// Recompute a stored CSV table and compare its phonon numbers bit for bit.
        #[arg(long, conflicts_with = "axis")]
        replay: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = SolverChoice::Quadrature)]
        solver: SolverChoice,
    },
    /// Parameter value where the first two occupancies cross.
    Switch {
        #[command(flatten)]
        config: ConfigArg,
        #[arg(long)]
        param: String,
        #[arg(long, allow_hyphen_values = true)]
        lo: f64,
        #[arg(long, allow_hyphen_values = true)]
        hi: f64,
        #[arg(long, value_enum, default_value_t = SolverChoice::Quadrature)]
        solver: SolverChoice,
    },
    /// Box-bounded minimization of a phonon-number objective.
    Optimize {
        #[command(flatten)]
        config: ConfigArg,
        /// Bound as name:lo:hi[:lin|log]; repeat for several parameters.
        #[arg(long, required = true)]
        bound: Vec<String>,
        /// max-n, n1 or mean-n.
        #[arg(long, default_value = "mean-n")]
        objective: String,
        #[arg(long, value_enum, default_value_t = SolverChoice::Quadrature)]
        solver: SolverChoice,
    },
    /// Regenerates the data tables of a reference figure.
    Figure {
        /// fig2, fig3, fig4, fig5 or fig6.
        name: String,
        /// Chain length for fig6.
        #[arg(long = "N", default_value_t = 3)]
        n: usize,
        /// Overrides the built-in base parameters.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = SolverChoice::Quadrature)]
        solver: SolverChoice,
    },
    /// Drift eigenvalues and the stability verdict.
    Stability {
        #[command(flatten)]
        config: ConfigArg,
    },
}

pub const EXIT_CONFIG: u8 = 1;
pub const EXIT_NUMERICAL: u8 = 2;

fn exit_code(e: &Error) -> u8 {
    if e.is_config() {
        EXIT_CONFIG
    } else {
        EXIT_NUMERICAL
    }
}

fn report(e: &Error, json: bool) {
    if json {
        let v = serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
        eprintln!("{v}");
    } else {
        eprintln!("error: {e}");
    }
}

fn run<I: IntoIterator<Item = OsString>>(argv: I) -> ExitCode {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    if let Some(n) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not size the worker pool: {e}");
        }
    }
    match commands::dispatch(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            report(&e, cli.global.json_errors);
            ExitCode::from(exit_code(&e))
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    run(std::env::args_os())
}

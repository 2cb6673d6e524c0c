use num_complex::Complex64;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("config error{}: {message}", line.map(|l| format!(" (line {l})")).unwrap_or_default())]
    Config { line: Option<usize>, message: String },

    #[error("domain error in {formula}: {message}")]
    Domain { formula: &'static str, message: String },

    #[error("unstable parameters: drift eigenvalue {eigenvalue} has positive real part (max real part {max_real_part:.6e})")]
    Stability {
        eigenvalue: Complex64,
        max_real_part: f64,
    },

    #[error("pole on the real frequency axis at omega = {omega}")]
    Pole { omega: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("no sign change of n1 - n2 over [{lo}, {hi}] (f(lo) = {f_lo:.6e}, f(hi) = {f_hi:.6e})")]
    Bracket {
        lo: f64,
        hi: f64,
        f_lo: f64,
        f_hi: f64,
    },

    #[error("optimization failed: {0}")]
    Optimization(String),

    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(message: impl Into<String>) -> Self {
        Error::Config {
            line: None,
            message: message.into(),
        }
    }

    pub(crate) fn domain(formula: &'static str, message: impl Into<String>) -> Self {
        Error::Domain {
            formula,
            message: message.into(),
        }
    }

    /// True for configuration-class failures (bad input), false for numerical or stability ones.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. } | Error::UnsupportedMode(_) | Error::Io(_))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config { .. } => "config",
            Error::Domain { .. } => "domain",
            Error::Stability { .. } => "stability",
            Error::Pole { .. } => "pole",
            Error::Numerical(_) => "numerical",
            Error::Bracket { .. } => "bracket",
            Error::Optimization(_) => "optimization",
            Error::UnsupportedMode(_) => "unsupported-mode",
            Error::Io(_) => "io",
        }
    }
}

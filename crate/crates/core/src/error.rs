use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("decay rate has a pole at t = {t}: |A(t)| = {abs_a:e}")]
    Pole { t: f64, abs_a: f64 },

    #[error("ODE integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("quadrature did not converge on [{a}, {b}]: estimated error {error:e}")]
    Quadrature { a: f64, b: f64, error: f64 },

    #[error("state is not a valid density matrix: {0}")]
    InvalidState(String),

    #[error("dressed frequency is zero; the geometric-phase period is undefined")]
    UndefinedPeriod,

    #[error("could not resolve sign change in [{lo}, {hi}]")]
    UnresolvedBracket { lo: f64, hi: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid sweep: {0}")]
    InvalidSweep(String),

    #[error("unknown figure preset `{0}`")]
    UnknownPreset(String),

    #[error("I/O error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable tag, used in the status column of sweep output.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidParameter { .. } => "invalid_parameter",
            Error::Pole { .. } => "pole",
            Error::Integration { .. } => "integration",
            Error::Quadrature { .. } => "quadrature",
            Error::InvalidState(_) => "invalid_state",
            Error::UndefinedPeriod => "undefined_period",
            Error::UnresolvedBracket { .. } => "unresolved_bracket",
            Error::InvalidGrid(_) => "invalid_grid",
            Error::InvalidSweep(_) => "invalid_sweep",
            Error::UnknownPreset(_) => "unknown_preset",
            Error::Io(_) => "io",
        }
    }
}

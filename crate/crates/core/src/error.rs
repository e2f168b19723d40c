use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("tape is missing required column `{0}`")]
    MissingColumn(String),

    #[error("line {line}: {reason}")]
    UnparsableRow { line: u64, reason: String },

    #[error("tape contains no trade rows")]
    EmptyTape,

    #[error("trader `{0}` does not appear on the tape")]
    TraderNotFound(String),

    #[error("path has no observations")]
    EmptyPath,

    #[error("need at least {needed} observations, got {got}")]
    TooFewObservations { needed: usize, got: usize },

    #[error("bin length {bin} exceeds session length {session}")]
    BinLargerThanSession { bin: f64, session: f64 },

    #[error("regular test requires equally spaced increments")]
    IrregularGrid,

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("Riccati equation escapes to infinity at t = {t} (before reaching 0)")]
    RiccatiBlowup { t: f64 },

    #[error("average bin volume must be positive")]
    ZeroVolume,

    #[error("no input values")]
    EmptyInput,

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

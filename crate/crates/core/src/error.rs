use thiserror::Error;

/// Errors raised across the library.
///
/// The CLI maps these onto process exit codes via [`Error::exit_code`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("max level must be at least 3, got {0}")]
    MaxLevelTooSmall(u32),
    #[error("p^{level} does not fit the residue word for p = {p}")]
    PrecisionOverflow { p: u64, level: u32 },
    #[error("level {level} is outside 1..={max}")]
    LevelOutOfRange { level: u32, max: u32 },

    #[error("denominator of {0} is divisible by p")]
    NonUnitDenominator(String),
    #[error("{value} is not invertible modulo {modulus}")]
    NotInvertible { value: u64, modulus: u64 },

    #[error("parse error at position {position}: expected {}", expected.join(" or "))]
    Parse { position: usize, expected: Vec<String> },
    #[error("denominator is identically zero")]
    ZeroDenominator,
    #[error("map cannot be normalized")]
    NotNormalizable,
    #[error("map has degree {0}, need at least 2")]
    DegreeTooSmall(usize),

    #[error("both homogeneous forms vanish at {0}")]
    IndeterminatePoint(String),
    #[error("chart composite has a pole at {0}")]
    PoleAtPoint(String),
    #[error("point {0} is outside the chart domain")]
    ChartDomain(String),
    #[error("no base point with three distinct iterates found")]
    NoValidBasePoint,
    #[error("map is not in standardized form: {0}")]
    WrongForm(String),

    #[error("map has bad reduction")]
    BadReduction,
    #[error("no 1-Lipschitz certificate for this map")]
    NotCertifiedLipschitz,
    #[error("image of ball {ball} depends on the representative")]
    RepresentativeDisagreement { ball: String },
    #[error("displacement has valuation {found} < level {level}")]
    InsufficientValuation { found: u32, level: u32 },
    #[error("lift structure contradicts classification: {0}")]
    ClassificationMismatch(String),
    #[error("invariant violated: {0}")]
    Invariant(String),
}

impl Error {
    /// Process exit code for the CLI.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::ZeroDenominator => 2,
            Error::NotPrime(_)
            | Error::MaxLevelTooSmall(_)
            | Error::PrecisionOverflow { .. }
            | Error::LevelOutOfRange { .. }
            | Error::DegreeTooSmall(_)
            | Error::WrongForm(_)
            | Error::NotNormalizable => 3,
            Error::BadReduction
            | Error::NotCertifiedLipschitz
            | Error::NonUnitDenominator(_)
            | Error::NotInvertible { .. }
            | Error::ChartDomain(_)
            | Error::NoValidBasePoint => 4,
            Error::IndeterminatePoint(_)
            | Error::PoleAtPoint(_)
            | Error::RepresentativeDisagreement { .. }
            | Error::InsufficientValuation { .. }
            | Error::ClassificationMismatch(_)
            | Error::Invariant(_) => 5,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

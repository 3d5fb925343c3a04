use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("no fixed point of the map in (0, 1)")]
    NoFixedPoint,

    #[error("degenerate configuration: {0}")]
    DegenerateConfiguration(String),

    #[error("iterate is not monotone on the interval: {0}")]
    NotMonotone(String),

    /// An orbit point landed on (or numerically at) the critical point.
    #[error("orbit hit the critical point at iterate {index}")]
    CriticalHit { index: usize },

    #[error("critical orbit does not return to (-{u}, {u}) within {cap} iterates")]
    NonRecurrent { u: f64, cap: usize },

    /// The next central branch is too narrow to resolve in double precision.
    #[error("central branch inside (-{u}, {u}) is narrower than {below:e}")]
    Underflow { u: f64, below: f64 },

    #[error("bisection failure: {0}")]
    BisectionFailure(String),

    #[error("{u} is not a nice point: iterate {index} enters (-u, u)")]
    NotNicePoint { u: f64, index: usize },

    #[error("cascade too shallow: {0}")]
    CascadeTooShallow(String),

    #[error("insufficient returns: {0}")]
    InsufficientReturns(String),

    #[error("insufficient samples: {0}")]
    InsufficientSamples(String),
}

impl Error {
    /// Numerical failures, as opposed to bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NonRecurrent { .. }
                | Error::BisectionFailure(_)
                | Error::Underflow { .. }
                | Error::CascadeTooShallow(_)
                | Error::CriticalHit { .. }
                | Error::NotNicePoint { .. }
                | Error::InsufficientReturns(_)
                | Error::InsufficientSamples(_)
                | Error::NotMonotone(_)
                | Error::NoFixedPoint
        )
    }

    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "DomainError",
            Error::InvalidMap(_) => "InvalidMap",
            Error::NoFixedPoint => "NoFixedPoint",
            Error::DegenerateConfiguration(_) => "DegenerateConfiguration",
            Error::NotMonotone(_) => "NotMonotone",
            Error::CriticalHit { .. } => "CriticalHit",
            Error::NonRecurrent { .. } => "NonRecurrent",
            Error::Underflow { .. } => "Underflow",
            Error::BisectionFailure(_) => "BisectionFailure",
            Error::NotNicePoint { .. } => "NotNicePoint",
            Error::CascadeTooShallow(_) => "CascadeTooShallow",
            Error::InsufficientReturns(_) => "InsufficientReturns",
            Error::InsufficientSamples(_) => "InsufficientSamples",
        }
    }
}
